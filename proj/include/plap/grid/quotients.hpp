#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "plap/core/error.hpp"
#include "plap/core/reduce.hpp"
#include "plap/grid/field.hpp"

namespace plap {

/// time      g(t + h, x) - g(t, x)
/// space     g(t, x + h e_i) - g(t, x)
/// queer     g(t + h, x + h e_i) - g(t, x + h e_i)
/// diagonal  g(t + h, x + h e_i) - g(t, x)
///
/// `diagonal` is the full space-time shift used when splitting a space
/// difference of u_t into a diagonal and a pure time part.
enum class Direction { time, space, queer, diagonal };

inline const char* to_string(Direction d) {
    switch (d) {
    case Direction::time:
        return "time";
    case Direction::space:
        return "space";
    case Direction::queer:
        return "queer";
    case Direction::diagonal:
        return "diagonal";
    }
    return "?";
}

struct QuotientSpec {
    Direction direction = Direction::time;
    std::size_t axis = 0;
    double h = 0.0;
    /// Time margin removed at both ends of the stored levels.
    double trim = 0.0;
};

namespace detail {

inline bool uses_time(Direction d) { return d != Direction::space; }
inline bool uses_space(Direction d) { return d != Direction::time; }

struct ResolvedSteps {
    std::size_t kt = 0;
    std::size_t kx = 0;
};

inline ResolvedSteps resolve(const SpaceTimeGrid& g, Direction dir, std::size_t axis, double h) {
    ResolvedSteps r;
    if (uses_space(dir)) {
        if (axis >= g.space.n) throw RangeError("quotient: axis out of range");
        r.kx = step_multiple(h, g.space.dx[axis], "quotient");
        if (g.space.boundary == Boundary::dirichlet_zero && r.kx > g.space.nx[axis])
            throw RangeError("quotient: h exceeds the extent of a Dirichlet axis");
    }
    if (uses_time(dir)) r.kt = step_multiple(h, g.dt, "quotient");
    return r;
}

inline std::size_t trim_levels(const SpaceTimeGrid& g, double trim) {
    if (!(trim >= 0.0) || !std::isfinite(trim)) throw RangeError("quotient: need trim >= 0");
    return static_cast<std::size_t>(std::ceil(trim / g.dt - 1e-9));
}

/// Output level window [start, start + count) for offsets back / fwd.
inline void window(const SpaceTimeGrid& g, std::size_t margin, std::size_t back, std::size_t fwd,
                   std::size_t& start, std::size_t& count) {
    start = margin + back;
    const long end = static_cast<long>(g.nt) - static_cast<long>(margin) - static_cast<long>(fwd);
    if (end <= static_cast<long>(start)) throw RangeError("quotient: empty time window after trimming");
    count = static_cast<std::size_t>(end) - start;
}

inline Field like(const Field& f, std::size_t start, std::size_t count) {
    SpaceTimeGrid g = f.grid();
    g.t0 = f.grid().time(start);
    g.nt = count;
    return Field(g, f.components());
}

/// out(k) = g(start + k + plus) - g(start + k + base) with (time, space) offsets.
inline void difference(const Field& f, std::size_t axis, std::size_t start, long pt, long px, long bt,
                       long bx, Field& out, double weight, unsigned threads) {
    const SpaceGrid& s = f.space();
    const std::size_t ny = s.n == 2 ? s.nx[1] : 1;
    parallel_for(out.levels(), threads, [&](std::size_t k) {
        const std::size_t kp = start + k + pt, kb = start + k + bt;
        for (std::size_t j0 = 0; j0 < s.nx[0]; ++j0)
            for (std::size_t j1 = 0; j1 < ny; ++j1)
                for (std::size_t c = 0; c < f.components(); ++c) {
                    const double a = px ? f.shifted(kp, j0, j1, c, axis, px) : f.at(kp, j0, j1, c);
                    const double b = bx ? f.shifted(kb, j0, j1, c, axis, bx) : f.at(kb, j0, j1, c);
                    out.at(k, j0, j1, c) += weight * (a - b);
                }
    });
}

inline void offsets(Direction d, const ResolvedSteps& r, long& pt, long& px, long& bt, long& bx) {
    pt = px = bt = bx = 0;
    switch (d) {
    case Direction::time:
        pt = static_cast<long>(r.kt);
        break;
    case Direction::space:
        px = static_cast<long>(r.kx);
        break;
    case Direction::queer:
        pt = static_cast<long>(r.kt);
        px = bx = static_cast<long>(r.kx);
        break;
    case Direction::diagonal:
        pt = static_cast<long>(r.kt);
        px = static_cast<long>(r.kx);
        break;
    }
}

} // namespace detail

/// Delta^h g in the given direction on the trimmed window. Time-shifting
/// directions drop the last h / dt levels so that t + h stays inside.
inline Field delta(const Field& f, const QuotientSpec& spec, unsigned threads = 1) {
    const auto r = detail::resolve(f.grid(), spec.direction, spec.axis, spec.h);
    std::size_t start = 0, count = 0;
    detail::window(f.grid(), detail::trim_levels(f.grid(), spec.trim), 0, r.kt, start, count);
    Field out = detail::like(f, start, count);
    long pt, px, bt, bx;
    detail::offsets(spec.direction, r, pt, px, bt, bx);
    detail::difference(f, spec.axis, start, pt, px, bt, bx, out, 1.0, threads);
    return out;
}

/// Delta^h g / h.
inline Field dq(const Field& f, const QuotientSpec& spec, unsigned threads = 1) {
    Field out = delta(f, spec, threads);
    out *= 1.0 / spec.h;
    return out;
}

/// Smallest h admissible for the direction: dt, dx_i, or the least common
/// multiple of both for the mixed directions.
inline double base_step(const SpaceTimeGrid& g, Direction dir, std::size_t axis) {
    if (dir == Direction::time) return g.dt;
    if (axis >= g.space.n) throw RangeError("quotient: axis out of range");
    const double dx = g.space.dx[axis];
    if (dir == Direction::space) return dx;
    for (std::size_t k = 1; k <= 1u << 20; ++k) {
        const double r = k * g.dt / dx;
        if (std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, r)) return k * g.dt;
    }
    throw RangeError("quotient: time and space steps have no small common multiple");
}

/// Mean over s = sigma, 2 sigma, .., h of Delta^s g, where sigma is the base
/// step of the direction. All terms share the window of the largest step.
inline Field averaged_delta(const Field& f, const QuotientSpec& spec, unsigned threads = 1) {
    const double sigma = base_step(f.grid(), spec.direction, spec.axis);
    const std::size_t m = step_multiple(spec.h, sigma, "averaged_delta");
    const auto top = detail::resolve(f.grid(), spec.direction, spec.axis, spec.h);
    std::size_t start = 0, count = 0;
    detail::window(f.grid(), detail::trim_levels(f.grid(), spec.trim), 0, top.kt, start, count);
    Field out = detail::like(f, start, count);
    for (std::size_t i = 1; i <= m; ++i) {
        const auto r = detail::resolve(f.grid(), spec.direction, spec.axis, i * sigma);
        long pt, px, bt, bx;
        detail::offsets(spec.direction, r, pt, px, bt, bx);
        detail::difference(f, spec.axis, start, pt, px, bt, bx, out, 1.0 / m, threads);
    }
    return out;
}

/// Delta^{-s} Delta^s g = 2 g(p) - g(p + s v) - g(p - s v) for the pure time
/// or space direction v.
inline Field backward_forward(const Field& f, const QuotientSpec& spec, unsigned threads = 1) {
    if (spec.direction != Direction::time && spec.direction != Direction::space)
        throw InputError("backward_forward: only time or space directions");
    const auto r = detail::resolve(f.grid(), spec.direction, spec.axis, spec.h);
    std::size_t start = 0, count = 0;
    detail::window(f.grid(), detail::trim_levels(f.grid(), spec.trim), r.kt, r.kt, start, count);
    Field out = detail::like(f, start, count);
    const long t = static_cast<long>(r.kt), x = static_cast<long>(r.kx);
    // 2 g(p) - g(p + v) - g(p - v) = -(g(p + v) - g(p)) + (g(p) - g(p - v))
    detail::difference(f, spec.axis, start, t, x, 0, 0, out, -1.0, threads);
    detail::difference(f, spec.axis, start, 0, 0, -t, -x, out, 1.0, threads);
    return out;
}

/// Mean over s = sigma .. h of Delta^{-s} Delta^s g.
inline Field averaged_backward_forward(const Field& f, const QuotientSpec& spec, unsigned threads = 1) {
    const double sigma = base_step(f.grid(), spec.direction, spec.axis);
    const std::size_t m = step_multiple(spec.h, sigma, "averaged_backward_forward");
    const auto top = detail::resolve(f.grid(), spec.direction, spec.axis, spec.h);
    std::size_t start = 0, count = 0;
    detail::window(f.grid(), detail::trim_levels(f.grid(), spec.trim), top.kt, top.kt, start, count);
    Field out = detail::like(f, start, count);
    for (std::size_t i = 1; i <= m; ++i) {
        QuotientSpec one = spec;
        one.h = i * sigma;
        const auto r = detail::resolve(f.grid(), spec.direction, spec.axis, one.h);
        const long t = static_cast<long>(r.kt), x = static_cast<long>(r.kx);
        detail::difference(f, spec.axis, start, t, x, 0, 0, out, -1.0 / m, threads);
        detail::difference(f, spec.axis, start, 0, 0, -t, -x, out, 1.0 / m, threads);
    }
    return out;
}

} // namespace plap
