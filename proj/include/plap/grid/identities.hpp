#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "plap/core/error.hpp"
#include "plap/core/reduce.hpp"
#include "plap/grid/field.hpp"
#include "plap/grid/quotients.hpp"

namespace plap {

/// Two sides of a discrete identity plus a magnitude to measure the gap against.
struct IdentityCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    /// Sum of the absolute values of all terms involved.
    double scale = 0.0;

    double residual() const { return std::abs(lhs - rhs); }
    double relative() const { return scale > 0.0 ? residual() / scale : residual(); }
};

/// Summation by parts along the time axis or a space axis of
///   int_a^b Delta^h f g = int_{a+h}^b f Delta^{-h} g + int_b^{b+h} f g(. - h) - int_a^{a+h} f g
/// with Delta^{-h} g = g(. - h) - g and integrals as left-endpoint sums.
///
/// Window: time uses [a, b] = [trim, T - trim - h]; a periodic space axis the
/// whole period (indices wrap); a Dirichlet space axis [0, L - h] so that
/// every term stays on the grid.
inline IdentityCheck summation_by_parts_residual(const Field& f, const Field& g, const QuotientSpec& spec) {
    if (!f.same_shape(g)) throw InputError("summation_by_parts: shape mismatch");
    if (spec.direction != Direction::time && spec.direction != Direction::space)
        throw InputError("summation_by_parts: time or space direction only");
    const bool in_time = spec.direction == Direction::time;
    const auto r = detail::resolve(f.grid(), spec.direction, spec.axis, spec.h);
    const long k = static_cast<long>(in_time ? r.kt : r.kx);

    const SpaceGrid& s = f.space();
    long lo = 0, hi = 0;  // window [lo, hi) in steps along the axis
    bool wrap = false;
    double measure = 0.0;
    if (in_time) {
        lo = static_cast<long>(detail::trim_levels(f.grid(), spec.trim));
        hi = static_cast<long>(f.levels()) - lo - k;
        measure = f.grid().dt * s.cell();
    } else {
        wrap = s.boundary == Boundary::periodic;
        lo = 0;
        hi = static_cast<long>(s.nx[spec.axis]) - (wrap ? 0 : k);
        measure = f.grid().dt * s.cell();
    }
    if (hi - lo < k) throw RangeError("summation_by_parts: window shorter than h");

    const std::size_t ny = s.n == 2 ? s.nx[1] : 1;
    const std::size_t axis_len = in_time ? f.levels() : s.nx[spec.axis];
    // Lines: every (level, node, component) with the running index removed.
    std::vector<double> lhs, rhs, mag;
    auto value = [&](const Field& h, std::size_t line_k, std::size_t j0, std::size_t j1, std::size_t c, long i) {
        if (in_time) return h.at(static_cast<std::size_t>(i), j0, j1, c);
        std::size_t j[2] = {j0, j1};
        long v = i;
        if (wrap) {
            const long m = static_cast<long>(axis_len);
            v = ((v % m) + m) % m;
        }
        j[spec.axis] = static_cast<std::size_t>(v);
        return h.at(line_k, j[0], j[1], c);
    };
    const std::size_t outer = in_time ? 1 : f.levels();
    for (std::size_t lk = 0; lk < outer; ++lk)
        for (std::size_t j0 = 0; j0 < (!in_time && spec.axis == 0 ? 1 : s.nx[0]); ++j0)
            for (std::size_t j1 = 0; j1 < (!in_time && spec.axis == 1 ? 1 : ny); ++j1)
                for (std::size_t c = 0; c < f.components(); ++c) {
                    auto F = [&](long i) { return value(f, lk, j0, j1, c, i); };
                    auto G = [&](long i) { return value(g, lk, j0, j1, c, i); };
                    for (long i = lo; i < hi; ++i) {
                        lhs.push_back((F(i + k) - F(i)) * G(i));
                        mag.push_back(std::abs(F(i + k) * G(i)) + std::abs(F(i) * G(i)));
                    }
                    for (long i = lo + k; i < hi; ++i) rhs.push_back(F(i) * (G(i - k) - G(i)));
                    for (long i = hi; i < hi + k; ++i) rhs.push_back(F(i) * G(i - k));
                    for (long i = lo; i < lo + k; ++i) rhs.push_back(-F(i) * G(i));
                }
    return {pairwise_sum(lhs) * measure, pairwise_sum(rhs) * measure, pairwise_sum(mag) * measure};
}

namespace detail {
inline long series_index(const TimeSeries& f, double t, const char* what) {
    const double r = (t - f.t0) / f.dt;
    const double k = std::round(r);
    if (std::abs(r - k) > 1e-9 * std::max(1.0, std::abs(r)))
        throw RangeError(std::string(what) + ": time is not on the grid");
    return static_cast<long>(k);
}
} // namespace detail

/// int_a^b f(t + h) - f(t - h) dt against int_{b-h}^{b+h} f - int_{a-h}^{a+h} f.
inline IdentityCheck cancellation_residual(const TimeSeries& f, double a, double b, double h) {
    const long A = detail::series_index(f, a, "cancellation");
    const long B = detail::series_index(f, b, "cancellation");
    const long k = static_cast<long>(step_multiple(h, f.dt, "cancellation"));
    if (A - k < 0 || B + k > static_cast<long>(f.size()) || B < A)
        throw RangeError("cancellation: [a - h, b + h] leaves the series");
    std::vector<double> lhs, rhs, mag;
    for (long i = A; i < B; ++i) {
        lhs.push_back(f.v[i + k] - f.v[i - k]);
        mag.push_back(std::abs(f.v[i + k]) + std::abs(f.v[i - k]));
    }
    for (long i = B - k; i < B + k; ++i) rhs.push_back(f.v[i]);
    for (long i = A - k; i < A + k; ++i) rhs.push_back(-f.v[i]);
    return {pairwise_sum(lhs) * f.dt, pairwise_sum(rhs) * f.dt, pairwise_sum(mag) * f.dt};
}

/// Averaging bound for s < h:
///   int_a^{b-h} |D^s g| dt <= int_a^b |g'| dt,
/// with g' the forward difference on the series. lhs / rhs as stated.
inline IdentityCheck averaging_bound(const TimeSeries& g, double a, double b, double s, double h) {
    const long A = detail::series_index(g, a, "averaging_bound");
    const long B = detail::series_index(g, b, "averaging_bound");
    const long ks = static_cast<long>(step_multiple(s, g.dt, "averaging_bound"));
    const long kh = static_cast<long>(step_multiple(h, g.dt, "averaging_bound"));
    if (ks >= kh) throw RangeError("averaging_bound: need s < h");
    if (A < 0 || B + 1 > static_cast<long>(g.size()) || B - kh <= A)
        throw RangeError("averaging_bound: window leaves the series");
    std::vector<double> lhs, rhs;
    for (long i = A; i < B - kh; ++i) lhs.push_back(std::abs(g.v[i + ks] - g.v[i]) / s);
    for (long i = A; i < B; ++i) rhs.push_back(std::abs(g.v[i + 1] - g.v[i]) / g.dt);
    const double l = pairwise_sum(lhs) * g.dt, r = pairwise_sum(rhs) * g.dt;
    return {l, r, r};
}

/// Splitting of a space difference of g:
///   Delta^s_{x_i} g(t, x) = [g(t + s, x + s e_i) - g(t, x)] - Delta^s_t g(t, x + s e_i).
/// `max_residual` is the largest pointwise gap, `max_triangle_excess` the
/// largest |Delta_x| - |Delta_diag| - |Delta_t(. + s e_i)|, which must be <= 0.
struct QueerSplitCheck {
    double max_residual = 0.0;
    double max_triangle_excess = -1.0;
    double scale = 0.0;
};

inline QueerSplitCheck queer_split_check(const Field& g, std::size_t axis, double s, double trim = 0.0) {
    QuotientSpec dx{Direction::space, axis, s, trim};
    QuotientSpec dg{Direction::diagonal, axis, s, trim};
    QuotientSpec qu{Direction::queer, axis, s, trim};
    const Field diag = delta(g, dg);
    // queer = g(t + s, x + s) - g(t, x + s) = Delta^s_t g(t, x + s e_i)
    const Field time_shifted = delta(g, qu);
    const Field space_full = delta(g, dx);
    // space_full spans more levels; align on diag's window.
    const std::size_t off =
        static_cast<std::size_t>(std::llround((diag.grid().t0 - space_full.grid().t0) / g.grid().dt));
    QueerSplitCheck out;
    const std::size_t n = diag.level_size();
    for (std::size_t k = 0; k < diag.levels(); ++k) {
        auto a = space_full.level(k + off), d = diag.level(k), q = time_shifted.level(k);
        for (std::size_t i = 0; i < n; ++i) {
            out.max_residual = std::max(out.max_residual, std::abs(a[i] - (d[i] - q[i])));
            out.max_triangle_excess =
                std::max(out.max_triangle_excess, std::abs(a[i]) - std::abs(d[i]) - std::abs(q[i]));
            out.scale = std::max(out.scale, std::abs(d[i]) + std::abs(q[i]));
        }
    }
    return out;
}

} // namespace plap
