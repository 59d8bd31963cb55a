#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "plap/core/error.hpp"
#include "plap/core/reduce.hpp"
#include "plap/grid/grid.hpp"

namespace plap {

/// Sampled u(t, x) with N components. Row-major (t, x0, x1, component).
class Field {
  public:
    Field() = default;
    Field(SpaceTimeGrid grid, std::size_t components, double fill = 0.0)
        : grid_(grid), comps_(components) {
        grid_.validate();
        if (comps_ == 0) throw InputError("field: need at least one component");
        data_.assign(grid_.nt * level_size(), fill);
    }

    using Sampler = std::function<double(double t, std::span<const double> x, std::size_t c)>;

    static Field sample(const SpaceTimeGrid& grid, std::size_t components, const Sampler& fn,
                        unsigned threads = 1) {
        Field f(grid, components);
        const SpaceGrid& s = grid.space;
        parallel_for(grid.nt, threads, [&](std::size_t k) {
            double x[2] = {0.0, 0.0};
            for (std::size_t j0 = 0; j0 < s.nx[0]; ++j0)
                for (std::size_t j1 = 0; j1 < (s.n == 2 ? s.nx[1] : 1); ++j1) {
                    x[0] = s.coord(0, j0);
                    if (s.n == 2) x[1] = s.coord(1, j1);
                    for (std::size_t c = 0; c < components; ++c)
                        f.at(k, j0, j1, c) = fn(grid.time(k), std::span<const double>(x, s.n), c);
                }
        });
        return f;
    }

    const SpaceTimeGrid& grid() const noexcept { return grid_; }
    const SpaceGrid& space() const noexcept { return grid_.space; }
    std::size_t components() const noexcept { return comps_; }
    std::size_t levels() const noexcept { return grid_.nt; }
    std::size_t level_size() const noexcept { return grid_.space.nodes() * comps_; }
    std::size_t size() const noexcept { return data_.size(); }

    std::size_t index(std::size_t k, std::size_t j0, std::size_t j1, std::size_t c) const noexcept {
        return (k * grid_.space.nodes() + grid_.space.flat(j0, j1)) * comps_ + c;
    }
    double& at(std::size_t k, std::size_t j0, std::size_t j1, std::size_t c) { return data_[index(k, j0, j1, c)]; }
    double at(std::size_t k, std::size_t j0, std::size_t j1, std::size_t c) const {
        return data_[index(k, j0, j1, c)];
    }
    /// Value at space index j + off e_axis: wraps on periodic axes, zero off a
    /// Dirichlet grid.
    double shifted(std::size_t k, std::size_t j0, std::size_t j1, std::size_t c, std::size_t axis,
                   long off) const {
        std::size_t j[2] = {j0, j1};
        if (!shift_index(grid_.space, axis, j[axis], off)) return 0.0;
        return at(k, j[0], j[1], c);
    }

    std::span<double> level(std::size_t k) { return {data_.data() + k * level_size(), level_size()}; }
    std::span<const double> level(std::size_t k) const {
        return {data_.data() + k * level_size(), level_size()};
    }
    std::vector<double>& values() noexcept { return data_; }
    const std::vector<double>& values() const noexcept { return data_; }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }
    bool same_shape(const Field& o) const { return grid_ == o.grid_ && comps_ == o.comps_; }

    Field& operator+=(const Field& o) {
        require_same(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    Field& operator-=(const Field& o) {
        require_same(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    Field& operator*=(double s) {
        for (double& v : data_) v *= s;
        return *this;
    }
    friend Field operator+(Field a, const Field& b) { return a += b; }
    friend Field operator-(Field a, const Field& b) { return a -= b; }
    friend Field operator*(Field a, double s) { return a *= s; }
    friend Field operator*(double s, Field a) { return a *= s; }

    /// Shifts j by off along `axis`; false when it leaves a Dirichlet grid.
    static bool shift_index(const SpaceGrid& g, std::size_t axis, std::size_t& j, long off) {
        const long m = static_cast<long>(g.nx[axis]);
        long v = static_cast<long>(j) + off;
        if (g.boundary == Boundary::periodic) {
            v %= m;
            if (v < 0) v += m;
        } else if (v < 0 || v >= m) {
            return false;
        }
        j = static_cast<std::size_t>(v);
        return true;
    }

  private:
    void require_same(const Field& o) const {
        if (!same_shape(o)) throw InputError("field: shape mismatch");
    }

    SpaceTimeGrid grid_;
    std::size_t comps_ = 1;
    std::vector<double> data_;
};

/// A scalar series g(t_k), t_k = t0 + k dt.
struct TimeSeries {
    double t0 = 0.0;
    double dt = 1.0;
    std::vector<double> v;

    static TimeSeries sample(std::size_t count, double t0, double dt, const std::function<double(double)>& g) {
        TimeSeries s{t0, dt, std::vector<double>(count)};
        for (std::size_t k = 0; k < count; ++k) s.v[k] = g(t0 + k * dt);
        return s;
    }
    double time(std::size_t k) const noexcept { return t0 + k * dt; }
    std::size_t size() const noexcept { return v.size(); }
};

/// Embeds a series as a field that is constant in space: one scalar
/// component on a 4-node periodic line of unit length, so space integrals are
/// exactly the identity.
inline Field series_as_field(const TimeSeries& s) {
    SpaceTimeGrid g{SpaceGrid::line(4, 1.0, Boundary::periodic), s.size(), s.dt, s.t0};
    Field f(g, 1);
    for (std::size_t k = 0; k < s.size(); ++k)
        for (std::size_t j = 0; j < 4; ++j) f.at(k, j, 0, 0) = s.v[k];
    return f;
}

/// The series at one node and component.
inline TimeSeries series_at(const Field& f, std::size_t j0, std::size_t j1, std::size_t c) {
    TimeSeries s{f.grid().t0, f.grid().dt, std::vector<double>(f.levels())};
    for (std::size_t k = 0; k < f.levels(); ++k) s.v[k] = f.at(k, j0, j1, c);
    return s;
}

/// Central time differences on the interior levels 1 .. nt - 2.
inline Field time_derivative(const Field& u) {
    if (u.levels() < 3) throw RangeError("time_derivative: need at least 3 levels");
    SpaceTimeGrid g = u.grid();
    g.nt = u.levels() - 2;
    g.t0 = u.grid().t0 + u.grid().dt;
    Field out(g, u.components());
    const std::size_t m = u.level_size();
    const double inv = 0.5 / u.grid().dt;
    for (std::size_t k = 0; k < g.nt; ++k) {
        auto lo = u.level(k), hi = u.level(k + 2);
        auto o = out.level(k);
        for (std::size_t i = 0; i < m; ++i) o[i] = (hi[i] - lo[i]) * inv;
    }
    return out;
}

/// Central space differences of one level, as an N x n matrix per node
/// (row-major: component, axis). The zero boundary value enters at the first
/// and last Dirichlet nodes.
/// Central differences. Off-grid neighbours read as zero (right for a field that
/// vanishes on the boundary); with `one_sided_edges` the edge nodes of a Dirichlet
/// box use a one-sided difference instead.
inline void space_gradient_level(const SpaceGrid& g, std::size_t comps, std::span<const double> u,
                                 std::span<double> out, bool one_sided_edges = false) {
    const std::size_t n = g.n;
    for (std::size_t j0 = 0; j0 < g.nx[0]; ++j0)
        for (std::size_t j1 = 0; j1 < (n == 2 ? g.nx[1] : 1); ++j1) {
            const std::size_t node = g.flat(j0, j1);
            for (std::size_t axis = 0; axis < n; ++axis) {
                std::size_t jp[2] = {j0, j1}, jm[2] = {j0, j1};
                const bool hp = Field::shift_index(g, axis, jp[axis], 1);
                const bool hm = Field::shift_index(g, axis, jm[axis], -1);
                const bool one_sided = one_sided_edges && (hp != hm);
                const double inv = (one_sided ? 1.0 : 0.5) / g.dx[axis];
                for (std::size_t c = 0; c < comps; ++c) {
                    const double here = u[node * comps + c];
                    const double up = hp ? u[g.flat(jp[0], jp[1]) * comps + c] : (one_sided ? here : 0.0);
                    const double um = hm ? u[g.flat(jm[0], jm[1]) * comps + c] : (one_sided ? here : 0.0);
                    out[(node * comps + c) * n + axis] = (up - um) * inv;
                }
            }
        }
}

inline Field space_gradient(const Field& u, bool one_sided_edges = false) {
    const std::size_t n = u.space().n;
    Field out(u.grid(), u.components() * n);
    for (std::size_t k = 0; k < u.levels(); ++k)
        space_gradient_level(u.space(), u.components(), u.level(k), out.level(k), one_sided_edges);
    return out;
}

} // namespace plap
