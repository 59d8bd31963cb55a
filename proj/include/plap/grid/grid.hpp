#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>

#include "plap/core/error.hpp"

namespace plap {

enum class Boundary { periodic, dirichlet_zero };

inline const char* to_string(Boundary b) { return b == Boundary::periodic ? "periodic" : "dirichlet_zero"; }

inline Boundary parse_boundary(const std::string& s) {
    if (s == "periodic") return Boundary::periodic;
    if (s == "dirichlet_zero" || s == "dirichlet") return Boundary::dirichlet_zero;
    throw InputError("unknown boundary '" + s + "'");
}

/// Uniform grid on a box in 1 or 2 space dimensions.
///
/// Periodic axes hold nodes x_j = j dx on [0, L), L = nx dx.
/// Dirichlet axes hold the interior nodes x_j = (j + 1) dx of (0, L) with
/// L = (nx + 1) dx; the field is zero on the boundary and outside.
struct SpaceGrid {
    std::size_t n = 1;
    std::array<std::size_t, 2> nx{4, 1};
    std::array<double, 2> dx{0.25, 1.0};
    Boundary boundary = Boundary::periodic;

    static SpaceGrid line(std::size_t count, double length, Boundary b) {
        SpaceGrid g;
        g.n = 1;
        g.nx = {count, 1};
        g.boundary = b;
        g.dx = {spacing(count, length, b), 1.0};
        g.validate();
        return g;
    }

    static SpaceGrid square(std::size_t cx, std::size_t cy, double lx, double ly, Boundary b) {
        SpaceGrid g;
        g.n = 2;
        g.nx = {cx, cy};
        g.boundary = b;
        g.dx = {spacing(cx, lx, b), spacing(cy, ly, b)};
        g.validate();
        return g;
    }

    void validate() const {
        if (n != 1 && n != 2) throw InputError("grid: space dimension must be 1 or 2");
        for (std::size_t i = 0; i < n; ++i) {
            if (nx[i] < 4) throw InputError("grid: need at least 4 nodes per axis");
            if (!(dx[i] > 0.0) || !std::isfinite(dx[i])) throw InputError("grid: spacing must be positive");
        }
    }

    std::size_t nodes() const noexcept { return n == 1 ? nx[0] : nx[0] * nx[1]; }
    /// Measure of one node cell.
    double cell() const noexcept { return n == 1 ? dx[0] : dx[0] * dx[1]; }
    double length(std::size_t axis) const {
        return boundary == Boundary::periodic ? nx[axis] * dx[axis] : (nx[axis] + 1) * dx[axis];
    }
    double coord(std::size_t axis, std::size_t j) const {
        return boundary == Boundary::periodic ? j * dx[axis] : (j + 1.0) * dx[axis];
    }
    std::size_t flat(std::size_t j0, std::size_t j1) const noexcept { return n == 1 ? j0 : j0 * nx[1] + j1; }

    bool operator==(const SpaceGrid&) const = default;

  private:
    static double spacing(std::size_t count, double length, Boundary b) {
        if (!(length > 0.0)) throw InputError("grid: length must be positive");
        if (count < 4) throw InputError("grid: need at least 4 nodes per axis");
        return b == Boundary::periodic ? length / count : length / (count + 1.0);
    }
};

/// Time levels t_k = t0 + k dt, k = 0 .. nt - 1, over a space grid.
struct SpaceTimeGrid {
    SpaceGrid space;
    std::size_t nt = 4;
    double dt = 0.25;
    double t0 = 0.0;

    void validate() const {
        space.validate();
        if (nt < 1) throw InputError("grid: need at least one time level");
        if (!(dt > 0.0) || !std::isfinite(dt)) throw InputError("grid: time step must be positive");
    }

    double time(std::size_t k) const noexcept { return t0 + k * dt; }
    /// nt dt: the time covered by the stored levels, each owning [t_k, t_k + dt).
    double span() const noexcept { return nt * dt; }

    bool operator==(const SpaceTimeGrid&) const = default;
};

/// h / step as an integer, or a RangeError if h is not a positive multiple.
inline std::size_t step_multiple(double h, double step, const char* what) {
    if (!(h > 0.0) || !std::isfinite(h)) throw RangeError(std::string(what) + ": need h > 0");
    const double r = h / step;
    const double k = std::round(r);
    if (k < 1.0 || std::abs(r - k) > 1e-9 * std::max(1.0, r))
        throw RangeError(std::string(what) + ": h = " + std::to_string(h) +
                         " is not an integer multiple of the grid step " + std::to_string(step));
    return static_cast<std::size_t>(k);
}

} // namespace plap
