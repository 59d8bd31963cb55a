#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "plap/core/error.hpp"

namespace plap {

inline double acceptance(double rel_tol) { return std::max(1e-8, 1e3 * rel_tol); }

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
};

/// Adaptive Gauss-Kronrod (7/15) on [a, b], asked for `rel_tol`. Throws
/// NumericError only when the estimate is far off: above
/// `accept * max(L1, abs_floor)` with accept = max(1e-8, 1e3 rel_tol).
template <class F>
QuadratureResult integrate_adaptive(F&& f, double a, double b, double rel_tol = 1e-13,
                                    double abs_floor = 1e-300, const char* what = "integral") {
    if (a == b) return {};
    double err = 0.0;
    double l1 = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, a, b, 20, rel_tol, &err, &l1);
    if (!std::isfinite(v) || err > acceptance(rel_tol) * std::max(std::abs(l1), abs_floor)) {
        throw NumericError(std::string(what) + ": adaptive quadrature did not converge (value " +
                               std::to_string(v) + ", error estimate " + std::to_string(err) + ")",
                           v, err);
    }
    return {v, err};
}

/// Double-exponential rule for integrands with endpoint singularities. `abs_floor` as
/// for integrate_adaptive.
template <class F>
QuadratureResult integrate_endpoint_singular(F&& f, double a, double b, double rel_tol = 1e-12,
                                             const char* what = "integral", double abs_floor = 1e-300) {
    if (a == b) return {};
    thread_local boost::math::quadrature::tanh_sinh<double> rule(15);
    double err = 0.0;
    double l1 = 0.0;
    std::size_t levels = 0;
    const double v = rule.integrate(f, a, b, rel_tol, &err, &l1, &levels);
    if (!std::isfinite(v) || err > acceptance(rel_tol) * std::max(std::abs(l1), abs_floor)) {
        throw NumericError(std::string(what) + ": tanh-sinh quadrature did not converge (value " +
                               std::to_string(v) + ", error estimate " + std::to_string(err) + ")",
                           v, err);
    }
    return {v, err};
}

} // namespace plap
