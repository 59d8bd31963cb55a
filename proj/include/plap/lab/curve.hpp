#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "plap/core/error.hpp"
#include "plap/grid/field.hpp"
#include "plap/grid/norms.hpp"
#include "plap/grid/quotients.hpp"

namespace plap {

/// h -> |Delta^h g|_{L^q} on the trimmed window, for a ladder of steps.
struct QuotientCurve {
    Direction direction = Direction::time;
    std::size_t axis = 0;
    double q = 2.0;
    double trim = 0.0;
    std::vector<double> h;
    std::vector<double> norm;

    std::string label() const {
        if (direction == Direction::time) return "time";
        return std::string(to_string(direction)) + "_" + (axis == 0 ? "x" : "y");
    }
};

/// h_k = 2^k * step for k = k_min .. k_max.
inline std::vector<double> geometric_ladder(double step, int k_min, int k_max) {
    if (!(step > 0.0)) throw InputError("ladder: need step > 0");
    if (k_max < k_min) throw InputError("ladder: need k_min <= k_max");
    std::vector<double> out;
    for (int k = k_min; k <= k_max; ++k) out.push_back(std::ldexp(step, k));
    return out;
}

inline QuotientCurve quotient_norm_curve(const Field& g, Direction dir, double q, const std::vector<double>& ladder,
                                         double trim, std::size_t axis = 0, unsigned threads = 1) {
    if (!(q >= 1.0) || !std::isfinite(q)) throw InputError("quotient curve: need q >= 1");
    if (ladder.empty()) throw InputError("quotient curve: empty ladder");
    for (std::size_t i = 1; i < ladder.size(); ++i)
        if (!(ladder[i] > ladder[i - 1])) throw InputError("quotient curve: ladder must be strictly increasing");
    QuotientCurve c{dir, axis, q, trim, ladder, {}};
    c.norm.reserve(ladder.size());
    for (double h : ladder) {
        const Field d = delta(g, QuotientSpec{dir, axis, h, trim}, threads);
        c.norm.push_back(std::pow(power_integral(d, q, threads), 1.0 / q));
    }
    return c;
}

/// Inclusive range of steps used by the fit.
struct FitWindow {
    double h_min = 0.0;
    double h_max = std::numeric_limits<double>::infinity();

    bool contains(double h) const {
        const double eps = 1e-9 * h;
        return h >= h_min - eps && h <= h_max + eps;
    }
};

struct RegularityReport {
    std::string label;
    Direction direction = Direction::time;
    std::size_t axis = 0;
    double q = 2.0;
    std::size_t points = 0;
    double h_min = 0.0, h_max = 0.0;
    /// Least-squares slope of log |Delta^h| against log h; 1 when every norm vanishes.
    double alpha_hat = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    /// Zero quotients in the window or a slope of at least 0.95: the data are as
    /// smooth as difference quotients can show.
    bool saturated = false;
    /// max over the whole ladder of h^-alpha |Delta^h| at the declared alpha.
    double seminorm_alpha = 0.0;
    double seminorm = 0.0;
    std::optional<double> predicted;
    double margin = std::numeric_limits<double>::quiet_NaN();
    std::string verdict = "unchecked";
    /// Sharper prediction that is reported but not enforced.
    std::optional<double> refined;
    std::string refined_verdict;
};

inline constexpr double saturation_slope = 0.95;

inline RegularityReport estimate_exponent(const QuotientCurve& curve, const FitWindow& window,
                                          std::optional<double> declared_alpha = std::nullopt) {
    RegularityReport r;
    r.label = curve.label();
    r.direction = curve.direction;
    r.axis = curve.axis;
    r.q = curve.q;
    std::vector<double> lx, ly;
    bool zero = false;
    r.h_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < curve.h.size(); ++i) {
        if (!window.contains(curve.h[i])) continue;
        r.h_min = std::min(r.h_min, curve.h[i]);
        r.h_max = std::max(r.h_max, curve.h[i]);
        if (!(curve.norm[i] >= 0.0) || !std::isfinite(curve.norm[i]))
            throw NumericError("estimate_exponent: quotient norm is not finite", curve.norm[i], 0.0);
        if (curve.norm[i] == 0.0) zero = true;
        lx.push_back(std::log(curve.h[i]));
        ly.push_back(std::log(curve.norm[i]));
    }
    r.points = lx.size();
    if (r.points < 4) throw RangeError("estimate_exponent: need at least 4 ladder points in the fit window");
    if (zero) {
        r.saturated = true;
        r.alpha_hat = 1.0;
        r.r2 = 0.0;
    } else {
        const double n = static_cast<double>(r.points);
        double mx = 0.0, my = 0.0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            mx += lx[i];
            my += ly[i];
        }
        mx /= n;
        my /= n;
        double sxx = 0.0, sxy = 0.0, syy = 0.0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sxx += (lx[i] - mx) * (lx[i] - mx);
            sxy += (lx[i] - mx) * (ly[i] - my);
            syy += (ly[i] - my) * (ly[i] - my);
        }
        r.alpha_hat = sxy / sxx;
        r.intercept = my - r.alpha_hat * mx;
        r.r2 = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
        r.saturated = r.alpha_hat >= saturation_slope;
    }
    r.seminorm_alpha = declared_alpha.value_or(r.alpha_hat);
    for (std::size_t i = 0; i < curve.h.size(); ++i)
        r.seminorm = std::max(r.seminorm, curve.norm[i] / std::pow(curve.h[i], r.seminorm_alpha));
    return r;
}

/// Fills predicted, margin and verdict: pass when alpha_hat >= predicted - slack.
inline void judge(RegularityReport& r, std::optional<double> predicted, double slack,
                  std::optional<double> refined = std::nullopt) {
    r.predicted = predicted;
    if (!predicted) {
        r.verdict = r.saturated ? "saturated" : "no prediction";
    } else {
        r.margin = r.alpha_hat - *predicted;
        if (r.alpha_hat >= *predicted - slack) r.verdict = r.saturated ? "saturated" : "pass";
        else r.verdict = "fail";
    }
    r.refined = refined;
    if (refined) r.refined_verdict = r.alpha_hat >= *refined - slack ? "reached" : "below";
}

} // namespace plap
