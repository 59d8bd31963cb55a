#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "plap/core/error.hpp"
#include "plap/core/io.hpp"
#include "plap/grid/field.hpp"
#include "plap/lab/averaged.hpp"
#include "plap/lab/curve.hpp"
#include "plap/lab/predict.hpp"
#include "plap/solver/problem.hpp"

namespace plap {

/// Ladder h_k = 2^k * base for k in [k_min, k_max], fitted over [fit_min, fit_max].
struct LadderSpec {
    int k_min = 0, k_max = 6;
    int fit_min = 1, fit_max = 5;
};

struct RegularityConfig {
    double q = 2.0;
    /// Time margin at both ends; 0 means T / 8.
    double trim = 0.0;
    LadderSpec time{0, 6, 2, 6};
    LadderSpec space{0, 6, 1, 5};
    LadderSpec diagonal{0, 5, 1, 4};
    bool diagonal_direction = true;
    /// Enforced space prediction and an optional sharper one that is only reported.
    Setting space_setting = Setting::space_whole;
    std::optional<Setting> refined_setting;
    double slack = 0.05;
    unsigned threads = 1;
};

struct RegularitySet {
    std::vector<QuotientCurve> curves;
    std::vector<RegularityReport> reports;

    bool passed() const {
        return std::none_of(reports.begin(), reports.end(), [](const auto& r) { return r.verdict == "fail"; });
    }
};

namespace detail {

inline FitWindow fit_window(double base, const LadderSpec& l) {
    if (l.fit_min < l.k_min || l.fit_max > l.k_max || l.fit_max < l.fit_min)
        throw InputError("regularity: fit window must lie inside the ladder");
    return {std::ldexp(base, l.fit_min), std::ldexp(base, l.fit_max)};
}

inline std::optional<double> applicable(const Prediction& p) {
    if (!p.applies) return std::nullopt;
    return p.beta;
}

} // namespace detail

/// Quotient curves of u_t (central differences of the trajectory) in time, along each
/// space axis and along the diagonal space-time shift, with fitted and predicted exponents.
inline RegularitySet ut_regularity_experiment(const Field& trajectory, const ProblemSpec& spec,
                                              const RegularityConfig& cfg) {
    const SpaceTimeGrid& g = trajectory.grid();
    const double T = g.time(g.nt - 1) - g.t0;
    const double trim = cfg.trim > 0.0 ? cfg.trim : T / 8.0;
    if (trim < 4.0 * g.dt * (1.0 - 1e-12)) throw InputError("regularity: need trim >= 4 dt");
    const Field ut = time_derivative(trajectory);
    const double p = spec.model.p();
    const std::size_t n = g.space.n;
    const auto space_pred = detail::applicable(predict_beta(p, n, cfg.space_setting));
    std::optional<double> refined;
    if (cfg.refined_setting) refined = detail::applicable(predict_beta(p, n, *cfg.refined_setting));

    RegularitySet out;
    auto run = [&](Direction dir, std::size_t axis, const LadderSpec& l, std::optional<double> pred,
                   std::optional<double> ref) {
        const double base = base_step(ut.grid(), dir, axis);
        auto curve =
            quotient_norm_curve(ut, dir, cfg.q, geometric_ladder(base, l.k_min, l.k_max), trim, axis, cfg.threads);
        auto rep = estimate_exponent(curve, detail::fit_window(base, l), pred);
        judge(rep, pred, cfg.slack, ref);
        out.curves.push_back(std::move(curve));
        out.reports.push_back(std::move(rep));
    };
    run(Direction::time, 0, cfg.time, detail::applicable(predict_beta(p, n, Setting::time)), std::nullopt);
    for (std::size_t i = 0; i < n; ++i) run(Direction::space, i, cfg.space, space_pred, refined);
    if (cfg.diagonal_direction)
        for (std::size_t i = 0; i < n; ++i) run(Direction::diagonal, i, cfg.diagonal, space_pred, std::nullopt);
    return out;
}

/// Averaged characterisation check on u_t at the time prediction 1/2, over
/// [trim, T - trim - 2H]. H is `window` rounded down to a multiple of dt
/// (at least 2 dt); trim 0 means T / 8 and window 0 means T / 16.
inline AveragedCheck ut_averaged_check(const Field& trajectory, double q, double trim = 0.0, double window = 0.0) {
    const SpaceTimeGrid& g = trajectory.grid();
    const double T = g.time(g.nt - 1) - g.t0;
    const double a = trim > 0.0 ? trim : T / 8.0;
    const double wanted = window > 0.0 ? window : T / 16.0;
    const double H = std::max(2.0, std::floor(wanted / g.dt + 1e-9)) * g.dt;
    const double b = T - a - 2.0 * H;
    if (!(b > a)) throw InputError("averaged check: window too large for the trimmed interval");
    return averaged_characterization_check(time_derivative(trajectory), 0.5, q, H, g.t0 + a, g.t0 + b);
}

inline CsvTable averaged_csv(const AveragedCheck& c) {
    CsvTable t({"alpha", "k_avg", "k_plain", "factor", "bound", "verdict"});
    t.row() << 0.5 << c.k_avg << c.k_plain << c.factor << c.bound * c.slack << (c.passed ? "pass" : "fail");
    return t;
}

inline CsvTable curves_csv(const std::vector<QuotientCurve>& curves) {
    CsvTable t({"direction", "q", "h", "norm"});
    for (const auto& c : curves)
        for (std::size_t i = 0; i < c.h.size(); ++i) t.row() << c.label() << c.q << c.h[i] << c.norm[i];
    return t;
}

inline CsvTable summary_csv(const std::vector<RegularityReport>& reports) {
    CsvTable t({"direction", "alpha_hat", "r2", "predicted", "margin", "verdict"});
    for (const auto& r : reports) {
        auto row = t.row();
        row << r.label << r.alpha_hat << r.r2;
        if (r.predicted) row << *r.predicted << r.margin;
        else row << std::string("") << std::string("");
        row << r.verdict;
    }
    return t;
}

} // namespace plap
