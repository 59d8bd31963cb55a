#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "plap/core/io.hpp"
#include "plap/core/reduce.hpp"
#include "plap/orlicz/growth_model.hpp"
#include "plap/orlicz/inequalities.hpp"

namespace plap {

/// One line of the sampled inequality suite.
struct CheckRow {
    std::string check;
    std::size_t samples = 0;
    double min_ratio = 0.0;
    double max_ratio = 0.0;
    bool passed = false;
    std::string verdict;
};

struct SuiteOptions {
    std::size_t samples = 10000;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    /// Allowed relative drift of an envelope end when the sample count doubles.
    double stability = 0.1;
    std::size_t rows = 2, cols = 2;
};

namespace detail {

/// Independent stream per check so the suite can run its checks in any order.
inline std::mt19937_64 check_stream(std::uint64_t seed, std::size_t index) {
    std::seed_seq s{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index)};
    return std::mt19937_64(s);
}

/// Envelope on the first half and on all of 2n samples.
struct DoubledEnvelope {
    Envelope coarse, fine;
};

inline DoubledEnvelope doubled(std::size_t n, const std::function<double()>& draw) {
    DoubledEnvelope d;
    for (std::size_t i = 0; i < 2 * n; ++i) {
        const double v = draw();
        if (i < n) d.coarse.add(v);
        d.fine.add(v);
    }
    return d;
}

inline CheckRow ratio_row(std::string name, const DoubledEnvelope& d, bool ok, double stability,
                          bool require_stable) {
    CheckRow r{std::move(name), d.fine.samples, d.fine.min, d.fine.max, false, ""};
    if (!d.fine.finite() || !ok) r.verdict = "fail";
    else if (require_stable && !d.fine.stable_against(d.coarse, stability)) r.verdict = "unstable";
    else r.verdict = "pass";
    r.passed = r.verdict == "pass";
    return r;
}

inline CheckRow plain_row(std::string name, const Envelope& e, bool ok) {
    const bool pass = ok && e.finite();
    return {std::move(name), e.samples, e.min, e.max, pass, pass ? "pass" : "fail"};
}

/// Half independent pairs, half P = Q + E with |E| / |Q| log-uniform in [1e-3, 1]:
/// the extreme ratios sit at P -> Q as often as at far-apart pairs.
inline std::pair<Mat, Mat> sample_pair(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
    const Mat q = sample_matrix(rng, rows, cols);
    if (rng() & 1u) return {q, sample_matrix(rng, rows, cols)};
    const double r = norm(q);
    return {q, q + sample_matrix(rng, rows, cols, -3.0, 0.0) * r};
}

} // namespace detail

/// Every sampled inequality the regularity arguments rest on, for one model.
///
/// Ratio checks draw 2n samples and require the envelope of all of them to sit
/// within `stability` of the envelope of the first n. Each check has its own
/// random stream, so the rows do not depend on the thread count.
inline std::vector<CheckRow> assumption_suite(const GrowthModel& model, const SuiteOptions& opt) {
    if (opt.samples < 10) throw InputError("assumption suite: need at least 10 samples");
    const std::size_t n = opt.samples, R = opt.rows, C = opt.cols;
    const OrliczFunction& phi = model.phi();
    const double st = opt.stability;

    std::vector<std::function<CheckRow(std::mt19937_64&)>> checks;
    checks.push_back([&](std::mt19937_64&) {
        const auto e = delta2_envelope(phi);
        Envelope env;
        env.add(e.min_ratio);
        env.add(e.max_ratio);
        env.samples = e.samples;
        return detail::plain_row("delta2", env, e.min_ratio > 0.0);
    });
    checks.push_back([&](std::mt19937_64& rng) {
        Envelope lo, hi;
        for (std::size_t i = 0; i < n; ++i) {
            const auto e = measure_ellipticity(model, 1, rng());
            lo.add(e.lambda);
            hi.add(e.Lambda);
        }
        Envelope both;
        both.add(lo.min);
        both.add(hi.max);
        both.samples = n;
        return detail::plain_row("ellipticity", both, lo.min > 0.0);
    });
    auto monotone = [&](bool v_form) {
        return [&, v_form](std::mt19937_64& rng) {
            const auto d = detail::doubled(n, [&] {
                const auto [q, p] = detail::sample_pair(rng, R, C);
                const auto m = monotonicity_ratio(model, q, p);
                return v_form ? m.v_ratio : m.phi_ratio;
            });
            return detail::ratio_row(v_form ? "monotonicity_v" : "monotonicity_phi", d, d.fine.min > 0.0, st, true);
        };
    };
    checks.push_back(monotone(true));
    checks.push_back(monotone(false));
    checks.push_back([&](std::mt19937_64& rng) {
        std::uniform_real_distribution<double> lh(-3.0, 0.0);
        const auto d = detail::doubled(n, [&] {
            // independent pairs: near pairs lose the O(|b - a|^2) numerator to cancellation
            const Mat a = sample_matrix(rng, R, C), b = sample_matrix(rng, R, C);
            return lemma_t_ratio(model, a, b, std::pow(10.0, lh(rng)));
        });
        return detail::ratio_row("lemma_t_forward", d, d.fine.min > 0.0, st, true);
    });
    checks.push_back([&](std::mt19937_64& rng) {
        std::uniform_real_distribution<double> lh(-3.0, 0.0);
        const auto d = detail::doubled(n, [&] {
            const Mat a = sample_matrix(rng, R, C), b = sample_matrix(rng, R, C);
            // reported with flipped sign so every ratio column is positive
            return -lemma_t_backward_ratio(model, a, b, std::pow(10.0, lh(rng)));
        });
        return detail::ratio_row("lemma_t_backward", d, d.fine.min > 0.0, st, true);
    });
    checks.push_back([&](std::mt19937_64& rng) {
        // (phi*(a) + phi(b)) / ab >= 1; every other draw sits on the equality curve a = phi'(b)
        std::uniform_real_distribution<double> l(-2.0, 2.0);
        Envelope env;
        bool ok = true;
        for (std::size_t i = 0; i < n; ++i) {
            const double b = std::pow(10.0, l(rng));
            const double a = i % 2 ? phi.d1(b) : std::pow(10.0, l(rng));
            const double gap = young_gap(phi, a, b);
            if (gap < -1e-8 * std::max(1.0, a * b)) ok = false;
            env.add((gap + a * b) / (a * b));
        }
        return detail::plain_row("young", env, ok);
    });
    checks.push_back([&](std::mt19937_64& rng) {
        // adaptive quadrature per sample, so a smaller batch
        const std::size_t m = std::max<std::size_t>(10, n / 10);
        Envelope env;
        for (std::size_t i = 0; i < m; ++i) {
            const Mat a0 = sample_matrix(rng, R, C), a1 = sample_matrix(rng, R, C);
            env.add(equiv_integral_ratio(phi, a0.values(), a1.values()));
        }
        return detail::plain_row("equiv_integral", env, env.min > 0.0);
    });
    checks.push_back([&](std::mt19937_64& rng) {
        // central difference of F against A, relative error
        Envelope env;
        for (std::size_t i = 0; i < n / 10 + 1; ++i) {
            const Mat q = sample_matrix(rng, R, C);
            const double h = 1e-4 * norm(q);
            // A jumps where phi' does; central differences straddling it say nothing
            if (std::abs(norm(q) + model.mu() - phi.kink()) < 4.0 * h) continue;
            const Mat a = model.stress(q);
            Mat fd(R, C);
            for (std::size_t k = 0; k < q.size(); ++k) {
                Mat qp = q, qm = q;
                qp[k] += h;
                qm[k] -= h;
                fd[k] = (model.energy(qp) - model.energy(qm)) / (2.0 * h);
            }
            env.add(norm(fd - a) / norm(a));
        }
        return detail::plain_row("stress_gradient", env, env.max <= 1e-4);
    });

    std::vector<CheckRow> rows(checks.size());
    parallel_for(checks.size(), opt.threads, [&](std::size_t i) {
        auto rng = detail::check_stream(opt.seed, i);
        rows[i] = checks[i](rng);
    });
    return rows;
}

inline bool all_passed(const std::vector<CheckRow>& rows) {
    return std::all_of(rows.begin(), rows.end(), [](const CheckRow& r) { return r.passed; });
}

inline CsvTable suite_csv(const std::vector<CheckRow>& rows) {
    CsvTable t({"check", "samples", "min_ratio", "max_ratio", "verdict"});
    for (const auto& r : rows) t.row() << r.check << r.samples << r.min_ratio << r.max_ratio << r.verdict;
    return t;
}

} // namespace plap
