#pragma once

#include <cmath>
#include <vector>

#include "plap/core/error.hpp"
#include "plap/core/reduce.hpp"
#include "plap/grid/field.hpp"

namespace plap {

/// Discrete form of the averaged characterisation of Nikolskij spaces in time:
///   K_avg   = max_{h <= H}   h^-alpha | mean_{s in (0, h]} |Delta^s g| |_{L^q(a, b + h)}
///   K_plain = max_{h <= H/2} h^-alpha | Delta^h g |_{L^q(a, b)}
/// with h and s running over multiples of dt. The bound K_plain <= 3 K_avg is
/// checked with 5% slack.
struct AveragedCheck {
    double k_avg = 0.0;
    double k_plain = 0.0;
    double factor = 0.0;  // K_plain / K_avg, 0 when both vanish
    double bound = 3.0;
    double slack = 1.05;
    bool passed = false;
};

namespace detail {

/// int_{[from, to)} |v|^q over the levels in the window.
inline double window_power(const Field& g, std::size_t from, std::size_t to, double q,
                           const std::vector<double>& pointwise) {
    const std::size_t nodes = g.space().nodes();
    std::vector<double> terms((to - from) * nodes);
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const double v = pointwise[i];
        terms[i] = q == 2.0 ? v * v : std::pow(v, q);
    }
    return pairwise_sum(terms) * g.grid().dt * g.space().cell();
}

/// Euclidean magnitude of g(k + s) - g(k) at every node.
inline double step_magnitude(const Field& g, std::size_t k, std::size_t s, std::size_t node) {
    const std::size_t N = g.components();
    const auto a = g.level(k + s), b = g.level(k);
    double m = 0.0;
    for (std::size_t c = 0; c < N; ++c) {
        const double d = a[node * N + c] - b[node * N + c];
        m += d * d;
    }
    return std::sqrt(m);
}

} // namespace detail

/// Window [a, b] in time; H a multiple of dt. The levels up to b + H must exist.
inline AveragedCheck averaged_characterization_check(const Field& g, double alpha, double q, double H, double a,
                                                     double b) {
    const SpaceTimeGrid& gr = g.grid();
    if (!(alpha > 0.0 && alpha <= 1.0)) throw InputError("averaged check: need alpha in (0, 1]");
    if (!(q >= 1.0) || !std::isfinite(q)) throw InputError("averaged check: need q >= 1");
    const std::size_t M = step_multiple(H, gr.dt, "averaged check");
    if (M < 2) throw RangeError("averaged check: need H >= 2 dt");
    const auto level_of = [&](double t) { return static_cast<long>(std::llround((t - gr.t0) / gr.dt)); };
    const long ka = level_of(a), kb = level_of(b);
    if (ka < 0 || kb <= ka) throw RangeError("averaged check: need t0 <= a < b");
    if (kb + 2 * static_cast<long>(M) >= static_cast<long>(gr.nt))
        throw RangeError("averaged check: levels up to b + 2H are needed");
    const std::size_t from = static_cast<std::size_t>(ka), to = static_cast<std::size_t>(kb);
    const std::size_t nodes = g.space().nodes();

    AveragedCheck r;
    std::vector<double> pw;
    // running[k, node] = sum_{i <= m} |Delta^{i dt} g| for k in [a, b + H)
    const std::size_t span_end = to + M;
    std::vector<double> running((span_end - from) * nodes, 0.0);
    for (std::size_t m = 1; m <= M; ++m) {
        const double h = m * gr.dt;
        for (std::size_t k = from; k < span_end; ++k)
            for (std::size_t node = 0; node < nodes; ++node)
                running[(k - from) * nodes + node] += detail::step_magnitude(g, k, m, node);
        // averaged quotient on [a, b + h)
        const std::size_t end = to + m;
        pw.assign((end - from) * nodes, 0.0);
        for (std::size_t i = 0; i < pw.size(); ++i) pw[i] = running[i] / static_cast<double>(m);
        const double avg = std::pow(detail::window_power(g, from, end, q, pw), 1.0 / q);
        r.k_avg = std::max(r.k_avg, avg / std::pow(h, alpha));
        if (2 * m <= M) {
            pw.assign((to - from) * nodes, 0.0);
            for (std::size_t k = from; k < to; ++k)
                for (std::size_t node = 0; node < nodes; ++node)
                    pw[(k - from) * nodes + node] = detail::step_magnitude(g, k, m, node);
            const double plain = std::pow(detail::window_power(g, from, to, q, pw), 1.0 / q);
            r.k_plain = std::max(r.k_plain, plain / std::pow(h, alpha));
        }
    }
    r.factor = r.k_avg > 0.0 ? r.k_plain / r.k_avg : 0.0;
    r.passed = r.k_plain <= r.bound * r.k_avg * r.slack;
    return r;
}

inline AveragedCheck averaged_characterization_check(const TimeSeries& g, double alpha, double q, double H,
                                                     double a, double b) {
    return averaged_characterization_check(series_as_field(g), alpha, q, H, a, b);
}

} // namespace plap
