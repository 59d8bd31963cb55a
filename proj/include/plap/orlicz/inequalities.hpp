#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "plap/core/error.hpp"
#include "plap/core/matrix.hpp"
#include "plap/core/quadrature.hpp"
#include "plap/orlicz/growth_model.hpp"
#include "plap/orlicz/orlicz_function.hpp"

namespace plap {

inline double conjugate(const OrliczFunction& phi, double s) { return phi.conjugate(s); }

/// phi*(a) + phi(b) - a b; nonnegative by definition of the conjugate.
inline double young_gap(const OrliczFunction& phi, double a, double b) {
    if (!std::isfinite(a) || !std::isfinite(b) || a < 0.0 || b < 0.0)
        throw InputError("young_gap: need finite a, b >= 0");
    return phi.conjugate(a) + phi.value(b) - a * b;
}

struct MonotonicityRatio {
    /// (A(Q) - A(P)) . (Q - P) / |V(Q) - V(P)|^2
    double v_ratio = 0.0;
    /// (A(Q) - A(P)) . (Q - P) / (phi''(mu + |Q| + |Q - P|) |Q - P|^2)
    double phi_ratio = 0.0;
};

inline MonotonicityRatio monotonicity_ratio(const GrowthModel& model, const Mat& q, const Mat& p) {
    if (!q.same_shape(p)) throw InputError("monotonicity_ratio: shape mismatch");
    const Mat diff = q - p;
    const double d2 = dot(diff, diff);
    if (d2 == 0.0) throw DegenerateInputError("monotonicity_ratio: Q == P");
    const double num = dot(model.stress(q) - model.stress(p), diff);
    const Mat dv = model.v_map(q) - model.v_map(p);
    const double w = model.shifted_phi_dd(model.mu() + norm(q) + std::sqrt(d2));
    return {num / dot(dv, dv), num / (w * d2)};
}

/// phi''(|a0| + |a1|) / int_0^1 phi''(|theta a0 + (1 - theta) a1|) dtheta.
/// The integral is split at the point of the segment closest to the origin,
/// where phi'' may blow up, and each piece uses a double-exponential rule.
inline double equiv_integral_ratio(const OrliczFunction& phi, std::span<const double> a0,
                                   std::span<const double> a1) {
    if (a0.size() != a1.size() || a0.empty()) throw InputError("equiv_integral_ratio: size mismatch");
    double n0 = 0.0, n1 = 0.0, dd = 0.0, a1d = 0.0;
    for (std::size_t i = 0; i < a0.size(); ++i) {
        if (!std::isfinite(a0[i]) || !std::isfinite(a1[i]))
            throw InputError("equiv_integral_ratio: non-finite input");
        const double d = a0[i] - a1[i];
        n0 += a0[i] * a0[i];
        n1 += a1[i] * a1[i];
        dd += d * d;
        a1d += a1[i] * d;
    }
    n0 = std::sqrt(n0);
    n1 = std::sqrt(n1);
    if (n0 == 0.0 && n1 == 0.0) throw DegenerateInputError("equiv_integral_ratio: a0 = a1 = 0");
    const double top = phi.d2(n0 + n1);
    if (dd == 0.0) return top / phi.d2(n0);

    // Both pieces are parametrised by the distance s from the split point c, so the
    // possibly singular end is exactly s = 0 and short pieces keep full accuracy.
    const double split = std::clamp(-a1d / dd, 0.0, 1.0);
    std::vector<double> c(a0.size()), d(a0.size());
    for (std::size_t i = 0; i < a0.size(); ++i) {
        d[i] = a0[i] - a1[i];
        c[i] = a1[i] + split * d[i];
    }
    auto piece = [&](double sign) {
        return [&, sign](double s) {
            double r = 0.0;
            for (std::size_t i = 0; i < c.size(); ++i) {
                const double v = c[i] + sign * s * d[i];
                r += v * v;
            }
            const double t = std::sqrt(r);
            return t == 0.0 ? 0.0 : phi.d2(t);
        };
    };
    // |c + s d| grows with s on both pieces, so a jump of phi'' is crossed at most
    // once per piece: |c|^2 + 2 s sign c.d + s^2 |d|^2 = k^2
    double c2 = 0.0, cd = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        c2 += c[i] * c[i];
        cd += c[i] * d[i];
    }
    const double k = phi.kink();
    auto integrate = [&](double sign, double len, double floor) {
        const auto f = piece(sign);
        const double g = sign * cd;
        const double cross =
            k > 0.0 && c2 < k * k ? (std::sqrt(g * g + dd * (k * k - c2)) - g) / dd : INFINITY;
        if (!(cross < len))
            return integrate_endpoint_singular(f, 0.0, len, 1e-12, "equiv", floor).value;
        const double head = integrate_endpoint_singular(f, 0.0, cross, 1e-12, "equiv", floor).value;
        // shifted to start at 0: the rule misbehaves on short intervals far from the origin
        const auto tail = [&](double u) { return f(cross + u); };
        return head + integrate_endpoint_singular(tail, 0.0, len - cross, 1e-12, "equiv", std::max(floor, head)).value;
    };
    // the shorter piece is judged against the size of the longer one
    const bool left_long = split >= 0.5;
    const double long_len = left_long ? split : 1.0 - split, short_len = 1.0 - long_len;
    const double big = integrate(left_long ? -1.0 : 1.0, long_len, 1e-300);
    const double small = short_len > 0.0 ? integrate(left_long ? 1.0 : -1.0, short_len, big) : 0.0;
    const double integral = big + small;
    return top / integral;
}

/// Forward form of the time-quotient energy sandwich:
///   r = [D^h F - A(Q_now) . D^h Q] h / |V(Q_next) - V(Q_now)|^2,
/// which lies in [c1, c2] with 0 < c1 <= c2 by convexity. Independent of h.
inline double lemma_t_ratio(const GrowthModel& model, const Mat& q_now, const Mat& q_next, double h) {
    if (!(h > 0.0)) throw InputError("lemma_t_ratio: need h > 0");
    const Mat step = q_next - q_now;
    const Mat dv = model.v_map(q_next) - model.v_map(q_now);
    const double gap = dot(dv, dv);
    if (dot(step, step) == 0.0 || gap == 0.0)
        throw DegenerateInputError("lemma_t_ratio: Q_now == Q_next");
    const double dF = (model.energy(q_next) - model.energy(q_now)) / h;
    const double lin = dot(model.stress(q_now), step * (1.0 / h));
    return (dF - lin) * h / gap;
}

/// Backward form: [D^{-h} F - A(Q_now) . D^{-h} Q] h / |V(Q_now) - V(Q_prev)|^2 with
/// D^{-h} g(t) = (g(t) - g(t - h)) / h. Convexity makes this lie in [-c, 0).
inline double lemma_t_backward_ratio(const GrowthModel& model, const Mat& q_prev, const Mat& q_now,
                                     double h) {
    if (!(h > 0.0)) throw InputError("lemma_t_backward_ratio: need h > 0");
    const Mat step = q_now - q_prev;
    const Mat dv = model.v_map(q_now) - model.v_map(q_prev);
    const double gap = dot(dv, dv);
    if (dot(step, step) == 0.0 || gap == 0.0)
        throw DegenerateInputError("lemma_t_backward_ratio: Q_prev == Q_now");
    const double dF = (model.energy(q_now) - model.energy(q_prev)) / h;
    const double lin = dot(model.stress(q_now), step * (1.0 / h));
    return (dF - lin) * h / gap;
}

/// Pieces of the symmetric three-point form around Q_now.
struct SymmetricLemmaTerms {
    /// (F(next) - F(prev)) / 2h - A(now) . (next - prev) / 2h
    double central = 0.0;
    /// |V(next) - V(now)|^2 / 2h
    double forward_gap = 0.0;
    /// |V(now) - V(prev)|^2 / 2h
    double backward_gap = 0.0;

    /// c1 fwd - cb bwd <= central <= c2 fwd + cb bwd
    bool sandwiched(double c1, double c2, double cb, double rel_tol = 1e-9) const {
        const double slack = rel_tol * (forward_gap + backward_gap + std::abs(central));
        return central >= c1 * forward_gap - cb * backward_gap - slack &&
               central <= c2 * forward_gap + cb * backward_gap + slack;
    }
};

inline SymmetricLemmaTerms lemma_t_symmetric(const GrowthModel& model, const Mat& q_prev,
                                             const Mat& q_now, const Mat& q_next, double h) {
    if (!(h > 0.0)) throw InputError("lemma_t_symmetric: need h > 0");
    const Mat fwd = model.v_map(q_next) - model.v_map(q_now);
    const Mat bwd = model.v_map(q_now) - model.v_map(q_prev);
    SymmetricLemmaTerms out;
    out.central = (model.energy(q_next) - model.energy(q_prev)) / (2.0 * h) -
                  dot(model.stress(q_now), (q_next - q_prev) * (1.0 / (2.0 * h)));
    out.forward_gap = dot(fwd, fwd) / (2.0 * h);
    out.backward_gap = dot(bwd, bwd) / (2.0 * h);
    return out;
}

// ---------------------------------------------------------------------------
// Sampling envelopes

/// Running min / max of a sampled ratio.
struct Envelope {
    double min = std::numeric_limits<double>::infinity();
    double max = -std::numeric_limits<double>::infinity();
    std::size_t samples = 0;

    void add(double v) {
        min = std::min(min, v);
        max = std::max(max, v);
        ++samples;
    }
    bool finite() const { return std::isfinite(min) && std::isfinite(max); }
    /// Both ends move by at most `rel` (relative) when going from `coarse` to this.
    bool stable_against(const Envelope& coarse, double rel) const {
        auto close = [rel](double a, double b) { return std::abs(a - b) <= rel * std::abs(b); };
        return close(min, coarse.min) && close(max, coarse.max);
    }
};

/// Random N x n matrix: Gaussian direction, log-uniform magnitude in
/// [10^log_lo, 10^log_hi].
inline Mat sample_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols,
                         double log_lo = -2.0, double log_hi = 2.0) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> expo(log_lo, log_hi);
    Mat m(rows, cols);
    double nrm = 0.0;
    do {
        for (std::size_t i = 0; i < m.size(); ++i) m[i] = gauss(rng);
        nrm = norm(m);
    } while (nrm == 0.0);
    return m * (std::pow(10.0, expo(rng)) / nrm);
}

struct EllipticityEstimate {
    /// inf of A(Q).Q / reference_lower(|Q|)
    double lambda = 0.0;
    /// sup of |A(Q)| / reference_upper(|Q|)
    double Lambda = 0.0;
};

/// Measures the growth constants by sampling. Reference weights are
/// (mu^2 + r^2)^{(p-2)/2} r^2 and (mu^2 + r^2)^{(p-2)/2} r for p-growth, and
/// phi'(mu + r) r for both sides in the Orlicz case.
inline EllipticityEstimate measure_ellipticity(const GrowthModel& model, std::size_t samples,
                                               std::uint64_t seed, std::size_t rows = 2,
                                               std::size_t cols = 2) {
    std::mt19937_64 rng(seed);
    EllipticityEstimate e{std::numeric_limits<double>::infinity(), 0.0};
    for (std::size_t i = 0; i < samples; ++i) {
        const Mat q = sample_matrix(rng, rows, cols);
        const double r = norm(q);
        const Mat a = model.stress(q);
        double lower = 0.0, upper = 0.0;
        if (model.variant() == GrowthModel::Variant::p_growth) {
            const double w = std::pow(model.mu() * model.mu() + r * r, 0.5 * (model.p() - 2.0));
            lower = w * r * r;
            upper = w * r;
        } else {
            lower = upper = model.phi().d1(model.mu() + r) * r;
        }
        e.lambda = std::min(e.lambda, dot(a, q) / lower);
        e.Lambda = std::max(e.Lambda, norm(a) / upper);
    }
    return e;
}

} // namespace plap
