#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "plap/core/error.hpp"
#include "plap/core/matrix.hpp"
#include "plap/core/reduce.hpp"
#include "plap/grid/field.hpp"
#include "plap/grid/norms.hpp"
#include "plap/solver/problem.hpp"

namespace plap {

/// Discrete versions of the two time estimates (test with u_t and u_tt) and the
/// space estimate (test with -Laplace u), each with its empirical constant
/// c = LHS / RHS. Windows start at the trim a; the time estimates use
///   I1 = int_a^T |u_t|^2 + sup_[a,T] int F(Du)            <= c1 / a * R1,  R1 = int_0^T phi(|Du|) + |f|^2
///   I2 = int_2a^T |d_t V(Du)|^2 + sup_[2a,T] int |u_t|^2   <= c2 * R2,      R2 = int_a^T |f_t|^2 + 1/a int_a^T |u_t|^2
///   I3 = int_a^T |grad V(Du)|^2 + sup_[a,T] int |grad u|^2 <= c3 * R3,      R3 = int_0^T phi*(|grad f|) + phi(|grad u|)
/// Derivatives are central differences on the stored levels.
struct EnergyReport {
    double trim = 0.0;
    double ut_sq = 0.0;            // int_a^T int |u_t|^2
    double sup_energy = 0.0;       // sup_[a,T] int F(Du)
    double vt_sq = 0.0;            // int_2a^T int |d_t V(Du)|^2
    double sup_ut_sq = 0.0;        // sup_[2a,T] int |u_t|^2
    double grad_v_sq = 0.0;        // int_a^T int |grad V(Du)|^2
    double sup_grad_sq = 0.0;      // sup_[a,T] int |grad u|^2
    double rhs_first = 0.0;        // R1
    double rhs_second = 0.0;       // R2
    double rhs_space = 0.0;        // R3
    double c_first = 0.0, c_second = 0.0, c_space = 0.0;
    std::optional<double> grad_ut_p;  // int_a^T int |grad u_t|^p, p-growth with p <= 2

    double lhs_first() const { return ut_sq + sup_energy; }
    double lhs_second() const { return vt_sq + sup_ut_sq; }
    double lhs_space() const { return grad_v_sq + sup_grad_sq; }

    std::vector<std::pair<std::string, double>> entries() const {
        std::vector<std::pair<std::string, double>> e = {
            {"trim", trim},           {"ut_sq", ut_sq},           {"sup_energy", sup_energy},
            {"vt_sq", vt_sq},         {"sup_ut_sq", sup_ut_sq},   {"grad_v_sq", grad_v_sq},
            {"sup_grad_sq", sup_grad_sq}, {"lhs_first", lhs_first()}, {"rhs_first", rhs_first},
            {"c_first", c_first},     {"lhs_second", lhs_second()}, {"rhs_second", rhs_second},
            {"c_second", c_second},   {"lhs_space", lhs_space()}, {"rhs_space", rhs_space},
            {"c_space", c_space}};
        if (grad_ut_p) e.emplace_back("grad_ut_p", *grad_ut_p);
        return e;
    }

    bool all_finite_nonnegative() const {
        for (const auto& [name, v] : entries())
            if (!std::isfinite(v) || v < 0.0) return false;
        return true;
    }
};

namespace detail {

/// Per-level space integral of g(|value|).
template <class G>
std::vector<double> level_integrals(const Field& f, G&& g, unsigned threads) {
    std::vector<double> out(f.levels());
    const std::size_t nodes = f.space().nodes();
    parallel_for(f.levels(), threads, [&](std::size_t k) {
        std::vector<double> terms(nodes);
        node_terms(f.level(k), f.components(), g, terms);
        out[k] = pairwise_sum(terms) * f.space().cell();
    });
    return out;
}

/// Levels whose time lies in [from, to] (with a little slack for rounding).
inline std::pair<std::size_t, std::size_t> level_window(const SpaceTimeGrid& g, double from, double to) {
    const double eps = 1e-9 * g.dt;
    std::size_t lo = g.nt, hi = 0;
    for (std::size_t k = 0; k < g.nt; ++k) {
        const double t = g.time(k);
        if (t >= from - eps && t <= to + eps) {
            lo = std::min(lo, k);
            hi = k + 1;
        }
    }
    return {lo, hi};
}

inline double window_integral(const std::vector<double>& per_level, const SpaceTimeGrid& g, double from, double to) {
    const auto [lo, hi] = level_window(g, from, to);
    if (lo >= hi) return 0.0;
    return pairwise_sum(std::span<const double>(per_level).subspan(lo, hi - lo)) * g.dt;
}

inline double window_sup(const std::vector<double>& per_level, const SpaceTimeGrid& g, double from, double to) {
    const auto [lo, hi] = level_window(g, from, to);
    double s = 0.0;
    for (std::size_t k = lo; k < hi; ++k) s = std::max(s, per_level[k]);
    return s;
}

inline double ratio(double lhs, double rhs) { return rhs > 0.0 ? lhs / rhs : 0.0; }

} // namespace detail

/// V(Du) at every node, as an N * n component field.
inline Field v_field(const GrowthModel& model, const Field& du, std::size_t comps) {
    const std::size_t n = du.space().n;
    Field out(du.grid(), du.components());
    Mat q(comps, n);
    for (std::size_t k = 0; k < du.levels(); ++k) {
        const auto in = du.level(k);
        auto o = out.level(k);
        for (std::size_t node = 0; node < du.space().nodes(); ++node) {
            for (std::size_t i = 0; i < comps * n; ++i) q[i] = in[node * comps * n + i];
            const Mat v = model.v_map(q);
            for (std::size_t i = 0; i < comps * n; ++i) o[node * comps * n + i] = v[i];
        }
    }
    return out;
}

inline EnergyReport energy_report(const Field& u, const ProblemSpec& spec, double trim, unsigned threads = 1) {
    const SpaceTimeGrid& g = u.grid();
    if (u.components() != spec.components) throw InputError("energy_report: component count mismatch");
    if (!(trim >= 2.0 * g.dt * (1 - 1e-12))) throw InputError("energy_report: need trim a >= 2 dt");
    const double T = g.time(g.nt - 1);
    if (!(2.0 * trim < T)) throw InputError("energy_report: need 2 a < T");
    const GrowthModel& model = spec.model;
    const std::size_t N = spec.components;

    const Field ut = time_derivative(u);
    const Field du = space_gradient(u);
    const Field vdu = v_field(model, du, N);
    const Field vt = time_derivative(vdu);
    // V(Du) and f need not vanish on a Dirichlet boundary
    const Field grad_v = space_gradient(vdu, true);
    const Field f = Field::sample(
        g, N,
        [&](double t, std::span<const double> x, std::size_t c) {
            double out[4];
            spec.forcing(t, x, std::span<double>(out, N));
            return out[c];
        },
        threads);
    const Field ft = time_derivative(f);
    const Field grad_f = space_gradient(f, true);

    auto sq = [](double r) { return r * r; };
    auto phi = [&](double r) { return model.growth(r); };
    const auto ut2 = detail::level_integrals(ut, sq, threads);
    const auto energy = detail::level_integrals(du, [&](double r) { return model.energy_radial(r); }, threads);
    const auto vt2 = detail::level_integrals(vt, sq, threads);
    const auto gv2 = detail::level_integrals(grad_v, sq, threads);
    const auto du2 = detail::level_integrals(du, sq, threads);
    const auto phi_du = detail::level_integrals(du, phi, threads);
    const auto f2 = detail::level_integrals(f, sq, threads);
    const auto ft2 = detail::level_integrals(ft, sq, threads);
    const auto phis_gf =
        detail::level_integrals(grad_f, [&](double r) { return model.growth_conjugate(r); }, threads);

    EnergyReport r;
    r.trim = trim;
    r.ut_sq = detail::window_integral(ut2, ut.grid(), trim, T);
    r.sup_energy = detail::window_sup(energy, g, trim, T);
    r.vt_sq = detail::window_integral(vt2, vt.grid(), 2 * trim, T);
    r.sup_ut_sq = detail::window_sup(ut2, ut.grid(), 2 * trim, T);
    r.grad_v_sq = detail::window_integral(gv2, g, trim, T);
    r.sup_grad_sq = detail::window_sup(du2, g, trim, T);
    r.rhs_first = detail::window_integral(phi_du, g, 0.0, T) + detail::window_integral(f2, g, 0.0, T);
    r.rhs_second = detail::window_integral(ft2, ft.grid(), trim, T) + r.ut_sq / trim;
    r.rhs_space = detail::window_integral(phis_gf, g, 0.0, T) + detail::window_integral(phi_du, g, 0.0, T);
    r.c_first = detail::ratio(r.lhs_first() * trim, r.rhs_first);
    r.c_second = detail::ratio(r.lhs_second(), r.rhs_second);
    r.c_space = detail::ratio(r.lhs_space(), r.rhs_space);

    if (model.variant() == GrowthModel::Variant::p_growth && model.p() <= 2.0) {
        const double p = model.p();
        const Field grad_ut = space_gradient(ut);
        const auto gp = detail::level_integrals(grad_ut, [p](double s) { return std::pow(s, p); }, threads);
        r.grad_ut_p = detail::window_integral(gp, ut.grid(), trim, T);
    }
    return r;
}

} // namespace plap
