#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "plap/core/error.hpp"
#include "plap/core/reduce.hpp"
#include "plap/grid/field.hpp"
#include "plap/solver/discretization.hpp"
#include "plap/solver/problem.hpp"

namespace plap {

struct NewtonStats {
    std::size_t step = 0;
    std::size_t iterations = 0;
    double final_residual = 0.0;
    std::size_t backtracks = 0;
};

struct Trajectory {
    Field u;
    std::vector<NewtonStats> newton;
};

namespace detail {
inline double euclid(std::span<const double> v) {
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sq[i] = v[i] * v[i];
    return std::sqrt(pairwise_sum(sq));
}
} // namespace detail

/// Backward Euler with damped Newton:
///   m (u - u_prev) / dt + dE/du(u) - m f(t + dt) = 0,  m = node measure.
/// This is the optimality condition of the strictly convex
///   Phi(u) = m |u - u_prev|^2 / (2 dt) + E(u) - m f . u,
/// so the line search accepts a step when either |R| or Phi drops enough.
class ImplicitStepper {
  public:
    ImplicitStepper(const ProblemSpec& spec, const SolverConfig& cfg)
        : spec_(spec), cfg_(cfg), disc_(spec.space, spec.components) {
        spec.validate();
        cfg.validate();
    }

    const Discretization& discretization() const noexcept { return disc_; }

    std::vector<double> step(std::span<const double> u_prev, double t, NewtonStats* stats = nullptr) {
        const std::size_t nu = disc_.unknowns();
        if (u_prev.size() != nu) throw InputError("step_implicit: state size mismatch");
        for (double v : u_prev)
            if (!std::isfinite(v)) throw InputError("step_implicit: non-finite state");
        const double m = disc_.node_measure(), dt = spec_.dt;
        const unsigned th = cfg_.threads;

        std::vector<double> f(nu);
        sample_nodes(spec_.space, spec_.components, spec_.forcing, t + dt, f);
        for (double v : f)
            if (!std::isfinite(v)) throw InputError("step_implicit: forcing is not finite on the grid");

        std::vector<double> load(nu);
        for (std::size_t i = 0; i < nu; ++i) load[i] = m * (u_prev[i] / dt + f[i]);
        double scale = detail::euclid(load);
        if (scale == 0.0) scale = 1.0;

        auto residual = [&](std::span<const double> u, std::vector<double>& r) {
            disc_.gradient(spec_.model, u, r, th);
            for (std::size_t i = 0; i < nu; ++i) r[i] += m * u[i] / dt - load[i];
        };
        auto merit = [&](std::span<const double> u) {
            std::vector<double> terms(nu);
            for (std::size_t i = 0; i < nu; ++i)
                terms[i] = m * (0.5 * (u[i] - u_prev[i]) * (u[i] - u_prev[i]) / dt - f[i] * u[i]);
            return pairwise_sum(terms) + disc_.energy(spec_.model, u, th);
        };

        std::vector<double> u(u_prev.begin(), u_prev.end()), r(nu), trial(nu), r_trial(nu);
        residual(u, r);
        double rn = detail::euclid(r);
        NewtonStats local;
        local.final_residual = rn / scale;

        std::vector<Eigen::Triplet<double>> trip;
        Eigen::SparseMatrix<double> jac(static_cast<int>(nu), static_cast<int>(nu));
        Eigen::VectorXd rhs(static_cast<int>(nu));
        std::size_t it = 0;
        while (rn > cfg_.newton_tol * scale) {
            if (it == cfg_.newton_max_iter)
                throw SolverError("Newton did not converge in " + std::to_string(it) + " iterations (relative residual " +
                                      std::to_string(rn / scale) + ")",
                                  stats ? stats->step : 0, t + dt, rn / scale);
            ++it;
            trip.clear();
            disc_.hessian_triplets(spec_.model, u, cfg_.jacobian_floor, trip, th);
            for (std::size_t i = 0; i < nu; ++i) trip.emplace_back(static_cast<int>(i), static_cast<int>(i), m / dt);
            jac.setFromTriplets(trip.begin(), trip.end());
            if (!analysed_) {
                ldlt_.analyzePattern(jac);
                analysed_ = true;
            }
            ldlt_.factorize(jac);
            if (ldlt_.info() != Eigen::Success)
                throw SolverError("Newton: Jacobian factorisation failed", stats ? stats->step : 0, t + dt, rn / scale);
            for (std::size_t i = 0; i < nu; ++i) rhs[static_cast<int>(i)] = -r[i];
            const Eigen::VectorXd d = ldlt_.solve(rhs);

            double slope = 0.0;
            for (std::size_t i = 0; i < nu; ++i) slope += r[i] * d[static_cast<int>(i)];
            double lambda = 1.0;
            bool have_phi = false;
            double phi0 = 0.0;
            for (;;) {
                for (std::size_t i = 0; i < nu; ++i) trial[i] = u[i] + lambda * d[static_cast<int>(i)];
                residual(trial, r_trial);
                const double rt = detail::euclid(r_trial);
                if (std::isfinite(rt) && rt <= (1.0 - 1e-4 * lambda) * rn) break;
                if (!have_phi) {
                    phi0 = merit(u);
                    have_phi = true;
                }
                if (std::isfinite(rt) && merit(trial) <= phi0 + 1e-4 * lambda * slope) break;
                lambda *= cfg_.damping;
                ++local.backtracks;
                if (lambda < 1e-14) break;  // take the tiny step; max_iter bounds the stall
            }
            u.swap(trial);
            r.swap(r_trial);
            rn = detail::euclid(r);
        }
        local.iterations = it;
        local.final_residual = rn / scale;
        if (stats) {
            const std::size_t s = stats->step;
            *stats = local;
            stats->step = s;
        }
        return u;
    }

  private:
    ProblemSpec spec_;
    SolverConfig cfg_;
    Discretization disc_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
    bool analysed_ = false;
};

inline std::vector<double> step_implicit(const ProblemSpec& spec, const SolverConfig& cfg,
                                         std::span<const double> u_prev, double t, NewtonStats* stats = nullptr) {
    ImplicitStepper s(spec, cfg);
    return s.step(u_prev, t, stats);
}

inline std::vector<double> initial_state(const ProblemSpec& spec) {
    std::vector<double> u0(spec.space.nodes() * spec.components);
    sample_nodes(spec.space, spec.components, spec.u0, 0.0, u0);
    for (double v : u0)
        if (!std::isfinite(v)) throw InputError("problem: u0 is not finite on the grid");
    return u0;
}

/// Marches from u0 over spec.steps steps; the trajectory holds steps + 1 levels.
inline Trajectory solve(const ProblemSpec& spec, const SolverConfig& cfg) {
    ImplicitStepper stepper(spec, cfg);
    Trajectory out{Field(spec.trajectory_grid(), spec.components), {}};
    const auto u0 = initial_state(spec);
    std::copy(u0.begin(), u0.end(), out.u.level(0).begin());
    out.newton.reserve(spec.steps);
    for (std::size_t k = 0; k < spec.steps; ++k) {
        NewtonStats st;
        st.step = k + 1;
        std::vector<double> next;
        try {
            next = stepper.step(out.u.level(k), k * spec.dt, &st);
        } catch (const SolverError& e) {
            throw SolverError(std::string("step ") + std::to_string(k + 1) + ": " + e.what(), k + 1, e.time(),
                              e.residual());
        }
        std::copy(next.begin(), next.end(), out.u.level(k + 1).begin());
        out.newton.push_back(st);
    }
    return out;
}

} // namespace plap
