#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <Eigen/Dense>

#include "plap/core/error.hpp"
#include "plap/core/reduce.hpp"
#include "plap/grid/field.hpp"
#include "plap/solver/fd_solver.hpp"
#include "plap/solver/problem.hpp"

namespace plap {

enum class GalerkinScheme { sdirk2, backward_euler };

struct GalerkinOptions {
    GalerkinScheme scheme = GalerkinScheme::sdirk2;
    std::size_t substeps = 1;      // ODE steps per trajectory step
    std::size_t max_basis = 256;
    std::size_t min_cells = 8;     // quadrature cells per axis: max(min_cells, 2 * modes)
};

struct GalerkinResult {
    std::size_t basis = 0;
    /// coefficients[k][j * N + c]: coefficient of psi_j in component c at level k.
    std::vector<std::vector<double>> coefficients;
    Field u;  // reconstruction on the FD nodes, steps + 1 levels
    std::vector<NewtonStats> newton;
};

namespace detail {

/// One-axis modes. Periodic: 1, cos(2 pi x / L), sin(2 pi x / L), cos(4 pi x / L), ...
/// Dirichlet: sin(pi x / L), sin(2 pi x / L), ...  Unnormalised, so the mass is diagonal.
struct AxisBasis {
    Boundary boundary;
    double length;

    double value(std::size_t j, double x) const {
        const double w = omega(j);
        if (boundary == Boundary::dirichlet_zero) return std::sin(w * x);
        if (j == 0) return 1.0;
        return j % 2 == 1 ? std::cos(w * x) : std::sin(w * x);
    }
    double slope(std::size_t j, double x) const {
        const double w = omega(j);
        if (boundary == Boundary::dirichlet_zero) return w * std::cos(w * x);
        if (j == 0) return 0.0;
        return j % 2 == 1 ? -w * std::sin(w * x) : w * std::cos(w * x);
    }
    double mass(std::size_t j) const {
        return boundary == Boundary::periodic && j == 0 ? length : 0.5 * length;
    }
    double omega(std::size_t j) const {
        if (boundary == Boundary::dirichlet_zero) return (j + 1) * std::numbers::pi / length;
        return 2.0 * std::numbers::pi * static_cast<double>((j + 1) / 2) / length;
    }
};

/// Composite 6-point Gauss-Legendre rule on [0, L].
inline void composite_gauss(double length, std::size_t cells, std::vector<double>& x, std::vector<double>& w) {
    using rule = boost::math::quadrature::gauss<double, 6>;
    const auto& a = rule::abscissa();
    const auto& wt = rule::weights();
    const double h = length / cells;
    x.clear();
    w.clear();
    for (std::size_t c = 0; c < cells; ++c) {
        const double mid = (c + 0.5) * h;
        for (std::size_t i = 0; i < a.size(); ++i)
            for (double s : {-1.0, 1.0}) {
                x.push_back(mid + s * 0.5 * h * a[i]);
                w.push_back(0.5 * h * wt[i]);
            }
    }
}

} // namespace detail

/// Ritz-Galerkin approximation u_m = sum_j c_j(t) psi_j with trigonometric modes:
///   M c' + S(c) = b(t),  S_k(c) = <A(D u_m), D psi_k>,  b_k = <f, psi_k>,
/// M diagonal. S and b use composite Gauss quadrature. The ODE is integrated with
/// the two-stage L-stable SDIRK (gamma = 1 - 1/sqrt 2) or backward Euler; each stage
/// is a convex minimisation solved by damped Newton with the clamped tangent.
///
/// In 2D the first m tensor products ordered by largest one-axis index are used.
class GalerkinSolver {
  public:
    GalerkinSolver(const ProblemSpec& spec, std::size_t m, const SolverConfig& cfg, const GalerkinOptions& opt)
        : spec_(spec), cfg_(cfg), opt_(opt), n_(spec.space.n), N_(spec.components) {
        spec.validate();
        cfg.validate();
        if (m < 1) throw InputError("galerkin: need at least one basis function");
        if (m > opt.max_basis) throw InputError("galerkin: m exceeds the basis cap " + std::to_string(opt.max_basis));
        if (opt.substeps < 1) throw InputError("galerkin: need substeps >= 1");
        build_basis(m);
        build_quadrature();
    }

    std::size_t basis() const noexcept { return modes_.size(); }
    std::size_t unknowns() const noexcept { return modes_.size() * N_; }

    /// L2 projection of g(t, .) onto the span.
    std::vector<double> project(const PointFunction& g, double t) const {
        std::vector<double> out(unknowns(), 0.0);
        std::vector<double> terms(qw_.size());
        const std::size_t M = basis();
        std::vector<double> gv(qw_.size() * N_);
        for (std::size_t q = 0; q < qw_.size(); ++q) g(t, point(q), std::span<double>(gv).subspan(q * N_, N_));
        for (std::size_t j = 0; j < M; ++j)
            for (std::size_t c = 0; c < N_; ++c) {
                for (std::size_t q = 0; q < qw_.size(); ++q) terms[q] = qw_[q] * gv[q * N_ + c] * phi_[q * M + j];
                out[j * N_ + c] = pairwise_sum(terms) / mass_[j];
            }
        for (double v : gv)
            if (!std::isfinite(v)) throw InputError("galerkin: data not finite at a quadrature point");
        return out;
    }

    /// Values of u_m on the nodes of a space grid.
    void reconstruct(std::span<const double> c, const SpaceGrid& g, std::span<double> out) const {
        const std::size_t M = basis();
        for (std::size_t j0 = 0; j0 < g.nx[0]; ++j0)
            for (std::size_t j1 = 0; j1 < (g.n == 2 ? g.nx[1] : 1); ++j1) {
                const double x = g.coord(0, j0), y = g.n == 2 ? g.coord(1, j1) : 0.0;
                const std::size_t node = g.flat(j0, j1);
                for (std::size_t cc = 0; cc < N_; ++cc) out[node * N_ + cc] = 0.0;
                for (std::size_t j = 0; j < M; ++j) {
                    double v = axis_[0].value(modes_[j][0], x);
                    if (n_ == 2) v *= axis_[1].value(modes_[j][1], y);
                    for (std::size_t cc = 0; cc < N_; ++cc) out[node * N_ + cc] += c[j * N_ + cc] * v;
                }
            }
    }

    /// Energy sum_q w_q F(|D u_m|).
    double energy(std::span<const double> c) const {
        std::vector<double> terms(qw_.size());
        parallel_for(qw_.size(), cfg_.threads, [&](std::size_t q) {
            double G[8];
            terms[q] = qw_[q] * spec_.model.energy_radial(gradient_at(q, c, G));
        });
        return pairwise_sum(terms);
    }

    /// S(c).
    void stiffness(std::span<const double> c, std::span<double> out) const {
        const std::size_t M = basis(), m = N_ * n_, Q = qw_.size();
        std::vector<double> stress(Q * m);
        parallel_for(Q, cfg_.threads, [&](std::size_t q) {
            double G[8];
            const double r = gradient_at(q, c, G);
            const double a = r == 0.0 ? 0.0 : spec_.model.diffusivity(r);
            for (std::size_t i = 0; i < m; ++i) stress[q * m + i] = G[i] == 0.0 ? 0.0 : a * G[i];
        });
        std::vector<double> terms(Q);
        for (std::size_t j = 0; j < M; ++j)
            for (std::size_t cc = 0; cc < N_; ++cc) {
                for (std::size_t q = 0; q < Q; ++q) {
                    double s = 0.0;
                    for (std::size_t i = 0; i < n_; ++i) s += stress[q * m + cc * n_ + i] * dphi_[(q * M + j) * n_ + i];
                    terms[q] = qw_[q] * s;
                }
                out[j * N_ + cc] = pairwise_sum(terms);
            }
    }

    /// dS/dc with the clamped tangent a I + b Q (x) Q.
    Eigen::MatrixXd stiffness_jacobian(std::span<const double> c) const {
        const std::size_t M = basis(), U = unknowns(), Q = qw_.size();
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(static_cast<int>(U), static_cast<int>(U));
        std::vector<double> proj(M * N_);
        for (std::size_t q = 0; q < Q; ++q) {
            double G[8];
            const double r = gradient_at(q, c, G);
            const auto tan = stress_tangent(spec_.model, r, cfg_.jacobian_floor);
            const double* d = &dphi_[q * M * n_];
            for (std::size_t j = 0; j < M; ++j)
                for (std::size_t cc = 0; cc < N_; ++cc) {
                    double s = 0.0;
                    for (std::size_t i = 0; i < n_; ++i) s += G[cc * n_ + i] * d[j * n_ + i];
                    proj[j * N_ + cc] = s;
                }
            const double w = qw_[q];
            for (std::size_t j = 0; j < M; ++j)
                for (std::size_t l = 0; l < M; ++l) {
                    double dd = 0.0;
                    for (std::size_t i = 0; i < n_; ++i) dd += d[j * n_ + i] * d[l * n_ + i];
                    for (std::size_t cc = 0; cc < N_; ++cc)
                        for (std::size_t c2 = 0; c2 < N_; ++c2)
                            J(static_cast<int>(j * N_ + cc), static_cast<int>(l * N_ + c2)) +=
                                w * ((cc == c2 ? tan.a * dd : 0.0) + tan.b * proj[j * N_ + cc] * proj[l * N_ + c2]);
                }
        }
        return J;
    }

    GalerkinResult run() {
        const std::size_t U = unknowns();
        const std::size_t sub = opt_.substeps;
        const double h = spec_.dt / static_cast<double>(sub);
        GalerkinResult out{basis(), {}, Field(spec_.trajectory_grid(), N_), {}};
        std::vector<double> c = project(spec_.u0, 0.0);
        out.coefficients.reserve(spec_.steps + 1);
        out.coefficients.push_back(c);
        reconstruct(c, spec_.space, out.u.level(0));

        const bool sdirk = opt_.scheme == GalerkinScheme::sdirk2;
        const double g = sdirk ? 1.0 - 1.0 / std::numbers::sqrt2 : 1.0;
        std::vector<double> y(U), k1(U);
        for (std::size_t k = 0; k < spec_.steps; ++k) {
            NewtonStats total;
            total.step = k + 1;
            for (std::size_t s = 0; s < sub; ++s) {
                const double t = k * spec_.dt + s * h;
                try {
                    // stage 1: U1 = c + h g K1
                    const auto u1 = stage(c, t + g * h, g * h, total);
                    if (!sdirk) {
                        c = u1;
                        continue;
                    }
                    for (std::size_t i = 0; i < U; ++i) {
                        k1[i] = (u1[i] - c[i]) / (g * h);
                        y[i] = c[i] + h * (1.0 - g) * k1[i];
                    }
                    // stage 2 at t + h; stiffly accurate, so c_{n+1} = U2
                    c = stage(y, t + h, g * h, total);
                } catch (const SolverError& e) {
                    throw SolverError(std::string("galerkin step ") + std::to_string(k + 1) + " at t = " +
                                          std::to_string(t) + ": " + e.what(),
                                      k + 1, t, e.residual());
                }
            }
            out.coefficients.push_back(c);
            reconstruct(c, spec_.space, out.u.level(k + 1));
            out.newton.push_back(total);
        }
        return out;
    }

  private:
    /// Solves M (U - y) / tau + S(U) = b(t) for U.
    std::vector<double> stage(const std::vector<double>& y, double t, double tau, NewtonStats& stats) const {
        const std::size_t U = unknowns();
        const auto b = project_load(t);
        std::vector<double> load(U);
        for (std::size_t i = 0; i < U; ++i) load[i] = mass_[i / N_] * y[i] / tau + b[i];
        double scale = detail::euclid(load);
        if (scale == 0.0) scale = 1.0;
        auto residual = [&](const std::vector<double>& u, std::vector<double>& r) {
            stiffness(u, r);
            for (std::size_t i = 0; i < U; ++i) r[i] += mass_[i / N_] * u[i] / tau - load[i];
        };
        auto merit = [&](const std::vector<double>& u) {
            std::vector<double> terms(U);
            for (std::size_t i = 0; i < U; ++i)
                terms[i] = mass_[i / N_] * 0.5 * u[i] * u[i] / tau - load[i] * u[i];
            return pairwise_sum(terms) + energy(u);
        };
        std::vector<double> u = y, r(U), trial(U), rt(U);
        residual(u, r);
        double rn = detail::euclid(r);
        std::size_t it = 0;
        while (rn > cfg_.newton_tol * scale) {
            if (it == cfg_.newton_max_iter)
                throw SolverError("Newton did not converge (relative residual " + std::to_string(rn / scale) + ")",
                                  stats.step, t, rn / scale);
            ++it;
            Eigen::MatrixXd J = stiffness_jacobian(u);
            for (std::size_t i = 0; i < U; ++i) J(static_cast<int>(i), static_cast<int>(i)) += mass_[i / N_] / tau;
            Eigen::VectorXd rhs(static_cast<int>(U));
            for (std::size_t i = 0; i < U; ++i) rhs[static_cast<int>(i)] = -r[i];
            Eigen::LDLT<Eigen::MatrixXd> ldlt(J);
            if (ldlt.info() != Eigen::Success)
                throw SolverError("Newton: Jacobian factorisation failed", stats.step, t, rn / scale);
            const Eigen::VectorXd d = ldlt.solve(rhs);
            double slope = 0.0;
            for (std::size_t i = 0; i < U; ++i) slope += r[i] * d[static_cast<int>(i)];
            double lambda = 1.0, phi0 = 0.0;
            bool have_phi = false;
            for (;;) {
                for (std::size_t i = 0; i < U; ++i) trial[i] = u[i] + lambda * d[static_cast<int>(i)];
                residual(trial, rt);
                const double tn = detail::euclid(rt);
                if (std::isfinite(tn) && tn <= (1.0 - 1e-4 * lambda) * rn) break;
                if (!have_phi) {
                    phi0 = merit(u);
                    have_phi = true;
                }
                if (std::isfinite(tn) && merit(trial) <= phi0 + 1e-4 * lambda * slope) break;
                lambda *= cfg_.damping;
                ++stats.backtracks;
                if (lambda < 1e-14) break;
            }
            u.swap(trial);
            r.swap(rt);
            rn = detail::euclid(r);
        }
        stats.iterations += it;
        stats.final_residual = std::max(stats.final_residual, rn / scale);
        return u;
    }

    /// b(t) = <f(t), psi_k>.
    std::vector<double> project_load(double t) const {
        auto b = project(spec_.forcing, t);
        for (std::size_t i = 0; i < b.size(); ++i) b[i] *= mass_[i / N_];
        return b;
    }

    std::span<const double> point(std::size_t q) const { return {&qx_[q * n_], n_}; }

    double gradient_at(std::size_t q, std::span<const double> c, double* G) const {
        const std::size_t M = basis();
        for (std::size_t i = 0; i < N_ * n_; ++i) G[i] = 0.0;
        const double* d = &dphi_[q * M * n_];
        for (std::size_t j = 0; j < M; ++j)
            for (std::size_t cc = 0; cc < N_; ++cc) {
                const double cj = c[j * N_ + cc];
                if (cj == 0.0) continue;
                for (std::size_t i = 0; i < n_; ++i) G[cc * n_ + i] += cj * d[j * n_ + i];
            }
        double s = 0.0;
        for (std::size_t i = 0; i < N_ * n_; ++i) s += G[i] * G[i];
        return std::sqrt(s);
    }

    void build_basis(std::size_t m) {
        for (std::size_t i = 0; i < n_; ++i) axis_.push_back({spec_.space.boundary, spec_.space.length(i)});
        if (n_ == 1) {
            for (std::size_t j = 0; j < m; ++j) modes_.push_back({j, 0});
        } else {
            std::size_t side = 1;
            while (side * side < m) ++side;
            for (std::size_t a = 0; a < side; ++a)
                for (std::size_t b = 0; b < side; ++b) modes_.push_back({a, b});
            std::stable_sort(modes_.begin(), modes_.end(), [](const auto& l, const auto& r) {
                const auto ml = std::max(l[0], l[1]), mr = std::max(r[0], r[1]);
                if (ml != mr) return ml < mr;
                return l[0] + l[1] < r[0] + r[1];
            });
            modes_.resize(m);
        }
        for (const auto& md : modes_) {
            double ms = axis_[0].mass(md[0]);
            if (n_ == 2) ms *= axis_[1].mass(md[1]);
            mass_.push_back(ms);
        }
    }

    void build_quadrature() {
        std::size_t top[2] = {0, 0};
        for (const auto& md : modes_)
            for (std::size_t i = 0; i < n_; ++i) top[i] = std::max(top[i], md[i] + 1);
        std::vector<double> ax[2], aw[2];
        for (std::size_t i = 0; i < n_; ++i)
            detail::composite_gauss(axis_[i].length, std::max(opt_.min_cells, 2 * top[i]), ax[i], aw[i]);
        const std::size_t n1 = n_ == 2 ? ax[1].size() : 1;
        for (std::size_t a = 0; a < ax[0].size(); ++a)
            for (std::size_t b = 0; b < n1; ++b) {
                qx_.push_back(ax[0][a]);
                if (n_ == 2) qx_.push_back(ax[1][b]);
                qw_.push_back(aw[0][a] * (n_ == 2 ? aw[1][b] : 1.0));
            }
        const std::size_t Q = qw_.size(), M = modes_.size();
        phi_.resize(Q * M);
        dphi_.resize(Q * M * n_);
        for (std::size_t q = 0; q < Q; ++q)
            for (std::size_t j = 0; j < M; ++j) {
                const double x = qx_[q * n_];
                const double v0 = axis_[0].value(modes_[j][0], x), s0 = axis_[0].slope(modes_[j][0], x);
                if (n_ == 1) {
                    phi_[q * M + j] = v0;
                    dphi_[q * M + j] = s0;
                } else {
                    const double y = qx_[q * n_ + 1];
                    const double v1 = axis_[1].value(modes_[j][1], y), s1 = axis_[1].slope(modes_[j][1], y);
                    phi_[q * M + j] = v0 * v1;
                    dphi_[(q * M + j) * 2] = s0 * v1;
                    dphi_[(q * M + j) * 2 + 1] = v0 * s1;
                }
            }
    }

    ProblemSpec spec_;
    SolverConfig cfg_;
    GalerkinOptions opt_;
    std::size_t n_, N_;
    std::vector<detail::AxisBasis> axis_;
    std::vector<std::array<std::size_t, 2>> modes_;
    std::vector<double> mass_;
    std::vector<double> qx_, qw_, phi_, dphi_;
};

inline GalerkinResult galerkin_solve(const ProblemSpec& spec, std::size_t m, const SolverConfig& cfg = {},
                                     const GalerkinOptions& opt = {}) {
    GalerkinSolver s(spec, m, cfg, opt);
    return s.run();
}

} // namespace plap
