#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "plap/core/error.hpp"
#include "plap/grid/grid.hpp"
#include "plap/orlicz/growth_model.hpp"
#include "plap/solver/expression.hpp"

namespace plap {

/// Pointwise data g(t, x) with N components: writes g_c(t, x) into out[c].
using PointFunction = std::function<void(double t, std::span<const double> x, std::span<double> out)>;

inline PointFunction zero_function() {
    return [](double, std::span<const double>, std::span<double> out) {
        for (double& v : out) v = 0.0;
    };
}

inline PointFunction from_expressions(std::vector<Expr> exprs) {
    return [exprs = std::move(exprs)](double t, std::span<const double> x, std::span<double> out) {
        const double y = x.size() > 1 ? x[1] : 0.0;
        for (std::size_t c = 0; c < out.size(); ++c) out[c] = exprs[c].eval(t, x[0], y);
    };
}

/// u_t - div A(Du) = f on a space grid, for `steps` implicit steps of size dt from t = 0.
struct ProblemSpec {
    GrowthModel model = GrowthModel::p_growth(2.0);
    SpaceGrid space;
    std::size_t components = 1;
    std::size_t steps = 4;
    double dt = 0.25;
    PointFunction u0 = zero_function();
    PointFunction forcing = zero_function();
    /// Closed forms, when known. Galerkin quadrature and the exact-error
    /// checks use these; the FD solver only needs the point functions.
    std::vector<Expr> u0_expr;
    std::vector<Expr> forcing_expr;

    double final_time() const { return steps * dt; }
    SpaceTimeGrid trajectory_grid() const { return {space, steps + 1, dt, 0.0}; }

    void validate() const {
        space.validate();
        if (components == 0) throw InputError("problem: need at least one component");
        if (steps < 1) throw InputError("problem: need at least one time step");
        if (!(dt > 0.0) || !std::isfinite(dt)) throw InputError("problem: need dt > 0");
    }
};

struct SolverConfig {
    double newton_tol = 1e-10;
    std::size_t newton_max_iter = 50;
    double jacobian_floor = 1e-12;
    double damping = 0.5;
    unsigned threads = 1;

    void validate() const {
        if (!(newton_tol > 0.0)) throw InputError("solver: need newton_tol > 0");
        if (newton_max_iter < 1) throw InputError("solver: need newton_max_iter >= 1");
        if (!(jacobian_floor >= 0.0) || jacobian_floor >= 1.0) throw InputError("solver: need 0 <= eps_J < 1");
        if (!(damping > 0.0 && damping < 1.0)) throw InputError("solver: damping must lie in (0, 1)");
    }
};

/// Samples g at every node of a space grid into a node-major vector.
inline void sample_nodes(const SpaceGrid& g, std::size_t comps, const PointFunction& fn, double t,
                         std::span<double> out) {
    double x[2] = {0.0, 0.0};
    for (std::size_t j0 = 0; j0 < g.nx[0]; ++j0)
        for (std::size_t j1 = 0; j1 < (g.n == 2 ? g.nx[1] : 1); ++j1) {
            x[0] = g.coord(0, j0);
            if (g.n == 2) x[1] = g.coord(1, j1);
            fn(t, std::span<const double>(x, g.n), out.subspan(g.flat(j0, j1) * comps, comps));
        }
}

/// Forcing that makes u* an exact solution: f = u*_t - div A(grad u*).
///
/// With G = grad u* (N x n), r = |G| and H_c the Hessian of u*_c,
///   div A(G)_c = a(r) tr H_c + (lambda_r(r) - a(r)) / r^2 * sum_i G_ci sum_{d,j} G_dj (H_d)_ji,
/// where lambda_r = d/dr (a r). The symbolic derivatives of u* are taken once;
/// a and lambda_r come from the model at evaluation time.
class ManufacturedForcing {
  public:
    ManufacturedForcing(const GrowthModel& model, std::vector<Expr> u_star, std::size_t dim)
        : model_(model), u_(std::move(u_star)), n_(dim) {
        if (dim != 1 && dim != 2) throw InputError("manufactured: dimension must be 1 or 2");
        const char axes[2] = {'x', 'y'};
        for (const Expr& u : u_) {
            ut_.push_back(u.derivative('t'));
            for (std::size_t i = 0; i < n_; ++i) {
                const Expr gi = u.derivative(axes[i]);
                grad_.push_back(gi);
                for (std::size_t j = 0; j < n_; ++j) hess_.push_back(gi.derivative(axes[j]));
            }
        }
    }

    std::size_t components() const noexcept { return u_.size(); }

    void operator()(double t, std::span<const double> x, std::span<double> out) const {
        const std::size_t N = u_.size();
        const double x0 = x[0], y0 = x.size() > 1 ? x[1] : 0.0;
        double G[8], H[16];
        double r2 = 0.0;
        for (std::size_t k = 0; k < N * n_; ++k) {
            G[k] = grad_[k].eval(t, x0, y0);
            r2 += G[k] * G[k];
        }
        for (std::size_t k = 0; k < N * n_ * n_; ++k) H[k] = hess_[k].eval(t, x0, y0);
        const double r = std::sqrt(r2);
        const double a = model_.diffusivity(r);
        const double excess = r > 0.0 ? (model_.radial_stiffness(r) - a) / r2 : 0.0;
        for (std::size_t c = 0; c < N; ++c) {
            double trace = 0.0, radial = 0.0;
            for (std::size_t i = 0; i < n_; ++i) {
                trace += H[(c * n_ + i) * n_ + i];
                double s = 0.0;
                for (std::size_t d = 0; d < N; ++d)
                    for (std::size_t j = 0; j < n_; ++j) s += G[d * n_ + j] * H[(d * n_ + j) * n_ + i];
                radial += G[c * n_ + i] * s;
            }
            // a * 0 stays 0 where a blows up but u* is flat to second order.
            const double div = (trace == 0.0 ? 0.0 : a * trace) + (radial == 0.0 ? 0.0 : excess * radial);
            out[c] = ut_[c].eval(t, x0, y0) - div;
        }
    }

    PointFunction as_function() const {
        auto self = std::make_shared<ManufacturedForcing>(*this);
        return [self](double t, std::span<const double> x, std::span<double> out) { (*self)(t, x, out); };
    }

  private:
    GrowthModel model_;
    std::vector<Expr> u_;
    std::size_t n_;
    std::vector<Expr> ut_, grad_, hess_;
};

inline ManufacturedForcing manufactured_forcing(const GrowthModel& model, const std::vector<Expr>& u_star,
                                                std::size_t dim) {
    if (u_star.empty() || u_star.size() > 4) throw InputError("manufactured: need 1 to 4 components");
    return ManufacturedForcing(model, u_star, dim);
}

} // namespace plap
