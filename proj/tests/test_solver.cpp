#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "plap/grid/norms.hpp"
#include "plap/solver/discretization.hpp"
#include "plap/solver/expression.hpp"
#include "plap/solver/fd_solver.hpp"
#include "plap/solver/problem.hpp"

using namespace plap;

namespace {

ProblemSpec heat_problem(std::size_t nx, std::size_t steps, double dt) {
    ProblemSpec s;
    s.model = GrowthModel::p_growth(2.0);
    s.space = SpaceGrid::line(nx, 1.0, Boundary::dirichlet_zero);
    s.steps = steps;
    s.dt = dt;
    s.u0_expr = {Expr::parse("sin(pi*x)")};
    s.u0 = from_expressions(s.u0_expr);
    return s;
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

} // namespace

// --- expressions -----------------------------------------------------------------

TEST(Expression, ParseAndEvaluate) {
    EXPECT_DOUBLE_EQ(Expr::parse("1 + 2*3 - 4/2").eval(0), 5.0);
    EXPECT_DOUBLE_EQ(Expr::parse("-2^2").eval(0), -4.0);
    EXPECT_DOUBLE_EQ(Expr::parse("2^3^2").eval(0), 512.0);
    EXPECT_NEAR(Expr::parse("exp(-t)*sin(2*pi*x)").eval(0.5, 0.125), std::exp(-0.5) * std::sin(M_PI / 4), 1e-15);
    EXPECT_DOUBLE_EQ(Expr::parse("abs(t-0.37)^0.75").eval(0.37 + 16.0), 8.0);
    EXPECT_DOUBLE_EQ(Expr::parse("step(t - 1) + sign(-y)").eval(1.0, 0.0, 2.0), 0.0);
    EXPECT_DOUBLE_EQ(Expr::parse("1e-3*x").eval(0, 2.0), 2e-3);
}

TEST(Expression, RejectsBadInput) {
    EXPECT_THROW(Expr::parse("sin(x"), DescriptorError);
    EXPECT_THROW(Expr::parse("foo(x)"), DescriptorError);
    EXPECT_THROW(Expr::parse("x +"), DescriptorError);
    EXPECT_THROW(Expr::parse("x $ 2"), DescriptorError);
    EXPECT_THROW(Expr::parse("z"), DescriptorError);
}

TEST(Expression, DerivativesAgreeWithFiniteDifferences) {
    const char* cases[] = {"exp(-t)*sin(2*pi*x)", "x^3 - 2*x*y + cos(y)^2", "sqrt(1 + x*x)/(2 + t)",
                           "abs(x - 0.3)^1.5", "log(2 + sin(x*t))", "exp(x)^t"};
    for (const char* c : cases) {
        const Expr e = Expr::parse(c);
        for (char v : {'t', 'x', 'y'}) {
            const Expr d = e.derivative(v);
            const double t = 0.7, x = 0.41, y = -0.2, h = 1e-6;
            auto at = [&](double s) {
                return e.eval(v == 't' ? t + s : t, v == 'x' ? x + s : x, v == 'y' ? y + s : y);
            };
            EXPECT_NEAR(d.eval(t, x, y), (at(h) - at(-h)) / (2 * h), 1e-6) << c << " d/d" << v;
        }
    }
}

// --- manufactured forcing ------------------------------------------------------------

TEST(Manufactured, HeatMode) {
    const auto mf = manufactured_forcing(GrowthModel::p_growth(2.0), {Expr::parse("exp(-t)*sin(pi*x)")}, 1);
    for (double x : {0.1, 0.5, 0.77}) {
        double x0[1] = {x}, out[1];
        mf(0.3, x0, out);
        EXPECT_NEAR(out[0], (M_PI * M_PI - 1.0) * std::exp(-0.3) * std::sin(M_PI * x), 1e-12);
    }
}

TEST(Manufactured, ZeroAndLinearInSpace) {
    const auto zero = manufactured_forcing(GrowthModel::p_growth(3.0), {Expr::parse("0")}, 2);
    double x[2] = {0.3, 0.4}, out[1];
    zero(0.5, x, out);
    EXPECT_EQ(out[0], 0.0);
    const auto lin = manufactured_forcing(GrowthModel::p_growth(4.0, 1.0), {Expr::parse("t*x")}, 1);
    lin(0.5, x, out);
    EXPECT_DOUBLE_EQ(out[0], 0.3);
}

TEST(Manufactured, MatchesNumericalDivergence) {
    // div A(grad u*) by nested central differences on the closed form.
    for (const auto& model : {GrowthModel::p_growth(3.0), GrowthModel::p_growth(1.5, 0.1),
                              GrowthModel::orlicz(OrliczFunction::carreau(1.5, 1.0, 0.3, 0.2), 0.0)}) {
        const std::vector<Expr> u = {Expr::parse("exp(-t)*sin(2*pi*x)*cos(pi*y)"), Expr::parse("x*y + t*x^2")};
        const auto mf = manufactured_forcing(model, u, 2);
        const double t = 0.3, h = 1e-4;
        auto stress = [&](double x, double y) {
            Mat q(2, 2);
            for (std::size_t c = 0; c < 2; ++c) {
                q(c, 0) = (u[c].eval(t, x + h, y) - u[c].eval(t, x - h, y)) / (2 * h);
                q(c, 1) = (u[c].eval(t, x, y + h) - u[c].eval(t, x, y - h)) / (2 * h);
            }
            return model.stress(q);
        };
        for (double x : {0.13, 0.6}) {
            const double y = 0.37;
            double xs[2] = {x, y}, out[2];
            mf(t, xs, out);
            for (std::size_t c = 0; c < 2; ++c) {
                const double div = (stress(x + h, y)(c, 0) - stress(x - h, y)(c, 0)) / (2 * h) +
                                   (stress(x, y + h)(c, 1) - stress(x, y - h)(c, 1)) / (2 * h);
                const double ut = (u[c].eval(t + h, x, y) - u[c].eval(t - h, x, y)) / (2 * h);
                EXPECT_NEAR(out[c], ut - div, 1e-4 * (1 + std::abs(div))) << model.describe();
            }
        }
    }
}

// --- discretisation ----------------------------------------------------------------------

TEST(Discretization, QuadraticCaseIsStandardLaplacian) {
    const auto g1 = SpaceGrid::line(8, 1.0, Boundary::periodic);
    const Discretization d1(g1, 1);
    std::vector<double> u(8, 0.0), out(8);
    u[3] = 1.0;
    d1.gradient(GrowthModel::p_growth(2.0), u, out);
    const double h = g1.dx[0];
    EXPECT_NEAR(out[3], 2.0 / h, 1e-12);
    EXPECT_NEAR(out[2], -1.0 / h, 1e-12);
    EXPECT_NEAR(out[4], -1.0 / h, 1e-12);
    EXPECT_NEAR(out[0], 0.0, 1e-12);

    const auto g2 = SpaceGrid::square(6, 5, 1.0, 1.0, Boundary::dirichlet_zero);
    const Discretization d2(g2, 1);
    std::vector<double> v(30, 0.0), o2(30);
    v[g2.flat(2, 2)] = 1.0;
    d2.gradient(GrowthModel::p_growth(2.0), v, o2);
    const double hx = g2.dx[0], hy = g2.dx[1];
    // 5-point stencil scaled by the cell measure hx hy.
    EXPECT_NEAR(o2[g2.flat(2, 2)], (2 / (hx * hx) + 2 / (hy * hy)) * hx * hy, 1e-12);
    EXPECT_NEAR(o2[g2.flat(1, 2)], -hy / hx, 1e-12);
    EXPECT_NEAR(o2[g2.flat(2, 3)], -hx / hy, 1e-12);
    EXPECT_NEAR(o2[g2.flat(1, 1)], 0.0, 1e-12);
    EXPECT_NEAR(o2[g2.flat(3, 3)], 0.0, 1e-12);
}

TEST(Discretization, GradientIsDerivativeOfEnergy) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (const auto& model : {GrowthModel::p_growth(3.0), GrowthModel::p_growth(1.5, 0.1)}) {
        const auto g = SpaceGrid::square(5, 4, 1.0, 1.0, Boundary::periodic);
        const Discretization d(g, 2);
        std::vector<double> u(d.unknowns()), grad(d.unknowns());
        for (double& v : u) v = nd(rng);
        d.gradient(model, u, grad);
        const double h = 1e-6;
        for (std::size_t i = 0; i < u.size(); i += 3) {
            auto up = u, um = u;
            up[i] += h;
            um[i] -= h;
            EXPECT_NEAR(grad[i], (d.energy(model, up) - d.energy(model, um)) / (2 * h), 1e-5 * (1 + std::abs(grad[i])));
        }
    }
}

TEST(Discretization, HessianMatchesGradientDifferences) {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> nd(0.0, 1.0);
    const auto model = GrowthModel::p_growth(3.0, 0.2);
    const auto g = SpaceGrid::square(4, 5, 1.0, 1.0, Boundary::dirichlet_zero);
    const Discretization d(g, 2);
    const std::size_t nu = d.unknowns();
    std::vector<double> u(nu);
    for (double& v : u) v = nd(rng);
    std::vector<Eigen::Triplet<double>> trip;
    d.hessian_triplets(model, u, 0.0, trip);
    Eigen::SparseMatrix<double> H(static_cast<int>(nu), static_cast<int>(nu));
    H.setFromTriplets(trip.begin(), trip.end());
    const Eigen::MatrixXd dense(H);
    EXPECT_LE((dense - dense.transpose()).norm(), 1e-12 * dense.norm());
    const double h = 1e-6;
    std::vector<double> gp(nu), gm(nu);
    for (std::size_t j = 0; j < nu; j += 5) {
        auto up = u, um = u;
        up[j] += h;
        um[j] -= h;
        d.gradient(model, up, gp);
        d.gradient(model, um, gm);
        for (std::size_t i = 0; i < nu; ++i)
            EXPECT_NEAR(dense(static_cast<int>(i), static_cast<int>(j)), (gp[i] - gm[i]) / (2 * h),
                        1e-5 * (1 + std::abs(dense(static_cast<int>(i), static_cast<int>(j)))));
    }
}

// --- implicit step / solve ---------------------------------------------------------------------

TEST(StepImplicit, HeatEigenvectorDecaysByDiscreteFactor) {
    // Discrete Laplacian eigenvalue of sin(pi x) on the interior nodes.
    const auto spec = heat_problem(63, 1, 1e-3);
    const double h = spec.space.dx[0];
    const double lambda = 4.0 / (h * h) * std::pow(std::sin(M_PI * h / 2), 2);
    const auto u0 = initial_state(spec);
    NewtonStats st;
    const auto u1 = step_implicit(spec, SolverConfig{}, u0, 0.0, &st);
    for (std::size_t j = 0; j < u0.size(); ++j) EXPECT_NEAR(u1[j], u0[j] / (1 + lambda * spec.dt), 1e-12);
    // and lambda = pi^2 up to O(h^2)
    EXPECT_NEAR(lambda, M_PI * M_PI, M_PI * M_PI * h * h);
    EXPECT_LE(st.iterations, 2u);
}

TEST(StepImplicit, ZeroIsFixedPoint) {
    ProblemSpec spec;
    spec.model = GrowthModel::p_growth(3.0);
    spec.space = SpaceGrid::square(6, 6, 1.0, 1.0, Boundary::periodic);
    spec.dt = 1e-2;
    std::vector<double> zero(36, 0.0);
    NewtonStats st;
    EXPECT_EQ(max_abs(step_implicit(spec, SolverConfig{}, zero, 0.0, &st)), 0.0);
    EXPECT_EQ(st.iterations, 0u);
}

TEST(Solve, HeatMatchesExactSolution) {
    double prev = 0.0;
    for (std::size_t nx : {31u, 63u}) {
        const double h = 1.0 / (nx + 1);
        const std::size_t steps = static_cast<std::size_t>(std::llround(0.1 / (h * h)));
        const auto spec = heat_problem(nx, steps, 0.1 / steps);
        const auto tr = solve(spec, SolverConfig{});
        Field exact = Field::sample(tr.u.grid(), 1, [](double t, auto x, std::size_t) {
            return std::exp(-M_PI * M_PI * t) * std::sin(M_PI * x[0]);
        });
        const double err = l2_norm(tr.u - exact);
        EXPECT_LE(err, 5e-3);
        if (prev > 0.0) {
            EXPECT_GE(std::log2(prev / err), 1.8);
        }
        prev = err;
    }
}

TEST(Solve, ZeroDataGivesZeroTrajectory) {
    ProblemSpec spec;
    spec.model = GrowthModel::p_growth(1.5);
    spec.space = SpaceGrid::line(16, 1.0, Boundary::dirichlet_zero);
    spec.steps = 5;
    spec.dt = 0.01;
    const auto tr = solve(spec, SolverConfig{});
    EXPECT_EQ(max_abs(tr.u.values()), 0.0);
    EXPECT_EQ(tr.newton.size(), 5u);
}

TEST(Solve, CubicManufacturedConvergesQuickly) {
    ProblemSpec spec;
    spec.model = GrowthModel::p_growth(3.0);
    spec.space = SpaceGrid::line(64, 1.0, Boundary::periodic);
    spec.steps = 50;
    spec.dt = 1e-3;
    const std::vector<Expr> ustar = {Expr::parse("exp(-t)*sin(2*pi*x)")};
    spec.u0 = from_expressions(ustar);
    spec.forcing = manufactured_forcing(spec.model, ustar, 1).as_function();
    const auto tr = solve(spec, SolverConfig{});
    for (const auto& st : tr.newton) {
        EXPECT_LE(st.iterations, 10u);
        EXPECT_LE(st.final_residual, 1e-10);
    }
    Field exact = Field::sample(tr.u.grid(), 1, [&](double t, auto x, std::size_t) { return ustar[0].eval(t, x[0]); });
    EXPECT_LE(l2_norm(tr.u - exact) / l2_norm(exact), 5e-3);
}

TEST(Solve, EnergyDissipatesWithoutForcing) {
    for (const auto& model : {GrowthModel::p_growth(3.0), GrowthModel::p_growth(1.5), GrowthModel::p_growth(4.0, 0.5)}) {
        ProblemSpec spec;
        spec.model = model;
        spec.space = SpaceGrid::square(12, 10, 1.0, 1.0, Boundary::dirichlet_zero);
        spec.steps = 20;
        spec.dt = 5e-3;
        spec.u0 = from_expressions({Expr::parse("sin(pi*x)*sin(pi*y)*(1 + x)")});
        const auto tr = solve(spec, SolverConfig{});
        Discretization d(spec.space, 1);
        double prev = d.energy(model, tr.u.level(0));
        for (std::size_t k = 1; k < tr.u.levels(); ++k) {
            const double e = d.energy(model, tr.u.level(k));
            EXPECT_LE(e, prev * (1 + 1e-9) + 1e-14) << model.describe() << " step " << k;
            prev = e;
        }
    }
}

TEST(Solve, ComparisonPrinciple) {
    ProblemSpec spec;
    spec.model = GrowthModel::p_growth(3.0);
    spec.space = SpaceGrid::line(40, 1.0, Boundary::dirichlet_zero);
    spec.steps = 40;
    spec.dt = 2e-3;
    spec.u0 = from_expressions({Expr::parse("step(x - 0.3)*step(0.6 - x)")});
    spec.forcing = from_expressions({Expr::parse("abs(sin(7*x))*t")});
    const auto tr = solve(spec, SolverConfig{});
    double lo = 0.0;
    for (double v : tr.u.values()) lo = std::min(lo, v);
    EXPECT_GE(lo, -1e-10);
}

TEST(Solve, NewtonFailureCarriesStep) {
    ProblemSpec spec = heat_problem(15, 3, 0.01);
    spec.model = GrowthModel::p_growth(4.0);
    SolverConfig cfg;
    cfg.newton_max_iter = 1;
    cfg.newton_tol = 1e-15;
    try {
        solve(spec, cfg);
        FAIL() << "expected a solver error";
    } catch (const SolverError& e) {
        EXPECT_EQ(e.step(), 1u);
        EXPECT_GT(e.residual(), 0.0);
    }
}
