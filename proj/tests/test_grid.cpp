#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "plap/grid/field.hpp"
#include "plap/grid/field_io.hpp"
#include "plap/grid/identities.hpp"
#include "plap/grid/norms.hpp"
#include "plap/grid/quotients.hpp"

using namespace plap;

namespace {

SpaceTimeGrid line_grid(std::size_t nx, std::size_t nt, Boundary b, double dt = 0.01) {
    return {SpaceGrid::line(nx, 1.0, b), nt, dt, 0.0};
}

SpaceTimeGrid square_grid(std::size_t nx, std::size_t ny, std::size_t nt, Boundary b) {
    return {SpaceGrid::square(nx, ny, 1.0, 2.0, b), nt, 0.05, 0.0};
}

Field random_field(const SpaceTimeGrid& g, std::size_t comps, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(0.0, 1.0);
    Field f(g, comps);
    for (double& v : f.values()) v = d(rng);
    return f;
}

double max_abs(const Field& f) {
    double m = 0.0;
    for (double v : f.values()) m = std::max(m, std::abs(v));
    return m;
}

} // namespace

// --- delta ------------------------------------------------------------------

TEST(Delta, SquareInTimeAtOrigin) {
    const auto g = line_grid(8, 16, Boundary::periodic, 0.125);
    const Field f = Field::sample(g, 1, [](double t, auto, std::size_t) { return t * t; });
    const Field d = delta(f, {Direction::time, 0, g.dt, 0.0});
    EXPECT_DOUBLE_EQ(d.at(0, 3, 0, 0), g.dt * g.dt);
    EXPECT_EQ(d.levels(), g.nt - 1);
}

TEST(Delta, ConstantGivesZeroInEveryDirection) {
    for (Boundary b : {Boundary::periodic, Boundary::dirichlet_zero}) {
        const auto g = square_grid(8, 6, 48, b);
        const Field f(g, 2, 3.5);
        for (Direction dir : {Direction::time, Direction::space, Direction::queer, Direction::diagonal}) {
            if (b == Boundary::dirichlet_zero && dir != Direction::time) continue;  // zero extension
            for (std::size_t axis = 0; axis < 2; ++axis) {
                const double h = dir == Direction::time ? 2 * g.dt : base_step(g, dir, axis);
                EXPECT_EQ(max_abs(delta(f, {dir, axis, h, 0.0})), 0.0) << to_string(dir);
            }
        }
    }
}

TEST(Delta, QueerOfLinearIsStep) {
    // dt = dx = 1/16 so h = 2/16 is admissible in both
    SpaceTimeGrid g{SpaceGrid::line(16, 1.0, Boundary::periodic), 20, 1.0 / 16, 0.0};
    // Both terms sit at the same shifted x, so the wrap of t + x never enters.
    const Field f = Field::sample(g, 1, [](double t, auto x, std::size_t) { return t + x[0]; });
    const double h = 2.0 / 16;
    const Field d = delta(f, {Direction::queer, 0, h, 0.0});
    for (std::size_t k = 0; k < d.levels(); ++k)
        for (std::size_t j = 0; j < 16; ++j) EXPECT_NEAR(d.at(k, j, 0, 0), h, 1e-14);
}

TEST(Delta, QueerIsTimeDifferenceAtShiftedPoint) {
    const auto g = line_grid(32, 40, Boundary::periodic, 1.0 / 32);
    const Field f = random_field(g, 2, 4);
    const double h = 3.0 / 32;
    const Field q = delta(f, {Direction::queer, 0, h, 0.0});
    const Field t = delta(f, {Direction::time, 0, h, 0.0});
    for (std::size_t k = 0; k < q.levels(); ++k)
        for (std::size_t j = 0; j < 32; ++j)
            for (std::size_t c = 0; c < 2; ++c) EXPECT_EQ(q.at(k, j, 0, c), t.shifted(k, j, 0, c, 0, 3));
}

TEST(Delta, LinearAndCommuting) {
    const auto g = square_grid(8, 8, 10, Boundary::periodic);
    const Field a = random_field(g, 1, 1), b = random_field(g, 1, 2);
    const QuotientSpec st{Direction::time, 0, 2 * g.dt, 0.0};
    const QuotientSpec sx{Direction::space, 1, 3 * g.space.dx[1], 0.0};
    const Field lhs = delta(a * 2.0 + b, st);
    const Field rhs = delta(a, st) * 2.0 + delta(b, st);
    EXPECT_LE(max_abs(lhs - rhs), 1e-14);
    const Field tx = delta(delta(a, st), sx), xt = delta(delta(a, sx), st);
    EXPECT_LE(max_abs(tx - xt), 1e-14);
}

TEST(Delta, TrimDropsLevelsAtBothEnds) {
    const auto g = line_grid(8, 64, Boundary::periodic, 1.0 / 64);
    const Field f = Field::sample(g, 1, [](double t, auto, std::size_t) { return t; });
    const Field d = delta(f, {Direction::time, 0, 4.0 / 64, 8.0 / 64});
    EXPECT_DOUBLE_EQ(d.grid().t0, 8.0 / 64);
    EXPECT_EQ(d.levels(), 64u - 8 - 8 - 4);
}

TEST(Delta, RangeErrors) {
    const auto g = line_grid(8, 16, Boundary::dirichlet_zero, 0.1);
    const Field f(g, 1);
    EXPECT_THROW(delta(f, {Direction::time, 0, 0.15, 0.0}), RangeError);
    EXPECT_THROW(delta(f, {Direction::space, 0, 9 * g.space.dx[0], 0.0}), RangeError);
    EXPECT_THROW(delta(f, {Direction::time, 0, 0.1, 0.8}), RangeError);
    EXPECT_THROW(delta(f, {Direction::space, 1, 0.1, 0.0}), RangeError);
}

TEST(Delta, DirichletZeroExtension) {
    const auto g = line_grid(8, 4, Boundary::dirichlet_zero);
    const Field f(g, 1, 1.0);
    const Field d = delta(f, {Direction::space, 0, 2 * g.space.dx[0], 0.0});
    EXPECT_EQ(d.at(0, 5, 0, 0), 0.0);
    EXPECT_EQ(d.at(0, 6, 0, 0), -1.0);
    EXPECT_EQ(d.at(0, 7, 0, 0), -1.0);
}

TEST(Gradient, DirichletEdgesZeroExtendedOrOneSided) {
    const auto g = line_grid(8, 2, Boundary::dirichlet_zero);
    const double h = g.space.dx[0];
    const Field f = Field::sample(g, 1, [](double, std::span<const double> x, std::size_t) { return 3.0 * x[0]; });
    const Field zero = space_gradient(f), sided = space_gradient(f, true);
    for (std::size_t j = 0; j < 8; ++j) EXPECT_NEAR(sided.at(1, j, 0, 0), 3.0, 1e-12) << j;
    EXPECT_NEAR(zero.at(1, 3, 0, 0), 3.0, 1e-12);
    // the last node sees a zero beyond the wall
    EXPECT_NEAR(zero.at(1, 7, 0, 0), -f.at(1, 6, 0, 0) / (2 * h), 1e-12);
}

// --- averaged / composed ---------------------------------------------------

TEST(AveragedDelta, LinearIsMeanStep) {
    const auto g = line_grid(8, 64, Boundary::periodic, 0.01);
    const Field f = Field::sample(g, 1, [](double t, auto, std::size_t) { return t; });
    const double h = 0.08;
    const Field a = averaged_delta(f, {Direction::time, 0, h, 0.0});
    for (std::size_t k = 0; k < a.levels(); ++k) EXPECT_NEAR(a.at(k, 2, 0, 0), 0.5 * (h + g.dt), 1e-14);
    EXPECT_EQ(max_abs(averaged_delta(Field(g, 1, 2.0), {Direction::time, 0, h, 0.0})), 0.0);
}

TEST(AveragedDelta, BackwardForwardOfSquare) {
    const auto g = line_grid(8, 64, Boundary::periodic, 0.01);
    const Field f = Field::sample(g, 1, [](double t, auto, std::size_t) { return t * t; });
    const double h = 0.05;
    const Field bf = backward_forward(f, {Direction::time, 0, h, 0.0});
    EXPECT_DOUBLE_EQ(bf.grid().t0, h);
    for (std::size_t k = 0; k < bf.levels(); ++k) EXPECT_NEAR(bf.at(k, 0, 0, 0), -2 * h * h, 1e-14);
    // mean over s = dt .. 5 dt of -2 s^2
    double mean = 0.0;
    for (int i = 1; i <= 5; ++i) mean += -2.0 * (i * g.dt) * (i * g.dt) / 5.0;
    const Field abf = averaged_backward_forward(f, {Direction::time, 0, h, 0.0});
    for (std::size_t k = 0; k < abf.levels(); ++k) EXPECT_NEAR(abf.at(k, 0, 0, 0), mean, 1e-14);
}

// --- identities ------------------------------------------------------------------

TEST(SummationByParts, RandomPeriodicAndDirichletAndTime) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const Boundary b = seed % 2 ? Boundary::periodic : Boundary::dirichlet_zero;
        const auto g = seed % 3 ? line_grid(37, 23, b, 0.02) : square_grid(9, 11, 13, b);
        const Field f = random_field(g, 2, 2 * seed), h = random_field(g, 2, 2 * seed + 1);
        for (std::size_t axis = 0; axis < g.space.n; ++axis) {
            const auto c = summation_by_parts_residual(f, h, {Direction::space, axis, 3 * g.space.dx[axis], 0.0});
            EXPECT_LE(c.relative(), 1e-12) << seed;
        }
        const auto ct = summation_by_parts_residual(f, h, {Direction::time, 0, 2 * g.dt, 2 * g.dt});
        EXPECT_LE(ct.relative(), 1e-12) << seed;
    }
}

TEST(SummationByParts, PeriodicHasNoBoundaryLeak) {
    // Over a full period the boundary sums cancel: sum Delta f g = sum f Delta^{-h} g.
    const auto g = line_grid(16, 4, Boundary::periodic);
    const Field f = random_field(g, 1, 7), h = random_field(g, 1, 8);
    const double step = 5 * g.space.dx[0];
    double direct = 0.0;
    for (std::size_t k = 0; k < 4; ++k)
        for (std::size_t j = 0; j < 16; ++j)
            direct += f.at(k, j, 0, 0) * (h.shifted(k, j, 0, 0, 0, -5) - h.at(k, j, 0, 0));
    const auto c = summation_by_parts_residual(f, h, {Direction::space, 0, step, 0.0});
    EXPECT_NEAR(c.lhs, direct * g.dt * g.space.dx[0], 1e-12 * c.scale);
}

TEST(SummationByParts, ConstantFieldsGiveZero) {
    const auto g = line_grid(16, 8, Boundary::dirichlet_zero);
    const auto c = summation_by_parts_residual(Field(g, 1, 2.0), Field(g, 1, 2.0),
                                               {Direction::space, 0, 2 * g.space.dx[0], 0.0});
    EXPECT_EQ(c.lhs, 0.0);
    EXPECT_EQ(c.residual(), 0.0);
}

TEST(Cancellation, RandomSeries) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> d(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        TimeSeries s{0.0, 0.01, std::vector<double>(400)};
        for (double& v : s.v) v = d(rng);
        const auto c = cancellation_residual(s, 0.5, 3.0, 0.07);
        EXPECT_LE(c.relative(), 1e-12);
    }
    TimeSeries k{0.0, 0.1, std::vector<double>(50, 4.0)};
    EXPECT_LE(cancellation_residual(k, 1.0, 3.0, 0.5).residual(), 1e-15);
    EXPECT_THROW(cancellation_residual(k, 0.2, 3.0, 0.5), RangeError);
}

TEST(Cancellation, AveragingBoundOnSine) {
    const auto g = TimeSeries::sample(10001, 0.0, 1e-3, [](double t) { return std::sin(t); });
    for (double s : {0.001, 0.05, 0.3}) {
        const auto c = averaging_bound(g, 0.0, 9.0, s, 0.5);
        EXPECT_LE(c.lhs, c.rhs);
        // rhs is a Riemann sum of int_0^9 |cos t| dt = 5 + sin(9 - 3 pi) ... via the antiderivative
        double exact = 0.0;
        const double cuts[] = {0.0, M_PI / 2, 3 * M_PI / 2, 5 * M_PI / 2, 9.0};
        for (int i = 0; i < 4; ++i) exact += std::abs(std::sin(cuts[i + 1]) - std::sin(cuts[i]));
        EXPECT_NEAR(c.rhs, exact, 1e-3);
    }
    EXPECT_THROW(averaging_bound(g, 0.0, 9.0, 0.5, 0.5), RangeError);
}

TEST(QueerSplit, ExactOnRandomFields) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto g = seed % 2 ? SpaceTimeGrid{SpaceGrid::line(32, 1.0, Boundary::periodic), 40, 1.0 / 64, 0.0}
                                : SpaceTimeGrid{SpaceGrid::square(8, 8, 1.0, 1.0, Boundary::dirichlet_zero), 30,
                                                1.0 / 18, 0.0};
        const Field f = random_field(g, 1 + seed % 2, seed);
        for (std::size_t axis = 0; axis < g.space.n; ++axis) {
            const double s = 2 * base_step(g, Direction::diagonal, axis);
            const auto c = queer_split_check(f, axis, s, g.dt);
            EXPECT_LE(c.max_residual, 1e-12 * c.scale) << seed;
            EXPECT_LE(c.max_triangle_excess, 1e-12 * c.scale) << seed;
        }
    }
}

// --- norms ------------------------------------------------------------------------

TEST(Norms, ConstantOneOnUnitMeasure) {
    SpaceTimeGrid g{SpaceGrid::line(10, 1.0, Boundary::periodic), 20, 0.05, 0.0};
    EXPECT_NEAR(l2_norm(Field(g, 1, 1.0)), 1.0, 1e-15);
    EXPECT_NEAR(field_norm(Field(g, 1, 1.0), NormSpec::lq(3.0)), 1.0, 1e-15);
    EXPECT_EQ(l2_norm(Field(g, 1, 0.0)), 0.0);
    EXPECT_EQ(field_norm(Field(g, 3, 0.0), NormSpec::sup_time_l2()), 0.0);
}

TEST(Norms, SineOnUnitInterval) {
    const auto s = SpaceGrid::line(63, 1.0, Boundary::dirichlet_zero);
    std::vector<double> v(s.nodes());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = std::sin(M_PI * s.coord(0, j));
    EXPECT_NEAR(space_lq_norm(s, 1, v, 2.0), std::sqrt(0.5), 1e-14);
}

TEST(Norms, HomogeneousAndMonotone) {
    const auto g = square_grid(6, 5, 7, Boundary::periodic);
    const Field f = random_field(g, 2, 99);
    for (double q : {1.0, 1.5, 2.0, 4.0}) {
        const NormSpec s = NormSpec::lq(q);
        EXPECT_NEAR(field_norm(f * -3.0, s), 3.0 * field_norm(f, s), 1e-12 * field_norm(f, s));
        Field bigger = f;
        for (double& v : bigger.values()) v *= 1.1;
        EXPECT_GE(field_norm(bigger, s), field_norm(f, s));
    }
    EXPECT_NEAR(field_norm(f, NormSpec::modular(OrliczFunction::power(2.0))),
                0.5 * std::pow(l2_norm(f), 2), 1e-12 * std::pow(l2_norm(f), 2));
    const double sup = field_norm(f, NormSpec::sup_time_l2());
    EXPECT_LE(l2_norm(f), sup * std::sqrt(g.span()) * (1 + 1e-14));
}

TEST(Norms, IndependentOfThreadCount) {
    const auto g = line_grid(257, 129, Boundary::periodic);
    const Field f = random_field(g, 1, 5);
    const double one = l2_norm(f, 1);
    EXPECT_EQ(one, l2_norm(f, 3));
    EXPECT_EQ(one, l2_norm(f, 8));
}

// --- derivatives -------------------------------------------------------------------

TEST(Derivatives, CentralTimeExactOnQuadratic) {
    const auto g = line_grid(8, 20, Boundary::periodic, 0.1);
    const Field f = Field::sample(g, 1, [](double t, auto, std::size_t) { return t * t; });
    const Field ut = time_derivative(f);
    EXPECT_NEAR(ut.grid().t0, 0.1, 1e-15);
    for (std::size_t k = 0; k < ut.levels(); ++k) EXPECT_NEAR(ut.at(k, 1, 0, 0), 2 * ut.grid().time(k), 1e-12);
}

TEST(Derivatives, CentralSpaceSecondOrder) {
    double prev = 0.0;
    for (std::size_t nx : {32u, 64u}) {
        const SpaceTimeGrid g{SpaceGrid::line(nx, 1.0, Boundary::dirichlet_zero), 1, 1.0, 0.0};
        const Field f = Field::sample(g, 1, [](double, auto x, std::size_t) { return std::sin(M_PI * x[0]); });
        const Field du = space_gradient(f);
        double err = 0.0;
        for (std::size_t j = 0; j < nx; ++j)
            err = std::max(err, std::abs(du.at(0, j, 0, 0) - M_PI * std::cos(M_PI * g.space.coord(0, j))));
        if (prev > 0.0) {
            EXPECT_NEAR(std::log2(prev / err), 2.0, 0.1);
        }
        prev = err;
    }
}

// --- serialisation ------------------------------------------------------------------

TEST(FieldIo, BinaryRoundTrip) {
    const auto g = square_grid(5, 4, 6, Boundary::dirichlet_zero);
    Field f = random_field(g, 3, 12);
    const Field back = decode_binary(encode_binary(f));
    ASSERT_TRUE(back.same_shape(f));
    EXPECT_EQ(back.values(), f.values());
    std::string bytes = encode_binary(f);
    bytes.pop_back();
    EXPECT_THROW(decode_binary(bytes), InputError);
}

TEST(FieldIo, CsvColumns) {
    const auto g = line_grid(4, 2, Boundary::periodic, 0.5);
    const Field f = Field::sample(g, 1, [](double t, auto x, std::size_t) { return t + x[0]; });
    const std::string s = field_csv(f).str();
    EXPECT_EQ(s.substr(0, s.find('\n')), "t,x,component,value");
    EXPECT_NE(s.find("0.5,0.75,0,1.25"), std::string::npos);
}
