#include "maxreg/commutator.hpp"
#include "maxreg/errors.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace maxreg;
using maxreg::testing::random_signal;

namespace {

const double pi = std::numbers::pi;

TimeGrid horizon(std::size_t n) { return TimeGrid::make(0.0, 1.0, n, Sampling::cell_centered); }

// middle column of the extended field, as the commutator command uses it
TimeSignal multiplier(const FamilySpec& s, std::size_t n) {
    const auto A = family_generator(s, horizon(n), SpaceMesh::make(0.0, 1.0, 4));
    return extend_full(A, 4).column(2);
}

FamilySpec family(FamilyKind k, double alpha = 0.5, double amplitude = 0.5) {
    FamilySpec s;
    s.kind = k;
    s.alpha = alpha;
    s.amplitude = amplitude;
    s.seed = 3;
    return s;
}

TimeSignal smooth_multiplier(const TimeGrid& g) {
    return TimeSignal::from_function(g, [&](double t) {
        const double s = (t - g.t_start) / g.period();
        return cplx(1.0 + 0.5 * std::sin(2.0 * pi * s) + 0.2 * std::cos(6.0 * pi * s), 0.1 * std::sin(4.0 * pi * s));
    });
}

} // namespace

TEST(Commutator, ConstantMultiplierCommutesExactly) {
    const TimeGrid g = TimeGrid::make(-1.0, 3.0, 128, Sampling::cell_centered);
    const TimeSignal a = TimeSignal::from_function(g, [](double) { return cplx(2.5, -1.0); });
    const TimeSignal u = random_signal(g, 3, 1);
    for (double al : {0.25, 0.5, 0.9}) EXPECT_EQ(maxreg::testing::max_abs(commutator_apply(a, FracOrder(al), u)), 0.0);
}

TEST(Commutator, ActionOnConstants) {
    const TimeGrid g = TimeGrid::make(0.0, 2.0, 64);
    const TimeSignal a = smooth_multiplier(g);
    const TimeSignal one = TimeSignal::from_function(g, [](double) { return cplx(1.0); });
    TimeSignal expected = frac_derivative(a, FracOrder(0.5));
    expected *= -1.0;
    EXPECT_LT(maxreg::testing::max_abs_diff(commutator_apply(a, FracOrder(0.5), one), expected), 1e-12);
}

TEST(Commutator, Bilinear) {
    const TimeGrid g = TimeGrid::make(0.0, 1.0, 128);
    const TimeSignal a = smooth_multiplier(g), b = random_signal(g, 1, 3);
    const TimeSignal u = random_signal(g, 1, 4), v = random_signal(g, 1, 5);
    const FracOrder al(0.5);
    EXPECT_EQ(commutator_apply(2.0 * a, al, u), 2.0 * commutator_apply(a, al, u));
    const TimeSignal lin = commutator_apply(a + b, al, u + v);
    const TimeSignal sum = commutator_apply(a, al, u) + commutator_apply(a, al, v) + commutator_apply(b, al, u) +
                           commutator_apply(b, al, v);
    EXPECT_LE(time_norm(lin - sum), 1e-12 * time_norm(sum));
}

TEST(Commutator, AdjointRelation) {
    const TimeGrid g = TimeGrid::make(0.0, 1.0, 256);
    const TimeSignal a = smooth_multiplier(g);
    for (double al : {0.3, 0.5}) {
        const TimeSignal u = random_signal(g, 2, 7), v = random_signal(g, 2, 8);
        const cplx l = time_inner_product(commutator_apply(a, FracOrder(al), u), v);
        const cplx r = time_inner_product(u, commutator_adjoint(a, FracOrder(al), v));
        EXPECT_LE(std::abs(l - r), 1e-12 * std::abs(l));
    }
    EXPECT_THROW(commutator_apply(a, FracOrder(0.5), random_signal(horizon(64), 1, 0)), ValidationError);
}

TEST(NormEstimate, DegenerateForConstants) {
    const TimeSignal a = TimeSignal::from_function(horizon(64), [](double) { return cplx(3.0); });
    const auto p = commutator_norm_estimate(a, FracOrder(0.5));
    EXPECT_EQ(p.estimate, 0.0);
    EXPECT_TRUE(p.degenerate);
    EXPECT_FALSE(p.ratio.has_value());
    EXPECT_THROW(commutator_norm_estimate(a, FracOrder(0.5), 8), ValidationError);
}

TEST(NormEstimate, HomogeneousAndAboveProbeRatios) {
    const TimeGrid g = horizon(128);
    const TimeSignal a = smooth_multiplier(g);
    const auto p = commutator_norm_estimate(a, FracOrder(0.5), 16, 5);
    const auto q = commutator_norm_estimate(-2.0 * a, FracOrder(0.5), 16, 5);
    EXPECT_DOUBLE_EQ(q.estimate, 2.0 * p.estimate);
    EXPECT_DOUBLE_EQ(q.bmo_value, 2.0 * p.bmo_value);
    ASSERT_TRUE(p.ratio.has_value());
    EXPECT_NEAR(*p.ratio, p.estimate / p.bmo_value, 1e-15);
    for (std::uint64_t s = 0; s < 20; ++s) {
        const TimeSignal u = random_signal(g, 1, 50 + s);
        EXPECT_LE(time_norm(commutator_apply(a, FracOrder(0.5), u)), p.estimate * time_norm(u) * (1.0 + 1e-9));
    }
    EXPECT_GE(p.n_probes, 16u);
}

TEST(NormEstimate, SqrtMultiplierStaysBounded) {
    const auto coarse = commutator_norm_estimate(multiplier(family(FamilyKind::sqrt_product), 256), FracOrder(0.5));
    const auto fine = commutator_norm_estimate(multiplier(family(FamilyKind::sqrt_product), 1024), FracOrder(0.5));
    EXPECT_GT(coarse.estimate, 0.0);
    EXPECT_NEAR(fine.estimate / coarse.estimate, 1.0, 0.20);
}

// Hoelder exponent 0.2 < 1/2: high octaves contribute 2^((1/2 - 0.2) j)
TEST(NormEstimate, RoughHolderMultiplierUnbounded) {
    const std::vector<std::size_t> res{256, 512, 1024};
    const auto v = refinement_sweep([](std::size_t n) {
        return commutator_norm_estimate(multiplier(family(FamilyKind::holder, 0.2), n), FracOrder(0.5)).estimate;
    }, res);
    EXPECT_TRUE(v.divergent);
    for (double gr : v.growth) EXPECT_GE(gr, 0.25);
}

TEST(VectorLift, AggregateBoundedByWorstColumn) {
    const std::size_t n = 128;
    FamilySpec s = family(FamilyKind::sqrt_product);
    s.profile = "cosine";
    const auto A = extend_full(family_generator(s, horizon(n / 4), SpaceMesh::make(0.0, 1.0, 6)), 4);
    const auto est = column_estimates(A, FracOrder(0.5), 16, 1);
    const double worst = *std::max_element(est.begin(), est.end());
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const TimeSignal u = random_signal(A.time_grid(), 6, seed);
        const double lhs = cell_aggregate_norm(vector_commutator_apply(A, FracOrder(0.5), u), A.mesh());
        EXPECT_LE(lhs, worst * cell_aggregate_norm(u, A.mesh()) * (1.0 + 1e-6));
    }
}

TEST(Factorization, AutonomousHasNoCommutator) {
    const SpaceMesh m = SpaceMesh::make(0.0, 1.0, 16);
    const auto A = extend_full(family_generator(family(FamilyKind::constant), horizon(64), m), 4);
    const auto f = SpaceTimeField::from_function(A.time_grid(), m, [](double t, double x) {
        return cplx(std::sin(pi * x) * std::exp(-10.0 * (t - 0.5) * (t - 0.5)));
    });
    SolverOptions o;
    const auto r = factorization_check(A, f, o);
    EXPECT_LE(r.residual, 10.0 * o.tolerance);
    EXPECT_LE(r.commutator_share, 1e-14);
}

TEST(Factorization, MollifiedSqrtSatisfiesIdentity) {
    const SpaceMesh m = SpaceMesh::make(0.0, 1.0, 16);
    FamilySpec s = family(FamilyKind::sqrt_product);
    s.profile = "cosine";
    const auto A = mollify(extend_full(family_generator(s, horizon(64), m), 4), 16);
    const auto f = SpaceTimeField::from_function(A.time_grid(), m, [](double t, double x) {
        return cplx(std::sin(pi * x) * std::exp(-10.0 * (t - 0.5) * (t - 0.5)));
    });
    const auto r = factorization_check(A, f);
    EXPECT_LE(r.residual, 1e-6);
    EXPECT_GT(r.commutator_share, 1e-4);
    EXPECT_EQ(factorization_check(A, SpaceTimeField(A.time_grid(), m)).residual, 0.0);
}

TEST(Spearman, RanksWithTies) {
    EXPECT_DOUBLE_EQ(spearman({1, 2, 3, 4}, {10, 20, 30, 40}), 1.0);
    EXPECT_DOUBLE_EQ(spearman({1, 2, 3, 4}, {4, 3, 2, 1}), -1.0);
    EXPECT_NEAR(spearman({1, 1, 2, 3}, {0, 0, 5, 9}), 1.0, 1e-15);
    EXPECT_THROW(spearman({1}, {1}), ValidationError);
}

TEST(Spearman, BmoRankingMatchesCommutatorRanking) {
    const std::vector<FamilySpec> fams{
        family(FamilyKind::constant),          family(FamilyKind::lipschitz, 0.5, 0.2),
        family(FamilyKind::lipschitz, 0.5, 0.6), family(FamilyKind::sqrt_product, 0.5, 0.3),
        family(FamilyKind::sqrt_product, 0.5, 0.8), family(FamilyKind::holder, 0.45, 0.4),
        family(FamilyKind::holder, 0.3, 0.5),    family(FamilyKind::step, 0.5, 0.5),
    };
    std::vector<double> bmo, est;
    for (const auto& s : fams) {
        const auto p = commutator_norm_estimate(multiplier(s, 256), FracOrder(0.5));
        bmo.push_back(p.bmo_value);
        est.push_back(p.estimate);
    }
    EXPECT_GE(spearman(bmo, est), 0.9);
}
