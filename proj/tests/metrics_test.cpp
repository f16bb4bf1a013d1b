#include "maxreg/errors.hpp"
#include "maxreg/metrics.hpp"
#include "maxreg/spacetime.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace maxreg;
using maxreg::testing::random_field;

namespace {

const double pi = std::numbers::pi;

TimeGrid horizon(std::size_t n, double T = 1.0) { return TimeGrid::make(0.0, T, n, Sampling::cell_centered); }

double p1_eigenvalue(std::size_t k, const SpaceMesh& m) {
    const double c = std::cos(static_cast<double>(k) * pi * m.h() / (m.x_hi - m.x_lo));
    return 6.0 / (m.h() * m.h()) * (1.0 - c) / (2.0 + c);
}

// sum over slices of (M u)^H (M + K_1)^{-1} (M u) dt
double l2_dual_v(const SpaceTimeField& u) {
    const P1Space s(u.mesh);
    const std::vector<cplx> ones(u.mesh.n_cells, 1.0);
    const TridiagonalLU R(s.shifted(1.0, ones));
    std::vector<cplx> y(u.dofs()), z(u.dofs());
    double acc = 0.0;
    for (std::size_t j = 0; j < u.grid().n_points; ++j) {
        s.mass().apply(u.slice(j), y);
        z = y;
        R.solve_inplace(z);
        for (std::size_t i = 0; i < y.size(); ++i) acc += (std::conj(y[i]) * z[i]).real();
    }
    return acc * u.grid().dt();
}

SpaceTimeField sine_forcing(const TimeGrid& g, const SpaceMesh& m) {
    return SpaceTimeField::from_function(g, m, [](double, double x) { return cplx(std::sin(pi * x)); });
}

CoefficientField constant_field(const TimeGrid& g, const SpaceMesh& m) {
    return CoefficientField::certified(g, m, 1, std::vector<cplx>(g.n_points * m.n_cells, 1.0));
}

} // namespace

TEST(EnergyNorm, ZeroAndTensorMode) {
    const TimeGrid g = TimeGrid::make(0.0, 2.0, 32);
    const SpaceMesh m = SpaceMesh::make(0.0, 1.0, 16);
    EXPECT_EQ(energy_norm(SpaceTimeField(g, m)), 0.0);
    const P1Space s(m);
    for (auto [w, k] : {std::pair<long, std::size_t>{0, 1}, {3, 2}, {-7, 5}}) {
        const double tau = 2.0 * pi * static_cast<double>(w) / 2.0;
        const auto u = SpaceTimeField::from_function(g, m, [&](double t, double x) {
            return std::exp(cplx(0.0, tau * t)) * std::sin(static_cast<double>(k) * pi * x);
        });
        const double phi2 = s.mass_norm2(u.slice(0));
        const auto e = energy_parts(u);
        EXPECT_NEAR(e.l2, 2.0 * phi2, 1e-13);
        EXPECT_NEAR(e.half_derivative, 2.0 * std::abs(tau) * phi2, 1e-12 * (1.0 + std::abs(tau)));
        EXPECT_NEAR(e.gradient, 2.0 * p1_eigenvalue(k, m) * phi2, 1e-10 * p1_eigenvalue(k, m));
        EXPECT_NEAR(energy_norm(u), std::sqrt(2.0 * phi2 * (1.0 + std::abs(tau) + p1_eigenvalue(k, m))), 1e-11);
    }
}

// |tau| |u|_H^2 <= |tau| |u|_V* |u|_V, so |u|_E^2 <= 3/2 (|u|_{H^1(V*)} + |u|_{L^2(V)})^2
TEST(EnergyNorm, EmbeddingFromHOneDualAndLTwoV) {
    const TimeGrid g = TimeGrid::make(0.0, 1.0, 64);
    const SpaceMesh m = SpaceMesh::make(0.0, 1.0, 12, Boundary::neumann, Boundary::dirichlet);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto u = random_field(g, m, seed);
        SpaceTimeField du = u;
        du.data = time_derivative(u.data);
        const auto e = energy_parts(u);
        const double h1_dual = std::sqrt(l2_dual_v(u) + l2_dual_v(du));
        const double l2_v = std::sqrt(e.l2 + e.gradient);
        EXPECT_LE(energy_norm(u), std::sqrt(1.5) * (h1_dual + l2_v));
    }
}

TEST(SobolevNorm, ConstantKeepsItsLTwoNorm) {
    const TimeGrid g = horizon(64, 3.0);
    const SpaceMesh m = SpaceMesh::make(0.0, 1.0, 8);
    const auto u = SpaceTimeField::from_function(g, m, [](double, double x) { return cplx(x * (1.0 - x)); });
    for (double s : {0.0, 0.25, 0.5, 1.0}) EXPECT_NEAR(sobolev_norm(u, s, NormTarget::H), l2_norm(u), 1e-13);
    EXPECT_THROW(sobolev_norm(u, 1.5, NormTarget::H), ValidationError);
    EXPECT_THROW(sobolev_norm(SpaceTimeField(TimeGrid::make(0.0, 1.0, 16), m), 0.5, NormTarget::H), ValidationError);
}

// cos(pi t / T) reflects evenly into one mode of the doubled window
TEST(SobolevNorm, CosineModeClosedForm) {
    const double T = 2.0;
    const TimeGrid g = horizon(64, T);
    const SpaceMesh m = SpaceMesh::make(0.0, 1.0, 8);
    const P1Space sp(m);
    const auto u = SpaceTimeField::from_function(g, m, [&](double t, double x) {
        return cplx(std::cos(pi * t / T) * std::sin(pi * x));
    });
    const auto phi = SpaceTimeField::from_function(g, m, [](double, double x) { return cplx(std::sin(pi * x)); });
    const double mass = sp.mass_norm2(phi.slice(0)), grad = sp.grad_norm2(phi.slice(0));
    const double tau = pi / T;
    for (double s : {0.25, 0.5, 1.0}) {
        const double w = std::pow(1.0 + tau * tau, s);
        EXPECT_NEAR(sobolev_norm(u, s, NormTarget::H), std::sqrt(w * mass * T / 2.0), 1e-12);
        EXPECT_NEAR(sobolev_norm(u, s, NormTarget::V), std::sqrt(w * (mass + grad) * T / 2.0), 1e-12);
    }
}

TEST(SobolevNorm, FirstOrderMatchesQuadrature) {
    const double T = 1.5;
    const TimeGrid g = horizon(128, T);
    const SpaceMesh m = SpaceMesh::make(0.0, 1.0, 8);
    const P1Space sp(m);
    auto a = [&](double t) { return std::exp(std::cos(pi * t / T)); };
    auto da = [&](double t) { return -pi / T * std::sin(pi * t / T) * a(t); };
    const auto u = SpaceTimeField::from_function(g, m, [&](double t, double x) { return cplx(a(t) * std::sin(pi * x)); });
    const auto phi = SpaceTimeField::from_function(g, m, [](double, double x) { return cplx(std::sin(pi * x)); });
    // composite Simpson on a fine grid
    const std::size_t K = 20000;
    double acc = 0.0;
    for (std::size_t i = 0; i <= K; ++i) {
        const double t = T * static_cast<double>(i) / static_cast<double>(K);
        const double w = (i == 0 || i == K) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        acc += w * (a(t) * a(t) + da(t) * da(t));
    }
    acc *= T / static_cast<double>(K) / 3.0;
    const double expected = std::sqrt(acc * sp.mass_norm2(phi.slice(0)));
    EXPECT_NEAR(sobolev_norm(u, 1.0, NormTarget::H), expected, 1e-8 * expected);
}

TEST(SobolevNorm, MonotoneTriangleHomogeneous) {
    const TimeGrid g = horizon(64);
    const SpaceMesh m = SpaceMesh::make(0.0, 1.0, 8, Boundary::neumann, Boundary::neumann);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto u = random_field(g, m, seed), v = random_field(g, m, seed + 100);
        for (auto target : {NormTarget::H, NormTarget::V}) {
            double prev = 0.0;
            for (double s : {0.0, 0.1, 0.3, 0.5, 0.75, 1.0}) {
                const double n = sobolev_norm(u, s, target);
                EXPECT_LE(prev, n);
                prev = n;
                EXPECT_LE(sobolev_norm(u + v, s, target),
                          (sobolev_norm(u, s, target) + sobolev_norm(v, s, target)) * (1.0 + 1e-12));
                EXPECT_NEAR(sobolev_norm(cplx(0.0, -3.0) * u, s, target), 3.0 * n, 1e-12 * n);
            }
        }
        EXPECT_LE(energy_norm(u + v), (energy_norm(u) + energy_norm(v)) * (1.0 + 1e-12));
        EXPECT_NEAR(energy_norm(-2.5 * u), 2.5 * energy_norm(u), 1e-12 * energy_norm(u));
        EXPECT_LE(dual_norm(u + v), (dual_norm(u) + dual_norm(v)) * (1.0 + 1e-12));
        EXPECT_NEAR(dual_norm(cplx(0, 2) * u), 2.0 * dual_norm(u), 1e-12 * dual_norm(u));
        EXPECT_LE(l2_norm(u + v), (l2_norm(u) + l2_norm(v)) * (1.0 + 1e-12));
    }
}

TEST(Ratio, ZeroForcingRejectedAndScalingInvariant) {
    const TimeGrid g = horizon(128);
    const SpaceMesh m = SpaceMesh::make(0.0, 1.0, 16);
    const auto A = constant_field(g, m);
    EXPECT_THROW(maxreg_ratio(SpaceTimeField(g, m), SpaceTimeField(g, m)), ValidationError);
    const auto f = sine_forcing(g, m);
    const double base = maxreg_ratio(cauchy_solve(A, f).u, f);
    for (double c : {2.0, 0.5, -4.0}) {
        const auto cf = cplx(c) * f;
        EXPECT_DOUBLE_EQ(maxreg_ratio(cauchy_solve(A, cf).u, cf), base);
    }
    const auto cf = cplx(3.0) * f;
    EXPECT_NEAR(maxreg_ratio(cauchy_solve(A, cf).u, cf), base, 1e-9 * base);
    EXPECT_THROW(maxreg_ratio(cauchy_solve(A, f).u, f, 0.7), ValidationError);
}

TEST(Ratio, AutonomousMatchesOracle) {
    const TimeGrid g = horizon(1024);
    const SpaceMesh m = SpaceMesh::make(0.0, 1.0, 64);
    const auto A = constant_field(g, m);
    const auto f = sine_forcing(g, m);
    const double r = maxreg_ratio(cauchy_solve(A, f).u, f);
    const double o = maxreg_ratio(autonomous_oracle(A, f), f);
    EXPECT_LE(std::abs(r - o) / o, 1e-3);
}

TEST(Ratio, SqrtProductStableUnderRefinement) {
    const SpaceMesh m = SpaceMesh::make(0.0, 1.0, 16);
    FamilySpec s;
    s.kind = FamilyKind::sqrt_product;
    s.profile = "cosine";
    std::vector<double> r;
    for (std::size_t n : {64u, 128u, 256u}) {
        const TimeGrid g = horizon(n);
        const auto f = SpaceTimeField::from_function(g, m, [](double t, double x) { return cplx(std::sin(pi * x) * (1.0 + t)); });
        r.push_back(maxreg_ratio(cauchy_solve(family_generator(s, g, m), f).u, f));
    }
    const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
    EXPECT_GT(*lo, 0.0);
    EXPECT_LE(*hi / *lo, 2.0);
}

TEST(NormEquivalence, ZeroDifference) {
    const TimeGrid g = horizon(8);
    const SpaceMesh m = SpaceMesh::make(0.0, 1.0, 8);
    const auto p = operator_norm_equivalence_probe(constant_field(g, m), 1, 5);
    EXPECT_EQ(p.dual_norm, 0.0);
    EXPECT_EQ(p.esssup, 0.0);
    EXPECT_FALSE(p.ratio.has_value());
}

// K(c) against M + K_1 has top eigenvalue c mu / (1 + mu) with mu the largest P1 eigenvalue
TEST(NormEquivalence, ScalarDifferenceMatchesEigenvalue) {
    const TimeGrid g = horizon(8);
    std::vector<double> ratios;
    for (std::size_t cells : {16u, 32u}) {
        const SpaceMesh m = SpaceMesh::make(0.0, 1.0, cells);
        std::vector<cplx> v(8 * cells, 1.0);
        for (std::size_t c = 0; c < cells; ++c) v[cells + c] = 1.75;
        const auto A = CoefficientField::certified(g, m, 1, v);
        const auto p = operator_norm_equivalence_probe(A, 1, 0);
        const double mu = p1_eigenvalue(cells - 1, m);
        EXPECT_NEAR(p.esssup, 0.75, 1e-15);
        EXPECT_NEAR(p.dual_norm, 0.75 * mu / (1.0 + mu), 1e-10);
        ASSERT_TRUE(p.ratio.has_value());
        EXPECT_GE(*p.ratio, 0.5);
        EXPECT_LE(*p.ratio, 1.0);
        ratios.push_back(*p.ratio);
    }
    EXPECT_NEAR(ratios[1] / ratios[0], 1.0, 0.2);
}

TEST(NormEquivalence, StableUnderMeshRefinement) {
    FamilySpec s;
    s.kind = FamilyKind::sqrt_product;
    s.profile = "cosine";
    std::vector<double> ratios;
    for (std::size_t cells : {16u, 32u, 64u}) {
        const auto A = family_generator(s, horizon(16), SpaceMesh::make(0.0, 1.0, cells));
        ratios.push_back(*operator_norm_equivalence_probe(A, 0, 8).ratio);
    }
    EXPECT_NEAR(ratios[1] / ratios[0], 1.0, 0.2);
    EXPECT_NEAR(ratios[2] / ratios[1], 1.0, 0.2);
}

TEST(PlotData, TraceAndSpectrum) {
    const TimeGrid g = horizon(32);
    const SpaceMesh m = SpaceMesh::make(0.0, 1.0, 8);
    const auto u = random_field(g, m, 4);
    const auto trace = norm_trace(u);
    ASSERT_EQ(trace.size(), 32u);
    const P1Space sp(m);
    for (std::size_t j = 0; j < 32; ++j) {
        EXPECT_DOUBLE_EQ(trace[j].first, g.point(j));
        EXPECT_NEAR(trace[j].second, std::sqrt(sp.mass_norm2(u.slice(j))), 1e-14);
    }
    const auto spec = time_spectrum(u);
    ASSERT_EQ(spec.size(), 32u);
    double total = 0.0, direct = 0.0;
    for (std::size_t k = 0; k < 32; ++k) {
        total += spec[k].second;
        if (k > 0) {
            EXPECT_LT(spec[k - 1].first, spec[k].first);
        }
    }
    for (const auto& v : u.data.values) direct += std::norm(v);
    EXPECT_NEAR(total, direct * g.dt(), 1e-12 * total);
}
