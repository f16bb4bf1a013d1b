#include "maxreg/coefficient_io.hpp"
#include "maxreg/coefficients.hpp"
#include "maxreg/errors.hpp"
#include "maxreg/fourier.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <numbers>

using namespace maxreg;

namespace {

const double pi = std::numbers::pi;

TimeGrid horizon(double T, std::size_t n) { return TimeGrid::make(0.0, T, n, Sampling::cell_centered); }

CoefficientField scalar_field(const TimeGrid& g, const SpaceMesh& m, const std::function<double(double)>& a) {
    std::vector<cplx> v(g.n_points * m.n_cells);
    for (std::size_t j = 0; j < g.n_points; ++j)
        for (std::size_t c = 0; c < m.n_cells; ++c) v[j * m.n_cells + c] = a(g.point(j));
    return CoefficientField::certified(g, m, 1, std::move(v));
}

std::vector<FamilySpec> all_families() {
    std::vector<FamilySpec> out;
    FamilySpec s;
    s.kind = FamilyKind::constant;
    s.value = 1.5;
    out.push_back(s);
    s = {};
    s.kind = FamilyKind::sqrt_product;
    out.push_back(s);
    s.profile = "cosine";
    s.amplitude = 0.8;
    out.push_back(s);
    for (double a : {0.3, 0.45, 0.7}) {
        s = {};
        s.kind = FamilyKind::holder;
        s.alpha = a;
        s.seed = 11;
        s.profile = "linear";
        out.push_back(s);
    }
    s = {};
    s.kind = FamilyKind::lipschitz;
    s.amplitude = 0.9;
    out.push_back(s);
    s = {};
    s.kind = FamilyKind::step;
    s.value = 2.0;
    s.amplitude = 1.0;
    out.push_back(s);
    return out;
}

double column_dini(const CoefficientField& A) { return dini_integral(A.column(0), 1.0).value; }

} // namespace

TEST(Certificate, IdentityAndDiagonal) {
    const TimeGrid g = horizon(1.0, 32);
    const SpaceMesh m = SpaceMesh::make(0.0, 1.0, 4);
    const auto I = scalar_field(g, m, [](double) { return 1.0; });
    EXPECT_EQ(I.certificate(), (Certificate{1.0, 1.0}));

    std::vector<cplx> v(32 * 4 * 4, 0.0);
    for (std::size_t k = 0; k < 32 * 4; ++k) {
        v[k * 4 + 0] = 2.0;
        v[k * 4 + 3] = 3.0;
    }
    const auto D = CoefficientField::certified(g, m, 2, std::move(v));
    EXPECT_NEAR(D.lambda(), 2.0, 1e-14);
    EXPECT_NEAR(D.Lambda(), 3.0, 1e-14);
    EXPECT_TRUE(check_certificate(D, D.certificate()));
    EXPECT_FALSE(check_certificate(D, Certificate{2.1, 3.0}));
    EXPECT_FALSE(check_certificate(D, Certificate{2.0, 2.9}));
}

TEST(Certificate, ExtremaScanOfSine) {
    const TimeGrid g = TimeGrid::make(0.0, 1.0, 64);
    const auto A = scalar_field(g, SpaceMesh::make(0.0, 1.0, 4), [](double t) { return 1.0 + 0.5 * std::sin(2.0 * pi * t); });
    EXPECT_NEAR(A.lambda(), 0.5, 1e-14);
    EXPECT_NEAR(A.Lambda(), 1.5, 1e-14);
}

TEST(Certificate, RejectsNonElliptic) {
    const TimeGrid g = horizon(1.0, 16);
    const SpaceMesh m = SpaceMesh::make(0.0, 1.0, 4);
    EXPECT_THROW(scalar_field(g, m, [](double t) { return t - 0.5; }), ValidationError);
    FamilySpec s;
    s.kind = FamilyKind::sqrt_product;
    s.amplitude = -3.0;
    EXPECT_THROW(family_generator(s, g, m), ValidationError);
    // skew part does not help: Re(A xi . xi) = 0
    std::vector<cplx> v(16 * 4 * 4, 0.0);
    for (std::size_t k = 0; k < 64; ++k) {
        v[k * 4 + 1] = 1.0;
        v[k * 4 + 2] = -1.0;
    }
    EXPECT_THROW(CoefficientField::certified(g, m, 2, std::move(v)), ValidationError);
}

TEST(Cutoff, ProfileShape) {
    const double T = 2.0;
    const TimeGrid g = TimeGrid::make(-T, 3.0 * T, 256, Sampling::cell_centered);
    const auto phi = CutoffProfile::sample(g, T);
    double lip = 0.0;
    for (std::size_t j = 0; j < g.n_points; ++j) {
        const double t = g.point(j), p = phi.values[j];
        EXPECT_GE(p, 0.0);
        EXPECT_LE(p, 1.0);
        if (t >= 0.0 && t <= T) {
            EXPECT_EQ(p, 1.0);
        }
        if (t <= -0.5 * T || t >= 1.5 * T) {
            EXPECT_EQ(p, 0.0);
        }
        if (j > 0) lip = std::max(lip, std::abs(p - phi.values[j - 1]) / g.dt());
    }
    EXPECT_NEAR(lip, 2.0 / T, 1e-12);
    EXPECT_DOUBLE_EQ(CutoffProfile::evaluate(-0.25 * T, T), 0.5);
    EXPECT_DOUBLE_EQ(CutoffProfile::evaluate(1.25 * T, T), 0.5);
}

TEST(Extension, ReflectionFormulas) {
    const std::size_t N = 64;
    const TimeGrid g = horizon(1.0, N);
    const auto A = scalar_field(g, SpaceMesh::make(0.0, 1.0, 4), [](double t) { return 1.0 + t; });
    const auto R = extend_reflect(A);
    const TimeGrid& w = R.time_grid();
    ASSERT_EQ(w.n_points, 4 * N);
    EXPECT_DOUBLE_EQ(w.t_start, -1.0);
    EXPECT_EQ(R.support(), (std::pair<double, double>{-1.0, 2.0}));
    EXPECT_EQ(R.certificate(), A.certificate());
    for (std::size_t j = 0; j < 4 * N; ++j) {
        const double t = w.point(j);
        const double expected = t < 1.0 ? 1.0 + std::abs(t) : (t < 2.0 ? 3.0 - t : 0.0);
        EXPECT_NEAR(R.at(j, 1).real(), expected, 1e-14) << t;
    }
    // exact mirror about 0
    for (std::size_t i = 0; i < N; ++i) EXPECT_EQ(R.at(N - 1 - i, 0), R.at(N + i, 0));
    EXPECT_THROW(extend_reflect(A, 3), ValidationError);
    EXPECT_THROW(extend_reflect(extend_reflect(A)), ValidationError);
}

TEST(Extension, FullExtensionAgreesOnHorizonAndIsLambdaOutside) {
    const std::size_t N = 64;
    for (const auto& spec : all_families()) {
        const auto A = family_generator(spec, horizon(1.0, N), SpaceMesh::make(0.0, 1.0, 4));
        for (std::size_t L : {4u, 8u}) {
            const auto F = extend_full(A, L);
            EXPECT_EQ(F.time_grid().n_points, L * N);
            EXPECT_TRUE(check_certificate(F, A.certificate()));
            EXPECT_NEAR(certify_ellipticity(F).lambda, A.lambda(), 1e-12);
            EXPECT_LE(certify_ellipticity(F).Lambda, A.Lambda() + 1e-12);
            for (std::size_t j = 0; j < N; ++j)
                for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(F.at(N + j, c), A.at(j, c));
            for (std::size_t j = 0; j < L * N; ++j) {
                const double t = F.time_grid().point(j);
                if (t > -0.5 && t < 1.5) continue;
                for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(F.at(j, c), cplx(A.lambda()));
            }
        }
    }
}

TEST(Extension, LambdaIdentityStaysConstant) {
    const auto A = scalar_field(horizon(1.0, 32), SpaceMesh::make(0.0, 1.0, 4), [](double) { return 0.7; });
    const auto F = extend_full(A);
    EXPECT_TRUE(F.time_independent());
    EXPECT_EQ(F.at(0, 0), cplx(0.7));
}

TEST(Extension, MatrixBlendUsesLambdaIdentity) {
    const TimeGrid g = horizon(1.0, 16);
    const SpaceMesh m = SpaceMesh::make(0.0, 1.0, 4);
    std::vector<cplx> v(16 * 4 * 4);
    for (std::size_t j = 0; j < 16 * 4; ++j) {
        v[j * 4 + 0] = 2.0;
        v[j * 4 + 1] = 0.5;
        v[j * 4 + 2] = -0.5;
        v[j * 4 + 3] = 3.0;
    }
    const auto F = extend_full(CoefficientField::certified(g, m, 2, std::move(v)));
    EXPECT_EQ(F.at(0, 0, 0, 0), cplx(2.0));
    EXPECT_EQ(F.at(0, 0, 0, 1), cplx(0.0));
    EXPECT_EQ(F.at(0, 0, 1, 1), cplx(2.0));
}

// upper bounds of the extension, measured over every grid interval
TEST(Extension, ConstantsBoundedForEveryFamily) {
    const std::size_t N = 256;
    const double T = 1.0;
    for (const auto& spec : all_families()) {
        const auto A = family_generator(spec, horizon(T, N), SpaceMesh::make(0.0, 1.0, 4));
        const double M = coefficient_scale_invariant(A, FamilyStyle::all).value;
        const auto R = extend_reflect(A);
        const double r1 = coefficient_scale_invariant(R, FamilyStyle::all, -T, T).value;
        const double r2 = coefficient_scale_invariant(R, FamilyStyle::all, -T, 2.0 * T).value;
        const auto F = extend_full(A);
        const double Mn = coefficient_scale_invariant(F, FamilyStyle::all).value;
        const double L2 = A.Lambda() * A.Lambda(), l2 = A.lambda() * A.lambda();
        EXPECT_LE(r1, 3.0 * M + 1e-12) << to_string(spec.kind);
        EXPECT_LE(r2, 9.0 * M + 1e-12) << to_string(spec.kind);
        EXPECT_LE(Mn, 9.0 * M + 8.0 * L2 / T + 6.0 * (L2 + l2) / T) << to_string(spec.kind);
        EXPECT_GE(r2, M * (1.0 - 1e-12));
    }
}

TEST(Mollify, ConstantUnchangedAndCertificateKept) {
    const auto C = extend_full(scalar_field(horizon(1.0, 64), SpaceMesh::make(0.0, 1.0, 4), [](double) { return 2.0; }));
    const auto Cn = mollify(C, 8);
    for (std::size_t j = 0; j < Cn.time_grid().n_points; ++j) EXPECT_NEAR(Cn.at(j, 1).real(), 2.0, 1e-14);
    EXPECT_THROW(mollify(C, 0), ValidationError);
    for (const auto& spec : all_families()) {
        const auto F = extend_full(family_generator(spec, horizon(1.0, 64), SpaceMesh::make(0.0, 1.0, 4)));
        const auto Fn = mollify(F, 4);
        EXPECT_EQ(Fn.certificate(), F.certificate());
        EXPECT_TRUE(check_certificate(Fn, F.certificate(), 16, 7, 1e-12));
    }
    // the reflected field has zeros outside [-T, 2T)
    const auto unit = scalar_field(horizon(1.0, 16), SpaceMesh::make(0.0, 1.0, 4), [](double) { return 1.0; });
    EXPECT_THROW(mollify(extend_reflect(unit), 2), ValidationError);
}

TEST(Mollify, HalfDerivativeBmoContracts) {
    FamilySpec s;
    s.kind = FamilyKind::sqrt_product;
    const auto F = extend_full(family_generator(s, horizon(1.0, 128), SpaceMesh::make(0.0, 1.0, 4)));
    const auto fam = IntervalFamily::periodic_sliding(F.time_grid());
    const double base = bmo_seminorm(frac_derivative(F.column(0), FracOrder(0.5)), fam).value;
    for (std::size_t n : {1u, 4u, 16u, 64u}) {
        const auto Fn = mollify(F, n);
        EXPECT_LE(bmo_seminorm(frac_derivative(Fn.column(0), FracOrder(0.5)), fam).value, base + 1e-8);
    }
}

TEST(Mollify, ResultIsLipschitzInTime) {
    FamilySpec s;
    s.kind = FamilyKind::step;
    const auto F = extend_full(family_generator(s, horizon(1.0, 256), SpaceMesh::make(0.0, 1.0, 4)));
    const auto Fn = mollify(F, 8);
    double lip = 0.0;
    const double dt = Fn.time_grid().dt();
    for (std::size_t j = 1; j < Fn.time_grid().n_points; ++j) lip = std::max(lip, std::abs(Fn.at(j, 0) - Fn.at(j - 1, 0)) / dt);
    // bump of radius 1/8 against a unit jump
    EXPECT_LT(lip, 8.0 * 4.0);
    EXPECT_GT(lip, 1.0);
}

TEST(Families, ConstantIsIdentity) {
    FamilySpec s;
    s.kind = FamilyKind::constant;
    const auto A = family_generator(s, horizon(1.0, 32), SpaceMesh::make(0.0, 1.0, 4));
    EXPECT_TRUE(A.time_independent());
    EXPECT_EQ(A.at(5, 2), cplx(1.0));
    EXPECT_EQ(A.certificate(), (Certificate{1.0, 1.0}));
    EXPECT_EQ(A.descriptor().kind, "constant");
}

TEST(Families, SqrtProductAdmissibleButNotDini) {
    FamilySpec s;
    s.kind = FamilyKind::sqrt_product;
    s.amplitude = 0.5;
    const std::vector<std::size_t> res{256, 512, 1024};
    const auto si = refinement_sweep([&](std::size_t n) {
        return coefficient_scale_invariant(family_generator(s, horizon(1.0, n), SpaceMesh::make(0.0, 1.0, 4)),
                                           FamilyStyle::dyadic).value;
    }, res);
    EXPECT_FALSE(si.divergent);
    EXPECT_LT(si.spread, 1.1);
    const auto dini = refinement_sweep([&](std::size_t n) {
        return column_dini(family_generator(s, horizon(1.0, n), SpaceMesh::make(0.0, 1.0, 4)));
    }, res);
    EXPECT_TRUE(dini.divergent);
}

TEST(Families, HolderSampleHasHolderButNotScaleInvariantBound) {
    FamilySpec s;
    s.kind = FamilyKind::holder;
    s.alpha = 0.3;
    s.seed = 11;
    const std::vector<std::size_t> res{256, 512, 1024};
    auto build = [&](std::size_t n) { return family_generator(s, horizon(1.0, n), SpaceMesh::make(0.0, 1.0, 4)); };
    const auto ho = refinement_sweep([&](std::size_t n) { return holder_constant(build(n).column(0), FracOrder(0.3)).value; }, res);
    EXPECT_FALSE(ho.divergent);
    const auto si = refinement_sweep([&](std::size_t n) {
        return coefficient_scale_invariant(build(n), FamilyStyle::dyadic).value;
    }, res);
    EXPECT_TRUE(si.divergent);
}

TEST(Families, HolderSeriesIsBoundedAndSeeded) {
    const TimeGrid g = horizon(1.0, 512);
    const auto a = holder_series(g, 0.4, 3), b = holder_series(g, 0.4, 3), c = holder_series(g, 0.4, 4);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    for (const auto& v : a.values) EXPECT_LE(std::abs(v), 1.0);
    EXPECT_THROW(holder_series(g, 1.0, 0), ValidationError);
}

TEST(Families, NamesRoundTrip) {
    for (auto k : {FamilyKind::constant, FamilyKind::sqrt_product, FamilyKind::holder, FamilyKind::lipschitz, FamilyKind::step})
        EXPECT_EQ(family_kind_from_string(to_string(k)), k);
    EXPECT_THROW(family_kind_from_string("bv"), ValidationError);
}

TEST(CoefficientIo, RoundTripIsExact) {
    const auto dir = std::filesystem::temp_directory_path() / "maxreg-coef-io";
    std::filesystem::create_directories(dir);
    FamilySpec s;
    s.kind = FamilyKind::holder;
    s.seed = 9;
    s.profile = "cosine";
    const auto A = extend_full(family_generator(s, horizon(2.0, 32), SpaceMesh::make(-1.0, 1.0, 5, Boundary::neumann)));
    for (auto fmt : {BlockFormat::binary, BlockFormat::csv}) {
        const auto path = dir / (fmt == BlockFormat::binary ? "a.json" : "b.json");
        save_coefficients(path, A, fmt);
        EXPECT_EQ(load_coefficients(path), A);
    }
    EXPECT_THROW(load_coefficients(dir / "missing.json"), IoError);
    std::filesystem::remove_all(dir);
}
