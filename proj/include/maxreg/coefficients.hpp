#pragma once

#include "maxreg/bmo.hpp"
#include "maxreg/fourier.hpp"
#include "maxreg/mesh.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace maxreg {

/// Ellipticity bounds: lambda |xi|^2 <= Re(A xi . conj xi), |A xi . zeta| <= Lambda |xi||zeta|.
struct Certificate {
    double lambda = 0.0;
    double Lambda = 0.0;
    bool operator==(const Certificate&) const = default;
};

/// Provenance of a coefficient field, carried into reports.
struct CoefficientDescriptor {
    std::string kind = "custom";
    std::uint64_t seed = 0;
    std::map<std::string, double> params;
    bool operator==(const CoefficientDescriptor&) const = default;
};

/// Matrix-valued A(t, x) sampled at the points of a TimeGrid and at the cell
/// midpoints of a SpaceMesh. Immutable once built.
///
/// `support` is the time window where the field is defined (and elliptic);
/// samples outside it are zero. `horizon` is the T of the original Cauchy
/// problem on [0, T].
class CoefficientField {
public:
    CoefficientField(TimeGrid grid, SpaceMesh mesh, std::size_t matrix_dim, std::vector<cplx> values,
                     double horizon, std::pair<double, double> support, Certificate certificate,
                     CoefficientDescriptor descriptor = {});

    /// Builds the field and certifies it from the samples; throws if not elliptic.
    static CoefficientField certified(TimeGrid grid, SpaceMesh mesh, std::size_t matrix_dim,
                                      std::vector<cplx> values, CoefficientDescriptor descriptor = {});

    const TimeGrid& time_grid() const { return grid_; }
    const SpaceMesh& mesh() const { return mesh_; }
    std::size_t matrix_dim() const { return dim_; }
    std::size_t cells() const { return mesh_.n_cells; }
    std::span<const cplx> values() const { return values_; }

    cplx at(std::size_t j, std::size_t cell, std::size_t r = 0, std::size_t c = 0) const {
        return values_[((j * mesh_.n_cells + cell) * dim_ + r) * dim_ + c];
    }
    /// All cell samples at time index j (matrix entries interleaved).
    std::span<const cplx> slice(std::size_t j) const {
        const std::size_t stride = mesh_.n_cells * dim_ * dim_;
        return {values_.data() + j * stride, stride};
    }
    /// A(., x_cell) as a time signal of dimension matrix_dim^2.
    TimeSignal column(std::size_t cell) const;

    const Certificate& certificate() const { return cert_; }
    double lambda() const { return cert_.lambda; }
    double Lambda() const { return cert_.Lambda; }
    double horizon() const { return horizon_; }
    std::pair<double, double> support() const { return support_; }
    const CoefficientDescriptor& descriptor() const { return descriptor_; }

    /// True if every cell column is constant in time to the given tolerance.
    bool time_independent(double tol = 0.0) const;
    /// Time average per cell (matrix entries interleaved).
    std::vector<cplx> time_average() const;

    bool operator==(const CoefficientField&) const = default;

private:
    TimeGrid grid_;
    SpaceMesh mesh_;
    std::size_t dim_;
    std::vector<cplx> values_;
    double horizon_;
    std::pair<double, double> support_;
    Certificate cert_;
    CoefficientDescriptor descriptor_;
};

/// Largest lambda and smallest Lambda valid on every sample inside the
/// support: min eigenvalue of the Hermitian part and max operator norm.
/// Throws ValidationError if lambda <= 0.
Certificate certify_ellipticity(const CoefficientField& A);

/// Checks a certificate on every sample by the matrix criterion and by
/// random probe directions xi, zeta.
bool check_certificate(const CoefficientField& A, const Certificate& cert, std::size_t probes = 16,
                       std::uint64_t seed = 7, double tol = 1e-12);

/// phi = 1 on [0, T], 0 outside [-T/2, 3T/2], linear in between.
struct CutoffProfile {
    double T = 1.0;
    std::vector<double> values;
    static double evaluate(double t, double T);
    static CutoffProfile sample(const TimeGrid& grid, double T);
};

/// Even reflection about t = 0 to [-T, 0) and about t = T to [T, 2T). The
/// result lives on the window [-T, (window_factor - 1) T) with the same dt;
/// samples outside [-T, 2T) are zero and the support is [-T, 2T).
/// The input must be on a cell-centered grid over [0, T).
CoefficientField extend_reflect(const CoefficientField& A, std::size_t window_factor = 4);

/// A# = phi * A_reflected + (1 - phi) * lambda * I on the whole window.
CoefficientField extend_full(const CoefficientField& A, std::size_t window_factor = 4);

/// Circular time convolution with rho_n(t) = n rho(n t), rho the unit bump
/// exp(-1/(1-t^2)) normalized to unit discrete mass. Keeps the certificate.
CoefficientField mollify(const CoefficientField& A, std::size_t n);

enum class FamilyKind { constant, sqrt_product, holder, lipschitz, step };

std::string to_string(FamilyKind k);
FamilyKind family_kind_from_string(const std::string& s);

/// Parameters of a built-in coefficient family. All families are scalar:
///   constant      A = value
///   sqrt_product  A = value + amplitude |t - t0|^(1/2) p(x)
///   holder        A = value + amplitude g_alpha(t) p(x), g a lacunary random series
///   lipschitz     A = value + amplitude sin(2 pi (t - t_start) / T) p(x)
///   step          A = value + amplitude [t >= t0] p(x)
/// with p(x) one of "constant" (1), "cosine" ((1 + cos(2 pi s))/2) or
/// "linear" (s), s the relative position in the mesh.
struct FamilySpec {
    FamilyKind kind = FamilyKind::constant;
    double value = 1.0;
    double amplitude = 0.5;
    double alpha = 0.5;
    std::optional<double> t0; ///< defaults to the window midpoint
    std::uint64_t seed = 0;
    std::string profile = "constant";
    std::size_t terms = 24;
};

/// Builds and certifies a family on the given ([0, T)) grid.
CoefficientField family_generator(const FamilySpec& spec, const TimeGrid& grid, const SpaceMesh& mesh);

/// g(t) = sum_j 2^(-j alpha) cos(2^j w t + phi_j) / sum_j 2^(-j alpha) with
/// w = 2 pi / period and seeded phases; |g| <= 1 and g is alpha-Hoelder.
/// Only octaves with 2^j <= n_points / 4 are summed, so refining the grid adds
/// octaves of one fixed series (the phases do not depend on the grid).
TimeSignal holder_series(const TimeGrid& grid, double alpha, std::uint64_t seed, std::size_t terms = 24);

/// Max over cells of the scale-invariant functional of A(., x) on the time
/// window [a, b), with the difference measured in operator norm.
SeminormValue coefficient_scale_invariant(const CoefficientField& A, FamilyStyle style, double a, double b,
                                          double alpha = 0.5);
/// Same on the whole grid window.
SeminormValue coefficient_scale_invariant(const CoefficientField& A, FamilyStyle style, double alpha = 0.5);

} // namespace maxreg
