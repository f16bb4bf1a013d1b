#pragma once

#include "maxreg/bmo.hpp"
#include "maxreg/coefficients.hpp"
#include "maxreg/fourier.hpp"
#include "maxreg/spacetime.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace maxreg {

/// [a, D^alpha] u = a D^alpha u - D^alpha (a u), applied to every component
/// of u. The multiplier a must be scalar.
TimeSignal commutator_apply(const TimeSignal& a, FracOrder alpha, const TimeSignal& u);

/// Adjoint in the discrete inner product: -[conj(a), D^alpha].
TimeSignal commutator_adjoint(const TimeSignal& a, FracOrder alpha, const TimeSignal& u);

struct CommutatorProbe {
    double alpha = 0.5;
    std::size_t n_probes = 32;
    std::uint64_t seed = 0;
    /// Largest |[a, D^alpha] u| / |u| found (a lower bound of the operator norm).
    double estimate = 0.0;
    /// BMO seminorm of D^alpha a over the periodic sliding family.
    double bmo_value = 0.0;
    /// estimate / bmo_value; empty when the multiplier is degenerate.
    std::optional<double> ratio;
    bool degenerate = false;
    std::size_t resolution = 0;
    std::size_t iterations = 0;
};

struct PowerIterationOptions {
    std::size_t max_iterations = 400;
    double tolerance = 1e-10;
};

/// Power iteration on C^* C with C = [a, D^alpha], restarted from n_probes
/// random starts (at least 16); the maximum over restarts is reported.
CommutatorProbe commutator_norm_estimate(const TimeSignal& a, FracOrder alpha, std::size_t n_probes = 32,
                                         std::uint64_t seed = 0, PowerIterationOptions options = {});

/// Column-wise commutator for u with one component per mesh cell:
/// ([A(., x_c), D^alpha] u_c)_c with A scalar.
TimeSignal vector_commutator_apply(const CoefficientField& A, FracOrder alpha, const TimeSignal& u);
/// L^2(Omega)-aggregated norm of a cell-indexed vector signal.
double cell_aggregate_norm(const TimeSignal& u, const SpaceMesh& mesh);
/// Per-cell estimates for the columns of A.
std::vector<double> column_estimates(const CoefficientField& A, FracOrder alpha, std::size_t n_probes = 32,
                                     std::uint64_t seed = 0);

struct FactorizationResult {
    /// |r|_E / |D^1/2 u|_E, 0 when f = 0.
    double residual = 0.0;
    /// |(1+L)^{-1} grad^*(A D^1/2 - D^1/2 A) grad u|_E / |D^1/2 u|_E
    double commutator_share = 0.0;
    SolveDiagnostics solve;
};

/// Checks D^1/2 u = (1+L)^{-1} D^1/2 f + (1+L)^{-1} grad^*(A D^1/2 - D^1/2 A) grad u
/// for u = (1+L)^{-1} f on the whole window of A.
FactorizationResult factorization_check(const CoefficientField& A, const SpaceTimeField& f,
                                        const SolverOptions& options = {});

/// Spearman rank correlation (average ranks for ties).
double spearman(const std::vector<double>& x, const std::vector<double>& y);

} // namespace maxreg
