#pragma once

#include "maxreg/coefficients.hpp"
#include "maxreg/spacetime.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace maxreg {

enum class NormTarget { H, V };

/// |u|_{H^s(0,T; X)} with X = H (mass) or V (mass + stiffness of A = 1).
/// u must live on a cell-centered grid over [0, T). It is even-reflected to
/// [0, 2T) and measured with the symbol (1 + tau^2)^(s/2); the result is
/// halved so that a constant u keeps its L^2(0, T) norm.
double sobolev_norm(const SpaceTimeField& u, double s, NormTarget target);

/// (|u|_{H^(alpha+1/2)(H)} + |u|_{H^alpha(V)}) / |f|_{L^2(H)}
/// Throws ValidationError for f = 0.
double maxreg_ratio(const SpaceTimeField& u, const SpaceTimeField& f, double alpha = 0.5);

struct NormEquivalence {
    /// |K(A(t) - A(s))|_{V -> V*} with the discrete V norm (M + K_1).
    double dual_norm = 0.0;
    /// max over cells of |A(t) - A(s)|
    double esssup = 0.0;
    std::optional<double> ratio;
};

/// Compares the operator norm of the coefficient difference at time indices
/// j and k with its sup over the mesh.
NormEquivalence operator_norm_equivalence_probe(const CoefficientField& A, std::size_t j, std::size_t k);

/// t_j -> |u(t_j)|_H
std::vector<std::pair<double, double>> norm_trace(const SpaceTimeField& u);
/// tau_k -> sum_i |u_hat_k,i|^2 dt / n in ascending tau.
std::vector<std::pair<double, double>> time_spectrum(const SpaceTimeField& u);

} // namespace maxreg
