#pragma once

#include "maxreg/coefficients.hpp"
#include "maxreg/fourier.hpp"
#include "maxreg/mesh.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace maxreg {

/// u(t, x) on TimeGrid x (mesh dofs): values[j * dofs + i], stored as a
/// TimeSignal of dimension dofs so the time symbols apply unchanged.
///
/// A field holds either nodal values of a function (u, f) or the coefficients
/// of a functional against the nodal basis (the "dual representation" used
/// for loads and for operator outputs). The type does not track which.
struct SpaceTimeField {
    SpaceMesh mesh;
    TimeSignal data;

    SpaceTimeField() = default;
    SpaceTimeField(const TimeGrid& grid, const SpaceMesh& m);
    SpaceTimeField(const TimeGrid& grid, const SpaceMesh& m, std::vector<cplx> values);

    /// Nodal interpolation of f(t, x) at the dof nodes.
    static SpaceTimeField from_function(const TimeGrid& grid, const SpaceMesh& m,
                                        const std::function<cplx(double t, double x)>& f);

    const TimeGrid& grid() const { return data.grid; }
    std::size_t dofs() const { return data.dim; }
    std::size_t size() const { return data.values.size(); }
    cplx& at(std::size_t j, std::size_t i) { return data.values[j * data.dim + i]; }
    const cplx& at(std::size_t j, std::size_t i) const { return data.values[j * data.dim + i]; }
    std::span<cplx> slice(std::size_t j) { return {data.values.data() + j * data.dim, data.dim}; }
    std::span<const cplx> slice(std::size_t j) const { return {data.values.data() + j * data.dim, data.dim}; }

    SpaceTimeField& operator+=(const SpaceTimeField& o);
    SpaceTimeField& operator-=(const SpaceTimeField& o);
    SpaceTimeField& operator*=(cplx s);
    bool operator==(const SpaceTimeField&) const = default;
};

SpaceTimeField operator+(SpaceTimeField a, const SpaceTimeField& b);
SpaceTimeField operator-(SpaceTimeField a, const SpaceTimeField& b);
SpaceTimeField operator*(cplx s, SpaceTimeField a);

/// Parameters of the twisted form e(v, w) = <(theta + L) v, (1 + delta H_t) w>.
struct FormParameters {
    cplx theta = 1.0;
    double delta = 0.5;
    double lambda = 1.0;
    double Lambda = 1.0;
    /// Quasi-coercivity shift, equal to lambda for divergence-form operators.
    double eta = 1.0;

    /// delta defaults to choose_delta(lambda, Lambda, theta).
    static FormParameters make(const Certificate& cert, cplx theta, std::optional<double> delta = std::nullopt);
    void validate() const;
    /// min{lambda/(Lambda+1), Re theta/(|Im theta|+1)}
    double coercivity_constant() const;
};

/// delta = min{lambda/(Lambda+1), Re theta/(|Im theta|+1)}.
double choose_delta(double lambda, double Lambda, cplx theta);

/// Nodal values -> functional: M f per time slice.
SpaceTimeField mass_load(const SpaceTimeField& f);

/// Functional pairing F(w) = dt * sum_j sum_i F_ji conj(w_ji).
cplx dual_pairing(const SpaceTimeField& functional, const SpaceTimeField& w);

/// (theta + L) u as a functional: M u' + theta M u + K(t) u, with u' by the
/// symbol i tau and K(t_j) the stiffness of A(t_j, .). Matrix-free.
SpaceTimeField apply_L(const SpaceTimeField& u, const CoefficientField& A, cplx theta);

/// Adjoint: -M w' + conj(theta) M w + K(t)^H w, with K^H the stiffness of conj(A).
SpaceTimeField apply_L_adjoint(const SpaceTimeField& w, const CoefficientField& A, cplx theta);

/// e(v, w) = <(theta + L) v, (1 + delta H_t) w>.
cplx coercive_form(const SpaceTimeField& v, const SpaceTimeField& w, const CoefficientField& A,
                   const FormParameters& params);

/// Lower bound of Re e(v, v) from the symbol computation:
/// delta |D^1/2 v|^2 + (lambda - delta Lambda) |grad v|^2 + (Re theta - delta |Im theta|) |v|^2.
double coercivity_lower_bound(const SpaceTimeField& v, const FormParameters& params);

/// The three terms of |u|_E^2 = |u|^2 + |D^1/2 u|^2 + |grad u|^2 (integrated in time).
struct EnergyParts {
    double l2 = 0.0;
    double half_derivative = 0.0;
    double gradient = 0.0;
    double total() const { return l2 + half_derivative + gradient; }
};

EnergyParts energy_parts(const SpaceTimeField& u);
double energy_norm(const SpaceTimeField& u);
/// Exact discrete dual norm of a functional on E: sup |F(w)| / |w|_E, via the
/// Riesz map R_k = (1 + |tau_k|) M + K_1 per frequency.
double dual_norm(const SpaceTimeField& functional);
/// L^2(window; H) norm with the mass matrix.
double l2_norm(const SpaceTimeField& u);

struct SolverOptions {
    double tolerance = 1e-9;
    std::size_t restart = 60;
    std::size_t max_iterations = 2000;
    std::optional<double> delta;
    std::size_t workers = 1;
};

struct SolveDiagnostics {
    /// |F - (theta + L) u|_E* / |F|_E*
    double residual = 0.0;
    std::size_t iterations = 0;
    /// Re e(u, u) / |u|_E^2
    double coercivity_constant_observed = 0.0;
    double delta = 0.0;
    double energy_norm = 0.0;
    double rhs_dual_norm = 0.0;
    /// sqrt(2) max{(Lambda+1)/lambda, (|Im theta|+1)/Re theta} |F|_E*
    double energy_bound = 0.0;
    bool energy_bound_ok = true;
};

struct SolveResult {
    SpaceTimeField u;
    SolveDiagnostics diagnostics;
};

/// Solver for (theta + L) u = F on the periodized window. The Galerkin
/// system tested with (1 + delta H_t) w is solved by restarted GMRES in the
/// discrete E* inner product, right-preconditioned by the exact solve with
/// the time-averaged coefficient. Immutable after construction; solve() may
/// be called concurrently.
class LineSolver {
public:
    LineSolver(const CoefficientField& A, cplx theta, SolverOptions options = {});
    ~LineSolver();
    LineSolver(const LineSolver&) = delete;
    LineSolver& operator=(const LineSolver&) = delete;

    /// F given as a functional (dual representation).
    SolveResult solve_dual(const SpaceTimeField& F) const;
    /// f given as nodal values in L^2(H); the load is M f.
    SolveResult solve(const SpaceTimeField& f) const { return solve_dual(mass_load(f)); }

    const FormParameters& parameters() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

SolveResult solve_line(const CoefficientField& A, const SpaceTimeField& f, cplx theta,
                       const SolverOptions& options = {});
SolveResult solve_line_dual(const CoefficientField& A, const SpaceTimeField& F, cplx theta,
                            const SolverOptions& options = {});

struct CauchyOptions {
    /// Line window [-T, (factor - 1) T); 0 picks 4 when a Dirichlet end is
    /// present and 16 for pure Neumann (slower decay).
    std::size_t window_factor = 0;
    SolverOptions solver;
    /// Limit on the mass |v|^2 of the last T of the window relative to the
    /// mass on the whole window.
    double guard_tolerance = 1e-6;
};

struct CauchyResult {
    /// Solution on [0, T), on the grid of f.
    SpaceTimeField u;
    /// Line solution on the whole window.
    SpaceTimeField v;
    SolveDiagnostics diagnostics;
    std::size_t window_factor = 4;
    /// |v(0)|_H by trigonometric interpolation.
    double v0_norm = 0.0;
    double v_l2_norm = 0.0;
    double guard_fraction = 0.0;
    bool guard_ok = true;
};

/// u' + A(t) u = f on [0, T), u(0) = 0, via the line problem: extend A,
/// force with g = exp(-t) E_0 f, solve v' + v + A v = g, return u = exp(t) v.
/// A and f must share a cell-centered grid starting at t = 0.
CauchyResult cauchy_solve(const CoefficientField& A, const SpaceTimeField& f, const CauchyOptions& options = {});

/// Crank-Nicolson for u' + A(t) u = f, u(0) = 0 on the grid window of f.
/// n_steps must be a positive multiple of 2 n_points so the grid points are
/// step times; A and f are linearly interpolated in time between samples.
/// Throws SolverError if the step energy grows beyond the data bound.
SpaceTimeField timestep_reference(const CoefficientField& A, const SpaceTimeField& f, std::size_t n_steps);

/// Per-mode exact solution of u' + (theta + A) u = f, u(t_start) = 0 for
/// time-independent A, with f piecewise constant on the grid cells.
SpaceTimeField autonomous_oracle(const CoefficientField& A, const SpaceTimeField& f, cplx theta = 0.0);

/// Generalized eigenpairs K(a) v = mu M v of the time-averaged coefficient,
/// eigenvalues sorted by real part.
struct ModalBasis {
    std::vector<cplx> eigenvalues;
    /// column-major dofs x dofs
    std::vector<cplx> vectors;
};
ModalBasis modal_basis(const P1Space& space, std::span<const cplx> cell_coef);

} // namespace maxreg
