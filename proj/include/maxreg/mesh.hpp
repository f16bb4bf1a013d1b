#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace maxreg {

using cplx = std::complex<double>;

enum class Boundary { dirichlet, neumann };

std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& s);

/// Uniform 1D mesh on (x_lo, x_hi). Dirichlet end nodes are eliminated, so
/// the dof set encodes V: H^1_0 for Dirichlet-Dirichlet, H^1 for
/// Neumann-Neumann, mixed otherwise.
struct SpaceMesh {
    double x_lo = 0.0;
    double x_hi = 1.0;
    std::size_t n_cells = 16;
    Boundary bc_left = Boundary::dirichlet;
    Boundary bc_right = Boundary::dirichlet;

    static SpaceMesh make(double x_lo, double x_hi, std::size_t n_cells,
                          Boundary left = Boundary::dirichlet, Boundary right = Boundary::dirichlet);
    void validate() const;

    double h() const { return (x_hi - x_lo) / static_cast<double>(n_cells); }
    std::size_t n_nodes() const { return n_cells + 1; }
    std::size_t dof_count() const;
    /// Mesh node of dof i.
    std::size_t dof_node(std::size_t i) const { return i + (bc_left == Boundary::dirichlet ? 1 : 0); }
    double node_x(std::size_t node) const { return x_lo + static_cast<double>(node) * h(); }
    double dof_x(std::size_t i) const { return node_x(dof_node(i)); }
    double cell_midpoint(std::size_t c) const { return x_lo + (static_cast<double>(c) + 0.5) * h(); }

    bool operator==(const SpaceMesh&) const = default;
};

/// Complex tridiagonal matrix on the dofs:
/// (T x)_i = lower[i-1] x_{i-1} + diag[i] x_i + upper[i] x_{i+1}.
struct Tridiagonal {
    std::vector<cplx> lower;
    std::vector<cplx> diag;
    std::vector<cplx> upper;

    explicit Tridiagonal(std::size_t n = 0) : lower(n ? n - 1 : 0), diag(n), upper(n ? n - 1 : 0) {}
    std::size_t size() const { return diag.size(); }
    void apply(std::span<const cplx> x, std::span<cplx> y) const;
    /// y += T x
    void apply_add(std::span<const cplx> x, std::span<cplx> y) const;
};

/// LU factors of a tridiagonal matrix (no pivoting; intended for matrices
/// whose Hermitian part is positive definite).
class TridiagonalLU {
public:
    TridiagonalLU() = default;
    explicit TridiagonalLU(const Tridiagonal& t);
    void solve_inplace(std::span<cplx> x) const;
    std::size_t size() const { return diag_.size(); }

private:
    std::vector<cplx> lower_; // multipliers
    std::vector<cplx> diag_;  // pivots
    std::vector<cplx> upper_;
};

/// Piecewise-linear finite elements on a SpaceMesh. Cell coefficients are
/// constant per cell (sampled at cell midpoints), so the stiffness
/// quadrature is exact.
class P1Space {
public:
    explicit P1Space(SpaceMesh mesh);

    const SpaceMesh& mesh() const { return mesh_; }
    std::size_t dofs() const { return ndof_; }

    /// Consistent mass matrix M.
    const Tridiagonal& mass() const { return mass_; }
    /// Stiffness with unit coefficient, the discrete |grad|^2 form.
    const Tridiagonal& laplace() const { return laplace_; }

    /// Stiffness K(a) = sum_c a_c / h [[1, -1], [-1, 1]] with cell coefficients a.
    Tridiagonal stiffness(std::span<const cplx> cell_coef) const;
    /// s * M + K(a)
    Tridiagonal shifted(cplx s, std::span<const cplx> cell_coef) const;
    /// y = K(a) x without forming K.
    void apply_stiffness(std::span<const cplx> cell_coef, std::span<const cplx> x, std::span<cplx> y) const;
    /// y += K(a) x
    void apply_stiffness_add(std::span<const cplx> cell_coef, std::span<const cplx> x, std::span<cplx> y) const;

    /// Discrete gradient per cell: (x_{c+1} - x_c)/h with eliminated Dirichlet values 0.
    void gradient(std::span<const cplx> x, std::span<cplx> cells) const;
    /// Adjoint of gradient w.r.t. the L^2 cell pairing: y_i = sum_c h g_c (d phi_i/dx)|_c.
    /// K(a) x == gradient_adjoint(a * gradient(x)).
    void gradient_adjoint(std::span<const cplx> cells, std::span<cplx> y) const;

    cplx mass_inner(std::span<const cplx> a, std::span<const cplx> b) const;
    double mass_norm2(std::span<const cplx> a) const { return mass_inner(a, a).real(); }
    double grad_norm2(std::span<const cplx> a) const;

private:
    // dof index of node, or -1 for an eliminated node
    long node_dof(std::size_t node) const;

    SpaceMesh mesh_;
    std::size_t ndof_;
    Tridiagonal mass_;
    Tridiagonal laplace_;
};

} // namespace maxreg
