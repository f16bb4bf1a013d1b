#include "maxreg/mesh.hpp"

#include "maxreg/errors.hpp"

#include <cmath>

namespace maxreg {

std::string to_string(Boundary b) { return b == Boundary::dirichlet ? "dirichlet" : "neumann"; }

Boundary boundary_from_string(const std::string& s) {
    if (s == "dirichlet") return Boundary::dirichlet;
    if (s == "neumann") return Boundary::neumann;
    throw ValidationError("unknown boundary condition '" + s + "'");
}

SpaceMesh SpaceMesh::make(double x_lo, double x_hi, std::size_t n_cells, Boundary left, Boundary right) {
    SpaceMesh m{x_lo, x_hi, n_cells, left, right};
    m.validate();
    return m;
}

void SpaceMesh::validate() const {
    if (!(std::isfinite(x_lo) && std::isfinite(x_hi) && x_hi > x_lo))
        throw ValidationError("SpaceMesh: need finite x_hi > x_lo");
    if (n_cells < 4) throw ValidationError("SpaceMesh: need at least 4 cells");
}

std::size_t SpaceMesh::dof_count() const {
    std::size_t n = n_nodes();
    if (bc_left == Boundary::dirichlet) --n;
    if (bc_right == Boundary::dirichlet) --n;
    return n;
}

void Tridiagonal::apply(std::span<const cplx> x, std::span<cplx> y) const {
    for (auto& v : y) v = 0.0;
    apply_add(x, y);
}

void Tridiagonal::apply_add(std::span<const cplx> x, std::span<cplx> y) const {
    const std::size_t n = diag.size();
    for (std::size_t i = 0; i < n; ++i) {
        cplx acc = diag[i] * x[i];
        if (i > 0) acc += lower[i - 1] * x[i - 1];
        if (i + 1 < n) acc += upper[i] * x[i + 1];
        y[i] += acc;
    }
}

TridiagonalLU::TridiagonalLU(const Tridiagonal& t)
    : lower_(t.lower.size()), diag_(t.diag.size()), upper_(t.upper) {
    const std::size_t n = t.diag.size();
    if (n == 0) return;
    diag_[0] = t.diag[0];
    for (std::size_t i = 1; i < n; ++i) {
        if (diag_[i - 1] == cplx(0.0)) throw SolverError("tridiagonal factorization: zero pivot", 0.0, 0);
        lower_[i - 1] = t.lower[i - 1] / diag_[i - 1];
        diag_[i] = t.diag[i] - lower_[i - 1] * upper_[i - 1];
    }
    if (diag_[n - 1] == cplx(0.0)) throw SolverError("tridiagonal factorization: zero pivot", 0.0, 0);
}

void TridiagonalLU::solve_inplace(std::span<cplx> x) const {
    const std::size_t n = diag_.size();
    if (n == 0) return;
    for (std::size_t i = 1; i < n; ++i) x[i] -= lower_[i - 1] * x[i - 1];
    x[n - 1] /= diag_[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = (x[i] - upper_[i] * x[i + 1]) / diag_[i];
}

P1Space::P1Space(SpaceMesh mesh) : mesh_(mesh), ndof_(mesh.dof_count()), mass_(ndof_), laplace_(ndof_) {
    mesh_.validate();
    const double h = mesh_.h();
    for (std::size_t c = 0; c < mesh_.n_cells; ++c) {
        const long a = node_dof(c);
        const long b = node_dof(c + 1);
        if (a >= 0) {
            mass_.diag[a] += h / 3.0;
            laplace_.diag[a] += 1.0 / h;
        }
        if (b >= 0) {
            mass_.diag[b] += h / 3.0;
            laplace_.diag[b] += 1.0 / h;
        }
        if (a >= 0 && b >= 0) {
            mass_.upper[a] += h / 6.0;
            mass_.lower[a] += h / 6.0;
            laplace_.upper[a] -= 1.0 / h;
            laplace_.lower[a] -= 1.0 / h;
        }
    }
}

long P1Space::node_dof(std::size_t node) const {
    if (node == 0 && mesh_.bc_left == Boundary::dirichlet) return -1;
    if (node == mesh_.n_cells && mesh_.bc_right == Boundary::dirichlet) return -1;
    return static_cast<long>(node) - (mesh_.bc_left == Boundary::dirichlet ? 1 : 0);
}

Tridiagonal P1Space::stiffness(std::span<const cplx> cell_coef) const { return shifted(0.0, cell_coef); }

Tridiagonal P1Space::shifted(cplx s, std::span<const cplx> cell_coef) const {
    if (cell_coef.size() != mesh_.n_cells) throw ValidationError("P1Space: one coefficient per cell required");
    Tridiagonal t(ndof_);
    for (std::size_t i = 0; i < ndof_; ++i) t.diag[i] = s * mass_.diag[i];
    for (std::size_t i = 0; i + 1 < ndof_; ++i) {
        t.upper[i] = s * mass_.upper[i];
        t.lower[i] = s * mass_.lower[i];
    }
    const double inv_h = 1.0 / mesh_.h();
    for (std::size_t c = 0; c < mesh_.n_cells; ++c) {
        const cplx k = cell_coef[c] * inv_h;
        const long a = node_dof(c);
        const long b = node_dof(c + 1);
        if (a >= 0) t.diag[a] += k;
        if (b >= 0) t.diag[b] += k;
        if (a >= 0 && b >= 0) {
            t.upper[a] -= k;
            t.lower[a] -= k;
        }
    }
    return t;
}

void P1Space::apply_stiffness(std::span<const cplx> cell_coef, std::span<const cplx> x, std::span<cplx> y) const {
    for (auto& v : y) v = 0.0;
    apply_stiffness_add(cell_coef, x, y);
}

void P1Space::apply_stiffness_add(std::span<const cplx> cell_coef, std::span<const cplx> x,
                                  std::span<cplx> y) const {
    const double inv_h = 1.0 / mesh_.h();
    for (std::size_t c = 0; c < mesh_.n_cells; ++c) {
        const long a = node_dof(c);
        const long b = node_dof(c + 1);
        const cplx xa = a >= 0 ? x[a] : cplx(0.0);
        const cplx xb = b >= 0 ? x[b] : cplx(0.0);
        const cplx flux = cell_coef[c] * (xb - xa) * inv_h;
        if (a >= 0) y[a] -= flux;
        if (b >= 0) y[b] += flux;
    }
}

void P1Space::gradient(std::span<const cplx> x, std::span<cplx> cells) const {
    const double inv_h = 1.0 / mesh_.h();
    for (std::size_t c = 0; c < mesh_.n_cells; ++c) {
        const long a = node_dof(c);
        const long b = node_dof(c + 1);
        const cplx xa = a >= 0 ? x[a] : cplx(0.0);
        const cplx xb = b >= 0 ? x[b] : cplx(0.0);
        cells[c] = (xb - xa) * inv_h;
    }
}

void P1Space::gradient_adjoint(std::span<const cplx> cells, std::span<cplx> y) const {
    for (auto& v : y) v = 0.0;
    for (std::size_t c = 0; c < mesh_.n_cells; ++c) {
        const long a = node_dof(c);
        const long b = node_dof(c + 1);
        if (a >= 0) y[a] -= cells[c];
        if (b >= 0) y[b] += cells[c];
    }
}

cplx P1Space::mass_inner(std::span<const cplx> a, std::span<const cplx> b) const {
    std::vector<cplx> mb(ndof_);
    mass_.apply(b, mb);
    cplx acc = 0.0;
    for (std::size_t i = 0; i < ndof_; ++i) acc += a[i] * std::conj(mb[i]);
    return acc;
}

double P1Space::grad_norm2(std::span<const cplx> a) const {
    std::vector<cplx> g(mesh_.n_cells);
    gradient(a, g);
    double acc = 0.0;
    for (const auto& v : g) acc += std::norm(v);
    return acc * mesh_.h();
}

} // namespace maxreg
