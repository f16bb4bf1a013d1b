#include "maxreg/errors.hpp"
#include "maxreg/spacetime.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace maxreg {

namespace {

using MatrixXc = Eigen::MatrixXcd;

MatrixXc dense(const Tridiagonal& t) {
    const auto n = static_cast<Eigen::Index>(t.size());
    MatrixXc m = MatrixXc::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        m(i, i) = t.diag[i];
        if (i + 1 < n) {
            m(i, i + 1) = t.upper[i];
            m(i + 1, i) = t.lower[i];
        }
    }
    return m;
}

// weights and index for linear interpolation of grid samples at time t, clamped
std::pair<std::size_t, double> bracket(const TimeGrid& g, double t) {
    const double s = (t - g.point(0)) / g.dt();
    if (s <= 0.0) return {0, 0.0};
    const double last = static_cast<double>(g.n_points - 1);
    if (s >= last) return {g.n_points - 2, 1.0};
    const auto j = static_cast<std::size_t>(std::floor(s));
    return {j, s - static_cast<double>(j)};
}

// (1 - exp(-z)) / z
cplx phi1(cplx z) {
    if (std::abs(z) < 1e-4) return 1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0;
    return (1.0 - std::exp(-z)) / z;
}

} // namespace

SpaceTimeField timestep_reference(const CoefficientField& A, const SpaceTimeField& f, std::size_t n_steps) {
    const TimeGrid& g = f.grid();
    if (!(A.time_grid() == g) || !(A.mesh() == f.mesh))
        throw ValidationError("timestep_reference: data and coefficient live on different grids");
    if (A.matrix_dim() != 1) throw ValidationError("timestep_reference: scalar coefficient required");
    const std::size_t N = g.n_points;
    if (n_steps == 0 || n_steps % (2 * N) != 0)
        throw ValidationError("timestep_reference: n_steps must be a positive multiple of 2 n_points");
    require_finite(f.data, "timestep_reference");

    const P1Space space(f.mesh);
    const std::size_t n = space.dofs();
    const std::size_t cells = f.mesh.n_cells;
    const double k = g.period() / static_cast<double>(n_steps);
    const std::size_t per_cell = n_steps / N;
    const std::size_t offset = g.sampling == Sampling::cell_centered ? per_cell / 2 : 0;

    auto coef_at = [&](double t) {
        const auto [j, w] = bracket(g, t);
        std::vector<cplx> a(cells);
        const auto lo = A.slice(j), hi = A.slice(j + 1);
        for (std::size_t c = 0; c < cells; ++c) a[c] = (1.0 - w) * lo[c] + w * hi[c];
        return a;
    };
    auto load_at = [&](double t) {
        const auto [j, w] = bracket(g, t);
        std::vector<cplx> v(n), out(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = (1.0 - w) * f.at(j, i) + w * f.at(j + 1, i);
        space.mass().apply(v, out);
        return out;
    };
    auto mnorm = [&](std::span<const cplx> x) { return std::sqrt(std::max(0.0, space.mass_norm2(x))); };

    SpaceTimeField u(g, f.mesh);
    std::vector<cplx> cur(n, 0.0), rhs(n);
    std::vector<cplx> load_lo = load_at(g.t_start);
    std::vector<cplx> coef_lo = coef_at(g.t_start);
    for (std::size_t s = 0; s < n_steps; ++s) {
        const double t1 = g.t_start + static_cast<double>(s + 1) * k;
        const std::vector<cplx> coef_hi = coef_at(t1);
        const std::vector<cplx> load_hi = load_at(t1);
        // (M + k/2 K1) u+ = (M - k/2 K0) u + k/2 (F0 + F1)
        space.mass().apply(cur, rhs);
        std::vector<cplx> half(cells);
        for (std::size_t c = 0; c < cells; ++c) half[c] = -0.5 * k * coef_lo[c];
        space.apply_stiffness_add(half, cur, rhs);
        for (std::size_t i = 0; i < n; ++i) rhs[i] += 0.5 * k * (load_lo[i] + load_hi[i]);
        for (std::size_t c = 0; c < cells; ++c) half[c] = 0.5 * k * coef_hi[c];
        TridiagonalLU(space.shifted(1.0, half)).solve_inplace(rhs);

        std::vector<cplx> fmid(n);
        const auto [jm, wm] = bracket(g, t1 - 0.5 * k);
        for (std::size_t i = 0; i < n; ++i) fmid[i] = (1.0 - wm) * f.at(jm, i) + wm * f.at(jm + 1, i);
        const double fnorm = mnorm(fmid);
        const double before = mnorm(cur);
        const double after = mnorm(rhs);
        if (after > 2.0 * (before + k * fnorm) + 1e-300)
            throw SolverError("timestep_reference: energy growth, step rejected", after, s + 1);
        cur = rhs;
        coef_lo = coef_hi;
        load_lo = load_hi;
        if (s + 1 >= offset && (s + 1 - offset) % per_cell == 0) {
            const std::size_t j = (s + 1 - offset) / per_cell;
            if (j < N) std::copy(cur.begin(), cur.end(), u.slice(j).begin());
        }
    }
    return u;
}

ModalBasis modal_basis(const P1Space& space, std::span<const cplx> cell_coef) {
    const MatrixXc K = dense(space.stiffness(cell_coef));
    const MatrixXc M = dense(space.mass());
    const auto n = K.rows();
    ModalBasis basis;
    basis.eigenvalues.resize(static_cast<std::size_t>(n));
    basis.vectors.resize(static_cast<std::size_t>(n * n));
    const bool real = std::all_of(cell_coef.begin(), cell_coef.end(), [](cplx a) { return a.imag() == 0.0; });
    std::vector<std::size_t> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    MatrixXc V;
    Eigen::VectorXcd mu;
    if (real) {
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(K.real(), M.real());
        if (eig.info() != Eigen::Success) throw SolverError("modal_basis: eigen-decomposition failed", 0.0, 0);
        V = eig.eigenvectors().cast<cplx>();
        mu = eig.eigenvalues().cast<cplx>();
    } else {
        Eigen::ComplexEigenSolver<MatrixXc> eig(M.partialPivLu().solve(K));
        if (eig.info() != Eigen::Success) throw SolverError("modal_basis: eigen-decomposition failed", 0.0, 0);
        V = eig.eigenvectors();
        mu = eig.eigenvalues();
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return mu(static_cast<Eigen::Index>(a)).real() < mu(static_cast<Eigen::Index>(b)).real();
    });
    for (Eigen::Index c = 0; c < n; ++c) {
        const auto src = static_cast<Eigen::Index>(order[static_cast<std::size_t>(c)]);
        basis.eigenvalues[static_cast<std::size_t>(c)] = mu(src);
        for (Eigen::Index r = 0; r < n; ++r) basis.vectors[static_cast<std::size_t>(c * n + r)] = V(r, src);
    }
    return basis;
}

SpaceTimeField autonomous_oracle(const CoefficientField& A, const SpaceTimeField& f, cplx theta) {
    if (!(A.mesh() == f.mesh)) throw ValidationError("autonomous_oracle: mesh mismatch");
    if (A.matrix_dim() != 1) throw ValidationError("autonomous_oracle: scalar coefficient required");
    if (!A.time_independent()) throw ValidationError("autonomous_oracle: coefficient must be constant in time");
    require_finite(f.data, "autonomous_oracle");
    const P1Space space(f.mesh);
    const auto n = static_cast<Eigen::Index>(space.dofs());
    const ModalBasis basis = modal_basis(space, A.slice(0));
    const Eigen::Map<const MatrixXc> V(basis.vectors.data(), n, n);
    const Eigen::PartialPivLU<MatrixXc> Vlu(V);

    const TimeGrid& g = f.grid();
    const double dt = g.dt();
    const bool centered = g.sampling == Sampling::cell_centered;
    SpaceTimeField u(g, f.mesh);
    Eigen::VectorXcd y = Eigen::VectorXcd::Zero(n);
    for (std::size_t j = 0; j < g.n_points; ++j) {
        Eigen::VectorXcd fj(n);
        for (Eigen::Index i = 0; i < n; ++i) fj(i) = f.at(j, static_cast<std::size_t>(i));
        const Eigen::VectorXcd c = Vlu.solve(fj);
        Eigen::VectorXcd out(n);
        for (Eigen::Index m = 0; m < n; ++m) {
            const cplx s = theta + basis.eigenvalues[static_cast<std::size_t>(m)];
            if (centered) out(m) = std::exp(-s * (0.5 * dt)) * y(m) + 0.5 * dt * phi1(s * (0.5 * dt)) * c(m);
            else out(m) = y(m);
            y(m) = std::exp(-s * dt) * y(m) + dt * phi1(s * dt) * c(m);
        }
        const Eigen::VectorXcd x = V * out;
        for (Eigen::Index i = 0; i < n; ++i) u.at(j, static_cast<std::size_t>(i)) = x(i);
    }
    return u;
}

} // namespace maxreg
