#include "maxreg/metrics.hpp"

#include "maxreg/errors.hpp"
#include "maxreg/fft.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace maxreg {

namespace {

// applies X to every slice and returns dt * sum_j <X w_j, w_j>
double weighted(const TimeSignal& w, const P1Space& space, NormTarget target) {
    const std::size_t n = w.dim;
    const std::vector<cplx> ones(space.mesh().n_cells, 1.0);
    std::vector<cplx> y(n);
    double acc = 0.0;
    for (std::size_t j = 0; j < w.grid.n_points; ++j) {
        std::span<const cplx> x(w.values.data() + j * n, n);
        space.mass().apply(x, y);
        if (target == NormTarget::V) space.apply_stiffness_add(ones, x, y);
        for (std::size_t i = 0; i < n; ++i) acc += (y[i] * std::conj(x[i])).real();
    }
    return acc * w.grid.dt();
}

} // namespace

double sobolev_norm(const SpaceTimeField& u, double s, NormTarget target) {
    if (!(s >= 0.0 && s <= 1.0)) throw ValidationError("sobolev_norm: s must lie in [0, 1]");
    const TimeGrid& g = u.grid();
    if (g.sampling != Sampling::cell_centered)
        throw ValidationError("sobolev_norm: even reflection needs a cell-centered grid");
    require_finite(u.data, "sobolev_norm");
    const std::size_t N = g.n_points;
    const std::size_t n = u.dofs();
    const TimeGrid wide = TimeGrid::make(g.t_start, g.t_start + 2.0 * g.period(), 2 * N, Sampling::cell_centered);
    TimeSignal ext(wide, n);
    for (std::size_t j = 0; j < 2 * N; ++j) {
        const std::size_t src = j < N ? j : 2 * N - 1 - j;
        std::copy_n(u.data.values.begin() + static_cast<std::ptrdiff_t>(src * n), n,
                    ext.values.begin() + static_cast<std::ptrdiff_t>(j * n));
    }
    if (s > 0.0) ext = apply_symbol(ext, [s](double tau) { return std::pow(1.0 + tau * tau, 0.5 * s); });
    return std::sqrt(std::max(0.0, 0.5 * weighted(ext, P1Space(u.mesh), target)));
}

double maxreg_ratio(const SpaceTimeField& u, const SpaceTimeField& f, double alpha) {
    if (!(alpha > 0.0 && alpha <= 0.5)) throw ValidationError("maxreg_ratio: alpha must lie in (0, 1/2]");
    if (!(u.grid() == f.grid()) || !(u.mesh == f.mesh)) throw ValidationError("maxreg_ratio: grid mismatch");
    const double fn = l2_norm(f);
    if (!(fn > 0.0)) throw ValidationError("maxreg_ratio: forcing is zero");
    return (sobolev_norm(u, alpha + 0.5, NormTarget::H) + sobolev_norm(u, alpha, NormTarget::V)) / fn;
}

NormEquivalence operator_norm_equivalence_probe(const CoefficientField& A, std::size_t j, std::size_t k) {
    if (A.matrix_dim() != 1) throw ValidationError("operator_norm_equivalence_probe: scalar coefficient required");
    const std::size_t N = A.time_grid().n_points;
    if (j >= N || k >= N) throw ValidationError("operator_norm_equivalence_probe: time index out of range");
    const std::size_t cells = A.cells();
    std::vector<cplx> diff(cells);
    NormEquivalence out;
    for (std::size_t c = 0; c < cells; ++c) {
        diff[c] = A.at(j, c) - A.at(k, c);
        out.esssup = std::max(out.esssup, std::abs(diff[c]));
    }
    if (out.esssup == 0.0) return out;

    const P1Space space(A.mesh());
    const auto n = static_cast<Eigen::Index>(space.dofs());
    Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(n, n), R = Eigen::MatrixXcd::Zero(n, n);
    const std::vector<cplx> ones(cells, 1.0);
    std::vector<cplx> e(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
    for (Eigen::Index c = 0; c < n; ++c) {
        std::fill(e.begin(), e.end(), cplx(0.0));
        e[static_cast<std::size_t>(c)] = 1.0;
        space.apply_stiffness(diff, e, y);
        for (Eigen::Index r = 0; r < n; ++r) K(r, c) = y[static_cast<std::size_t>(r)];
        space.mass().apply(e, y);
        space.apply_stiffness_add(ones, e, y);
        for (Eigen::Index r = 0; r < n; ++r) R(r, c) = y[static_cast<std::size_t>(r)];
    }
    const Eigen::LLT<Eigen::MatrixXcd> llt(R);
    if (llt.info() != Eigen::Success) throw SolverError("operator_norm_equivalence_probe: V norm not definite", 0.0, 0);
    const Eigen::MatrixXcd L = llt.matrixL();
    const Eigen::MatrixXcd left = L.triangularView<Eigen::Lower>().solve(K);
    const Eigen::MatrixXcd B = L.triangularView<Eigen::Lower>().solve(left.adjoint()).adjoint();
    out.dual_norm = Eigen::JacobiSVD<Eigen::MatrixXcd>(B).singularValues()(0);
    out.ratio = out.dual_norm / out.esssup;
    return out;
}

std::vector<std::pair<double, double>> norm_trace(const SpaceTimeField& u) {
    const P1Space space(u.mesh);
    std::vector<std::pair<double, double>> out(u.grid().n_points);
    for (std::size_t j = 0; j < out.size(); ++j)
        out[j] = {u.grid().point(j), std::sqrt(std::max(0.0, space.mass_norm2(u.slice(j))))};
    return out;
}

std::vector<std::pair<double, double>> time_spectrum(const SpaceTimeField& u) {
    const TimeGrid& g = u.grid();
    const std::size_t N = g.n_points;
    const std::size_t n = u.dofs();
    std::vector<cplx> buf = u.data.values;
    fft::forward(buf, N, n);
    std::vector<std::pair<double, double>> out(N);
    for (std::size_t k = 0; k < N; ++k) {
        double e = 0.0;
        for (std::size_t i = 0; i < n; ++i) e += std::norm(buf[k * n + i]);
        out[k] = {g.frequency(k), e * g.dt() / static_cast<double>(N)};
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace maxreg
