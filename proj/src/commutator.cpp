#include "maxreg/commutator.hpp"

#include "maxreg/errors.hpp"
#include "maxreg/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace maxreg {

namespace {

bool is_constant(const TimeSignal& a) {
    return std::all_of(a.values.begin(), a.values.end(), [&](cplx v) { return v == a.values.front(); });
}

void require_multiplier(const TimeSignal& a, const TimeSignal& u, const char* what) {
    if (a.dim != 1) throw ValidationError(std::string(what) + ": multiplier must be scalar");
    if (!(a.grid == u.grid)) throw ValidationError(std::string(what) + ": grid mismatch");
    require_finite(a, what);
    require_finite(u, what);
}

TimeSignal multiply(const TimeSignal& a, const TimeSignal& u, bool conjugate) {
    TimeSignal out = u;
    for (std::size_t j = 0; j < u.grid.n_points; ++j) {
        const cplx s = conjugate ? std::conj(a.values[j]) : a.values[j];
        for (std::size_t c = 0; c < u.dim; ++c) out.at(j, c) *= s;
    }
    return out;
}

TimeSignal commutator_impl(const TimeSignal& a, FracOrder alpha, const TimeSignal& u, bool conjugate) {
    if (is_constant(a)) return TimeSignal(u.grid, u.dim);
    TimeSignal left = multiply(a, frac_derivative(u, alpha), conjugate);
    left -= frac_derivative(multiply(a, u, conjugate), alpha);
    return left;
}

} // namespace

TimeSignal commutator_apply(const TimeSignal& a, FracOrder alpha, const TimeSignal& u) {
    require_multiplier(a, u, "commutator_apply");
    return commutator_impl(a, alpha, u, false);
}

TimeSignal commutator_adjoint(const TimeSignal& a, FracOrder alpha, const TimeSignal& u) {
    require_multiplier(a, u, "commutator_adjoint");
    TimeSignal out = commutator_impl(a, alpha, u, true);
    out *= -1.0;
    return out;
}

CommutatorProbe commutator_norm_estimate(const TimeSignal& a, FracOrder alpha, std::size_t n_probes,
                                         std::uint64_t seed, PowerIterationOptions options) {
    if (a.dim != 1) throw ValidationError("commutator_norm_estimate: multiplier must be scalar");
    if (n_probes < 16) throw ValidationError("commutator_norm_estimate: need at least 16 probes");
    require_finite(a, "commutator_norm_estimate");
    CommutatorProbe probe;
    probe.alpha = alpha.value();
    probe.n_probes = n_probes;
    probe.seed = seed;
    probe.resolution = a.grid.n_points;
    probe.bmo_value = bmo_seminorm(frac_derivative(a, alpha), IntervalFamily::periodic_sliding(a.grid)).value;
    if (is_constant(a)) {
        probe.degenerate = true;
        return probe;
    }

    // independent streams per restart so the result does not depend on scheduling
    std::vector<double> best(n_probes, 0.0);
    std::vector<std::size_t> iters(n_probes, 0);
    parallel_for(n_probes, [&](std::size_t p) {
        std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + p);
        std::normal_distribution<double> normal;
        TimeSignal u(a.grid, 1);
        for (auto& v : u.values) v = cplx(normal(rng), normal(rng));
        u *= 1.0 / time_norm(u);
        double est = 0.0;
        for (std::size_t it = 0; it < options.max_iterations; ++it) {
            const TimeSignal cu = commutator_impl(a, alpha, u, false);
            const double e = time_norm(cu);
            TimeSignal w = commutator_impl(a, alpha, cu, true);
            const double wn = time_norm(w);
            ++iters[p];
            const bool done = std::abs(e - est) <= options.tolerance * e;
            est = std::max(est, e);
            if (wn == 0.0 || done) break;
            w *= 1.0 / wn;
            u = std::move(w);
        }
        best[p] = est;
    });
    probe.estimate = *std::max_element(best.begin(), best.end());
    probe.iterations = std::accumulate(iters.begin(), iters.end(), std::size_t{0});
    if (probe.bmo_value > 0.0) probe.ratio = probe.estimate / probe.bmo_value;
    return probe;
}

TimeSignal vector_commutator_apply(const CoefficientField& A, FracOrder alpha, const TimeSignal& u) {
    if (A.matrix_dim() != 1) throw ValidationError("vector_commutator_apply: scalar coefficient required");
    if (!(u.grid == A.time_grid()) || u.dim != A.cells())
        throw ValidationError("vector_commutator_apply: need one component per cell on the coefficient grid");
    TimeSignal out(u.grid, u.dim);
    for (std::size_t c = 0; c < A.cells(); ++c) {
        const TimeSignal r = commutator_apply(A.column(c), alpha, u.component(c));
        for (std::size_t j = 0; j < u.grid.n_points; ++j) out.at(j, c) = r.values[j];
    }
    return out;
}

double cell_aggregate_norm(const TimeSignal& u, const SpaceMesh& mesh) {
    return time_norm(u) * std::sqrt(mesh.h());
}

std::vector<double> column_estimates(const CoefficientField& A, FracOrder alpha, std::size_t n_probes,
                                     std::uint64_t seed) {
    if (A.matrix_dim() != 1) throw ValidationError("column_estimates: scalar coefficient required");
    std::vector<double> out(A.cells());
    for (std::size_t c = 0; c < A.cells(); ++c)
        out[c] = commutator_norm_estimate(A.column(c), alpha, n_probes, seed).estimate;
    return out;
}

FactorizationResult factorization_check(const CoefficientField& A, const SpaceTimeField& f,
                                        const SolverOptions& options) {
    const LineSolver solver(A, 1.0, options);
    FactorizationResult res;
    const SolveResult base = solver.solve(f);
    res.solve = base.diagnostics;
    const FracOrder half(0.5);
    SpaceTimeField Du = base.u;
    Du.data = frac_derivative(base.u.data, half);
    const double scale = energy_norm(Du);
    if (scale == 0.0) return res;

    const P1Space space(f.mesh);
    const std::size_t N = f.grid().n_points;
    const std::size_t cells = A.cells();
    TimeSignal G(f.grid(), cells);
    for (std::size_t j = 0; j < N; ++j)
        space.gradient(base.u.slice(j), std::span<cplx>(G.values.data() + j * cells, cells));
    TimeSignal AG = G;
    for (std::size_t j = 0; j < N; ++j) {
        const auto a = A.slice(j);
        for (std::size_t c = 0; c < cells; ++c) AG.at(j, c) *= a[c];
    }
    TimeSignal term = frac_derivative(G, half);
    for (std::size_t j = 0; j < N; ++j) {
        const auto a = A.slice(j);
        for (std::size_t c = 0; c < cells; ++c) term.at(j, c) *= a[c];
    }
    term -= frac_derivative(AG, half);

    SpaceTimeField comm(f.grid(), f.mesh);
    for (std::size_t j = 0; j < N; ++j)
        space.gradient_adjoint(std::span<const cplx>(term.values.data() + j * cells, cells), comm.slice(j));
    SpaceTimeField DF = mass_load(f);
    DF.data = frac_derivative(DF.data, half);

    const SpaceTimeField w1 = solver.solve_dual(comm).u;
    const SpaceTimeField w2 = solver.solve_dual(DF).u;
    SpaceTimeField r = Du - w1 - w2;
    res.residual = energy_norm(r) / scale;
    res.commutator_share = energy_norm(w1) / scale;
    return res;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ValidationError("spearman: need two equal-length samples");
    auto ranks = [](const std::vector<double>& v) {
        std::vector<std::size_t> idx(v.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < idx.size();) {
            std::size_t k = i;
            while (k + 1 < idx.size() && v[idx[k + 1]] == v[idx[i]]) ++k;
            const double avg = 0.5 * static_cast<double>(i + k) + 1.0;
            for (std::size_t q = i; q <= k; ++q) r[idx[q]] = avg;
            i = k + 1;
        }
        return r;
    };
    const auto rx = ranks(x), ry = ranks(y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

} // namespace maxreg
