#include "maxreg/coefficients.hpp"

#include "maxreg/errors.hpp"
#include "maxreg/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace maxreg {

namespace {

using MatrixXc = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic>;
using VectorXc = Eigen::Matrix<cplx, Eigen::Dynamic, 1>;

MatrixXc sample_matrix(std::span<const cplx> block, std::size_t d) {
    MatrixXc m(d, d);
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c) m(r, c) = block[r * d + c];
    return m;
}

// (min eigenvalue of the Hermitian part, operator norm) of one sample.
std::pair<double, double> sample_bounds(std::span<const cplx> block, std::size_t d) {
    if (d == 1) return {block[0].real(), std::abs(block[0])};
    const MatrixXc m = sample_matrix(block, d);
    const MatrixXc herm = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<MatrixXc> eig(herm, Eigen::EigenvaluesOnly);
    Eigen::JacobiSVD<MatrixXc> svd(m);
    return {eig.eigenvalues()(0), svd.singularValues()(0)};
}

bool in_support(double t, std::pair<double, double> s) { return t >= s.first && t < s.second; }

double profile_value(const std::string& profile, double s) {
    if (profile == "constant") return 1.0;
    if (profile == "cosine") return 0.5 * (1.0 + std::cos(2.0 * std::numbers::pi * s));
    if (profile == "linear") return s;
    throw ValidationError("unknown spatial profile '" + profile + "'");
}

std::size_t block_size(const CoefficientField& A) { return A.matrix_dim() * A.matrix_dim(); }

void require_extension_input(const CoefficientField& A) {
    const TimeGrid& g = A.time_grid();
    if (g.sampling != Sampling::cell_centered)
        throw ValidationError("extension needs a cell-centered grid on [0, T)");
    if (g.t_start != 0.0) throw ValidationError("extension needs a grid starting at t = 0");
    if (A.support() != std::pair<double, double>{g.t_start, g.t_end})
        throw ValidationError("extension needs a field defined on its whole grid");
}

std::size_t checked_window_factor(std::size_t factor) {
    if (factor < 4 || !is_power_of_two(factor))
        throw ValidationError("window factor must be a power of two >= 4");
    return factor;
}

} // namespace

CoefficientField::CoefficientField(TimeGrid grid, SpaceMesh mesh, std::size_t matrix_dim, std::vector<cplx> values,
                                   double horizon, std::pair<double, double> support, Certificate certificate,
                                   CoefficientDescriptor descriptor)
    : grid_(grid), mesh_(mesh), dim_(matrix_dim), values_(std::move(values)), horizon_(horizon),
      support_(support), cert_(certificate), descriptor_(std::move(descriptor)) {
    grid_.validate();
    mesh_.validate();
    if (dim_ == 0) throw ValidationError("CoefficientField: matrix dimension must be positive");
    if (values_.size() != grid_.n_points * mesh_.n_cells * dim_ * dim_)
        throw ValidationError("CoefficientField: sample count does not match grid x mesh x matrix size");
    for (const auto& v : values_)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw ValidationError("CoefficientField: non-finite sample");
    if (!(horizon_ > 0.0)) throw ValidationError("CoefficientField: horizon must be positive");
    if (!(support_.second > support_.first)) throw ValidationError("CoefficientField: empty support");
}

CoefficientField CoefficientField::certified(TimeGrid grid, SpaceMesh mesh, std::size_t matrix_dim,
                                             std::vector<cplx> values, CoefficientDescriptor descriptor) {
    CoefficientField A(grid, mesh, matrix_dim, std::move(values), grid.period(), {grid.t_start, grid.t_end},
                       Certificate{1.0, 1.0}, std::move(descriptor));
    A.cert_ = certify_ellipticity(A);
    return A;
}

TimeSignal CoefficientField::column(std::size_t cell) const {
    const std::size_t b = dim_ * dim_;
    TimeSignal s(grid_, b);
    for (std::size_t j = 0; j < grid_.n_points; ++j)
        for (std::size_t e = 0; e < b; ++e) s.values[j * b + e] = values_[(j * mesh_.n_cells + cell) * b + e];
    return s;
}

bool CoefficientField::time_independent(double tol) const {
    const std::size_t stride = mesh_.n_cells * dim_ * dim_;
    for (std::size_t j = 1; j < grid_.n_points; ++j)
        for (std::size_t i = 0; i < stride; ++i)
            if (std::abs(values_[j * stride + i] - values_[i]) > tol) return false;
    return true;
}

std::vector<cplx> CoefficientField::time_average() const {
    const std::size_t stride = mesh_.n_cells * dim_ * dim_;
    std::vector<cplx> avg(stride, 0.0);
    for (std::size_t j = 0; j < grid_.n_points; ++j)
        for (std::size_t i = 0; i < stride; ++i) avg[i] += values_[j * stride + i];
    for (auto& v : avg) v /= static_cast<double>(grid_.n_points);
    return avg;
}

Certificate certify_ellipticity(const CoefficientField& A) {
    const std::size_t d = A.matrix_dim();
    const std::size_t b = d * d;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    bool any = false;
    for (std::size_t j = 0; j < A.time_grid().n_points; ++j) {
        if (!in_support(A.time_grid().point(j), A.support())) continue;
        const auto slice = A.slice(j);
        for (std::size_t c = 0; c < A.cells(); ++c) {
            const auto [l, u] = sample_bounds(slice.subspan(c * b, b), d);
            lo = std::min(lo, l);
            hi = std::max(hi, u);
            any = true;
        }
    }
    if (!any) throw ValidationError("certify_ellipticity: no samples inside the support");
    if (!(lo > 0.0)) throw ValidationError("coefficient is not elliptic (lambda <= 0)");
    return {lo, hi};
}

bool check_certificate(const CoefficientField& A, const Certificate& cert, std::size_t probes, std::uint64_t seed,
                       double tol) {
    const std::size_t d = A.matrix_dim();
    const std::size_t b = d * d;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<VectorXc> xi(probes, VectorXc(d)), zeta(probes, VectorXc(d));
    for (std::size_t p = 0; p < probes; ++p) {
        for (std::size_t k = 0; k < d; ++k) {
            xi[p](k) = cplx(normal(rng), normal(rng));
            zeta[p](k) = cplx(normal(rng), normal(rng));
        }
        xi[p].normalize();
        zeta[p].normalize();
    }
    const double slack_lo = tol * std::max(1.0, cert.lambda);
    const double slack_hi = tol * std::max(1.0, cert.Lambda);
    for (std::size_t j = 0; j < A.time_grid().n_points; ++j) {
        if (!in_support(A.time_grid().point(j), A.support())) continue;
        const auto slice = A.slice(j);
        for (std::size_t c = 0; c < A.cells(); ++c) {
            const auto block = slice.subspan(c * b, b);
            const auto [l, u] = sample_bounds(block, d);
            if (l < cert.lambda - slack_lo || u > cert.Lambda + slack_hi) return false;
            const MatrixXc m = sample_matrix(block, d);
            for (std::size_t p = 0; p < probes; ++p) {
                const VectorXc ax = m * xi[p];
                if (xi[p].dot(ax).real() < cert.lambda - slack_lo) return false;
                if (std::abs(zeta[p].dot(ax)) > cert.Lambda + slack_hi) return false;
            }
        }
    }
    return true;
}

double CutoffProfile::evaluate(double t, double T) {
    if (t >= 0.0 && t <= T) return 1.0;
    if (t <= -0.5 * T || t >= 1.5 * T) return 0.0;
    if (t < 0.0) return 1.0 + 2.0 * t / T;
    return 1.0 - 2.0 * (t - T) / T;
}

CutoffProfile CutoffProfile::sample(const TimeGrid& grid, double T) {
    CutoffProfile p{T, std::vector<double>(grid.n_points)};
    for (std::size_t j = 0; j < grid.n_points; ++j) p.values[j] = evaluate(grid.point(j), T);
    return p;
}

CoefficientField extend_reflect(const CoefficientField& A, std::size_t window_factor) {
    require_extension_input(A);
    const std::size_t L = checked_window_factor(window_factor);
    const TimeGrid& g = A.time_grid();
    const std::size_t N = g.n_points;
    const double T = g.period();
    const TimeGrid out_grid = TimeGrid::make(-T, static_cast<double>(L - 1) * T, L * N, Sampling::cell_centered);
    const std::size_t stride = A.cells() * block_size(A);
    std::vector<cplx> out(out_grid.n_points * stride, 0.0);
    for (std::size_t i = 0; i < 3 * N; ++i) {
        // cell i of [-T, 2T): mirror about 0 for the first third, about T for the last
        const std::size_t src = i < N ? N - 1 - i : (i < 2 * N ? i - N : 3 * N - 1 - i);
        const auto s = A.slice(src);
        std::copy(s.begin(), s.end(), out.begin() + static_cast<std::ptrdiff_t>(i * stride));
    }
    CoefficientDescriptor desc = A.descriptor();
    desc.params["window_factor"] = static_cast<double>(L);
    return CoefficientField(out_grid, A.mesh(), A.matrix_dim(), std::move(out), T, {-T, 2.0 * T},
                            A.certificate(), std::move(desc));
}

CoefficientField extend_full(const CoefficientField& A, std::size_t window_factor) {
    const CoefficientField flat = extend_reflect(A, window_factor);
    const TimeGrid& g = flat.time_grid();
    const double T = flat.horizon();
    const double lambda = A.lambda();
    const std::size_t d = A.matrix_dim();
    const std::size_t b = d * d;
    const std::size_t stride = A.cells() * b;
    const CutoffProfile phi = CutoffProfile::sample(g, T);
    std::vector<cplx> out(flat.values().begin(), flat.values().end());
    for (std::size_t j = 0; j < g.n_points; ++j) {
        const double p = phi.values[j];
        if (p == 1.0) continue;
        for (std::size_t c = 0; c < A.cells(); ++c)
            for (std::size_t r = 0; r < d; ++r)
                for (std::size_t k = 0; k < d; ++k) {
                    cplx& v = out[j * stride + c * b + r * d + k];
                    v = p * v + (r == k ? (1.0 - p) * lambda : 0.0);
                }
    }
    return CoefficientField(g, A.mesh(), d, std::move(out), T, {g.t_start, g.t_end}, A.certificate(),
                            flat.descriptor());
}

CoefficientField mollify(const CoefficientField& A, std::size_t n) {
    if (n < 1) throw ValidationError("mollify: n must be at least 1");
    const TimeGrid& g = A.time_grid();
    if (A.support() != std::pair<double, double>{g.t_start, g.t_end})
        throw ValidationError("mollify: field must be defined on its whole grid window");
    const std::size_t N = g.n_points;
    const double dt = g.dt();
    const double radius = 1.0 / static_cast<double>(n);
    // rho_n(k dt) for |k dt| < 1/n, at most half the window on each side
    const long kmax = std::min<long>(static_cast<long>(N / 2) - 1, static_cast<long>(std::ceil(radius / dt)));
    std::vector<double> w;
    double total = 0.0;
    for (long k = -kmax; k <= kmax; ++k) {
        const double s = static_cast<double>(k) * dt / radius;
        const double v = std::abs(s) < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0;
        w.push_back(v);
        total += v;
    }
    for (auto& v : w) v /= total;

    const std::size_t stride = A.cells() * block_size(A);
    const auto in = A.values();
    std::vector<cplx> out(in.size(), 0.0);
    parallel_for(N, [&](std::size_t j) {
        cplx* dst = out.data() + j * stride;
        for (long k = -kmax; k <= kmax; ++k) {
            const double wk = w[static_cast<std::size_t>(k + kmax)];
            if (wk == 0.0) continue;
            const long src = (static_cast<long>(j) - k + static_cast<long>(N)) % static_cast<long>(N);
            const cplx* s = in.data() + static_cast<std::size_t>(src) * stride;
            for (std::size_t i = 0; i < stride; ++i) dst[i] += wk * s[i];
        }
    });
    CoefficientDescriptor desc = A.descriptor();
    desc.params["mollifier_n"] = static_cast<double>(n);
    return CoefficientField(g, A.mesh(), A.matrix_dim(), std::move(out), A.horizon(), A.support(), A.certificate(),
                            std::move(desc));
}

std::string to_string(FamilyKind k) {
    switch (k) {
    case FamilyKind::constant: return "constant";
    case FamilyKind::sqrt_product: return "sqrt_product";
    case FamilyKind::holder: return "holder";
    case FamilyKind::lipschitz: return "lipschitz";
    case FamilyKind::step: return "step";
    }
    return "constant";
}

FamilyKind family_kind_from_string(const std::string& s) {
    for (auto k : {FamilyKind::constant, FamilyKind::sqrt_product, FamilyKind::holder, FamilyKind::lipschitz,
                   FamilyKind::step})
        if (to_string(k) == s) return k;
    throw ValidationError("unknown coefficient family '" + s + "'");
}

TimeSignal holder_series(const TimeGrid& grid, double alpha, std::uint64_t seed, std::size_t terms) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("holder_series: alpha must lie in (0, 1)");
    if (terms < 1 || terms > 60) throw ValidationError("holder_series: terms must lie in [1, 60]");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::vector<double> phases(terms);
    for (auto& p : phases) p = phase(rng);
    double norm = 0.0;
    for (std::size_t k = 0; k < terms; ++k) norm += std::pow(2.0, -alpha * static_cast<double>(k));
    // octaves above a quarter of the sampling rate only alias, so they are dropped
    std::size_t resolved = 1;
    while ((std::size_t{4} << resolved) <= grid.n_points) ++resolved;
    resolved = std::min(resolved, terms);
    TimeSignal s(grid, 1);
    for (std::size_t j = 0; j < grid.n_points; ++j) {
        // reduce the phase in integer arithmetic so high octaves stay exact
        const double rel = (grid.point(j) - grid.t_start) / grid.period();
        double acc = 0.0;
        for (std::size_t k = 0; k < resolved; ++k) {
            const double harmonic = std::ldexp(1.0, static_cast<int>(k));
            const double turns = harmonic * rel;
            const double frac = turns - std::floor(turns);
            acc += std::pow(2.0, -alpha * static_cast<double>(k)) *
                   std::cos(2.0 * std::numbers::pi * frac + phases[k]);
        }
        s.values[j] = acc / norm;
    }
    return s;
}

CoefficientField family_generator(const FamilySpec& spec, const TimeGrid& grid, const SpaceMesh& mesh) {
    grid.validate();
    mesh.validate();
    if (!std::isfinite(spec.value) || !std::isfinite(spec.amplitude))
        throw ValidationError("family_generator: non-finite parameters");
    const double T = grid.period();
    const double t0 = spec.t0.value_or(grid.t_start + 0.5 * T);
    std::vector<double> p(mesh.n_cells);
    for (std::size_t c = 0; c < mesh.n_cells; ++c)
        p[c] = profile_value(spec.profile, (mesh.cell_midpoint(c) - mesh.x_lo) / (mesh.x_hi - mesh.x_lo));

    std::vector<double> g(grid.n_points, 0.0);
    switch (spec.kind) {
    case FamilyKind::constant: break;
    case FamilyKind::sqrt_product:
        for (std::size_t j = 0; j < grid.n_points; ++j) g[j] = std::sqrt(std::abs(grid.point(j) - t0));
        break;
    case FamilyKind::holder: {
        const TimeSignal h = holder_series(grid, spec.alpha, spec.seed, spec.terms);
        for (std::size_t j = 0; j < grid.n_points; ++j) g[j] = h.values[j].real();
        break;
    }
    case FamilyKind::lipschitz:
        for (std::size_t j = 0; j < grid.n_points; ++j)
            g[j] = std::sin(2.0 * std::numbers::pi * (grid.point(j) - grid.t_start) / T);
        break;
    case FamilyKind::step:
        for (std::size_t j = 0; j < grid.n_points; ++j) g[j] = grid.point(j) >= t0 ? 1.0 : 0.0;
        break;
    }
    const double amp = spec.kind == FamilyKind::constant ? 0.0 : spec.amplitude;
    std::vector<cplx> values(grid.n_points * mesh.n_cells);
    for (std::size_t j = 0; j < grid.n_points; ++j)
        for (std::size_t c = 0; c < mesh.n_cells; ++c) values[j * mesh.n_cells + c] = spec.value + amp * g[j] * p[c];

    CoefficientDescriptor desc;
    desc.kind = to_string(spec.kind);
    desc.seed = spec.seed;
    desc.params["value"] = spec.value;
    if (spec.kind != FamilyKind::constant) desc.params["amplitude"] = spec.amplitude;
    if (spec.kind == FamilyKind::holder) {
        desc.params["alpha"] = spec.alpha;
        desc.params["terms"] = static_cast<double>(spec.terms);
    }
    if (spec.kind == FamilyKind::sqrt_product || spec.kind == FamilyKind::step) desc.params["t0"] = t0;
    return CoefficientField::certified(grid, mesh, 1, std::move(values), std::move(desc));
}

SeminormValue coefficient_scale_invariant(const CoefficientField& A, FamilyStyle style, double a, double b,
                                          double alpha) {
    const IntervalFamily fam = IntervalFamily::make(A.time_grid(), style, a, b);
    const SampleNorm norm{A.matrix_dim() > 1 ? A.matrix_dim() : 0};
    SeminormValue best;
    TimeSignal previous;
    for (std::size_t c = 0; c < A.cells(); ++c) {
        TimeSignal col = A.column(c);
        if (c > 0 && col == previous) continue;
        const SeminormValue v = scale_invariant_sobolev(col, fam, alpha, norm);
        if (c == 0 || v.value > best.value) best = v;
        previous = std::move(col);
    }
    return best;
}

SeminormValue coefficient_scale_invariant(const CoefficientField& A, FamilyStyle style, double alpha) {
    return coefficient_scale_invariant(A, style, A.time_grid().t_start, A.time_grid().t_end, alpha);
}

} // namespace maxreg
