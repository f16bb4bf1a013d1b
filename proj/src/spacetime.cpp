#include "maxreg/spacetime.hpp"

#include "maxreg/errors.hpp"
#include "maxreg/fft.hpp"
#include "maxreg/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace maxreg {

SpaceTimeField::SpaceTimeField(const TimeGrid& grid, const SpaceMesh& m)
    : mesh(m), data(grid, m.dof_count()) {}

SpaceTimeField::SpaceTimeField(const TimeGrid& grid, const SpaceMesh& m, std::vector<cplx> values)
    : mesh(m), data(grid, m.dof_count(), std::move(values)) {}

SpaceTimeField SpaceTimeField::from_function(const TimeGrid& grid, const SpaceMesh& m,
                                             const std::function<cplx(double, double)>& f) {
    SpaceTimeField u(grid, m);
    for (std::size_t j = 0; j < grid.n_points; ++j) {
        const double t = grid.point(j);
        for (std::size_t i = 0; i < u.dofs(); ++i) u.at(j, i) = f(t, m.dof_x(i));
    }
    return u;
}

SpaceTimeField& SpaceTimeField::operator+=(const SpaceTimeField& o) {
    if (!(mesh == o.mesh)) throw ValidationError("SpaceTimeField: mesh mismatch");
    data += o.data;
    return *this;
}

SpaceTimeField& SpaceTimeField::operator-=(const SpaceTimeField& o) {
    if (!(mesh == o.mesh)) throw ValidationError("SpaceTimeField: mesh mismatch");
    data -= o.data;
    return *this;
}

SpaceTimeField& SpaceTimeField::operator*=(cplx s) {
    data *= s;
    return *this;
}

SpaceTimeField operator+(SpaceTimeField a, const SpaceTimeField& b) { return a += b; }
SpaceTimeField operator-(SpaceTimeField a, const SpaceTimeField& b) { return a -= b; }
SpaceTimeField operator*(cplx s, SpaceTimeField a) { return a *= s; }

double choose_delta(double lambda, double Lambda, cplx theta) {
    if (!(theta.real() > 0.0)) throw ValidationError("choose_delta: Re theta must be positive");
    if (!(lambda > 0.0) || !(Lambda >= lambda)) throw ValidationError("choose_delta: need 0 < lambda <= Lambda");
    return std::min(lambda / (Lambda + 1.0), theta.real() / (std::abs(theta.imag()) + 1.0));
}

FormParameters FormParameters::make(const Certificate& cert, cplx theta, std::optional<double> delta) {
    FormParameters p;
    p.theta = theta;
    p.lambda = cert.lambda;
    p.Lambda = cert.Lambda;
    p.eta = cert.lambda;
    p.delta = delta ? *delta : choose_delta(cert.lambda, cert.Lambda, theta);
    p.validate();
    return p;
}

void FormParameters::validate() const {
    if (!(theta.real() > 0.0)) throw ValidationError("form parameters: Re theta must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("form parameters: delta must lie in (0, 1)");
    if (!(lambda > 0.0) || !(Lambda >= lambda)) throw ValidationError("form parameters: need 0 < lambda <= Lambda");
}

double FormParameters::coercivity_constant() const {
    return std::min({delta, lambda - delta * Lambda, theta.real() - delta * std::abs(theta.imag())});
}

namespace {

void require_field_match(const SpaceTimeField& u, const CoefficientField& A, const char* what) {
    if (!(u.grid() == A.time_grid()) || !(u.mesh == A.mesh()))
        throw ValidationError(std::string(what) + ": field and coefficient live on different grids");
    if (A.matrix_dim() != 1)
        throw ValidationError(std::string(what) + ": the 1D solver needs a scalar coefficient");
}

void require_same_layout(const SpaceTimeField& a, const SpaceTimeField& b, const char* what) {
    if (!(a.grid() == b.grid()) || !(a.mesh == b.mesh))
        throw ValidationError(std::string(what) + ": fields live on different grids");
}

double signum(double t) { return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0); }

cplx dot(std::span<const cplx> a, std::span<const cplx> b) {
    cplx acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * std::conj(b[i]);
    return acc;
}

std::vector<TridiagonalLU> riesz_factors(const P1Space& space, const TimeGrid& grid) {
    std::vector<cplx> ones(space.mesh().n_cells, 1.0);
    std::vector<TridiagonalLU> lu;
    lu.reserve(grid.n_points);
    for (std::size_t k = 0; k < grid.n_points; ++k)
        lu.emplace_back(space.shifted(1.0 + std::abs(grid.frequency(k)), ones));
    return lu;
}

// (theta + L) u with u' = symbol(tau) u per dof; shared by apply_L and its adjoint.
SpaceTimeField apply_parabolic(const SpaceTimeField& u, const CoefficientField& A, cplx theta, double sign,
                               bool conjugate_coef) {
    require_field_match(u, A, "apply_L");
    require_finite(u.data, "apply_L");
    const P1Space space(u.mesh);
    TimeSignal du = apply_symbol(u.data, [sign](double tau) { return cplx(0.0, sign * tau); });
    SpaceTimeField out(u.grid(), u.mesh);
    const std::size_t n = u.dofs();
    parallel_for(u.grid().n_points, [&](std::size_t j) {
        std::vector<cplx> w(n);
        for (std::size_t i = 0; i < n; ++i) w[i] = du.values[j * n + i] + theta * u.at(j, i);
        space.mass().apply(w, out.slice(j));
        auto a = A.slice(j);
        if (conjugate_coef) {
            std::vector<cplx> ca(a.size());
            for (std::size_t c = 0; c < a.size(); ++c) ca[c] = std::conj(a[c]);
            space.apply_stiffness_add(ca, u.slice(j), out.slice(j));
        } else {
            space.apply_stiffness_add(a, u.slice(j), out.slice(j));
        }
    }, 1);
    return out;
}

} // namespace

SpaceTimeField mass_load(const SpaceTimeField& f) {
    const P1Space space(f.mesh);
    SpaceTimeField out(f.grid(), f.mesh);
    for (std::size_t j = 0; j < f.grid().n_points; ++j) space.mass().apply(f.slice(j), out.slice(j));
    return out;
}

cplx dual_pairing(const SpaceTimeField& functional, const SpaceTimeField& w) {
    require_same_layout(functional, w, "dual_pairing");
    return dot(functional.data.values, w.data.values) * functional.grid().dt();
}

SpaceTimeField apply_L(const SpaceTimeField& u, const CoefficientField& A, cplx theta) {
    return apply_parabolic(u, A, theta, 1.0, false);
}

SpaceTimeField apply_L_adjoint(const SpaceTimeField& w, const CoefficientField& A, cplx theta) {
    return apply_parabolic(w, A, std::conj(theta), -1.0, true);
}

cplx coercive_form(const SpaceTimeField& v, const SpaceTimeField& w, const CoefficientField& A,
                   const FormParameters& params) {
    params.validate();
    SpaceTimeField tw = w;
    tw.data = twist_operator(w.data, params.delta);
    return dual_pairing(apply_L(v, A, params.theta), tw);
}

EnergyParts energy_parts(const SpaceTimeField& u) {
    const P1Space space(u.mesh);
    const std::size_t n = u.dofs();
    const std::size_t N = u.grid().n_points;
    const double dt = u.grid().dt();
    EnergyParts e;
    std::vector<cplx> tmp(n);
    for (std::size_t j = 0; j < N; ++j) {
        e.l2 += space.mass_norm2(u.slice(j));
        e.gradient += space.grad_norm2(u.slice(j));
    }
    e.l2 *= dt;
    e.gradient *= dt;
    std::vector<cplx> hat(u.data.values);
    fft::forward(hat, N, n);
    for (std::size_t k = 0; k < N; ++k) {
        const std::span<const cplx> hk(hat.data() + k * n, n);
        e.half_derivative += std::abs(u.grid().frequency(k)) * space.mass_norm2(hk);
    }
    e.half_derivative *= dt / static_cast<double>(N);
    return e;
}

double energy_norm(const SpaceTimeField& u) { return std::sqrt(energy_parts(u).total()); }

double l2_norm(const SpaceTimeField& u) { return std::sqrt(energy_parts(u).l2); }

double dual_norm(const SpaceTimeField& functional) {
    const P1Space space(functional.mesh);
    const std::size_t n = functional.dofs();
    const std::size_t N = functional.grid().n_points;
    const auto lu = riesz_factors(space, functional.grid());
    std::vector<cplx> hat(functional.data.values);
    fft::forward(hat, N, n);
    double acc = 0.0;
    std::vector<cplx> z(n);
    for (std::size_t k = 0; k < N; ++k) {
        const std::span<const cplx> hk(hat.data() + k * n, n);
        std::copy(hk.begin(), hk.end(), z.begin());
        lu[k].solve_inplace(z);
        acc += dot(z, hk).real();
    }
    return std::sqrt(std::max(0.0, acc * functional.grid().dt() / static_cast<double>(N)));
}

double coercivity_lower_bound(const SpaceTimeField& v, const FormParameters& params) {
    const EnergyParts e = energy_parts(v);
    return params.delta * e.half_derivative + (params.lambda - params.delta * params.Lambda) * e.gradient +
           (params.theta.real() - params.delta * std::abs(params.theta.imag())) * e.l2;
}

struct LineSolver::Impl {
    CoefficientField A;
    SpaceMesh mesh;
    TimeGrid grid;
    P1Space space;
    FormParameters params;
    SolverOptions options;
    std::size_t N;
    std::size_t n;
    std::vector<double> tau;
    std::vector<cplx> twist;
    std::vector<TridiagonalLU> precond;
    std::vector<TridiagonalLU> riesz;

    Impl(const CoefficientField& coef, cplx theta, SolverOptions opts)
        : A(coef), mesh(coef.mesh()), grid(coef.time_grid()), space(coef.mesh()),
          params(FormParameters::make(coef.certificate(), theta, opts.delta)), options(opts),
          N(grid.n_points), n(space.dofs()) {
        if (A.matrix_dim() != 1) throw ValidationError("LineSolver: the 1D solver needs a scalar coefficient");
        if (A.support() != std::pair<double, double>{grid.t_start, grid.t_end})
            throw ValidationError("LineSolver: coefficient must be defined on the whole window");
        if (!(options.tolerance > 0.0) || options.restart < 1 || options.max_iterations < 1)
            throw ValidationError("LineSolver: bad solver options");
        tau.resize(N);
        twist.resize(N);
        for (std::size_t k = 0; k < N; ++k) {
            tau[k] = grid.frequency(k);
            twist[k] = cplx(1.0, -params.delta * signum(tau[k]));
        }
        const std::vector<cplx> mean = A.time_average();
        precond.resize(N);
        parallel_for(N, [&](std::size_t k) { precond[k] = TridiagonalLU(space.shifted(cplx(0.0, tau[k]) + theta, mean)); },
                     options.workers);
        riesz = riesz_factors(space, grid);
    }

    std::span<cplx> mode(std::vector<cplx>& v, std::size_t k) const { return {v.data() + k * n, n}; }
    std::span<const cplx> mode(const std::vector<cplx>& v, std::size_t k) const { return {v.data() + k * n, n}; }

    // spectrum of (theta + L) x for a spectrum x
    std::vector<cplx> apply_operator_hat(const std::vector<cplx>& xhat) const {
        std::vector<cplx> x(xhat);
        fft::backward(x, N, n);
        const double inv = 1.0 / static_cast<double>(N);
        for (auto& v : x) v *= inv;
        std::vector<cplx> y(N * n, 0.0);
        parallel_for(N, [&](std::size_t j) {
            space.apply_stiffness(A.slice(j), mode(x, j), mode(y, j));
        }, options.workers);
        fft::forward(y, N, n);
        std::vector<cplx> tmp(n);
        for (std::size_t k = 0; k < N; ++k) {
            const cplx s = cplx(0.0, tau[k]) + params.theta;
            const auto xk = mode(xhat, k);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = s * xk[i];
            space.mass().apply_add(tmp, mode(y, k));
        }
        return y;
    }

    std::vector<cplx> apply_twisted(const std::vector<cplx>& xhat) const {
        auto y = apply_operator_hat(xhat);
        for (std::size_t k = 0; k < N; ++k)
            for (auto& v : mode(y, k)) v *= twist[k];
        return y;
    }

    std::vector<cplx> apply_precond(const std::vector<cplx>& r) const {
        std::vector<cplx> x(r);
        for (std::size_t k = 0; k < N; ++k) {
            auto xk = mode(x, k);
            for (auto& v : xk) v /= twist[k];
            precond[k].solve_inplace(xk);
        }
        return x;
    }

    std::vector<cplx> riesz_inverse(const std::vector<cplx>& r) const {
        std::vector<cplx> x(r);
        for (std::size_t k = 0; k < N; ++k) riesz[k].solve_inplace(mode(x, k));
        return x;
    }

    double weight() const { return grid.dt() / static_cast<double>(N); }

    // <a, b>_E* for spectra, given rb = R^{-1} b
    cplx inner(const std::vector<cplx>& a, const std::vector<cplx>& rb) const { return dot(a, rb) * weight(); }
    double norm(const std::vector<cplx>& a) const { return std::sqrt(std::max(0.0, inner(a, riesz_inverse(a)).real())); }

    // restarted GMRES on (twist L P) y = twist F; returns x = P y
    std::vector<cplx> gmres(const std::vector<cplx>& Fhat, std::size_t& iterations, double& twisted_residual) const {
        const double target = options.tolerance / std::sqrt(1.0 + params.delta * params.delta);
        std::vector<cplx> b(Fhat);
        for (std::size_t k = 0; k < N; ++k)
            for (auto& v : mode(b, k)) v *= twist[k];
        const double beta0 = norm(b);
        std::vector<cplx> x(N * n, 0.0);
        iterations = 0;
        twisted_residual = 0.0;
        if (beta0 == 0.0) return x;
        std::vector<cplx> r = b;
        const std::size_t m = options.restart;
        while (true) {
            const double beta = norm(r);
            twisted_residual = beta / beta0;
            if (twisted_residual <= target || iterations >= options.max_iterations) break;
            std::vector<std::vector<cplx>> V;
            V.reserve(m + 1);
            V.push_back(r);
            for (auto& v : V[0]) v /= beta;
            std::vector<std::vector<cplx>> H(m + 1, std::vector<cplx>(m, 0.0));
            std::vector<cplx> cs(m), sn(m), g(m + 1, 0.0);
            g[0] = beta;
            std::size_t used = 0;
            for (std::size_t i = 0; i < m; ++i) {
                std::vector<cplx> w = apply_twisted(apply_precond(V[i]));
                for (int pass = 0; pass < 2; ++pass) {
                    const auto rw = riesz_inverse(w);
                    for (std::size_t l = 0; l <= i; ++l) {
                        const cplx h = dot(rw, V[l]) * weight();
                        H[l][i] += h;
                        for (std::size_t q = 0; q < w.size(); ++q) w[q] -= h * V[l][q];
                    }
                }
                const double hnext = norm(w);
                H[i + 1][i] = hnext;
                for (std::size_t l = 0; l < i; ++l) {
                    const cplx a = H[l][i], c = H[l + 1][i];
                    H[l][i] = cs[l] * a + sn[l] * c;
                    H[l + 1][i] = -std::conj(sn[l]) * a + cs[l] * c;
                }
                const cplx h1 = H[i][i];
                const double d = std::hypot(std::abs(h1), hnext);
                if (d == 0.0) {
                    cs[i] = 1.0;
                    sn[i] = 0.0;
                } else if (std::abs(h1) == 0.0) {
                    cs[i] = 0.0;
                    sn[i] = 1.0;
                } else {
                    cs[i] = std::abs(h1) / d;
                    sn[i] = (h1 / std::abs(h1)) * hnext / d;
                }
                H[i][i] = cs[i] * h1 + sn[i] * hnext;
                H[i + 1][i] = 0.0;
                g[i + 1] = -std::conj(sn[i]) * g[i];
                g[i] = cs[i] * g[i];
                ++iterations;
                used = i + 1;
                const double est = std::abs(g[i + 1]) / beta0;
                if (est <= target || hnext == 0.0 || iterations >= options.max_iterations) break;
                V.push_back(std::move(w));
                for (auto& v : V.back()) v /= hnext;
            }
            std::vector<cplx> y(used);
            for (std::size_t l = used; l-- > 0;) {
                cplx acc = g[l];
                for (std::size_t q = l + 1; q < used; ++q) acc -= H[l][q] * y[q];
                y[l] = acc / H[l][l];
            }
            std::vector<cplx> z(N * n, 0.0);
            for (std::size_t l = 0; l < used; ++l)
                for (std::size_t q = 0; q < z.size(); ++q) z[q] += y[l] * V[l][q];
            const auto dx = apply_precond(z);
            for (std::size_t q = 0; q < x.size(); ++q) x[q] += dx[q];
            r = apply_twisted(x);
            for (std::size_t q = 0; q < r.size(); ++q) r[q] = b[q] - r[q];
        }
        return x;
    }
};

LineSolver::LineSolver(const CoefficientField& A, cplx theta, SolverOptions options)
    : impl_(std::make_unique<Impl>(A, theta, options)) {}

LineSolver::~LineSolver() = default;

const FormParameters& LineSolver::parameters() const { return impl_->params; }

SolveResult LineSolver::solve_dual(const SpaceTimeField& F) const {
    const Impl& s = *impl_;
    if (!(F.grid() == s.grid) || !(F.mesh == s.mesh))
        throw ValidationError("LineSolver: right-hand side lives on a different grid");
    require_finite(F.data, "LineSolver");

    SolveResult out{SpaceTimeField(s.grid, s.mesh), {}};
    SolveDiagnostics& d = out.diagnostics;
    d.delta = s.params.delta;
    d.rhs_dual_norm = dual_norm(F);
    d.energy_bound = std::sqrt(2.0) / s.params.coercivity_constant() * d.rhs_dual_norm;
    if (d.rhs_dual_norm == 0.0) {
        d.coercivity_constant_observed = s.params.coercivity_constant();
        return out;
    }

    std::vector<cplx> Fhat(F.data.values);
    fft::forward(Fhat, s.N, s.n);
    double twisted = 0.0;
    std::vector<cplx> x = s.gmres(Fhat, d.iterations, twisted);
    fft::backward(x, s.N, s.n);
    const double inv = 1.0 / static_cast<double>(s.N);
    for (auto& v : x) v *= inv;
    out.u.data.values = std::move(x);

    SpaceTimeField Lu = apply_L(out.u, s.A, s.params.theta);
    d.residual = dual_norm(F - Lu) / d.rhs_dual_norm;
    d.energy_norm = energy_norm(out.u);
    SpaceTimeField tu = out.u;
    tu.data = twist_operator(out.u.data, s.params.delta);
    const double e2 = d.energy_norm * d.energy_norm;
    d.coercivity_constant_observed = e2 > 0.0 ? dual_pairing(Lu, tu).real() / e2 : 0.0;
    d.energy_bound_ok = d.energy_norm <= d.energy_bound * (1.0 + 1e-6);

    if (!(d.residual <= s.options.tolerance))
        throw SolverError("line solve did not converge: relative residual " + std::to_string(d.residual) +
                              " after " + std::to_string(d.iterations) + " iterations",
                          d.residual, d.iterations);
    return out;
}

SolveResult solve_line(const CoefficientField& A, const SpaceTimeField& f, cplx theta, const SolverOptions& options) {
    return LineSolver(A, theta, options).solve(f);
}

SolveResult solve_line_dual(const CoefficientField& A, const SpaceTimeField& F, cplx theta,
                            const SolverOptions& options) {
    return LineSolver(A, theta, options).solve_dual(F);
}

CauchyResult cauchy_solve(const CoefficientField& A, const SpaceTimeField& f, const CauchyOptions& options) {
    const TimeGrid& g0 = A.time_grid();
    if (!(f.grid() == g0) || !(f.mesh == A.mesh()))
        throw ValidationError("cauchy_solve: data and coefficient live on different grids");
    require_finite(f.data, "cauchy_solve");
    std::size_t L = options.window_factor;
    if (L == 0) {
        const bool dirichlet = A.mesh().bc_left == Boundary::dirichlet || A.mesh().bc_right == Boundary::dirichlet;
        L = dirichlet ? 4 : 16;
    }
    const CoefficientField Ash = extend_full(A, L);
    const TimeGrid& wg = Ash.time_grid();
    const std::size_t N = g0.n_points;
    const std::size_t n = f.dofs();

    SpaceTimeField g(wg, f.mesh);
    for (std::size_t j = 0; j < N; ++j) {
        const double w = std::exp(-g0.point(j));
        for (std::size_t i = 0; i < n; ++i) g.at(N + j, i) = w * f.at(j, i);
    }

    CauchyResult res;
    res.window_factor = L;
    SolveResult line = LineSolver(Ash, 1.0, options.solver).solve(g);
    res.v = std::move(line.u);
    res.diagnostics = line.diagnostics;

    res.u = SpaceTimeField(g0, f.mesh);
    for (std::size_t j = 0; j < N; ++j) {
        const double w = std::exp(g0.point(j));
        for (std::size_t i = 0; i < n; ++i) res.u.at(j, i) = w * res.v.at(N + j, i);
    }

    const P1Space space(f.mesh);
    const std::vector<cplx> v0 = evaluate_trigonometric(res.v.data, 0.0);
    res.v0_norm = std::sqrt(std::max(0.0, space.mass_norm2(v0)));
    double total = 0.0, tail = 0.0;
    for (std::size_t j = 0; j < wg.n_points; ++j) {
        const double m = space.mass_norm2(res.v.slice(j));
        total += m;
        if (j >= (L - 1) * N) tail += m;
    }
    res.v_l2_norm = std::sqrt(total * wg.dt());
    res.guard_fraction = total > 0.0 ? tail / total : 0.0;
    res.guard_ok = res.guard_fraction <= options.guard_tolerance;
    return res;
}

} // namespace maxreg
