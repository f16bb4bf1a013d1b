// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include "maxreg/bmo.hpp"
#include "maxreg/coefficients.hpp"
#include "maxreg/commutator.hpp"
#include "maxreg/experiment.hpp"
#include "maxreg/metrics.hpp"
#include "maxreg/spacetime.hpp"
#include "support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace maxreg;
using maxreg::testing::random_field;
using maxreg::testing::random_signal;
using maxreg::testing::remove_mean;

namespace {

const double pi = std::numbers::pi;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string list(const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt("%.4g", v[i]);
    return s + "]";
}

TimeGrid horizon(std::size_t n, double T = 1.0) { return TimeGrid::make(0.0, T, n, Sampling::cell_centered); }

CoefficientField uniform(const TimeGrid& g, const SpaceMesh& m, cplx a) {
    return CoefficientField::certified(g, m, 1, std::vector<cplx>(g.n_points * m.n_cells, a));
}

ExperimentConfig bundled(const std::string& name) {
    ExperimentConfig c = load_config(std::filesystem::path(MAXREG_SOURCE_DIR) / "configs" / (name + ".json"));
    c.output.write = false;
    return c;
}

double rel_l2(const SpaceTimeField& a, const SpaceTimeField& b) { return l2_norm(a - b) / l2_norm(b); }

FamilySpec family(FamilyKind k, double alpha = 0.5, double amplitude = 0.5, std::uint64_t seed = 3) {
    FamilySpec s;
    s.kind = k;
    s.alpha = alpha;
    s.amplitude = amplitude;
    s.seed = seed;
    return s;
}

// 1. D^1/2 D^1/2 = D^1 and skew-adjointness of H_t
Outcome symbol_calculus() {
    const TimeGrid g = TimeGrid::make(0.0, 1.0, 1024);
    double comp = 0.0, skew = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const TimeSignal u = remove_mean(random_signal(g, 1, seed));
        const TimeSignal twice = frac_derivative(frac_derivative(u, FracOrder(0.5)), FracOrder(0.5));
        const TimeSignal once = frac_derivative(u, FracOrder(1.0));
        comp = std::max(comp, time_norm(twice - once) / time_norm(once));
        const TimeSignal f = random_signal(g, 1, 100 + seed);
        skew = std::max(skew, std::abs(time_inner_product(f, hilbert_transform(f)).real()) / std::pow(time_norm(f), 2));
    }
    return {comp <= 1e-10 && skew <= 1e-12, "composition rel err " + fmt("%.2e", comp) + ", |Re<f,Hf>|/|f|^2 " +
                                                fmt("%.2e", skew)};
}

// 2. coercivity of the twisted form on random fields
Outcome coercivity() {
    const TimeGrid g = horizon(32);
    const SpaceMesh m = SpaceMesh::make(0, 1, 8, Boundary::neumann, Boundary::neumann);
    FamilySpec s = family(FamilyKind::sqrt_product, 0.5, 0.8);
    s.profile = "cosine";
    const CoefficientField A = family_generator(s, g, m);
    double worst = 1e300;
    for (cplx theta : {cplx(1), cplx(1, 10), cplx(0.1)}) {
        const FormParameters p = FormParameters::make(A.certificate(), theta);
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const auto v = random_field(g, m, seed);
            const double re = coercive_form(v, v, A, p).real();
            worst = std::min(worst, re / (p.coercivity_constant() * energy_parts(v).total()));
        }
    }
    return {worst >= 1.0 - 1e-10, "min Re e(v,v) / (c |v|_E^2) = " + fmt("%.6f", worst)};
}

// 3. |u|_L2(H) <= |f|_L2(H) / Re theta
Outcome resolvent_bound() {
    const TimeGrid g = horizon(64);
    const SpaceMesh m = SpaceMesh::make(0, 1, 16, Boundary::dirichlet, Boundary::neumann);
    const CoefficientField A = family_generator(family(FamilyKind::holder, 0.45), g, m);
    double worst = 0.0;
    int n = 0;
    for (cplx theta : {cplx(1), cplx(0.5, 3)}) {
        const LineSolver solver(A, theta);
        for (std::uint64_t seed = 0; seed < 10; ++seed, ++n) {
            const auto f = random_field(g, m, 100 + seed);
            const auto r = solver.solve(f);
            worst = std::max(worst, l2_norm(r.u) * theta.real() / l2_norm(f));
        }
    }
    return {n == 20 && worst <= 1.0 + 1e-6, "max Re(theta) |u| / |f| = " + fmt("%.6f", worst) + " over 20 solves"};
}

// 4. extension constants for every family
Outcome extension_constants_all() {
    std::vector<FamilySpec> fams{family(FamilyKind::constant), family(FamilyKind::sqrt_product),
                                 family(FamilyKind::holder, 0.3, 0.5, 11), family(FamilyKind::lipschitz),
                                 family(FamilyKind::step)};
    fams[0].value = 1.5;
    FamilySpec cos = family(FamilyKind::sqrt_product, 0.5, 0.8);
    cos.profile = "cosine";
    fams.push_back(cos);
    bool ok = true;
    std::ostringstream d;
    for (const auto& s : fams) {
        const auto A = family_generator(s, horizon(256), SpaceMesh::make(0, 1, 4));
        const ExtensionConstants e = extension_constants(A);
        const bool fine = e.reflect_T <= 3.0 * e.M && e.reflect_2T <= 9.0 * e.M && e.M_natural <= e.bound;
        ok = ok && fine && e.reflect_T_ok && e.reflect_2T_ok && e.natural_ok;
        d << to_string(s.kind) << (s.profile == "cosine" ? "(cos)" : "") << " M=" << fmt("%.3g", e.M)
          << " r/3M=" << fmt("%.3f", e.M > 0 ? e.reflect_T / (3 * e.M) : 0.0)
          << " r/9M=" << fmt("%.3f", e.M > 0 ? e.reflect_2T / (9 * e.M) : 0.0)
          << " M#/bound=" << fmt("%.3f", e.M_natural / e.bound) << "; ";
    }
    return {ok, d.str()};
}

// 5. worked example: admissible but not Dini, and the log fit of D^1/2 |t|^1/2
Outcome worked_example() {
    ExperimentConfig c = bundled("sqrt-product");
    c.analysis.functionals = {"scale_invariant", "dini"};
    c.analysis.extension_checks = false;
    const RegularityReport r = run_analyze(c);
    const bool si = r.checks.at("scale_invariant@0.5_finite");
    const bool dini_div = !r.checks.at("dini@1_finite");

    const std::size_t n = 4096;
    const TimeGrid g = TimeGrid::make(-1.0, 1.0, n);
    const TimeSignal w = frac_derivative(
        remove_mean(TimeSignal::from_function(g, [](double t) { return std::sqrt(std::abs(t)); })), FracOrder(0.5));
    std::vector<double> x, y;
    for (std::size_t j = 0; j < n; ++j) {
        const double t = g.point(j);
        if (std::abs(t) > 1.0 / 3.0 || std::abs(t) < 16.0 * g.dt()) continue;
        x.push_back(std::log(std::abs(t)));
        y.push_back(w.values[j].real());
    }
    const double m = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double k = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    const double d0 = (sy - k * sx) / m;
    double ss_res = 0, ss_tot = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        ss_res += std::pow(y[i] - (k * x[i] + d0), 2);
        ss_tot += std::pow(y[i] - sy / m, 2);
    }
    const double r2 = 1.0 - ss_res / ss_tot;
    return {si && dini_div && r2 >= 0.99, std::string("scale-invariant ") + (si ? "stable" : "divergent") +
                                              ", dini(q=1) " + (dini_div ? "divergent" : "finite") + ", log fit c=" +
                                              fmt("%.4f", k) + " R^2=" + fmt("%.5f", r2)};
}

// 6. oracle and Crank-Nicolson agreement
Outcome oracle_agreement() {
    const TimeGrid g = horizon(256);
    const SpaceMesh m = SpaceMesh::make(0, 1, 64);
    const auto A = uniform(g, m, 1.0);
    const auto f = SpaceTimeField::from_function(g, m, [](double, double x) { return cplx(std::sin(pi * x)); });
    const double e1 = rel_l2(cauchy_solve(A, f).u, autonomous_oracle(A, f));

    FamilySpec s = family(FamilyKind::sqrt_product);
    s.profile = "cosine";
    const auto B = mollify(family_generator(s, g, m), 8);
    const auto h = SpaceTimeField::from_function(g, m, [](double t, double x) { return cplx(std::sin(pi * x) * (1.0 + t)); });
    const double e2 = rel_l2(cauchy_solve(B, h).u, timestep_reference(B, h, 8 * 256));
    return {e1 <= 1e-3 && e2 <= 1e-2, "oracle rel err " + fmt("%.2e", e1) + ", crank-nicolson rel err " + fmt("%.2e", e2)};
}

// 7. v(0) = 0 at the default resolution and under refinement
Outcome initial_condition() {
    const std::size_t n0 = TimeConfig{}.n_points;
    const SpaceMesh m = SpaceMesh::make(0, 1, 64);
    std::vector<double> ratio;
    for (std::size_t n : {n0, 2 * n0, 4 * n0}) {
        const TimeGrid g = horizon(n);
        const auto f = SpaceTimeField::from_function(g, m, [](double, double x) { return cplx(std::sin(pi * x)); });
        const auto r = cauchy_solve(uniform(g, m, 1.0), f);
        ratio.push_back(r.v0_norm / r.v_l2_norm);
    }
    const bool decreasing = ratio[1] < ratio[0] && ratio[2] < ratio[1];
    return {ratio[0] <= 1e-3 && decreasing, "|v(0)|/|v| at N = " + std::to_string(n0) + ", x2, x4: " + list(ratio) +
                                                (decreasing ? " (decreasing)" : " (not decreasing)")};
}

// 8. ratio stable for sqrt_product; holder(0.3) solves and is flagged
Outcome maximal_regularity() {
    ExperimentConfig c = bundled("sqrt-product");
    c.solver.reference = "none";
    c.analysis.resolutions.clear();
    c.analysis.extension_checks = false;
    std::vector<double> ratios;
    for (std::size_t n : {64u, 128u, 256u}) {
        c.time.n_points = n;
        ratios.push_back(run_solve(c).ratios.at("maxreg"));
    }
    const double spread = *std::max_element(ratios.begin(), ratios.end()) / *std::min_element(ratios.begin(), ratios.end());

    ExperimentConfig h = bundled("holder-0.3");
    h.analysis.extension_checks = false;
    const RegularityReport r = run_solve(h);
    const bool solved = !r.error && r.diagnostics.at("residual") <= h.solver.tolerance;
    const bool flagged = !r.checks.at("regularity_condition_stable");
    return {spread <= 2.0 && solved && flagged, "sqrt ratios " + list(ratios) + " spread " + fmt("%.3f", spread) +
                                                    "; holder(0.3) " + (solved ? "solved" : "not solved") + ", " +
                                                    (flagged ? "flagged divergent" : "not flagged")};
}

// 9. factorization identity
Outcome factorization() {
    const SpaceMesh m = SpaceMesh::make(0.0, 1.0, 16);
    auto forcing = [&](const TimeGrid& g) {
        return SpaceTimeField::from_function(g, m, [](double t, double x) {
            return cplx(std::sin(pi * x) * std::exp(-10.0 * (t - 0.5) * (t - 0.5)));
        });
    };
    double worst_moll = 0.0;
    for (FamilyKind k : {FamilyKind::sqrt_product, FamilyKind::holder, FamilyKind::step}) {
        FamilySpec s = family(k, 0.3);
        s.profile = "cosine";
        const auto A = mollify(extend_full(family_generator(s, horizon(64), m), 4), 16);
        worst_moll = std::max(worst_moll, factorization_check(A, forcing(A.time_grid())).residual);
    }
    SolverOptions o;
    const auto C = extend_full(family_generator(family(FamilyKind::constant), horizon(64), m), 4);
    const double aut = factorization_check(C, forcing(C.time_grid()), o).residual;
    return {worst_moll <= 1e-6 && aut <= 10.0 * o.tolerance,
            "mollified max residual " + fmt("%.2e", worst_moll) + ", autonomous " + fmt("%.2e", aut)};
}

// 10. commutator stable for |t|^1/2, divergent for a 0.45-Hoelder sample
Outcome commutator_direction() {
    const std::vector<std::size_t> res{256, 512, 1024};
    auto sweep = [&](const FamilySpec& s) {
        return refinement_sweep([&](std::size_t n) {
            const auto A = family_generator(s, horizon(n), SpaceMesh::make(0.0, 1.0, 4));
            return commutator_norm_estimate(extend_full(A, 4).column(2), FracOrder(0.5)).estimate;
        }, res);
    };
    const auto sq = sweep(family(FamilyKind::sqrt_product));
    const auto ho = sweep(family(FamilyKind::holder, 0.45));
    return {!sq.divergent && ho.divergent, "sqrt " + list(sq.values) + (sq.divergent ? " divergent" : " stable") +
                                               "; holder(0.45) " + list(ho.values) + " increment ratio " +
                                               fmt("%.3f", ho.increment_ratio) +
                                               (ho.divergent ? " divergent" : " stable")};
}

// 11. alpha sweep below the Hoelder exponent of the coefficient
Outcome fractional_variant() {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig c = bundled("holder-alpha-sweep");
    const double alpha0 = c.coefficient.family.alpha;
    const auto points = run_sweep(c);
    bool ok = true;
    std::ostringstream d;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double a = c.sweep.values[i].get<double>();
        if (a >= alpha0) continue;
        if (points[i].error) {
            ok = false;
            d << "alpha " << a << " failed: " << *points[i].error << "; ";
            continue;
        }
        // refine the same point
        ExperimentConfig p = c;
        p.analysis.alphas = {a};
        std::vector<double> vals;
        for (std::size_t n : {256u, 512u, 1024u}) {
            p.time.n_points = n;
            vals.push_back(run_solve(p).ratios.at("maxreg@" + fmt("%g", a)));
        }
        const std::vector<std::size_t> res{256, 512, 1024};
        const auto v = classify_refinement(vals, res);
        const bool finite = std::all_of(vals.begin(), vals.end(), [](double x) { return std::isfinite(x) && x > 0; });
        ok = ok && finite && !v.divergent;
        d << "alpha " << a << " ratios " << list(vals) << (v.divergent ? " divergent" : " stable") << "; ";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ok = ok && secs <= 600.0;
    d << "runtime " << fmt("%.1f", secs) << " s";
    return {ok, d.str()};
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"symbol calculus", symbol_calculus},
        {"coercivity", coercivity},
        {"resolvent bound", resolvent_bound},
        {"extension constants", extension_constants_all},
        {"worked example", worked_example},
        {"oracle agreement", oracle_agreement},
        {"initial condition", initial_condition},
        {"maximal regularity", maximal_regularity},
        {"factorization identity", factorization},
        {"commutator direction", commutator_direction},
        {"fractional variant", fractional_variant},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!o.pass) ++failures;
        std::printf("criterion %zu %s: %s (%s) [%.1f s]\n", i + 1, criteria[i].first, o.pass ? "PASS" : "FAIL",
                    o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
