#include "maxreg/experiment.hpp"

#include "maxreg/coefficient_io.hpp"
#include "maxreg/commutator.hpp"
#include "maxreg/errors.hpp"
#include "maxreg/metrics.hpp"
#include "maxreg/parallel.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>

namespace maxreg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

template <typename T>
T get(const json& j, const char* key, T fallback, const std::string& where) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(where + ": bad value for '" + key + "': " + e.what());
    }
}

std::string label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

TimeGrid horizon_grid(double T, std::size_t n) { return TimeGrid::make(0.0, T, n, Sampling::cell_centered); }

std::string functional_label(const std::string& name, double p) { return name + "@" + label(p); }

// per-cell max of a scalar functional of the columns, skipping repeated columns
SeminormValue column_max(const CoefficientField& A, const std::function<SeminormValue(const TimeSignal&)>& fn) {
    SeminormValue best;
    TimeSignal previous;
    for (std::size_t c = 0; c < A.cells(); ++c) {
        TimeSignal col = A.column(c);
        if (c > 0 && col == previous) continue;
        const SeminormValue v = fn(col);
        if (c == 0 || v.value > best.value) best = v;
        previous = std::move(col);
    }
    return best;
}

SampleNorm sample_norm(const CoefficientField& A) { return {A.matrix_dim() > 1 ? A.matrix_dim() : 0}; }

void fill_summary(RegularityReport& r, const CoefficientField& A) {
    const CoefficientDescriptor& d = A.descriptor();
    r.coefficient.kind = d.kind;
    r.coefficient.seed = d.seed;
    r.coefficient.params = d.params;
    r.coefficient.lambda = A.lambda();
    r.coefficient.Lambda = A.Lambda();
    r.coefficient.T = A.horizon();
    r.time_grid = to_json(A.time_grid());
    r.mesh = to_json(A.mesh());
}

// the scalar multiplier of the commutator: the fully extended coefficient at the middle cell
TimeSignal multiplier(const CoefficientField& A) {
    if (A.matrix_dim() != 1) throw ValidationError("commutator: scalar coefficient required");
    return extend_full(A, 4).column(A.cells() / 2);
}

struct Measured {
    std::vector<FunctionalRow> rows;
    bool divergent = false;
};

// evaluates one functional over the refinement sequence and classifies it
Measured refine(const std::string& name, double parameter, const std::vector<std::size_t>& resolutions,
                const std::function<SeminormValue(std::size_t)>& measure, std::vector<std::string>& warnings) {
    Measured m;
    std::vector<double> values;
    for (std::size_t n : resolutions) {
        const SeminormValue v = measure(n);
        FunctionalRow row;
        row.functional = name;
        row.parameter = parameter;
        row.value = v.value;
        row.achieving_interval = v.achieving_interval;
        row.resolution = n;
        m.rows.push_back(row);
        values.push_back(v.value);
    }
    if (values.size() >= 3) {
        m.divergent = classify_refinement(values, resolutions).divergent;
    } else if (resolutions.size() > 1) {
        warnings.push_back(name + ": fewer than three resolutions, no divergence verdict");
    }
    for (auto& row : m.rows) row.divergent = m.divergent;
    return m;
}

std::vector<std::size_t> analysis_resolutions(const ExperimentConfig& c) {
    if (c.coefficient.file) return {build_coefficient(c).time_grid().n_points};
    return c.analysis.resolutions;
}

void add_extension(RegularityReport& r, const CoefficientField& A) {
    const ExtensionConstants e = extension_constants(A, 4);
    r.coefficient.M = e.M;
    r.coefficient.M_natural = e.M_natural;
    r.diagnostics["extension_reflect_T"] = e.reflect_T;
    r.diagnostics["extension_reflect_2T"] = e.reflect_2T;
    r.diagnostics["extension_bound"] = e.bound;
    r.checks["extension_reflect_3M"] = e.reflect_T_ok;
    r.checks["extension_reflect_9M"] = e.reflect_2T_ok;
    r.checks["extension_natural_bound"] = e.natural_ok;
}

SolverOptions solver_options(const ExperimentConfig& c) {
    SolverOptions o;
    o.tolerance = c.solver.tolerance;
    o.max_iterations = c.solver.max_iterations;
    o.restart = c.solver.restart;
    o.delta = c.solver.delta;
    o.workers = c.solver.workers;
    return o;
}

std::filesystem::path output_path(const ExperimentConfig& c, const std::string& suffix) {
    std::string stem = c.id;
    for (char& ch : stem)
        if (ch == '/' || ch == '\\' || ch == ' ') ch = '_';
    return c.output.dir / (stem + suffix);
}

void write_report(const ExperimentConfig& c, const RegularityReport& r) {
    if (!c.output.write) return;
    // solve owns <id>.json, the other commands append their name
    const std::string stem = r.command == "solve" ? "" : "-" + r.command;
    emit_report(r, output_path(c, stem + (c.output.format == ReportFormat::json ? ".json" : ".csv")), c.output.format);
}

std::vector<std::size_t> size_list(const json& j, const char* key, std::vector<std::size_t> fallback,
                                   const std::string& where) {
    return get<std::vector<std::size_t>>(j, key, std::move(fallback), where);
}

} // namespace

void ExperimentConfig::validate() const {
    if (id.empty()) throw ValidationError("config: id must not be empty");
    mesh.validate();
    if (!(time.T > 0.0)) throw ValidationError("config: time.T must be positive");
    if (!is_power_of_two(time.n_points) || time.n_points < 8)
        throw ValidationError("config: time.n_points must be a power of two >= 8");
    if (time.window_factor != 0 && (!is_power_of_two(time.window_factor) || time.window_factor < 4))
        throw ValidationError("config: time.window_factor must be 0 or a power of two >= 4");
    for (std::size_t n : analysis.resolutions)
        if (!is_power_of_two(n) || n < 8) throw ValidationError("config: analysis.resolutions must be powers of two");
    for (std::size_t n : commutator.resolutions)
        if (!is_power_of_two(n) || n < 8) throw ValidationError("config: commutator.resolutions must be powers of two");
    if (commutator.n_probes < 16) throw ValidationError("config: commutator.n_probes must be at least 16");
    for (double a : analysis.alphas)
        if (!(a > 0.0 && a < 1.0)) throw ValidationError("config: analysis.alphas must lie in (0, 1)");
    for (double q : analysis.dini_q)
        if (!(q >= 1.0 && q <= 2.0)) throw ValidationError("config: analysis.dini_q must lie in [1, 2]");
    for (double a : commutator.alphas)
        if (!(a > 0.0 && a <= 1.0)) throw ValidationError("config: commutator.alphas must lie in (0, 1]");
    for (const auto& f : analysis.functionals)
        if (f != "bmo_half_derivative" && f != "scale_invariant" && f != "frac_sobolev" && f != "holder" && f != "dini")
            throw ValidationError("config: unknown functional '" + f + "'");
    const auto& k = forcing.kind;
    if (k != "sine" && k != "constant" && k != "random" && k != "zero")
        throw ValidationError("config: unknown forcing kind '" + k + "'");
    if (forcing.time_profile != "constant" && forcing.time_profile != "bump")
        throw ValidationError("config: unknown forcing time_profile '" + forcing.time_profile + "'");
    if (!(solver.theta_re > 0.0)) throw ValidationError("config: solver.theta_re must be positive");
    if (!(solver.tolerance > 0.0)) throw ValidationError("config: solver.tolerance must be positive");
    const auto& ref = solver.reference;
    if (ref != "auto" && ref != "oracle" && ref != "crank_nicolson" && ref != "none")
        throw ValidationError("config: unknown solver.reference '" + ref + "'");
    if (sweep.command != "solve" && sweep.command != "analyze" && sweep.command != "extend" &&
        sweep.command != "commutator")
        throw ValidationError("config: unknown sweep.command '" + sweep.command + "'");
    if (sweep.axis != "resolution" && sweep.axis != "alpha" && sweep.axis != "family")
        throw ValidationError("config: unknown sweep.axis '" + sweep.axis + "'");
    if (!sweep.values.is_array()) throw ValidationError("config: sweep.values must be an array");
    if (coefficient.file && !std::filesystem::exists(*coefficient.file))
        throw IoError("config: coefficient file not found: " + coefficient.file->string());
}

ExperimentConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
    require_known_keys(j, {"id", "coefficient", "mesh", "time", "forcing", "solver", "analysis", "commutator", "sweep",
                           "output"},
                       "config");
    ExperimentConfig c;
    c.id = get<std::string>(j, "id", c.id, "config");
    if (j.contains("coefficient")) {
        const json& k = j.at("coefficient");
        require_known_keys(k, {"kind", "value", "amplitude", "alpha", "t0", "seed", "profile", "terms", "file"},
                           "coefficient");
        FamilySpec& f = c.coefficient.family;
        f.kind = family_kind_from_string(get<std::string>(k, "kind", to_string(f.kind), "coefficient"));
        f.value = get<double>(k, "value", f.value, "coefficient");
        f.amplitude = get<double>(k, "amplitude", f.amplitude, "coefficient");
        f.alpha = get<double>(k, "alpha", f.alpha, "coefficient");
        if (k.contains("t0") && !k.at("t0").is_null()) f.t0 = get<double>(k, "t0", 0.0, "coefficient");
        f.seed = get<std::uint64_t>(k, "seed", f.seed, "coefficient");
        f.profile = get<std::string>(k, "profile", f.profile, "coefficient");
        f.terms = get<std::size_t>(k, "terms", f.terms, "coefficient");
        if (k.contains("file")) {
            std::filesystem::path p = get<std::string>(k, "file", "", "coefficient");
            if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
            c.coefficient.file = p;
        }
    }
    if (j.contains("mesh")) c.mesh = space_mesh_from_json(j.at("mesh"));
    if (j.contains("time")) {
        const json& t = j.at("time");
        require_known_keys(t, {"T", "n_points", "window_factor"}, "time");
        c.time.T = get<double>(t, "T", c.time.T, "time");
        c.time.n_points = get<std::size_t>(t, "n_points", c.time.n_points, "time");
        c.time.window_factor = get<std::size_t>(t, "window_factor", c.time.window_factor, "time");
    }
    if (j.contains("forcing")) {
        const json& f = j.at("forcing");
        require_known_keys(f, {"kind", "time_profile", "amplitude", "mode", "seed"}, "forcing");
        c.forcing.kind = get<std::string>(f, "kind", c.forcing.kind, "forcing");
        c.forcing.time_profile = get<std::string>(f, "time_profile", c.forcing.time_profile, "forcing");
        c.forcing.amplitude = get<double>(f, "amplitude", c.forcing.amplitude, "forcing");
        c.forcing.mode = get<int>(f, "mode", c.forcing.mode, "forcing");
        c.forcing.seed = get<std::uint64_t>(f, "seed", c.forcing.seed, "forcing");
    }
    if (j.contains("solver")) {
        const json& s = j.at("solver");
        require_known_keys(s, {"theta_re", "theta_im", "tolerance", "max_iterations", "restart", "delta", "workers",
                               "reference"},
                           "solver");
        c.solver.theta_re = get<double>(s, "theta_re", c.solver.theta_re, "solver");
        c.solver.theta_im = get<double>(s, "theta_im", c.solver.theta_im, "solver");
        c.solver.tolerance = get<double>(s, "tolerance", c.solver.tolerance, "solver");
        c.solver.max_iterations = get<std::size_t>(s, "max_iterations", c.solver.max_iterations, "solver");
        c.solver.restart = get<std::size_t>(s, "restart", c.solver.restart, "solver");
        if (s.contains("delta") && !s.at("delta").is_null()) c.solver.delta = get<double>(s, "delta", 0.0, "solver");
        c.solver.workers = get<std::size_t>(s, "workers", c.solver.workers, "solver");
        c.solver.reference = get<std::string>(s, "reference", c.solver.reference, "solver");
    }
    if (j.contains("analysis")) {
        const json& a = j.at("analysis");
        require_known_keys(a, {"functionals", "alphas", "dini_q", "family", "resolutions", "extension_checks"},
                           "analysis");
        c.analysis.functionals = get<std::vector<std::string>>(a, "functionals", c.analysis.functionals, "analysis");
        c.analysis.alphas = get<std::vector<double>>(a, "alphas", c.analysis.alphas, "analysis");
        c.analysis.dini_q = get<std::vector<double>>(a, "dini_q", c.analysis.dini_q, "analysis");
        c.analysis.family = family_style_from_string(get<std::string>(a, "family", to_string(c.analysis.family), "analysis"));
        c.analysis.resolutions = size_list(a, "resolutions", c.analysis.resolutions, "analysis");
        c.analysis.extension_checks = get<bool>(a, "extension_checks", c.analysis.extension_checks, "analysis");
    }
    if (j.contains("commutator")) {
        const json& m = j.at("commutator");
        require_known_keys(m, {"alphas", "n_probes", "seed", "resolutions", "factorization", "mollify"}, "commutator");
        c.commutator.alphas = get<std::vector<double>>(m, "alphas", c.commutator.alphas, "commutator");
        c.commutator.n_probes = get<std::size_t>(m, "n_probes", c.commutator.n_probes, "commutator");
        c.commutator.seed = get<std::uint64_t>(m, "seed", c.commutator.seed, "commutator");
        c.commutator.resolutions = size_list(m, "resolutions", c.commutator.resolutions, "commutator");
        c.commutator.factorization = get<bool>(m, "factorization", c.commutator.factorization, "commutator");
        c.commutator.mollify = get<std::size_t>(m, "mollify", c.commutator.mollify, "commutator");
    }
    if (j.contains("sweep")) {
        const json& s = j.at("sweep");
        require_known_keys(s, {"command", "axis", "values", "workers"}, "sweep");
        c.sweep.command = get<std::string>(s, "command", c.sweep.command, "sweep");
        c.sweep.axis = get<std::string>(s, "axis", c.sweep.axis, "sweep");
        if (s.contains("values")) c.sweep.values = s.at("values");
        c.sweep.workers = get<std::size_t>(s, "workers", c.sweep.workers, "sweep");
    }
    const char* env = std::getenv("MAXREG_OUTPUT_DIR");
    c.output.dir = env && *env ? std::filesystem::path(env) : std::filesystem::path("maxreg-out");
    if (j.contains("output")) {
        const json& o = j.at("output");
        require_known_keys(o, {"dir", "format", "plots"}, "output");
        if (o.contains("dir")) c.output.dir = get<std::string>(o, "dir", "", "output");
        c.output.format = report_format_from_string(get<std::string>(o, "format", "json", "output"));
        c.output.plots = get<bool>(o, "plots", c.output.plots, "output");
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    return config_from_json(j, path.parent_path());
}

json to_json(const ExperimentConfig& c) {
    const FamilySpec& f = c.coefficient.family;
    json coef = {{"kind", to_string(f.kind)}, {"value", f.value},   {"amplitude", f.amplitude}, {"alpha", f.alpha},
                 {"seed", f.seed},            {"profile", f.profile}, {"terms", f.terms}};
    if (f.t0) coef["t0"] = *f.t0;
    if (c.coefficient.file) coef["file"] = c.coefficient.file->string();
    json solver = {{"theta_re", c.solver.theta_re},   {"theta_im", c.solver.theta_im},
                   {"tolerance", c.solver.tolerance}, {"max_iterations", c.solver.max_iterations},
                   {"restart", c.solver.restart},     {"workers", c.solver.workers},
                   {"reference", c.solver.reference}};
    if (c.solver.delta) solver["delta"] = *c.solver.delta;
    return {{"id", c.id},
            {"coefficient", coef},
            {"mesh", to_json(c.mesh)},
            {"time", {{"T", c.time.T}, {"n_points", c.time.n_points}, {"window_factor", c.time.window_factor}}},
            {"forcing",
             {{"kind", c.forcing.kind},
              {"time_profile", c.forcing.time_profile},
              {"amplitude", c.forcing.amplitude},
              {"mode", c.forcing.mode},
              {"seed", c.forcing.seed}}},
            {"solver", solver},
            {"analysis",
             {{"functionals", c.analysis.functionals},
              {"alphas", c.analysis.alphas},
              {"dini_q", c.analysis.dini_q},
              {"family", to_string(c.analysis.family)},
              {"resolutions", c.analysis.resolutions},
              {"extension_checks", c.analysis.extension_checks}}},
            {"commutator",
             {{"alphas", c.commutator.alphas},
              {"n_probes", c.commutator.n_probes},
              {"seed", c.commutator.seed},
              {"resolutions", c.commutator.resolutions},
              {"factorization", c.commutator.factorization},
              {"mollify", c.commutator.mollify}}},
            {"sweep",
             {{"command", c.sweep.command},
              {"axis", c.sweep.axis},
              {"values", c.sweep.values},
              {"workers", c.sweep.workers}}},
            {"output",
             {{"dir", c.output.dir.string()},
              {"format", c.output.format == ReportFormat::json ? "json" : "csv"},
              {"plots", c.output.plots}}}};
}

CoefficientField build_coefficient(const ExperimentConfig& c, std::size_t n_points) {
    if (c.coefficient.file) {
        CoefficientField A = load_coefficients(*c.coefficient.file);
        if (!(A.mesh() == c.mesh)) throw ValidationError("coefficient file: mesh differs from the config mesh");
        return A;
    }
    return family_generator(c.coefficient.family, horizon_grid(c.time.T, n_points ? n_points : c.time.n_points),
                            c.mesh);
}

SpaceTimeField build_forcing(const ExperimentConfig& c, const TimeGrid& grid) {
    SpaceTimeField f(grid, c.mesh);
    const ForcingConfig& fc = c.forcing;
    if (fc.kind == "zero") return f;
    const double T = grid.period();
    auto profile = [&](double t) {
        if (fc.time_profile == "constant") return 1.0;
        const double s = (2.0 * (t - grid.t_start) / T - 1.0) / 0.8;
        return std::abs(s) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s * s)) : 0.0;
    };
    std::mt19937_64 rng(fc.seed);
    std::normal_distribution<double> normal;
    const double len = c.mesh.x_hi - c.mesh.x_lo;
    for (std::size_t j = 0; j < grid.n_points; ++j) {
        const double p = fc.amplitude * profile(grid.point(j));
        for (std::size_t i = 0; i < f.dofs(); ++i) {
            double q = 1.0;
            if (fc.kind == "sine") q = std::sin(fc.mode * M_PI * (c.mesh.dof_x(i) - c.mesh.x_lo) / len);
            else if (fc.kind == "random") q = normal(rng);
            f.at(j, i) = p * q;
        }
    }
    return f;
}

ExtensionConstants extension_constants(const CoefficientField& A, std::size_t window_factor) {
    ExtensionConstants e;
    const double T = A.horizon();
    e.M = coefficient_scale_invariant(A, FamilyStyle::all).value;
    const CoefficientField flat = extend_reflect(A, window_factor);
    e.reflect_T = coefficient_scale_invariant(flat, FamilyStyle::all, -T, T).value;
    e.reflect_2T = coefficient_scale_invariant(flat, FamilyStyle::all, -T, 2.0 * T).value;
    e.M_natural = coefficient_scale_invariant(extend_full(A, window_factor), FamilyStyle::all).value;
    const double l = A.lambda(), L = A.Lambda();
    e.bound = 9.0 * e.M + 8.0 * L * L / T + 6.0 * (L * L + l * l) / T;
    e.reflect_T_ok = e.reflect_T <= 3.0 * e.M;
    e.reflect_2T_ok = e.reflect_2T <= 9.0 * e.M;
    e.natural_ok = e.M_natural <= e.bound;
    return e;
}

RegularityReport run_solve(const ExperimentConfig& c) {
    const auto t0 = Clock::now();
    RegularityReport r;
    r.id = c.id;
    r.command = "solve";
    const CoefficientField A = build_coefficient(c);
    fill_summary(r, A);
    const TimeGrid& g = A.time_grid();
    r.resolutions = {g.n_points};
    const SpaceTimeField f = build_forcing(c, g);

    if (c.analysis.extension_checks) add_extension(r, A);
    if (!c.coefficient.file && !c.analysis.resolutions.empty()) {
        const Measured m = refine("scale_invariant", 0.5, c.analysis.resolutions, [&](std::size_t n) {
            const CoefficientField An = build_coefficient(c, n);
            return coefficient_scale_invariant(An, c.analysis.family, 0.5);
        }, r.warnings);
        r.functionals = m.rows;
        r.checks["regularity_condition_stable"] = !m.divergent;
        if (m.divergent)
            r.warnings.push_back("coefficient regularity condition flagged divergent under refinement; solved anyway");
    }
    r.timing["setup"] = seconds_since(t0);

    CauchyOptions opts;
    opts.window_factor = c.time.window_factor;
    opts.solver = solver_options(c);
    if (c.solver.theta_re != 1.0 || c.solver.theta_im != 0.0)
        r.warnings.push_back("solver.theta is ignored by the Cauchy pipeline, which uses theta = 1");
    const auto ts = Clock::now();
    const CauchyResult res = cauchy_solve(A, f, opts);
    r.timing["solve"] = seconds_since(ts);

    const SolveDiagnostics& d = res.diagnostics;
    r.diagnostics["residual"] = d.residual;
    r.diagnostics["iterations"] = static_cast<double>(d.iterations);
    r.diagnostics["coercivity_observed"] = d.coercivity_constant_observed;
    r.diagnostics["delta"] = d.delta;
    r.diagnostics["rhs_dual_norm"] = d.rhs_dual_norm;
    r.diagnostics["energy_bound"] = d.energy_bound;
    r.diagnostics["window_factor"] = static_cast<double>(res.window_factor);
    r.diagnostics["v0_norm"] = res.v0_norm;
    r.diagnostics["v_L2_H"] = res.v_l2_norm;
    r.diagnostics["v0_ratio"] = res.v_l2_norm > 0.0 ? res.v0_norm / res.v_l2_norm : 0.0;
    r.diagnostics["guard_fraction"] = res.guard_fraction;
    r.checks["energy_bound"] = d.energy_bound_ok;
    r.checks["guard_band"] = res.guard_ok;
    r.checks["initial_value"] = r.diagnostics["v0_ratio"] <= 1e-3;

    const auto tm = Clock::now();
    const double fn = l2_norm(f);
    r.norms["u_L2_H"] = l2_norm(res.u);
    r.norms["u_H1_H"] = sobolev_norm(res.u, 1.0, NormTarget::H);
    r.norms["u_H_half_V"] = sobolev_norm(res.u, 0.5, NormTarget::V);
    r.norms["v_E"] = energy_norm(res.v);
    r.norms["f_L2_H"] = fn;
    for (double a : c.analysis.alphas) {
        if (a > 0.5) continue;
        r.norms[functional_label("u_H_alpha_half_H", a)] = sobolev_norm(res.u, a + 0.5, NormTarget::H);
        r.norms[functional_label("u_H_alpha_V", a)] = sobolev_norm(res.u, a, NormTarget::V);
    }
    if (fn > 0.0) {
        r.ratios["maxreg"] = maxreg_ratio(res.u, f, 0.5);
        for (double a : c.analysis.alphas)
            if (a <= 0.5) r.ratios[functional_label("maxreg", a)] = maxreg_ratio(res.u, f, a);
    }

    std::string ref = c.solver.reference;
    if (ref == "auto") ref = A.time_independent() ? "oracle" : "crank_nicolson";
    if (ref == "oracle" || ref == "crank_nicolson") {
        const SpaceTimeField u_ref = ref == "oracle" ? autonomous_oracle(A, f) : timestep_reference(A, f, 8 * g.n_points);
        const double scale = l2_norm(u_ref);
        r.diagnostics["reference_relative_error"] = scale > 0.0 ? l2_norm(res.u - u_ref) / scale : l2_norm(res.u);
        if (fn > 0.0) {
            const double rr = maxreg_ratio(u_ref, f, 0.5);
            r.ratios["maxreg_reference"] = rr;
            if (ref == "oracle") r.checks["oracle_ratio_agreement"] = std::abs(r.ratios["maxreg"] - rr) <= 1e-3 * rr;
        }
        r.diagnostics[ref == "oracle" ? "reference_oracle" : "reference_crank_nicolson"] = 1.0;
    }
    r.timing["metrics"] = seconds_since(tm);
    r.timing["total"] = seconds_since(t0);

    if (c.output.write) {
        write_report(c, r);
        if (c.output.plots) {
            write_plot_data(output_path(c, "-norm-trace.csv"), "t", "u_H", norm_trace(res.u));
            write_plot_data(output_path(c, "-spectrum.csv"), "tau", "energy", time_spectrum(res.v));
        }
    }
    return r;
}

RegularityReport run_analyze(const ExperimentConfig& c) {
    const auto t0 = Clock::now();
    RegularityReport r;
    r.id = c.id;
    r.command = "analyze";
    const CoefficientField A = build_coefficient(c);
    fill_summary(r, A);
    const std::vector<std::size_t> res = analysis_resolutions(c);
    r.resolutions = res;

    // coefficients per resolution are shared between the functionals
    std::map<std::size_t, CoefficientField> cache;
    auto at = [&](std::size_t n) -> const CoefficientField& {
        auto it = cache.find(n);
        if (it == cache.end()) it = cache.emplace(n, c.coefficient.file ? A : build_coefficient(c, n)).first;
        return it->second;
    };
    auto add = [&](const Measured& m) { r.functionals.insert(r.functionals.end(), m.rows.begin(), m.rows.end()); };
    // true when the functional is refinement-stable
    auto divergent_key = [&](const std::string& name, double p, bool divergent) {
        r.checks[functional_label(name, p) + "_finite"] = !divergent;
    };

    for (const std::string& name : c.analysis.functionals) {
        if (name == "bmo_half_derivative") {
            const Measured m = refine(name, 0.5, res, [&](std::size_t n) {
                const CoefficientField& An = at(n);
                if (An.matrix_dim() != 1) throw ValidationError("bmo_half_derivative: scalar coefficient required");
                const CoefficientField full = extend_full(An, 4);
                const IntervalFamily fam = IntervalFamily::periodic_sliding(full.time_grid());
                return column_max(full, [&](const TimeSignal& col) {
                    return bmo_seminorm(frac_derivative(col, FracOrder(0.5)), fam);
                });
            }, r.warnings);
            add(m);
            divergent_key(name, 0.5, m.divergent);
        } else if (name == "scale_invariant") {
            for (double a : c.analysis.alphas) {
                const Measured m = refine(name, a, res, [&](std::size_t n) {
                    return coefficient_scale_invariant(at(n), c.analysis.family, a);
                }, r.warnings);
                add(m);
                divergent_key(name, a, m.divergent);
            }
        } else if (name == "frac_sobolev") {
            for (double a : c.analysis.alphas) {
                const Measured m = refine(name, a, res, [&](std::size_t n) {
                    const CoefficientField& An = at(n);
                    const auto& g = An.time_grid();
                    return column_max(An, [&](const TimeSignal& col) {
                        return frac_sobolev_seminorm(col, FracOrder(a), {g.t_start, g.t_end}, sample_norm(An));
                    });
                }, r.warnings);
                add(m);
                divergent_key(name, a, m.divergent);
            }
        } else if (name == "holder") {
            for (double a : c.analysis.alphas) {
                const Measured m = refine(name, a, res, [&](std::size_t n) {
                    const CoefficientField& An = at(n);
                    return column_max(An, [&](const TimeSignal& col) {
                        return holder_constant(col, FracOrder(a), sample_norm(An));
                    });
                }, r.warnings);
                add(m);
                divergent_key(name, a, m.divergent);
            }
        } else if (name == "dini") {
            for (double q : c.analysis.dini_q) {
                const Measured m = refine(name, q, res, [&](std::size_t n) {
                    const CoefficientField& An = at(n);
                    return column_max(An, [&](const TimeSignal& col) { return dini_integral(col, q, sample_norm(An)); });
                }, r.warnings);
                add(m);
                divergent_key(name, q, m.divergent);
            }
        }
    }
    if (c.analysis.extension_checks) add_extension(r, A);
    if (A.matrix_dim() == 1) {
        const NormEquivalence ne = operator_norm_equivalence_probe(A, 0, A.time_grid().n_points / 2);
        r.diagnostics["norm_equivalence_dual"] = ne.dual_norm;
        r.diagnostics["norm_equivalence_esssup"] = ne.esssup;
        if (ne.ratio) r.ratios["norm_equivalence"] = *ne.ratio;
    }
    r.timing["total"] = seconds_since(t0);
    write_report(c, r);
    return r;
}

RegularityReport run_extend(const ExperimentConfig& c) {
    const auto t0 = Clock::now();
    RegularityReport r;
    r.id = c.id;
    r.command = "extend";
    const CoefficientField A = build_coefficient(c);
    fill_summary(r, A);
    r.resolutions = {A.time_grid().n_points};
    const std::size_t L = c.time.window_factor ? c.time.window_factor : 4;
    const ExtensionConstants e = extension_constants(A, L);
    r.coefficient.M = e.M;
    r.coefficient.M_natural = e.M_natural;
    r.diagnostics["extension_reflect_T"] = e.reflect_T;
    r.diagnostics["extension_reflect_2T"] = e.reflect_2T;
    r.diagnostics["extension_bound"] = e.bound;
    r.diagnostics["window_factor"] = static_cast<double>(L);
    r.checks["extension_reflect_3M"] = e.reflect_T_ok;
    r.checks["extension_reflect_9M"] = e.reflect_2T_ok;
    r.checks["extension_natural_bound"] = e.natural_ok;
    const CoefficientField full = extend_full(A, L);
    r.checks["certificate_preserved"] = check_certificate(full, A.certificate());
    if (c.output.write) save_coefficients(output_path(c, "-extended.json"), full);
    r.timing["total"] = seconds_since(t0);
    write_report(c, r);
    return r;
}

RegularityReport run_commutator(const ExperimentConfig& c) {
    const auto t0 = Clock::now();
    RegularityReport r;
    r.id = c.id;
    r.command = "commutator";
    const CoefficientField A = build_coefficient(c);
    fill_summary(r, A);
    const std::vector<std::size_t> res =
        c.coefficient.file ? std::vector<std::size_t>{A.time_grid().n_points} : c.commutator.resolutions;
    r.resolutions = res;
    for (double alpha : c.commutator.alphas) {
        CommutatorRow row;
        row.alpha = alpha;
        row.seed = c.commutator.seed;
        row.resolutions = res;
        for (std::size_t n : res) {
            const CoefficientField An = c.coefficient.file ? A : build_coefficient(c, n);
            const CommutatorProbe p =
                commutator_norm_estimate(multiplier(An), FracOrder(alpha), c.commutator.n_probes, c.commutator.seed);
            row.estimates.push_back(p.estimate);
            row.estimate = p.estimate;
            row.bmo_value = p.bmo_value;
            row.ratio = p.ratio;
            if (p.degenerate) r.warnings.push_back("commutator: constant multiplier, ratio undefined");
        }
        if (row.estimates.size() >= 3 && row.estimates.back() > 0.0)
            row.divergent = classify_refinement(row.estimates, res).divergent;
        r.commutators.push_back(row);
    }
    if (c.commutator.factorization && A.matrix_dim() == 1) {
        const auto tf = Clock::now();
        const CoefficientField An = mollify(extend_full(A, 4), c.commutator.mollify);
        const TimeGrid& wg = An.time_grid();
        ExperimentConfig fc = c;
        fc.forcing.time_profile = "constant";
        const SpaceTimeField q = build_forcing(fc, wg);
        SpaceTimeField f(wg, c.mesh);
        const double T = A.horizon();
        for (std::size_t j = 0; j < wg.n_points; ++j) {
            const double t = wg.point(j) - 0.5 * T;
            const double w = std::exp(-8.0 * t * t / (T * T));
            for (std::size_t i = 0; i < f.dofs(); ++i) f.at(j, i) = w * q.at(j, i);
        }
        const FactorizationResult fr = factorization_check(An, f, solver_options(c));
        r.diagnostics["factorization_residual"] = fr.residual;
        r.diagnostics["factorization_commutator_share"] = fr.commutator_share;
        r.diagnostics["factorization_iterations"] = static_cast<double>(fr.solve.iterations);
        r.checks["factorization_identity"] = fr.residual <= 1e-6;
        r.timing["factorization"] = seconds_since(tf);
    }
    r.timing["total"] = seconds_since(t0);
    write_report(c, r);
    return r;
}

RegularityReport run_command(const std::string& command, const ExperimentConfig& c) {
    if (command == "solve") return run_solve(c);
    if (command == "analyze") return run_analyze(c);
    if (command == "extend") return run_extend(c);
    if (command == "commutator") return run_commutator(c);
    throw ValidationError("unknown command '" + command + "'");
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ValidationError*>(&e)) return 2;
    if (dynamic_cast<const SolverError*>(&e)) return 3;
    if (dynamic_cast<const IoError*>(&e)) return 4;
    if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return 4;
    return 1;
}

std::vector<RegularityReport> run_sweep(const ExperimentConfig& c) {
    const json& values = c.sweep.values;
    if (values.empty()) throw ValidationError("sweep: no values");
    // a bad value fails its own point only
    auto make_point = [&](const json& v) {
        ExperimentConfig p = c;
        p.output.write = false;
        std::string tag;
        try {
            if (c.sweep.axis == "resolution") {
                p.time.n_points = v.get<std::size_t>();
                tag = std::to_string(p.time.n_points);
            } else if (c.sweep.axis == "alpha") {
                const double a = v.get<double>();
                p.analysis.alphas = {a};
                p.commutator.alphas = {a};
                tag = label(a);
            } else {
                p.coefficient.family.kind = family_kind_from_string(v.get<std::string>());
                tag = v.get<std::string>();
            }
        } catch (const json::exception& e) {
            throw ValidationError(std::string("sweep: bad value ") + v.dump() + ": " + e.what());
        }
        p.id = c.id + "/" + c.sweep.axis + "=" + tag;
        p.validate();
        return p;
    };
    std::vector<RegularityReport> out(values.size());
    parallel_for(values.size(), [&](std::size_t i) {
        const auto t0 = Clock::now();
        std::string id = c.id + "/" + c.sweep.axis + "=" + values[i].dump();
        try {
            const ExperimentConfig p = make_point(values[i]);
            id = p.id;
            out[i] = run_command(c.sweep.command, p);
        } catch (const std::exception& e) {
            out[i] = RegularityReport{};
            out[i].id = id;
            out[i].command = c.sweep.command;
            out[i].error = e.what();
            out[i].exit_code = exit_code_for(e);
            if (const auto* se = dynamic_cast<const SolverError*>(&e)) {
                out[i].diagnostics["residual"] = se->residual();
                out[i].diagnostics["iterations"] = static_cast<double>(se->iterations());
            }
        }
        out[i].timing["point"] = seconds_since(t0);
    }, c.sweep.workers);
    if (c.output.write)
        emit_reports(out, output_path(c, c.output.format == ReportFormat::json ? "-sweep.json" : "-sweep.csv"),
                     c.output.format);
    return out;
}

} // namespace maxreg
