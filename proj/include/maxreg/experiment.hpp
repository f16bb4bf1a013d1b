#pragma once

#include "maxreg/coefficients.hpp"
#include "maxreg/json_io.hpp"
#include "maxreg/report.hpp"
#include "maxreg/spacetime.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace maxreg {

struct CoefficientConfig {
    FamilySpec family;
    /// coefficient header file; overrides the family when set
    std::optional<std::filesystem::path> file;
};

struct TimeConfig {
    double T = 1.0;
    std::size_t n_points = 256;
    /// 0 picks the solver default
    std::size_t window_factor = 0;
};

/// f(t, x) = amplitude * p(t) * q(x). q is sin(mode pi s) ("sine"), 1
/// ("constant") or seeded Gaussian samples per node ("random"); "zero" gives
/// f = 0. p is 1 ("constant") or a smooth bump inside (0, T) ("bump").
struct ForcingConfig {
    std::string kind = "sine";
    std::string time_profile = "constant";
    double amplitude = 1.0;
    int mode = 1;
    std::uint64_t seed = 0;
};

struct SolverConfig {
    double theta_re = 1.0;
    double theta_im = 0.0;
    double tolerance = 1e-9;
    std::size_t max_iterations = 2000;
    std::size_t restart = 60;
    std::optional<double> delta;
    std::size_t workers = 1;
    /// "auto" (eigen oracle for autonomous A, Crank-Nicolson otherwise), "oracle", "crank_nicolson", "none"
    std::string reference = "auto";
};

struct AnalysisConfig {
    /// any of bmo_half_derivative, scale_invariant, frac_sobolev, holder, dini
    std::vector<std::string> functionals = {"bmo_half_derivative", "scale_invariant", "frac_sobolev", "holder",
                                            "dini"};
    std::vector<double> alphas = {0.5};
    std::vector<double> dini_q = {1.0};
    FamilyStyle family = FamilyStyle::dyadic;
    /// refinement sequence for the divergence verdicts
    std::vector<std::size_t> resolutions = {256, 512, 1024};
    bool extension_checks = true;
};

struct CommutatorConfig {
    std::vector<double> alphas = {0.5};
    std::size_t n_probes = 32;
    std::uint64_t seed = 0;
    std::vector<std::size_t> resolutions = {256, 512, 1024};
    bool factorization = true;
    /// mollifier index n for the factorization check
    std::size_t mollify = 16;
};

struct SweepConfig {
    std::string command = "solve";
    /// resolution | alpha | family
    std::string axis = "resolution";
    /// numbers for resolution/alpha, family kind names for family
    json values = json::array();
    std::size_t workers = 1;
};

struct OutputConfig {
    std::filesystem::path dir;
    ReportFormat format = ReportFormat::json;
    bool plots = true;
    /// write nothing (library use and tests)
    bool write = true;
};

struct ExperimentConfig {
    std::string id = "experiment";
    CoefficientConfig coefficient;
    SpaceMesh mesh = SpaceMesh::make(0.0, 1.0, 64);
    TimeConfig time;
    ForcingConfig forcing;
    SolverConfig solver;
    AnalysisConfig analysis;
    CommutatorConfig commutator;
    SweepConfig sweep;
    OutputConfig output;

    void validate() const;
};

/// Unknown keys anywhere are errors. Relative coefficient file paths are
/// resolved against `base_dir`. The output dir defaults to $MAXREG_OUTPUT_DIR,
/// then "maxreg-out".
ExperimentConfig config_from_json(const json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);
json to_json(const ExperimentConfig& c);

/// The coefficient of the config on [0, T) with n_points samples (the
/// config's n_points when 0). File coefficients ignore n_points.
CoefficientField build_coefficient(const ExperimentConfig& c, std::size_t n_points = 0);
SpaceTimeField build_forcing(const ExperimentConfig& c, const TimeGrid& grid);

/// Step 1 and Step 2 constants of the extension, with the "all" family.
struct ExtensionConstants {
    double M = 0.0;          ///< A on [0, T]
    double reflect_T = 0.0;  ///< reflection on [-T, T]
    double reflect_2T = 0.0; ///< reflection on [-T, 2T]
    double M_natural = 0.0;  ///< full extension on the whole window
    double bound = 0.0;      ///< 9M + 8 Lambda^2/T + 6 (Lambda^2 + lambda^2)/T
    bool reflect_T_ok = false;
    bool reflect_2T_ok = false;
    bool natural_ok = false;
};
ExtensionConstants extension_constants(const CoefficientField& A, std::size_t window_factor = 4);

RegularityReport run_solve(const ExperimentConfig& c);
RegularityReport run_analyze(const ExperimentConfig& c);
RegularityReport run_extend(const ExperimentConfig& c);
RegularityReport run_commutator(const ExperimentConfig& c);
/// One report per sweep value; failures are recorded in the report and the
/// sweep continues. Points run on up to sweep.workers threads.
std::vector<RegularityReport> run_sweep(const ExperimentConfig& c);

/// Dispatch by command name (solve | analyze | extend | commutator).
RegularityReport run_command(const std::string& command, const ExperimentConfig& c);

/// 2 validation, 3 solver, 4 I/O, 1 anything else.
int exit_code_for(const std::exception& e);

} // namespace maxreg
