// maxreg: experiment runner. Every subcommand reads a JSON config; flags
// override the matching config fields.

#include "maxreg/errors.hpp"
#include "maxreg/experiment.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

namespace {

struct Overrides {
    std::string config;
    std::optional<std::string> id;
    std::optional<std::string> kind;
    std::optional<std::uint64_t> seed;
    std::optional<double> T;
    std::optional<std::size_t> n_points;
    std::optional<std::size_t> window_factor;
    std::optional<std::size_t> n_cells;
    std::optional<double> theta_re;
    std::optional<double> theta_im;
    std::optional<double> tolerance;
    std::optional<std::size_t> max_iterations;
    std::optional<double> delta;
    std::optional<std::string> output_dir;
    std::optional<std::string> format;
    bool no_plots = false;
    std::optional<std::string> axis;
    std::optional<std::string> values;
    std::optional<std::string> sweep_command;
    std::optional<std::size_t> workers;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("-c,--config", o.config, "experiment config (JSON)")->required();
    cmd->add_option("--id", o.id, "experiment id");
    cmd->add_option("--kind", o.kind, "coefficient family kind");
    cmd->add_option("--seed", o.seed, "coefficient seed");
    cmd->add_option("--T", o.T, "time horizon");
    cmd->add_option("--n-points", o.n_points, "time samples on [0, T) (power of two)");
    cmd->add_option("--window-factor", o.window_factor, "line window [-T, (L-1)T)");
    cmd->add_option("--n-cells", o.n_cells, "mesh cells");
    cmd->add_option("--theta-re", o.theta_re, "Re theta");
    cmd->add_option("--theta-im", o.theta_im, "Im theta");
    cmd->add_option("--tolerance", o.tolerance, "solver tolerance");
    cmd->add_option("--max-iterations", o.max_iterations, "solver iteration cap");
    cmd->add_option("--delta", o.delta, "twist parameter override");
    cmd->add_option("-o,--output-dir", o.output_dir, "output directory (default $MAXREG_OUTPUT_DIR)");
    cmd->add_option("--format", o.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
    cmd->add_flag("--no-plots", o.no_plots, "skip plot-data files");
}

maxreg::ExperimentConfig configure(const Overrides& o) {
    maxreg::ExperimentConfig c = maxreg::load_config(o.config);
    if (o.id) c.id = *o.id;
    if (o.kind) c.coefficient.family.kind = maxreg::family_kind_from_string(*o.kind);
    if (o.seed) c.coefficient.family.seed = *o.seed;
    if (o.T) c.time.T = *o.T;
    if (o.n_points) c.time.n_points = *o.n_points;
    if (o.window_factor) c.time.window_factor = *o.window_factor;
    if (o.n_cells) c.mesh.n_cells = *o.n_cells;
    if (o.theta_re) c.solver.theta_re = *o.theta_re;
    if (o.theta_im) c.solver.theta_im = *o.theta_im;
    if (o.tolerance) c.solver.tolerance = *o.tolerance;
    if (o.max_iterations) c.solver.max_iterations = *o.max_iterations;
    if (o.delta) c.solver.delta = *o.delta;
    if (o.output_dir) c.output.dir = *o.output_dir;
    if (o.format) c.output.format = maxreg::report_format_from_string(*o.format);
    if (o.no_plots) c.output.plots = false;
    if (o.axis) c.sweep.axis = *o.axis;
    if (o.sweep_command) c.sweep.command = *o.sweep_command;
    if (o.workers) c.sweep.workers = *o.workers;
    if (o.values) {
        try {
            c.sweep.values = maxreg::json::parse(*o.values);
        } catch (const maxreg::json::parse_error& e) {
            throw maxreg::ValidationError(std::string("--values: ") + e.what());
        }
    }
    c.validate();
    return c;
}

void summarize(const maxreg::RegularityReport& r) {
    std::cout << r.id << " (" << r.command << ")";
    if (r.error) std::cout << " FAILED: " << *r.error;
    std::cout << "\n";
    for (const auto& [k, v] : r.ratios) std::cout << "  ratio " << k << " = " << v << "\n";
    for (const auto& [k, v] : r.checks) std::cout << "  check " << k << " = " << (v ? "true" : "false") << "\n";
    for (const auto& w : r.warnings) std::cout << "  warning: " << w << "\n";
}

void print_error(const std::exception& e) {
    maxreg::json j = {{"error", e.what()}, {"exit_code", maxreg::exit_code_for(e)}};
    if (const auto* s = dynamic_cast<const maxreg::SolverError*>(&e)) {
        j["residual"] = s->residual();
        j["iterations"] = s->iterations();
    }
    std::cerr << j.dump() << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"maxreg: maximal-regularity experiments"};
    app.require_subcommand(1);
    Overrides o;
    std::string command;
    for (const char* name : {"solve", "analyze", "extend", "commutator"}) {
        CLI::App* cmd = app.add_subcommand(name);
        add_common(cmd, o);
        cmd->callback([&command, name] { command = name; });
    }
    CLI::App* sweep = app.add_subcommand("sweep", "run a command over a list of values");
    add_common(sweep, o);
    sweep->add_option("--axis", o.axis, "resolution | alpha | family");
    sweep->add_option("--values", o.values, "JSON array of sweep values");
    sweep->add_option("--command", o.sweep_command, "command per point");
    sweep->add_option("--workers", o.workers, "concurrent points");
    sweep->callback([&command] { command = "sweep"; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const maxreg::ExperimentConfig c = configure(o);
        if (command == "sweep") {
            const auto reports = maxreg::run_sweep(c);
            int code = 0;
            for (const auto& r : reports) {
                summarize(r);
                if (r.exit_code && code == 0) code = *r.exit_code;
            }
            return code;
        }
        summarize(maxreg::run_command(command, c));
        return 0;
    } catch (const std::exception& e) {
        print_error(e);
        return maxreg::exit_code_for(e);
    }
}
