#pragma once

#include "maxreg/json_io.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace maxreg {

inline constexpr int report_schema_version = 1;

struct CoefficientSummary {
    std::string kind = "none";
    std::uint64_t seed = 0;
    double lambda = 0.0;
    double Lambda = 0.0;
    double T = 0.0;
    /// scale-invariant half-derivative value of A on [0, T]
    std::optional<double> M;
    /// same for the full extension on the whole window
    std::optional<double> M_natural;
    std::map<std::string, double> params;
    bool operator==(const CoefficientSummary&) const = default;
};

/// One functional measured at one resolution.
struct FunctionalRow {
    std::string functional;
    double parameter = 0.0;
    double value = 0.0;
    std::optional<std::pair<double, double>> achieving_interval;
    std::size_t resolution = 0;
    bool divergent = false;
    bool operator==(const FunctionalRow&) const = default;
};

struct CommutatorRow {
    double alpha = 0.5;
    /// estimate at the finest resolution
    double estimate = 0.0;
    double bmo_value = 0.0;
    std::optional<double> ratio;
    std::vector<std::size_t> resolutions;
    std::vector<double> estimates;
    bool divergent = false;
    std::uint64_t seed = 0;
    bool operator==(const CommutatorRow&) const = default;
};

/// Everything measured in one experiment. Norms of fields on [0, T] use the
/// even reflection to [0, 2T) ("norm_extension": "even_reflection").
struct RegularityReport {
    int schema_version = report_schema_version;
    std::string id;
    std::string command;
    std::string norm_extension = "even_reflection";
    CoefficientSummary coefficient;
    std::optional<json> time_grid;
    std::optional<json> mesh;
    std::vector<std::size_t> resolutions;
    std::map<std::string, double> norms;
    std::map<std::string, double> ratios;
    std::map<std::string, double> diagnostics;
    std::map<std::string, bool> checks;
    std::vector<FunctionalRow> functionals;
    std::vector<CommutatorRow> commutators;
    std::vector<std::string> warnings;
    /// set when the experiment failed; the other fields hold what was measured before
    std::optional<std::string> error;
    std::optional<int> exit_code;
    /// wall-clock seconds, excluded from comparisons
    std::map<std::string, double> timing;

    /// Equality ignoring timing.
    bool same_content(const RegularityReport& o) const;
};

enum class ReportFormat { json, csv };
ReportFormat report_format_from_string(const std::string& s);

json to_json(const RegularityReport& r);
/// Validates the schema; unknown keys are rejected.
RegularityReport report_from_json(const json& j);

/// Fixed CSV column order, one row per report.
std::vector<std::string> report_csv_columns();
std::vector<std::string> report_csv_row(const RegularityReport& r);

/// Writes one report (JSON object) or a report set (JSON {"schema_version",
/// "reports": [...]}, or CSV with one row per report). Throws IoError.
void emit_report(const RegularityReport& r, const std::filesystem::path& path, ReportFormat format);
void emit_reports(const std::vector<RegularityReport>& rs, const std::filesystem::path& path, ReportFormat format);
RegularityReport parse_report(const std::filesystem::path& path);
std::vector<RegularityReport> parse_reports(const std::filesystem::path& path);

/// Two-column CSV with a header line.
void write_plot_data(const std::filesystem::path& path, const std::string& x_name, const std::string& y_name,
                     const std::vector<std::pair<double, double>>& rows);
std::vector<std::pair<double, double>> read_plot_data(const std::filesystem::path& path);

} // namespace maxreg
