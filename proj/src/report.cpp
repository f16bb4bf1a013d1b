#include "maxreg/report.hpp"

#include "maxreg/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace maxreg {

namespace {

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double read_number(const json& j) {
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    if (!j.is_number()) throw ValidationError("report: expected a number");
    return j.get<double>();
}

json number_map(const std::map<std::string, double>& m) {
    json out = json::object();
    for (const auto& [k, v] : m) out[k] = number(v);
    return out;
}

std::map<std::string, double> read_number_map(const json& j, const char* where) {
    if (!j.is_object()) throw ValidationError(std::string("report: ") + where + " must be an object");
    std::map<std::string, double> out;
    for (const auto& [k, v] : j.items()) out[k] = read_number(v);
    return out;
}

json interval(const std::optional<std::pair<double, double>>& iv) {
    if (!iv) return nullptr;
    return json::array({number(iv->first), number(iv->second)});
}

std::optional<std::pair<double, double>> read_interval(const json& j) {
    if (j.is_null()) return std::nullopt;
    if (!j.is_array() || j.size() != 2) throw ValidationError("report: interval must be [a, b]");
    return std::make_pair(read_number(j[0]), read_number(j[1]));
}

template <typename T>
std::optional<T> opt(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<T>();
}

std::optional<double> opt_number(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return read_number(j.at(key));
}

json opt_number(const std::optional<double>& v) { return v ? number(*v) : json(nullptr); }

std::string fmt(double v) {
    if (!std::isfinite(v)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    out.close();
    if (!out) throw IoError("write failed: " + path.string());
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

const char* const csv_norms[] = {"u_L2_H", "u_H1_H", "u_H_half_V", "v_E", "f_L2_H"};
const char* const csv_diagnostics[] = {"residual", "iterations", "v0_ratio", "guard_fraction"};

} // namespace

bool RegularityReport::same_content(const RegularityReport& o) const {
    auto key = [](const RegularityReport& r) {
        json j = to_json(r);
        j.erase("timing");
        return j.dump();
    };
    return key(*this) == key(o);
}

ReportFormat report_format_from_string(const std::string& s) {
    if (s == "json") return ReportFormat::json;
    if (s == "csv") return ReportFormat::csv;
    throw ValidationError("unknown report format '" + s + "'");
}

json to_json(const RegularityReport& r) {
    json j;
    j["schema_version"] = r.schema_version;
    j["id"] = r.id;
    j["command"] = r.command;
    j["norm_extension"] = r.norm_extension;
    const CoefficientSummary& c = r.coefficient;
    j["coefficient"] = {{"kind", c.kind},     {"seed", c.seed},
                        {"lambda", number(c.lambda)}, {"Lambda", number(c.Lambda)},
                        {"T", number(c.T)},   {"M", opt_number(c.M)},
                        {"M_natural", opt_number(c.M_natural)}, {"params", number_map(c.params)}};
    j["time_grid"] = r.time_grid ? *r.time_grid : json(nullptr);
    j["mesh"] = r.mesh ? *r.mesh : json(nullptr);
    j["resolutions"] = r.resolutions;
    j["norms"] = number_map(r.norms);
    j["ratios"] = number_map(r.ratios);
    j["diagnostics"] = number_map(r.diagnostics);
    j["checks"] = r.checks;
    json rows = json::array();
    for (const auto& f : r.functionals)
        rows.push_back({{"functional", f.functional},
                        {"parameter", number(f.parameter)},
                        {"value", number(f.value)},
                        {"achieving_interval", interval(f.achieving_interval)},
                        {"resolution", f.resolution},
                        {"divergent", f.divergent}});
    j["functionals"] = rows;
    json probes = json::array();
    for (const auto& p : r.commutators) {
        json est = json::array();
        for (double e : p.estimates) est.push_back(number(e));
        probes.push_back({{"alpha", number(p.alpha)},
                          {"estimate", number(p.estimate)},
                          {"bmo_value", number(p.bmo_value)},
                          {"ratio", opt_number(p.ratio)},
                          {"resolutions", p.resolutions},
                          {"estimates", est},
                          {"divergent", p.divergent},
                          {"seed", p.seed}});
    }
    j["commutators"] = probes;
    j["warnings"] = r.warnings;
    j["error"] = r.error ? json(*r.error) : json(nullptr);
    j["exit_code"] = r.exit_code ? json(*r.exit_code) : json(nullptr);
    j["timing"] = number_map(r.timing);
    return j;
}

RegularityReport report_from_json(const json& j) {
    require_known_keys(j, {"schema_version", "id", "command", "norm_extension", "coefficient", "time_grid", "mesh",
                           "resolutions", "norms", "ratios", "diagnostics", "checks", "functionals", "commutators",
                           "warnings", "error", "exit_code", "timing"},
                       "report");
    RegularityReport r;
    try {
        r.schema_version = j.at("schema_version").get<int>();
        if (r.schema_version != report_schema_version)
            throw ValidationError("report: unsupported schema_version " + std::to_string(r.schema_version));
        r.id = j.value("id", std::string());
        r.command = j.value("command", std::string());
        r.norm_extension = j.value("norm_extension", std::string("even_reflection"));
        if (j.contains("coefficient")) {
            const json& c = j.at("coefficient");
            require_known_keys(c, {"kind", "seed", "lambda", "Lambda", "T", "M", "M_natural", "params"},
                               "report coefficient");
            r.coefficient.kind = c.value("kind", std::string("none"));
            r.coefficient.seed = c.value("seed", std::uint64_t{0});
            r.coefficient.lambda = c.contains("lambda") ? read_number(c.at("lambda")) : 0.0;
            r.coefficient.Lambda = c.contains("Lambda") ? read_number(c.at("Lambda")) : 0.0;
            r.coefficient.T = c.contains("T") ? read_number(c.at("T")) : 0.0;
            r.coefficient.M = opt_number(c, "M");
            r.coefficient.M_natural = opt_number(c, "M_natural");
            if (c.contains("params")) r.coefficient.params = read_number_map(c.at("params"), "params");
        }
        if (j.contains("time_grid") && !j.at("time_grid").is_null()) r.time_grid = j.at("time_grid");
        if (j.contains("mesh") && !j.at("mesh").is_null()) r.mesh = j.at("mesh");
        r.resolutions = j.value("resolutions", std::vector<std::size_t>{});
        if (j.contains("norms")) r.norms = read_number_map(j.at("norms"), "norms");
        if (j.contains("ratios")) r.ratios = read_number_map(j.at("ratios"), "ratios");
        if (j.contains("diagnostics")) r.diagnostics = read_number_map(j.at("diagnostics"), "diagnostics");
        if (j.contains("checks")) r.checks = j.at("checks").get<std::map<std::string, bool>>();
        for (const json& f : j.value("functionals", json::array())) {
            require_known_keys(f, {"functional", "parameter", "value", "achieving_interval", "resolution", "divergent"},
                               "report functional");
            FunctionalRow row;
            row.functional = f.at("functional").get<std::string>();
            row.parameter = read_number(f.at("parameter"));
            row.value = read_number(f.at("value"));
            row.achieving_interval = read_interval(f.value("achieving_interval", json(nullptr)));
            row.resolution = f.at("resolution").get<std::size_t>();
            row.divergent = f.at("divergent").get<bool>();
            r.functionals.push_back(std::move(row));
        }
        for (const json& p : j.value("commutators", json::array())) {
            require_known_keys(p, {"alpha", "estimate", "bmo_value", "ratio", "resolutions", "estimates", "divergent",
                                   "seed"},
                               "report commutator");
            CommutatorRow row;
            row.alpha = read_number(p.at("alpha"));
            row.estimate = read_number(p.at("estimate"));
            row.bmo_value = read_number(p.at("bmo_value"));
            row.ratio = opt_number(p, "ratio");
            row.resolutions = p.value("resolutions", std::vector<std::size_t>{});
            for (const json& e : p.value("estimates", json::array())) row.estimates.push_back(read_number(e));
            row.divergent = p.at("divergent").get<bool>();
            row.seed = p.value("seed", std::uint64_t{0});
            r.commutators.push_back(std::move(row));
        }
        r.warnings = j.value("warnings", std::vector<std::string>{});
        r.error = opt<std::string>(j, "error");
        r.exit_code = opt<int>(j, "exit_code");
        if (j.contains("timing")) r.timing = read_number_map(j.at("timing"), "timing");
    } catch (const json::exception& e) {
        throw ValidationError(std::string("report: ") + e.what());
    }
    return r;
}

std::vector<std::string> report_csv_columns() {
    std::vector<std::string> cols = {"id", "command", "schema_version", "kind", "seed", "lambda", "Lambda",
                                     "T",  "M",       "M_natural",      "resolutions"};
    for (const char* k : csv_norms) cols.emplace_back(k);
    cols.emplace_back("maxreg");
    for (const char* k : csv_diagnostics) cols.emplace_back(k);
    cols.emplace_back("warnings");
    cols.emplace_back("error");
    return cols;
}

std::vector<std::string> report_csv_row(const RegularityReport& r) {
    auto from = [](const std::map<std::string, double>& m, const char* k) {
        const auto it = m.find(k);
        return it == m.end() ? std::string() : fmt(it->second);
    };
    std::string res;
    for (std::size_t i = 0; i < r.resolutions.size(); ++i) res += (i ? ";" : "") + std::to_string(r.resolutions[i]);
    std::vector<std::string> row = {r.id,
                                    r.command,
                                    std::to_string(r.schema_version),
                                    r.coefficient.kind,
                                    std::to_string(r.coefficient.seed),
                                    fmt(r.coefficient.lambda),
                                    fmt(r.coefficient.Lambda),
                                    fmt(r.coefficient.T),
                                    r.coefficient.M ? fmt(*r.coefficient.M) : "",
                                    r.coefficient.M_natural ? fmt(*r.coefficient.M_natural) : "",
                                    res};
    for (const char* k : csv_norms) row.push_back(from(r.norms, k));
    row.push_back(from(r.ratios, "maxreg"));
    for (const char* k : csv_diagnostics) row.push_back(from(r.diagnostics, k));
    row.push_back(std::to_string(r.warnings.size()));
    row.push_back(r.error.value_or(""));
    for (auto& cell : row) cell = csv_escape(cell);
    return row;
}

void emit_report(const RegularityReport& r, const std::filesystem::path& path, ReportFormat format) {
    if (format == ReportFormat::json) {
        write_text(path, to_json(r).dump(2) + "\n");
        return;
    }
    emit_reports({r}, path, format);
}

void emit_reports(const std::vector<RegularityReport>& rs, const std::filesystem::path& path, ReportFormat format) {
    if (format == ReportFormat::json) {
        json arr = json::array();
        for (const auto& r : rs) arr.push_back(to_json(r));
        write_text(path, json{{"schema_version", report_schema_version}, {"reports", arr}}.dump(2) + "\n");
        return;
    }
    std::ostringstream out;
    const auto cols = report_csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << "\n";
    for (const auto& r : rs) {
        const auto row = report_csv_row(r);
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << "\n";
    }
    write_text(path, out.str());
}

RegularityReport parse_report(const std::filesystem::path& path) { return report_from_json(read_json(path)); }

std::vector<RegularityReport> parse_reports(const std::filesystem::path& path) {
    const json j = read_json(path);
    if (!j.contains("reports")) return {report_from_json(j)};
    require_known_keys(j, {"schema_version", "reports"}, "report set");
    if (j.value("schema_version", 0) != report_schema_version)
        throw ValidationError("report set: unsupported schema_version");
    std::vector<RegularityReport> out;
    for (const json& r : j.at("reports")) out.push_back(report_from_json(r));
    return out;
}

void write_plot_data(const std::filesystem::path& path, const std::string& x_name, const std::string& y_name,
                     const std::vector<std::pair<double, double>>& rows) {
    std::ostringstream out;
    out << x_name << "," << y_name << "\n";
    for (const auto& [x, y] : rows) out << fmt(x) << "," << fmt(y) << "\n";
    write_text(path, out.str());
}

std::vector<std::pair<double, double>> read_plot_data(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    std::vector<std::pair<double, double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ValidationError(path.string() + ": expected two columns");
        rows.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
    }
    return rows;
}

} // namespace maxreg
