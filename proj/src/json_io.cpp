#include "maxreg/json_io.hpp"

#include "maxreg/errors.hpp"

#include <algorithm>
#include <cstring>

namespace maxreg {

namespace {

template <typename T>
T field(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ValidationError(where + ": missing key '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(where + ": bad value for '" + key + "': " + e.what());
    }
}

} // namespace

void require_known_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw ValidationError(where + ": expected an object");
    for (const auto& [key, value] : j.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&](const char* a) { return std::strcmp(a, key.c_str()) == 0; });
        if (!known) throw ValidationError(where + ": unknown key '" + key + "'");
    }
}

json to_json(const TimeGrid& g) {
    return {{"t_start", g.t_start},
            {"t_end", g.t_end},
            {"n_points", g.n_points},
            {"sampling", g.sampling == Sampling::cell_centered ? "cell_centered" : "node"}};
}

TimeGrid time_grid_from_json(const json& j) {
    require_known_keys(j, {"t_start", "t_end", "n_points", "sampling"}, "time grid");
    const std::string s = j.value("sampling", std::string("node"));
    if (s != "node" && s != "cell_centered") throw ValidationError("time grid: unknown sampling '" + s + "'");
    return TimeGrid::make(field<double>(j, "t_start", "time grid"), field<double>(j, "t_end", "time grid"),
                          field<std::size_t>(j, "n_points", "time grid"),
                          s == "node" ? Sampling::node : Sampling::cell_centered);
}

json to_json(const SpaceMesh& m) {
    return {{"x_lo", m.x_lo},
            {"x_hi", m.x_hi},
            {"n_cells", m.n_cells},
            {"bc_left", to_string(m.bc_left)},
            {"bc_right", to_string(m.bc_right)}};
}

SpaceMesh space_mesh_from_json(const json& j) {
    require_known_keys(j, {"x_lo", "x_hi", "n_cells", "bc_left", "bc_right"}, "mesh");
    return SpaceMesh::make(j.value("x_lo", 0.0), j.value("x_hi", 1.0), field<std::size_t>(j, "n_cells", "mesh"),
                           boundary_from_string(j.value("bc_left", std::string("dirichlet"))),
                           boundary_from_string(j.value("bc_right", std::string("dirichlet"))));
}

json to_json(const CoefficientDescriptor& d) {
    json params = json::object();
    for (const auto& [k, v] : d.params) params[k] = v;
    return {{"kind", d.kind}, {"seed", d.seed}, {"params", params}};
}

CoefficientDescriptor descriptor_from_json(const json& j) {
    require_known_keys(j, {"kind", "seed", "params"}, "coefficient descriptor");
    CoefficientDescriptor d;
    d.kind = j.value("kind", std::string("custom"));
    d.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("params"))
        for (const auto& [k, v] : j.at("params").items()) d.params[k] = v.get<double>();
    return d;
}

} // namespace maxreg
