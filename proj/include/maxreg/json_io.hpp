#pragma once

#include "maxreg/coefficients.hpp"
#include "maxreg/fourier.hpp"
#include "maxreg/mesh.hpp"

#include <nlohmann/json.hpp>

namespace maxreg {

using json = nlohmann::json;

json to_json(const TimeGrid& g);
TimeGrid time_grid_from_json(const json& j);

json to_json(const SpaceMesh& m);
SpaceMesh space_mesh_from_json(const json& j);

json to_json(const CoefficientDescriptor& d);
CoefficientDescriptor descriptor_from_json(const json& j);

/// Rejects keys of `j` not listed in `allowed`; `where` names the object in the message.
void require_known_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where);

} // namespace maxreg
