#pragma once

#include "json.hpp"

#include "crutchlab/tensegrity/solver.hpp"

namespace crutchlab::tensegrity {

// JSON schema
//   topology: {"nodes": [{"id", "role", "position": [x, y, z]}],
//              "members": [{"id", "kind", "ends": [a, b], "axial_rigidity_N",
//                           "rest_length_m", "rest_length_offset_m", "failure_load_N"}]}
//   configuration: {"topology": ..., "coordinates_m": [[x, y, z] per node],
//                   "member_forces_N": [...], "supports": [ids],
//                   "loads_N": [[...]], "reactions_N": [[...]],
//                   "failure_warning": bool, "residual_N": r}
nlohmann::json to_json(const Topology& topology);
nlohmann::json to_json(const Configuration& config);
Topology topology_from_json(const nlohmann::json& j);
Configuration configuration_from_json(const nlohmann::json& j);

}  // namespace crutchlab::tensegrity
