#pragma once

// JSON encoders/decoders shared by document, catalog, validation and
// executor serialization.

#include <map>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "scengraph/model.hpp"

namespace scengraph::codec {

nlohmann::ordered_json param_to_json(const ParamValue& v);
nlohmann::ordered_json node_to_json(const GraphNode& n);
nlohmann::ordered_json module_to_json(const ModuleDef& d, bool with_revision);
nlohmann::ordered_json graph_to_json(const ScenarioGraph& g);

ParamValue param_from_json(const nlohmann::json& v, const std::string& path);
Actor actor_from_json(const nlohmann::json& v, const std::string& path);
GraphNode node_from_json(const nlohmann::json& v, const std::string& path, const Registry& reg);
ModuleDef module_from_json(const nlohmann::json& v, const std::string& path, const Registry& reg);
ScenarioGraph graph_from_json(const nlohmann::json& v, const Registry& reg);
nlohmann::json parse_json(std::string_view text);

}  // namespace scengraph::codec
