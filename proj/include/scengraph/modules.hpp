#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "scengraph/model.hpp"

namespace scengraph {

inline constexpr int kDefaultFlattenDepth = 32;

struct ModuleSpec {
  std::string id;  // defaults to name when empty
  std::string name;
  std::vector<GraphNode> elements;
  std::vector<Edge> edges;
  std::vector<Port> in_ports;
  std::vector<Port> out_ports;
  std::vector<std::string> roles;
};

/// Builds a definition and assigns its content-addressed revision.
/// `known` supplies the definitions nested instances may reference; it is
/// used for the recursion check.
ModuleDef define_module(ModuleSpec spec, std::span<const ModuleDef> known = {},
                        const Registry& reg = Registry::builtin());

/// Content hash of a definition (first 16 hex digits of SHA-256).
std::string compute_revision(const ModuleDef& def);

/// Adds a ModuleInstance node for `def`, registering the definition (and any
/// nested definitions in `nested`) in the graph's module_defs.
NodeId instantiate(ScenarioGraph& g, const ModuleDef& def, const std::map<std::string, ActorId>& actor_bindings,
                   const std::vector<ParamOverride>& overrides = {}, std::span<const ModuleDef> nested = {},
                   const Registry& reg = Registry::builtin(), std::optional<NodeId> requested_id = std::nullopt);

/// Replaces every module instance with a fresh copy of its definition.
/// Copied node ids are "<instance id>/<element id>", edges likewise.
ScenarioGraph flatten(const ScenarioGraph& g, int max_depth = kDefaultFlattenDepth);

bool has_instances(const ScenarioGraph& g);

}  // namespace scengraph
