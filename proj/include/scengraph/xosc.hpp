#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "scengraph/model.hpp"

namespace scengraph {

struct ExportOptions {
  /// (catalog kind, directory). Kinds: vehicle, controller, pedestrian,
  /// miscObject, environment, maneuver, trajectory, route.
  std::vector<std::pair<std::string, std::string>> catalog_locations;
  /// "<node id>.<param key>" entries emitted as ParameterDeclarations.
  std::vector<std::string> parameterize;
  std::string date = "1970-01-01T00:00:00";
  std::string author = "scengraph";
};

/// Parses "kind=path" (or bare "path", meaning maneuver) entries.
std::vector<std::pair<std::string, std::string>> parse_catalog_locations(const std::vector<std::string>& specs);

/// OpenSCENARIO 1.0 document for a concrete, valid scenario. UTF-8, LF,
/// 2-space indentation; byte-identical for identical input.
/// Throws LevelError, InvalidScenario, UnsupportedAction.
std::string export_xosc(const ScenarioGraph& g, const ExportOptions& options = {},
                        const Registry& reg = Registry::builtin());

struct XoscReport {
  bool ok = true;
  std::vector<std::string> issues;
  std::size_t entity_count = 0;
  std::size_t event_count = 0;
  std::size_t maneuver_group_count = 0;
  /// Names of trigger Condition elements, one entry per occurrence.
  std::vector<std::string> condition_names;
};

/// Structural subset check: well-formed XML, single FileHeader and
/// Storyboard, Init and StopTrigger present, every entityRef and
/// storyboardElementRef resolves.
XoscReport verify_structure(std::string_view xml);

std::string xosc_report_to_json(const XoscReport& r);

}  // namespace scengraph
