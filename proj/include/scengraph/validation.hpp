#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "scengraph/model.hpp"

namespace scengraph {

enum class Severity { Error, Warning };

std::string_view to_string(Severity s);

/// R1..R10. R7 and R8 are warnings, everything else an error.
struct Finding {
  std::string rule_id;
  Severity severity = Severity::Error;
  std::vector<NodeId> node_ids;
  std::string message;
  bool operator==(const Finding&) const = default;
};

struct ValidationReport {
  std::vector<Finding> findings;
  bool is_valid = true;

  std::size_t count(std::string_view rule_id) const;
  bool has(std::string_view rule_id) const { return count(rule_id) > 0; }
  bool operator==(const ValidationReport&) const = default;
};

struct ValidationOptions {
  /// Warnings invalidate the report as well.
  bool strict = false;
};

/// Runs every rule; never throws for scenario problems. Graphs with module
/// instances are checked in their flattened form, so findings inside a
/// module carry "<instance>/<element>" node ids.
ValidationReport validate(const ScenarioGraph& g, const Registry& reg = Registry::builtin(),
                          ValidationOptions options = {});

/// Severity class of a rule id. Throws UnknownRule.
Severity rule_severity(std::string_view rule_id);

/// Human-readable description of a rule. Throws UnknownRule.
std::string explain(std::string_view rule_id);

std::string report_to_json(const ValidationReport& report);

}  // namespace scengraph
