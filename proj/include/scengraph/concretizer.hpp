#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scengraph/model.hpp"

namespace scengraph {

/// Where a parameter lives. Actor keys are start_x, start_y, start_heading
/// and start_speed; environment entries have an empty owner.
struct ParamRef {
  enum class Scope { Actor = 0, Node = 1, Environment = 2 };
  Scope scope = Scope::Node;
  std::string owner;
  std::string key;

  auto operator<=>(const ParamRef&) const = default;
  bool operator==(const ParamRef&) const = default;
};

std::string to_string(const ParamRef& ref);

struct FreeParam {
  ParamRef ref;
  ParamValue value;  // Range or DiscreteSet
  bool operator==(const FreeParam&) const = default;
};

struct ConcretizationPlan {
  std::vector<FreeParam> free_params;  // sorted by (scope, owner, key)
  std::uint64_t total_count = 1;
  bool operator==(const ConcretizationPlan&) const = default;
};

/// Name of the generator `sample` uses; frozen for format_version 1.
inline constexpr const char* kSamplerName = "mt19937_64/mod-v1";

/// Highest level whose parameter rule the graph satisfies. Graphs with
/// module instances are classified on their flattened form.
AbstractionLevel classify_level(const ScenarioGraph& g, const Registry& reg = Registry::builtin());

/// Replaces Unset required parameters (nodes, module elements, actor
/// heading/speed) with registry defaults. Throws MissingDefault.
ScenarioGraph apply_defaults(const ScenarioGraph& g, const Registry& reg = Registry::builtin());

/// Throws LevelError for functional graphs. Works on the flattened graph.
ConcretizationPlan plan(const ScenarioGraph& g, const Registry& reg = Registry::builtin());

/// Mixed-radix decoding of `index`; the last free parameter varies fastest.
/// Returns a flattened graph labeled Concrete. Throws OutOfRange.
ScenarioGraph enumerate(const ScenarioGraph& g, const ConcretizationPlan& p, std::uint64_t index);

/// The digit vector `enumerate` uses for `index`.
std::vector<std::size_t> decode_index(const ConcretizationPlan& p, std::uint64_t index);

/// One draw per free parameter, in plan order, from mt19937_64(seed):
/// choice = output mod cardinality.
ScenarioGraph sample(const ScenarioGraph& g, const ConcretizationPlan& p, std::uint64_t seed);

std::string plan_to_json(const ConcretizationPlan& p);

}  // namespace scengraph
