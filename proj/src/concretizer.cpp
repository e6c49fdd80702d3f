#include "scengraph/concretizer.hpp"

#include <algorithm>
#include <limits>
#include <random>

#include <nlohmann/json.hpp>

#include "json_codec.hpp"
#include "scengraph/error.hpp"
#include "scengraph/modules.hpp"

namespace scengraph {

namespace {

struct ActorSlot {
  const char* key;
  ParamValue Actor::*field = nullptr;
  ParamValue Pose2D::*pose_field = nullptr;
};

constexpr ActorSlot kActorSlots[] = {
    {"start_heading", nullptr, &Pose2D::heading},
    {"start_speed", &Actor::start_speed, nullptr},
    {"start_x", nullptr, &Pose2D::x},
    {"start_y", nullptr, &Pose2D::y},
};

ParamValue& slot(Actor& a, const ActorSlot& s) { return s.field ? a.*(s.field) : a.start_pose.*(s.pose_field); }
const ParamValue& slot(const Actor& a, const ActorSlot& s) {
  return s.field ? a.*(s.field) : a.start_pose.*(s.pose_field);
}

/// Visits every level-relevant value: actor start slots, required action
/// parameters (missing ones as Unset), and environment entries.
template <typename F>
void for_each_value(const ScenarioGraph& g, const Registry& reg, F&& f) {
  for (const auto& a : g.actors)
    for (const auto& s : kActorSlots) f(ParamRef{ParamRef::Scope::Actor, a.id, s.key}, slot(a, s));
  const ParamValue unset;
  for (const auto& n : g.nodes) {
    if (!n.is_action()) continue;
    const auto& act = n.action();
    const auto* spec = reg.find(act.action_type);
    if (!spec) continue;
    for (const auto& ps : spec->params) {
      auto it = act.params.find(ps.name);
      if (it != act.params.end())
        f(ParamRef{ParamRef::Scope::Node, n.id, ps.name}, it->second);
      else if (ps.required)
        f(ParamRef{ParamRef::Scope::Node, n.id, ps.name}, unset);
    }
  }
  for (const auto& [k, v] : g.environment) f(ParamRef{ParamRef::Scope::Environment, "", k}, v);
}

ParamValue& locate(ScenarioGraph& g, const ParamRef& ref) {
  switch (ref.scope) {
    case ParamRef::Scope::Actor:
      for (auto& a : g.actors) {
        if (a.id != ref.owner) continue;
        for (const auto& s : kActorSlots)
          if (ref.key == s.key) return slot(a, s);
      }
      break;
    case ParamRef::Scope::Node:
      if (auto* n = g.find_node(ref.owner); n && n->is_action()) return n->action().params[ref.key];
      break;
    case ParamRef::Scope::Environment:
      if (auto it = g.environment.find(ref.key); it != g.environment.end()) return it->second;
      break;
  }
  fail(ErrorCode::InvalidArgument, "plan parameter " + to_string(ref) + " does not exist in the scenario");
}

ScenarioGraph assign(const ScenarioGraph& g, const ConcretizationPlan& p, const std::vector<std::size_t>& digits) {
  ScenarioGraph out = flatten(g);
  for (std::size_t i = 0; i < p.free_params.size(); ++i) {
    const auto& fp = p.free_params[i];
    locate(out, fp.ref) = fp.value.pick(digits[i]);
  }
  out.abstraction_level = AbstractionLevel::Concrete;
  return out;
}

void fill_default(ParamValue& v, const ParamSpec& ps, const std::string& where) {
  if (!v.is_unset()) return;
  if (!ps.default_value)
    fail(ErrorCode::MissingDefault, where + "." + ps.name + " has no registry default");
  v = ParamValue::scalar(*ps.default_value, ps.unit);
}

void defaults_for_nodes(std::vector<GraphNode>& nodes, const Registry& reg, const std::string& prefix) {
  for (auto& n : nodes) {
    if (!n.is_action()) continue;
    auto& act = n.action();
    const auto* spec = reg.find(act.action_type);
    if (!spec) continue;
    for (const auto& ps : spec->params) {
      if (!ps.required && !act.params.count(ps.name)) continue;
      fill_default(act.params[ps.name], ps, prefix + n.id);
    }
  }
}

}  // namespace

std::string to_string(const ParamRef& ref) {
  switch (ref.scope) {
    case ParamRef::Scope::Actor: return "actor:" + ref.owner + "." + ref.key;
    case ParamRef::Scope::Node: return ref.owner + "." + ref.key;
    case ParamRef::Scope::Environment: return "environment." + ref.key;
  }
  return ref.key;
}

AbstractionLevel classify_level(const ScenarioGraph& input, const Registry& reg) {
  const ScenarioGraph flat = has_instances(input) ? flatten(input) : ScenarioGraph{};
  const ScenarioGraph& g = has_instances(input) ? flat : input;
  bool any_unset = false, any_free = false;
  for_each_value(g, reg, [&](const ParamRef& ref, const ParamValue& v) {
    // Environment entries are optional; only their free values matter.
    if (ref.scope == ParamRef::Scope::Environment) {
      any_free = any_free || v.is_free();
      return;
    }
    any_unset = any_unset || v.is_unset();
    any_free = any_free || v.is_free();
  });
  if (any_unset) return AbstractionLevel::Functional;
  if (any_free) return AbstractionLevel::Logical;
  return AbstractionLevel::Concrete;
}

ScenarioGraph apply_defaults(const ScenarioGraph& g, const Registry& reg) {
  ScenarioGraph out = g;
  for (auto& a : out.actors) {
    if (a.start_pose.heading.is_unset()) a.start_pose.heading = ParamValue::scalar(0.0, "rad");
    if (a.start_speed.is_unset()) a.start_speed = ParamValue::scalar(0.0, "m/s");
    if (a.start_pose.x.is_unset() || a.start_pose.y.is_unset())
      fail(ErrorCode::MissingDefault, "actor '" + a.id + "' start position has no default");
  }
  defaults_for_nodes(out.nodes, reg, "");
  for (auto& def : out.module_defs) {
    defaults_for_nodes(def.elements, reg, def.id + ":");
    def.revision = compute_revision(def);
  }
  return out;
}

ConcretizationPlan plan(const ScenarioGraph& g, const Registry& reg) {
  if (classify_level(g, reg) == AbstractionLevel::Functional)
    fail(ErrorCode::LevelError, "functional scenario has unset parameters; apply defaults or set values first");
  const ScenarioGraph flat = flatten(g);
  ConcretizationPlan p;
  for_each_value(flat, reg, [&](const ParamRef& ref, const ParamValue& v) {
    if (v.is_free()) p.free_params.push_back(FreeParam{ref, v});
  });
  std::sort(p.free_params.begin(), p.free_params.end(),
            [](const FreeParam& a, const FreeParam& b) { return a.ref < b.ref; });
  p.total_count = 1;
  for (const auto& fp : p.free_params) {
    const auto c = static_cast<std::uint64_t>(fp.value.cardinality());
    if (c == 0) fail(ErrorCode::InvalidArgument, to_string(fp.ref) + " has no values");
    if (p.total_count > std::numeric_limits<std::uint64_t>::max() / c)
      fail(ErrorCode::OutOfRange, "parameter space exceeds 2^64 combinations");
    p.total_count *= c;
  }
  return p;
}

std::vector<std::size_t> decode_index(const ConcretizationPlan& p, std::uint64_t index) {
  if (index >= p.total_count)
    fail(ErrorCode::OutOfRange,
         "index " + std::to_string(index) + " outside [0, " + std::to_string(p.total_count) + ")");
  std::vector<std::size_t> digits(p.free_params.size());
  for (std::size_t i = p.free_params.size(); i-- > 0;) {
    const auto c = static_cast<std::uint64_t>(p.free_params[i].value.cardinality());
    digits[i] = static_cast<std::size_t>(index % c);
    index /= c;
  }
  return digits;
}

ScenarioGraph enumerate(const ScenarioGraph& g, const ConcretizationPlan& p, std::uint64_t index) {
  return assign(g, p, decode_index(p, index));
}

ScenarioGraph sample(const ScenarioGraph& g, const ConcretizationPlan& p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> digits;
  for (const auto& fp : p.free_params) digits.push_back(static_cast<std::size_t>(rng() % fp.value.cardinality()));
  return assign(g, p, digits);
}

std::string plan_to_json(const ConcretizationPlan& p) {
  nlohmann::ordered_json doc;
  auto params = nlohmann::ordered_json::array();
  for (const auto& fp : p.free_params) {
    static constexpr const char* kScopes[] = {"actor", "node", "environment"};
    nlohmann::ordered_json entry;
    entry["scope"] = kScopes[static_cast<int>(fp.ref.scope)];
    entry["owner"] = fp.ref.owner;
    entry["key"] = fp.ref.key;
    entry["value"] = codec::param_to_json(fp.value);
    entry["cardinality"] = fp.value.cardinality();
    params.push_back(std::move(entry));
  }
  doc["free_params"] = std::move(params);
  doc["total_count"] = p.total_count;
  doc["sampler"] = kSamplerName;
  return doc.dump(2) + "\n";
}

}  // namespace scengraph
