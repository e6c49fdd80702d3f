#include "scengraph/validation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "graph_algo.hpp"
#include "scengraph/error.hpp"
#include "scengraph/modules.hpp"
#include "util.hpp"

namespace scengraph {

std::string_view to_string(Severity s) { return s == Severity::Error ? "Error" : "Warning"; }

std::size_t ValidationReport::count(std::string_view rule_id) const {
  return static_cast<std::size_t>(
      std::count_if(findings.begin(), findings.end(), [&](const Finding& f) { return f.rule_id == rule_id; }));
}

namespace {

struct RuleInfo {
  const char* id;
  Severity severity;
  const char* text;
};

constexpr RuleInfo kRules[] = {
    {"R1", Severity::Error, "R1 (error): a scenario contains exactly one root node."},
    {"R2", Severity::Error, "R2 (error): a scenario contains exactly one end node; every path ends there."},
    {"R3", Severity::Error,
     "R3 (error): root/end connectivity. The root node cannot have an incoming connection and the end node "
     "cannot have an outgoing connection."},
    {"R4", Severity::Error,
     "R4 (error): every maneuver, condition, join and module node lies on some directed path from the root "
     "node to the end node."},
    {"R5", Severity::Error, "R5 (error): every join node has at least two incoming sequences."},
    {"R6", Severity::Error,
     "R6 (error): parameters fit the abstraction level. Concrete scenarios need a scalar for every required "
     "parameter (actor start pose and speed included); logical scenarios need a scalar, range or discrete set; "
     "functional scenarios accept anything, including unset values."},
    {"R7", Severity::Warning,
     "R7 (warning): no actor runs two conflicting maneuvers in parallel, e.g. Accelerate and Decelerate. Two "
     "maneuvers are parallel when neither precedes the other and both lead into a common join (or the end "
     "node). Conflict pairs come from the action registry."},
    {"R8", Severity::Warning,
     "R8 (warning): scalar parameters stay within plausibility bounds for the actor category, e.g. a "
     "pedestrian cannot move at 50 km/h (bound 4.2 m/s). Bounds come from the action registry."},
    {"R9", Severity::Error, "R9 (error): the scenario graph is acyclic."},
    {"R10", Severity::Error,
     "R10 (error): every reference actor and target actor resolves to an actor of the scenario, two-actor "
     "actions name a target actor, actor categories are permitted for the action, and module instances "
     "resolve to known definitions."},
};

const RuleInfo& rule(std::string_view id) {
  for (const auto& r : kRules)
    if (id == r.id) return r;
  fail(ErrorCode::UnknownRule, "unknown rule '" + std::string(id) + "'");
}

int rule_number(const std::string& id) { return std::stoi(id.substr(1)); }

class Checker {
public:
  Checker(const ScenarioGraph& g, const Registry& reg) : g_(g), reg_(reg), adj_(g.nodes, g.edges) {}

  void add(const char* rule_id, std::vector<NodeId> ids, std::string message) {
    std::sort(ids.begin(), ids.end());
    out.push_back(Finding{rule_id, rule(rule_id).severity, std::move(ids), std::move(message)});
  }

  void terminals() {
    for (auto [kind, rule_id] : {std::pair{NodeKind::RootNode, "R1"}, std::pair{NodeKind::EndNode, "R2"}}) {
      std::vector<NodeId> ids;
      for (const auto& n : g_.nodes)
        if (n.kind == kind) ids.push_back(n.id);
      if (ids.size() != 1)
        add(rule_id, ids,
            "expected exactly one " + std::string(to_string(kind)) + ", found " + std::to_string(ids.size()));
    }
  }

  void connectivity() {
    for (const auto& n : g_.nodes) {
      const auto i = *adj_.find(n.id);
      if (n.kind == NodeKind::RootNode && !adj_.pred[i].empty())
        add("R3", {n.id}, "root node '" + n.id + "' has an incoming connection");
      if (n.kind == NodeKind::EndNode && !adj_.succ[i].empty())
        add("R3", {n.id}, "end node '" + n.id + "' has an outgoing connection");
    }
  }

  void paths() {
    std::vector<std::size_t> roots, ends;
    for (std::size_t i = 0; i < g_.nodes.size(); ++i) {
      if (g_.nodes[i].kind == NodeKind::RootNode) roots.push_back(i);
      if (g_.nodes[i].kind == NodeKind::EndNode) ends.push_back(i);
    }
    const auto from_root = adj_.reach(roots, true);
    const auto to_end = adj_.reach(ends, false);
    for (std::size_t i = 0; i < g_.nodes.size(); ++i) {
      const auto& n = g_.nodes[i];
      if (n.kind == NodeKind::RootNode || n.kind == NodeKind::EndNode) continue;
      if (!from_root[i] || !to_end[i])
        add("R4", {n.id},
            "node '" + n.id + "' is not on a path from the root to the end" +
                (!from_root[i] ? " (unreachable from the root)" : " (cannot reach the end)"));
    }
  }

  void joins() {
    for (const auto& n : g_.nodes) {
      if (n.kind != NodeKind::Join) continue;
      const auto incoming = adj_.pred[*adj_.find(n.id)].size();
      if (incoming < 2)
        add("R5", {n.id}, "join '" + n.id + "' has " + std::to_string(incoming) + " incoming sequence(s), needs 2");
    }
  }

  bool fits(const ParamValue& v) const {
    switch (g_.abstraction_level) {
      case AbstractionLevel::Concrete: return v.is_scalar();
      case AbstractionLevel::Logical: return !v.is_unset();
      case AbstractionLevel::Functional: return true;
    }
    return true;
  }

  void levels() {
    const std::string level(to_string(g_.abstraction_level));
    const char* need = g_.abstraction_level == AbstractionLevel::Concrete ? "a scalar" : "a value or range";
    for (const auto& a : g_.actors) {
      std::vector<std::string> bad;
      const std::pair<const char*, const ParamValue*> slots[] = {{"start_x", &a.start_pose.x},
                                                                 {"start_y", &a.start_pose.y},
                                                                 {"start_heading", &a.start_pose.heading},
                                                                 {"start_speed", &a.start_speed}};
      for (const auto& [key, v] : slots)
        if (!fits(*v)) bad.push_back(key);
      if (!bad.empty()) add("R6", {"actor:" + a.id}, level + " scenario needs " + need + " for actor '" + a.id +
                                                         "' parameters: " + join_keys(bad));
    }
    if (g_.abstraction_level == AbstractionLevel::Concrete) {
      std::vector<std::string> bad;
      for (const auto& [k, v] : g_.environment)
        if (v.is_free()) bad.push_back(k);
      if (!bad.empty()) add("R6", {"environment"}, "concrete scenario has free environment values: " + join_keys(bad));
    }
    for (const auto& n : g_.nodes) {
      if (!n.is_action()) continue;
      const auto& a = n.action();
      const auto* spec = reg_.find(a.action_type);
      if (!spec) continue;
      std::vector<std::string> bad;
      for (const auto& ps : spec->params) {
        if (!ps.required) continue;
        auto it = a.params.find(ps.name);
        if (!fits(it == a.params.end() ? ParamValue{} : it->second)) bad.push_back(ps.name);
      }
      if (!bad.empty())
        add("R6", {n.id}, level + " scenario needs " + need + " for '" + n.id + "' (" + a.action_type +
                              ") parameters: " + join_keys(bad));
    }
  }

  void conflicts() {
    auto order = adj_.topo_order();
    if (!order) return;  // R9 reports it
    const std::size_t n = g_.nodes.size();
    std::vector<std::vector<bool>> desc(n);
    for (std::size_t i = 0; i < n; ++i) desc[i] = adj_.reach({i}, true);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const auto& a = g_.nodes[i];
        const auto& b = g_.nodes[j];
        if (a.kind != NodeKind::Maneuver || b.kind != NodeKind::Maneuver) continue;
        if (a.action().reference_actor != b.action().reference_actor) continue;
        if (!reg_.conflicting(a.action().action_type, b.action().action_type)) continue;
        if (desc[i][j] || desc[j][i]) continue;
        bool common_join = false;
        for (std::size_t k = 0; k < n && !common_join; ++k) {
          const auto kind = g_.nodes[k].kind;
          common_join = (kind == NodeKind::Join || kind == NodeKind::EndNode) && desc[i][k] && desc[j][k];
        }
        if (common_join)
          add("R7", {a.id, b.id},
              "actor '" + a.action().reference_actor + "' may run " + a.action().action_type + " ('" + a.id +
                  "') and " + b.action().action_type + " ('" + b.id + "') at the same time");
      }
    }
  }

  void plausibility() {
    for (const auto& a : g_.actors) {
      const auto& lim = reg_.limits(a.category);
      if (auto v = a.start_speed.number(); v && (*v < 0.0 || *v > lim.max_speed))
        add("R8", {"actor:" + a.id},
            "start speed " + format_number(*v) + " m/s of " + std::string(to_string(a.category)) + " '" + a.id +
                "' is outside [0, " + format_number(lim.max_speed) + "] m/s");
    }
    for (const auto& n : g_.nodes) {
      if (!n.is_action()) continue;
      const auto& a = n.action();
      const auto* spec = reg_.find(a.action_type);
      const auto* actor = g_.find_actor(a.reference_actor);
      if (!spec) continue;
      for (const auto& [key, value] : a.params) {
        const auto* ps = spec->param(key);
        auto v = value.number();
        if (!ps || !v) continue;
        std::string why;
        switch (ps->bound) {
          case BoundKind::Speed:
            if (actor && (*v < 0.0 || *v > reg_.limits(actor->category).max_speed))
              why = "outside [0, " + format_number(reg_.limits(actor->category).max_speed) + "] m/s for " +
                    std::string(to_string(actor->category));
            break;
          case BoundKind::Acceleration:
            if (actor && std::abs(*v) > reg_.limits(actor->category).max_accel)
              why = "magnitude above " + format_number(reg_.limits(actor->category).max_accel) + " m/s2 for " +
                    std::string(to_string(actor->category));
            break;
          case BoundKind::Ratio:
            if (*v < 0.0 || *v > 1.0) why = "outside [0, 1]";
            break;
          case BoundKind::Positive:
            if (!(*v > 0.0)) why = "must be positive";
            break;
          case BoundKind::NonNegative:
            if (*v < 0.0) why = "must not be negative";
            break;
          case BoundKind::Angle:
            if (!(*v > 0.0) || *v > 2.0 * std::numbers::pi) why = "outside (0, 2pi]";
            break;
          case BoundKind::None: break;
        }
        if (!why.empty())
          add("R8", {n.id}, "'" + n.id + "' " + a.action_type + "." + key + " = " + format_number(*v) + " is " + why);
      }
    }
  }

  void acyclic() {
    for (const auto& comp : adj_.cycles()) {
      std::vector<NodeId> ids;
      for (auto i : comp) ids.push_back(g_.nodes[i].id);
      add("R9", ids, "cycle through " + std::to_string(ids.size()) + " nodes");
    }
  }

  void references() {
    for (const auto& n : g_.nodes) {
      if (!n.is_action()) continue;
      const auto& a = n.action();
      const auto* spec = reg_.find(a.action_type);
      if (!spec) continue;
      const auto* ref = g_.find_actor(a.reference_actor);
      if (!ref)
        add("R10", {n.id}, "'" + n.id + "' reference actor '" + a.reference_actor + "' does not exist");
      else if (!spec->ref_categories.count(ref->category))
        add("R10", {n.id}, "'" + n.id + "' " + a.action_type + " cannot be performed by " +
                               std::string(to_string(ref->category)) + " '" + ref->id + "'");
      if (spec->two_actor && !a.target_actor) add("R10", {n.id}, "'" + n.id + "' " + a.action_type + " needs a target actor");
      if (!spec->two_actor && a.target_actor)
        add("R10", {n.id}, "'" + n.id + "' " + a.action_type + " takes no target actor");
      if (a.target_actor) {
        const auto* tgt = g_.find_actor(*a.target_actor);
        if (!tgt)
          add("R10", {n.id}, "'" + n.id + "' target actor '" + *a.target_actor + "' does not exist");
        else if (spec->two_actor && !spec->target_categories.count(tgt->category))
          add("R10", {n.id}, "'" + n.id + "' " + a.action_type + " cannot target " +
                                 std::string(to_string(tgt->category)) + " '" + tgt->id + "'");
      }
    }
  }

  std::vector<Finding> out;

private:
  static std::string join_keys(const std::vector<std::string>& keys) {
    std::string s;
    for (const auto& k : keys) s += (s.empty() ? "" : ", ") + k;
    return s;
  }

  const ScenarioGraph& g_;
  const Registry& reg_;
  Adjacency adj_;
};

}  // namespace

Severity rule_severity(std::string_view rule_id) { return rule(rule_id).severity; }

std::string explain(std::string_view rule_id) { return rule(rule_id).text; }

ValidationReport validate(const ScenarioGraph& input, const Registry& reg, ValidationOptions options) {
  std::vector<Finding> module_findings;
  ScenarioGraph flat;
  const ScenarioGraph* g = &input;
  if (has_instances(input)) {
    try {
      flat = flatten(input);
      g = &flat;
    } catch (const Error& e) {
      std::vector<NodeId> ids;
      for (const auto& n : input.nodes)
        if (n.kind == NodeKind::ModuleInstance) ids.push_back(n.id);
      module_findings.push_back(Finding{"R10", Severity::Error, ids, std::string("module expansion failed: ") + e.what()});
    }
  }

  Checker c(*g, reg);
  c.terminals();
  c.connectivity();
  c.paths();
  c.joins();
  c.levels();
  c.conflicts();
  c.plausibility();
  c.acyclic();
  c.references();

  ValidationReport report;
  report.findings = std::move(c.out);
  report.findings.insert(report.findings.end(), module_findings.begin(), module_findings.end());
  std::stable_sort(report.findings.begin(), report.findings.end(), [](const Finding& a, const Finding& b) {
    const std::string ka = a.node_ids.empty() ? "" : a.node_ids.front();
    const std::string kb = b.node_ids.empty() ? "" : b.node_ids.front();
    if (ka != kb) return ka < kb;
    if (a.rule_id != b.rule_id) return rule_number(a.rule_id) < rule_number(b.rule_id);
    return a.message < b.message;
  });
  report.is_valid = std::none_of(report.findings.begin(), report.findings.end(), [&](const Finding& f) {
    return f.severity == Severity::Error || options.strict;
  });
  return report;
}

std::string report_to_json(const ValidationReport& report) {
  nlohmann::ordered_json doc;
  doc["is_valid"] = report.is_valid;
  auto findings = nlohmann::ordered_json::array();
  for (const auto& f : report.findings)
    findings.push_back(nlohmann::ordered_json{{"rule_id", f.rule_id},
                                              {"severity", to_string(f.severity)},
                                              {"node_ids", f.node_ids},
                                              {"message", f.message}});
  doc["findings"] = std::move(findings);
  return doc.dump(2) + "\n";
}

}  // namespace scengraph
