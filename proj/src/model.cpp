#include "scengraph/model.hpp"

#include <algorithm>

#include "scengraph/error.hpp"

namespace scengraph {

std::string_view to_string(AbstractionLevel l) {
  switch (l) {
    case AbstractionLevel::Functional: return "Functional";
    case AbstractionLevel::Logical: return "Logical";
    case AbstractionLevel::Concrete: return "Concrete";
  }
  return "";
}

std::string_view to_string(NodeKind k) {
  switch (k) {
    case NodeKind::RootNode: return "RootNode";
    case NodeKind::EndNode: return "EndNode";
    case NodeKind::Maneuver: return "Maneuver";
    case NodeKind::Condition: return "Condition";
    case NodeKind::Join: return "Join";
    case NodeKind::ModuleInstance: return "ModuleInstance";
  }
  return "";
}

std::string_view to_string(JoinPolicy p) {
  return p == JoinPolicy::AllFinished ? "AllFinished" : "OneFinished";
}

std::optional<AbstractionLevel> level_from(std::string_view s) {
  for (auto l : {AbstractionLevel::Functional, AbstractionLevel::Logical, AbstractionLevel::Concrete})
    if (to_string(l) == s) return l;
  return std::nullopt;
}

std::optional<NodeKind> node_kind_from(std::string_view s) {
  for (auto k : {NodeKind::RootNode, NodeKind::EndNode, NodeKind::Maneuver, NodeKind::Condition, NodeKind::Join,
                 NodeKind::ModuleInstance})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

std::optional<JoinPolicy> join_policy_from(std::string_view s) {
  if (s == "AllFinished") return JoinPolicy::AllFinished;
  if (s == "OneFinished") return JoinPolicy::OneFinished;
  return std::nullopt;
}

const GraphNode* ModuleDef::find_element(std::string_view id) const {
  for (const auto& e : elements)
    if (e.id == id) return &e;
  return nullptr;
}

const GraphNode* ScenarioGraph::find_node(std::string_view id) const {
  for (const auto& n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

GraphNode* ScenarioGraph::find_node(std::string_view id) {
  for (auto& n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

const Actor* ScenarioGraph::find_actor(std::string_view id) const {
  for (const auto& a : actors)
    if (a.id == id) return &a;
  return nullptr;
}

const ModuleDef* ScenarioGraph::find_module(std::string_view id) const {
  for (const auto& m : module_defs)
    if (m.id == id) return &m;
  return nullptr;
}

NodeId ScenarioGraph::first_of(NodeKind kind) const {
  for (const auto& n : nodes)
    if (n.kind == kind) return n.id;
  return {};
}

std::size_t ScenarioGraph::count(NodeKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [kind](const GraphNode& n) { return n.kind == kind; }));
}

ScenarioGraph new_graph(const std::string& name, const std::string& map_name, AbstractionLevel level) {
  if (name.empty()) fail(ErrorCode::InvalidArgument, "scenario name must not be empty");
  ScenarioGraph g;
  g.id = name;
  g.name = name;
  g.map_name = map_name;
  g.abstraction_level = level;
  g.nodes.push_back(GraphNode{"root", NodeKind::RootNode, Terminal{}});
  g.nodes.push_back(GraphNode{"end", NodeKind::EndNode, Terminal{}});
  return g;
}

void add_actor(ScenarioGraph& g, Actor actor) {
  if (actor.id.empty()) fail(ErrorCode::InvalidArgument, "actor id must not be empty");
  if (g.find_actor(actor.id)) fail(ErrorCode::InvalidArgument, "duplicate actor id '" + actor.id + "'");
  if (actor.is_ego && std::any_of(g.actors.begin(), g.actors.end(), [](const Actor& a) { return a.is_ego; }))
    fail(ErrorCode::InvalidArgument, "scenario already has an ego actor");
  g.actors.push_back(std::move(actor));
}

namespace {

NodeId fresh_id(const ScenarioGraph& g, std::string_view prefix) {
  const auto instances = all_instance_ids(g);
  for (std::size_t k = g.nodes.size() + 1;; ++k) {
    NodeId candidate = std::string(prefix) + std::to_string(k);
    if (!g.find_node(candidate) && std::find(instances.begin(), instances.end(), candidate) == instances.end())
      return candidate;
  }
}

bool payload_matches(NodeKind kind, const NodePayload& payload) {
  switch (kind) {
    case NodeKind::RootNode:
    case NodeKind::EndNode: return std::holds_alternative<Terminal>(payload);
    case NodeKind::Maneuver:
    case NodeKind::Condition: return std::holds_alternative<ActionNode>(payload);
    case NodeKind::Join: return std::holds_alternative<JoinNode>(payload);
    case NodeKind::ModuleInstance: return std::holds_alternative<ModuleInstance>(payload);
  }
  return false;
}

}  // namespace

void check_param_value(const ParamSpec& spec, const ParamValue& value, std::string_view where) {
  auto bad = [&](const std::string& why) {
    fail(ErrorCode::InvalidArgument, std::string(where) + "." + spec.name + ": " + why);
  };
  auto check_literal = [&](const Literal& l) {
    const bool is_number = std::holds_alternative<double>(l);
    if (spec.type == ValueType::Number && !is_number) bad("expected a number");
    if (spec.type == ValueType::Text && is_number) bad("expected text");
  };
  if (value.is_unset()) return;
  if (!value.unit().empty() && value.unit() != spec.unit)
    bad("unit '" + value.unit() + "' does not match '" + spec.unit + "'");
  if (value.is_scalar()) check_literal(value.as_scalar().value);
  if (value.is_range() && spec.type == ValueType::Text) bad("ranges need a numeric parameter");
  if (value.is_set())
    for (const auto& l : value.as_set().values) check_literal(l);
}

ActionNode make_action(const std::string& action_type, ActorId reference, std::optional<ActorId> target,
                       std::map<std::string, ParamValue> params, const Registry& reg) {
  const auto& spec = reg.at(action_type);
  ActionNode a;
  a.action_type = action_type;
  a.category = spec.category;
  a.reference_actor = std::move(reference);
  a.target_actor = std::move(target);
  a.params = std::move(params);
  return a;
}

NodeId add_node(ScenarioGraph& g, NodeKind kind, NodePayload payload, const Registry& reg,
                std::optional<NodeId> requested_id) {
  if (kind == NodeKind::RootNode || kind == NodeKind::EndNode)
    fail(ErrorCode::DuplicateTerminal, "a scenario has exactly one " + std::string(to_string(kind)));
  if (!payload_matches(kind, payload))
    fail(ErrorCode::InvalidArgument, "payload does not match node kind " + std::string(to_string(kind)));

  if (auto* a = std::get_if<ActionNode>(&payload)) {
    const auto& spec = reg.at(a->action_type);
    const bool is_condition = spec.category == ActionCategory::Condition;
    if (is_condition != (kind == NodeKind::Condition))
      fail(ErrorCode::InvalidArgument, a->action_type + " is not a " + std::string(to_string(kind)));
    a->category = spec.category;
    if (a->reference_actor.empty()) fail(ErrorCode::InvalidArgument, "reference actor is required");
    if (!g.find_actor(a->reference_actor))
      fail(ErrorCode::InvalidArgument, "unknown reference actor '" + a->reference_actor + "'");
    if (spec.two_actor != a->target_actor.has_value())
      fail(ErrorCode::InvalidArgument, a->action_type + (spec.two_actor ? " needs" : " takes no") + " target actor");
    if (a->target_actor && !g.find_actor(*a->target_actor))
      fail(ErrorCode::InvalidArgument, "unknown target actor '" + *a->target_actor + "'");
    for (const auto& [key, value] : a->params) {
      const auto* ps = spec.param(key);
      if (!ps) fail(ErrorCode::UnknownParameter, a->action_type + " declares no parameter '" + key + "'");
      check_param_value(*ps, value, a->action_type);
    }
  }
  if (kind == NodeKind::ModuleInstance && requested_id) {
    auto ids = all_instance_ids(g);
    if (std::find(ids.begin(), ids.end(), *requested_id) != ids.end())
      fail(ErrorCode::InstanceConflict, "module instance '" + *requested_id + "' already has a parent");
  }

  NodeId id;
  if (requested_id) {
    if (requested_id->empty()) fail(ErrorCode::InvalidArgument, "node id must not be empty");
    if (g.find_node(*requested_id)) fail(ErrorCode::InvalidArgument, "duplicate node id '" + *requested_id + "'");
    id = *requested_id;
  } else {
    id = fresh_id(g, "n");
  }
  g.nodes.push_back(GraphNode{id, kind, std::move(payload)});
  return id;
}

EdgeId connect(ScenarioGraph& g, const NodeId& from, const NodeId& to, std::optional<std::string> from_port,
               std::optional<std::string> to_port) {
  if (from == to) fail(ErrorCode::InvalidArgument, "self-loop on '" + from + "'");
  if (!g.find_node(from)) fail(ErrorCode::UnknownNode, "unknown node '" + from + "'");
  if (!g.find_node(to)) fail(ErrorCode::UnknownNode, "unknown node '" + to + "'");
  for (const auto& e : g.edges)
    if (e.from == from && e.to == to && e.from_port == from_port && e.to_port == to_port)
      fail(ErrorCode::DuplicateEdge, "edge " + from + " -> " + to + " already exists");
  EdgeId id;
  for (std::size_t k = g.edges.size() + 1;; ++k) {
    id = "e" + std::to_string(k);
    if (std::none_of(g.edges.begin(), g.edges.end(), [&](const Edge& e) { return e.id == id; })) break;
  }
  g.edges.push_back(Edge{id, from, std::move(from_port), to, std::move(to_port)});
  return id;
}

void set_parameter(ScenarioGraph& g, const NodeId& node, const std::string& key, ParamValue value,
                   const Registry& reg) {
  auto* n = g.find_node(node);
  if (!n) fail(ErrorCode::UnknownNode, "unknown node '" + node + "'");
  if (!n->is_action()) fail(ErrorCode::InvalidArgument, "node '" + node + "' has no parameters");
  auto& a = n->action();
  const auto& spec = reg.at(a.action_type);
  const auto* ps = spec.param(key);
  if (!ps) fail(ErrorCode::UnknownParameter, a.action_type + " declares no parameter '" + key + "'");
  check_param_value(*ps, value, a.action_type);
  a.params[key] = std::move(value);
}

std::vector<NodeId> all_instance_ids(const ScenarioGraph& g) {
  std::vector<NodeId> ids;
  for (const auto& n : g.nodes)
    if (n.kind == NodeKind::ModuleInstance) ids.push_back(n.id);
  for (const auto& def : g.module_defs)
    for (const auto& e : def.elements)
      if (e.kind == NodeKind::ModuleInstance) ids.push_back(e.id);
  return ids;
}

}  // namespace scengraph
