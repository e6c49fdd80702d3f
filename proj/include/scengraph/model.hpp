#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "scengraph/param.hpp"
#include "scengraph/registry.hpp"

namespace scengraph {

using NodeId = std::string;
using ActorId = std::string;
using EdgeId = std::string;

enum class AbstractionLevel { Functional = 0, Logical = 1, Concrete = 2 };
enum class NodeKind { RootNode, EndNode, Maneuver, Condition, Join, ModuleInstance };
enum class JoinPolicy { AllFinished, OneFinished };

std::string_view to_string(AbstractionLevel l);
std::string_view to_string(NodeKind k);
std::string_view to_string(JoinPolicy p);
std::optional<AbstractionLevel> level_from(std::string_view s);
std::optional<NodeKind> node_kind_from(std::string_view s);
std::optional<JoinPolicy> join_policy_from(std::string_view s);

struct Pose2D {
  ParamValue x;
  ParamValue y;
  ParamValue heading;
  bool operator==(const Pose2D&) const = default;
};

struct Actor {
  ActorId id;
  std::string name;
  ActorCategory category = ActorCategory::FourWheeler;
  std::string model;
  bool is_ego = false;
  Pose2D start_pose;
  ParamValue start_speed;
  bool operator==(const Actor&) const = default;
};

/// Payload of Maneuver and Condition nodes. Inside a module definition the
/// actor fields hold role names instead of actor ids.
struct ActionNode {
  std::string action_type;
  ActionCategory category = ActionCategory::Longitudinal;
  ActorId reference_actor;
  std::optional<ActorId> target_actor;
  std::map<std::string, ParamValue> params;
  bool operator==(const ActionNode&) const = default;
};

class JoinNode {
public:
  explicit JoinNode(JoinPolicy policy = JoinPolicy::AllFinished) : policy_(policy) {}
  JoinPolicy policy() const { return policy_; }
  bool operator==(const JoinNode&) const = default;

private:
  JoinPolicy policy_;
};

struct ParamOverride {
  NodeId element;
  std::string key;
  ParamValue value;
  bool operator==(const ParamOverride&) const = default;
};

struct ModuleInstance {
  std::string def_id;
  std::map<std::string, ActorId> actor_bindings;  // role -> actor (or enclosing role)
  std::vector<ParamOverride> param_overrides;
  bool operator==(const ModuleInstance&) const = default;
};

struct Terminal {
  bool operator==(const Terminal&) const = default;
};

using NodePayload = std::variant<Terminal, ActionNode, JoinNode, ModuleInstance>;

struct GraphNode {
  NodeId id;
  NodeKind kind = NodeKind::Maneuver;
  NodePayload payload;

  bool is_action() const { return kind == NodeKind::Maneuver || kind == NodeKind::Condition; }
  const ActionNode& action() const { return std::get<ActionNode>(payload); }
  ActionNode& action() { return std::get<ActionNode>(payload); }
  const JoinNode& join() const { return std::get<JoinNode>(payload); }
  const ModuleInstance& instance() const { return std::get<ModuleInstance>(payload); }
  ModuleInstance& instance() { return std::get<ModuleInstance>(payload); }

  bool operator==(const GraphNode&) const = default;
};

struct Edge {
  EdgeId id;
  NodeId from;
  std::optional<std::string> from_port;
  NodeId to;
  std::optional<std::string> to_port;
  bool operator==(const Edge&) const = default;
};

struct Port {
  std::string name;
  NodeId element;  // entry element for in-ports, exit element for out-ports
  bool operator==(const Port&) const = default;
};

struct ModuleDef {
  std::string id;
  std::string name;
  std::string revision;  // content hash, assigned by define_module
  std::vector<std::string> actor_roles;
  std::vector<Port> in_ports;
  std::vector<Port> out_ports;
  std::vector<GraphNode> elements;
  std::vector<Edge> internal_edges;

  const GraphNode* find_element(std::string_view id) const;
  bool operator==(const ModuleDef&) const = default;
};

/// A scenario. Mutation happens through the free functions below; a graph
/// value that has been validated is treated as an immutable snapshot.
struct ScenarioGraph {
  std::string id;
  std::string name;
  std::string map_name;
  AbstractionLevel abstraction_level = AbstractionLevel::Functional;
  std::map<std::string, ParamValue> environment;
  std::vector<Actor> actors;
  std::vector<GraphNode> nodes;
  std::vector<Edge> edges;
  std::vector<ModuleDef> module_defs;

  const GraphNode* find_node(std::string_view id) const;
  GraphNode* find_node(std::string_view id);
  const Actor* find_actor(std::string_view id) const;
  const ModuleDef* find_module(std::string_view id) const;
  /// Id of the first node of the given kind, or empty.
  NodeId first_of(NodeKind kind) const;
  std::size_t count(NodeKind kind) const;

  bool operator==(const ScenarioGraph&) const = default;
};

// Mutation API -------------------------------------------------------------

ScenarioGraph new_graph(const std::string& name, const std::string& map_name, AbstractionLevel level);

/// Adds an actor. Ids must be unique and at most one actor may be ego.
void add_actor(ScenarioGraph& g, Actor actor);

/// Appends a node with a fresh id ("n<k>") or the requested id.
NodeId add_node(ScenarioGraph& g, NodeKind kind, NodePayload payload, const Registry& reg = Registry::builtin(),
                std::optional<NodeId> requested_id = std::nullopt);

/// Action node payload with the registry category filled in.
ActionNode make_action(const std::string& action_type, ActorId reference, std::optional<ActorId> target = std::nullopt,
                       std::map<std::string, ParamValue> params = {}, const Registry& reg = Registry::builtin());

EdgeId connect(ScenarioGraph& g, const NodeId& from, const NodeId& to, std::optional<std::string> from_port = std::nullopt,
               std::optional<std::string> to_port = std::nullopt);

void set_parameter(ScenarioGraph& g, const NodeId& node, const std::string& key, ParamValue value,
                   const Registry& reg = Registry::builtin());

/// Checks a value against a parameter schema (type, unit). Throws
/// InvalidArgument on mismatch.
void check_param_value(const ParamSpec& spec, const ParamValue& value, std::string_view where);

/// All ModuleInstance ids in the graph and in every module definition.
std::vector<NodeId> all_instance_ids(const ScenarioGraph& g);

}  // namespace scengraph
