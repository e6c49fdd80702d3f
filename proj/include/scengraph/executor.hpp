#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scengraph/model.hpp"

namespace scengraph {

struct TickConfig {
  double dt = 0.05;
  double max_time = 60.0;
  std::uint64_t seed = 0;
  /// Store every n-th world state (the first and last are always stored).
  int sample_stride = 1;
  bool operator==(const TickConfig&) const = default;
};

struct ActorState {
  ActorId id;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // rad, not wrapped
  double speed = 0.0;
  double acceleration = 0.0;
  double half_length = 0.0;
  double half_width = 0.0;
  bool operator==(const ActorState&) const = default;
};

struct WorldState {
  double time = 0.0;
  std::vector<ActorState> actors;
  bool operator==(const WorldState&) const = default;
};

enum class NodeState { Idle, Running, Succeeded };
std::string_view to_string(NodeState s);

struct NodeEvent {
  double time = 0.0;
  NodeId node;
  NodeState state = NodeState::Running;
  bool operator==(const NodeEvent&) const = default;
};

enum class OutcomeKind { Completed, Collision, Timeout };
std::string_view to_string(OutcomeKind k);

struct Outcome {
  OutcomeKind kind = OutcomeKind::Timeout;
  std::optional<std::pair<ActorId, ActorId>> collision_pair;
  double time = 0.0;  // completion, collision or timeout time
  bool operator==(const Outcome&) const = default;
};

struct Trace {
  TickConfig config;
  std::vector<WorldState> states;
  std::vector<NodeEvent> events;
  Outcome outcome;
  /// Minimum centre-to-centre distance over all actor pairs and ticks;
  /// empty with fewer than two actors.
  std::optional<double> min_distance;
  bool operator==(const Trace&) const = default;
};

struct OutcomeSummary {
  OutcomeKind kind = OutcomeKind::Timeout;
  std::optional<std::pair<ActorId, ActorId>> collision_pair;
  std::optional<double> collision_time;
  std::optional<double> completion_time;
  double end_time = 0.0;
  std::optional<double> min_distance;
};

/// Deterministic tick loop over a concrete, valid scenario (flattened
/// internally). Throws LevelError, InvalidScenario, InvalidConfig.
Trace run(const ScenarioGraph& g, const TickConfig& config = {}, const Registry& reg = Registry::builtin());

OutcomeSummary outcome(const Trace& trace);

/// Linear interpolation between the neighbouring stored states.
/// Throws OutOfRange outside [0, end].
WorldState replay_states(const Trace& trace, double t);

std::string trace_to_json(const Trace& trace);
std::string summary_to_json(const OutcomeSummary& s);
std::string world_state_to_json(const WorldState& w);
/// One-line human form, e.g. "Collision(ego,bike) at t=5.35".
std::string summary_line(const OutcomeSummary& s);

}  // namespace scengraph
