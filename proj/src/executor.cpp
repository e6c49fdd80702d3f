#include "scengraph/executor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "graph_algo.hpp"
#include "scengraph/concretizer.hpp"
#include "scengraph/error.hpp"
#include "scengraph/modules.hpp"
#include "scengraph/validation.hpp"
#include "util.hpp"

namespace scengraph {

std::string_view to_string(NodeState s) {
  switch (s) {
    case NodeState::Idle: return "Idle";
    case NodeState::Running: return "Running";
    case NodeState::Succeeded: return "Succeeded";
  }
  return "";
}

std::string_view to_string(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::Completed: return "Completed";
    case OutcomeKind::Collision: return "Collision";
    case OutcomeKind::Timeout: return "Timeout";
  }
  return "";
}

namespace {

constexpr double kEps = 1e-9;
/// Proportional gain of the FollowVehicle gap controller, 1/s.
constexpr double kFollowGain = 0.5;

double wrap_angle(double a) {
  a = std::fmod(a + std::numbers::pi, 2.0 * std::numbers::pi);
  if (a < 0) a += 2.0 * std::numbers::pi;
  return a - std::numbers::pi;
}

/// Per-node progress of a running maneuver.
struct Progress {
  double elapsed = 0.0;
  double distance = 0.0;
  double turned = 0.0;
  double lateral = 0.0;
};

class Engine {
public:
  Engine(ScenarioGraph g, const TickConfig& cfg, const Registry& reg)
      : g_(std::move(g)), cfg_(cfg), reg_(reg), adj_(g_.nodes, g_.edges) {
    const auto n = g_.nodes.size();
    state_.assign(n, NodeState::Idle);
    frozen_.assign(n, false);
    progress_.assign(n, Progress{});
    specs_.assign(n, nullptr);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& node = g_.nodes[i];
      if (node.kind == NodeKind::RootNode) root_ = i;
      if (node.kind == NodeKind::EndNode) end_ = i;
      if (!node.is_action()) continue;
      specs_[i] = &reg_.at(node.action().action_type);
      for (const auto& ps : specs_[i]->params) {
        auto it = node.action().params.find(ps.name);
        if (it == node.action().params.end() || !it->second.number()) continue;
        const double v = *it->second.number();
        if (ps.bound == BoundKind::Positive && !(v > 0.0))
          fail(ErrorCode::InvalidScenario, "'" + node.id + "' " + ps.name + " must be positive to execute");
      }
    }
    for (const auto& a : g_.actors) {
      const auto& lim = reg_.limits(a.category);
      ActorState s;
      s.id = a.id;
      s.x = *a.start_pose.x.number();
      s.y = *a.start_pose.y.number();
      s.heading = *a.start_pose.heading.number();
      s.speed = std::clamp(*a.start_speed.number(), 0.0, lim.max_speed);
      s.half_length = lim.length / 2.0;
      s.half_width = lim.width / 2.0;
      actor_index_[a.id] = actors_.size();
      actors_.push_back(s);
      categories_.push_back(a.category);
    }
  }

  Trace run() {
    trace_.config = cfg_;
    set_state(root_, NodeState::Running, 0.0);
    settle(0.0);
    record_distances();
    store(0.0);
    if (auto hit = collision()) return finish(OutcomeKind::Collision, 0.0, hit);
    if (state_[end_] == NodeState::Succeeded) return finish(OutcomeKind::Completed, 0.0, std::nullopt);

    for (std::uint64_t k = 1;; ++k) {
      const double t_now = tick_time(k);
      advance_maneuvers();
      complete_maneuvers(t_now);
      settle(t_now);
      record_distances();
      const bool last = state_[end_] == NodeState::Succeeded || t_now > cfg_.max_time + kEps;
      if (k % static_cast<std::uint64_t>(cfg_.sample_stride) == 0) store(t_now);
      if (auto hit = collision()) return finish(OutcomeKind::Collision, t_now, hit);
      if (state_[end_] == NodeState::Succeeded) return finish(OutcomeKind::Completed, t_now, std::nullopt);
      if (last) return finish(OutcomeKind::Timeout, t_now, std::nullopt);
    }
  }

private:
  double tick_time(std::uint64_t k) const {
    // Snap k*dt to 1e-9 s so times print as short decimals.
    return std::round(static_cast<double>(k) * cfg_.dt * 1e9) / 1e9;
  }

  double param(std::size_t node, const std::string& key) const {
    const auto& params = g_.nodes[node].action().params;
    auto it = params.find(key);
    if (it != params.end() && it->second.number()) return *it->second.number();
    if (const auto* ps = specs_[node]->param(key); ps && ps->default_value) return *ps->default_value;
    fail(ErrorCode::InvalidScenario, "'" + g_.nodes[node].id + "' has no numeric " + key);
  }

  ActorState& ref_actor(std::size_t node) { return actors_[actor_index_.at(g_.nodes[node].action().reference_actor)]; }
  const ActorState& target_actor(std::size_t node) const {
    return actors_[actor_index_.at(*g_.nodes[node].action().target_actor)];
  }
  const CategoryLimits& limits_of(std::size_t node) const {
    return reg_.limits(categories_[actor_index_.at(g_.nodes[node].action().reference_actor)]);
  }

  void set_state(std::size_t i, NodeState s, double t) {
    state_[i] = s;
    trace_.events.push_back(NodeEvent{t, g_.nodes[i].id, s});
  }

  bool active(std::size_t i) const { return state_[i] == NodeState::Running && !frozen_[i]; }

  /// Resolves everything that happens at instant t: conditions checked
  /// against the current state and structural hand-overs, to a fixpoint.
  void settle(double t) {
    while (true) {
      const bool hit = evaluate_conditions(t);
      const bool moved = cascade(t);
      if (!hit && !moved) return;
    }
  }

  bool evaluate_conditions(double t) {
    std::vector<std::size_t> hits;
    for (std::size_t i = 0; i < g_.nodes.size(); ++i) {
      if (g_.nodes[i].kind != NodeKind::Condition || !active(i)) continue;
      const auto& a = ref_actor(i);
      bool holds = false;
      switch (specs_[i]->behavior) {
        case Behavior::InLocationRadius:
          holds = std::hypot(a.x - param(i, "x"), a.y - param(i, "y")) <= param(i, "radius") + kEps;
          break;
        case Behavior::InVehicleRadius: {
          const auto& b = target_actor(i);
          holds = std::hypot(a.x - b.x, a.y - b.y) <= param(i, "radius") + kEps;
          break;
        }
        case Behavior::TimeElapsed: holds = t >= param(i, "duration") - kEps; break;
        case Behavior::SpeedReached: holds = a.speed >= param(i, "target_velocity") - kEps; break;
        default: break;
      }
      if (holds) hits.push_back(i);
    }
    for (auto i : hits) set_state(i, NodeState::Succeeded, t);
    return !hits.empty();
  }

  void advance_maneuvers() {
    const double dt = cfg_.dt;
    // Controllers see every actor as of the start of the tick, independent of update order.
    const std::vector<ActorState> before = actors_;
    auto target_before = [&](std::size_t node) -> const ActorState& {
      return before[actor_index_.at(*g_.nodes[node].action().target_actor)];
    };
    for (std::size_t ai = 0; ai < actors_.size(); ++ai) {
      auto& a = actors_[ai];
      const auto& lim = reg_.limits(categories_[ai]);
      const double v0 = a.speed;
      std::optional<std::size_t> lateral, follow;
      for (std::size_t i = 0; i < g_.nodes.size(); ++i) {
        if (g_.nodes[i].kind != NodeKind::Maneuver || !active(i)) continue;
        if (actor_index_.at(g_.nodes[i].action().reference_actor) != ai) continue;
        switch (specs_[i]->behavior) {
          case Behavior::Accelerate: {
            const double target = param(i, "target_velocity");
            a.speed = std::min(a.speed + param(i, "throttle") * lim.max_accel * dt, std::max(target, a.speed));
            break;
          }
          case Behavior::Decelerate: {
            const double target = param(i, "target_velocity");
            a.speed = std::max(a.speed - param(i, "brake") * lim.max_accel * dt, std::min(target, a.speed));
            break;
          }
          case Behavior::Stop: a.speed = std::max(0.0, a.speed - param(i, "deceleration") * dt); break;
          case Behavior::FollowVehicle: {
            const auto& b = target_before(i);
            const double gap = std::hypot(b.x - a.x, b.y - a.y);
            const double desired = b.speed + kFollowGain * (gap - param(i, "gap"));
            const double dv = std::clamp(desired - a.speed, -lim.max_accel * dt, lim.max_accel * dt);
            a.speed += dv;
            if (!follow) follow = i;
            break;
          }
          case Behavior::LaneChangeLeft:
          case Behavior::LaneChangeRight:
          case Behavior::TurnLeft:
          case Behavior::TurnRight:
            if (!lateral) lateral = i;
            break;
          default: break;
        }
        progress_[i].elapsed += dt;
      }
      a.speed = std::clamp(a.speed, 0.0, lim.max_speed);
      a.acceleration = (a.speed - v0) / dt;

      const double x0 = a.x, y0 = a.y;
      const double s = a.speed * dt;
      if (lateral) {
        move_lateral(*lateral, a, s);
      } else {
        if (follow) {
          const auto& b = target_before(*follow);
          if (std::hypot(b.x - a.x, b.y - a.y) > kEps)
            a.heading += wrap_angle(std::atan2(b.y - a.y, b.x - a.x) - a.heading);
        }
        a.x += s * std::cos(a.heading);
        a.y += s * std::sin(a.heading);
      }
      const double travelled = std::hypot(a.x - x0, a.y - y0);
      for (std::size_t i = 0; i < g_.nodes.size(); ++i)
        if (g_.nodes[i].kind == NodeKind::Maneuver && active(i) &&
            actor_index_.at(g_.nodes[i].action().reference_actor) == ai)
          progress_[i].distance += travelled;
    }
  }

  void move_lateral(std::size_t i, ActorState& a, double s) {
    auto& p = progress_[i];
    switch (specs_[i]->behavior) {
      case Behavior::TurnLeft:
      case Behavior::TurnRight: {
        const double r = param(i, "radius");
        const double total = param(i, "angle");
        const double sign = specs_[i]->behavior == Behavior::TurnLeft ? 1.0 : -1.0;
        const double dpsi = std::min(s / r, total - p.turned);
        const double h0 = a.heading;
        const double h1 = h0 + sign * dpsi;
        a.x += sign * r * (std::sin(h1) - std::sin(h0));
        a.y -= sign * r * (std::cos(h1) - std::cos(h0));
        a.heading = h1;
        p.turned += dpsi;
        // Whatever distance is left after the arc ends continues straight.
        const double rest = s - dpsi * r;
        if (rest > kEps) {
          a.x += rest * std::cos(a.heading);
          a.y += rest * std::sin(a.heading);
        }
        break;
      }
      case Behavior::LaneChangeLeft:
      case Behavior::LaneChangeRight: {
        const double width = param(i, "lane_width");
        const double duration = param(i, "duration");
        const double sign = specs_[i]->behavior == Behavior::LaneChangeLeft ? 1.0 : -1.0;
        const double tau = std::min(p.elapsed, duration) / duration;
        const double offset = width * (1.0 - std::cos(std::numbers::pi * tau)) / 2.0;
        const double d = offset - p.lateral;
        p.lateral = offset;
        a.x += s * std::cos(a.heading) - sign * d * std::sin(a.heading);
        a.y += s * std::sin(a.heading) + sign * d * std::cos(a.heading);
        break;
      }
      default: break;
    }
  }

  void complete_maneuvers(double t) {
    std::vector<std::size_t> done;
    for (std::size_t i = 0; i < g_.nodes.size(); ++i) {
      if (g_.nodes[i].kind != NodeKind::Maneuver || !active(i)) continue;
      const auto& a = ref_actor(i);
      const auto& p = progress_[i];
      bool finished = false;
      switch (specs_[i]->behavior) {
        case Behavior::Accelerate: finished = a.speed >= std::min(param(i, "target_velocity"), limits_of(i).max_speed) - kEps; break;
        case Behavior::Decelerate: finished = a.speed <= param(i, "target_velocity") + kEps; break;
        case Behavior::Stop: finished = a.speed <= kEps; break;
        case Behavior::KeepVelocity:
        case Behavior::FollowVehicle:
        case Behavior::LaneChangeLeft:
        case Behavior::LaneChangeRight: finished = p.elapsed >= param(i, "duration") - kEps; break;
        case Behavior::DriveDistance: finished = p.distance >= param(i, "distance") - kEps; break;
        case Behavior::TurnLeft:
        case Behavior::TurnRight: finished = p.turned >= param(i, "angle") - kEps; break;
        default: break;
      }
      if (finished) done.push_back(i);
    }
    for (auto i : done) set_state(i, NodeState::Succeeded, t);
  }

  bool activation_holds(std::size_t i) const {
    const auto& preds = adj_.pred[i];
    if (preds.empty()) return false;
    const bool one = g_.nodes[i].kind == NodeKind::Join && g_.nodes[i].join().policy() == JoinPolicy::OneFinished;
    auto done = [&](std::size_t p) { return state_[p] == NodeState::Succeeded; };
    return one ? std::any_of(preds.begin(), preds.end(), done) : std::all_of(preds.begin(), preds.end(), done);
  }

  /// Activates successors until nothing changes. Returns whether any state moved.
  bool cascade(double t) {
    bool any = false;
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t i = 0; i < g_.nodes.size(); ++i) {
        if (frozen_[i]) continue;
        const auto kind = g_.nodes[i].kind;
        const bool structural = kind == NodeKind::RootNode || kind == NodeKind::Join || kind == NodeKind::EndNode;
        if (state_[i] == NodeState::Idle && activation_holds(i)) {
          set_state(i, NodeState::Running, t);
          if (kind == NodeKind::Join && g_.nodes[i].join().policy() == JoinPolicy::OneFinished) freeze_losers(i);
          changed = true;
        }
        if (state_[i] == NodeState::Running && structural) {
          set_state(i, NodeState::Succeeded, t);
          changed = true;
        }
      }
      any = any || changed;
    }
    return any;
  }

  /// Freezes the nodes that only feed the join through branches other than
  /// the winning one.
  void freeze_losers(std::size_t join) {
    std::size_t winner = adj_.pred[join].front();
    for (auto p : adj_.pred[join])
      if (state_[p] == NodeState::Succeeded) {
        winner = p;
        break;
      }
    const auto feeds_join = adj_.reach({join}, false);
    const auto feeds_winner = adj_.reach({winner}, false);
    // Nodes that reach the end without passing through the join are shared.
    std::vector<bool> bypass(g_.nodes.size(), false);
    std::vector<std::size_t> stack{end_};
    while (!stack.empty()) {
      auto n = stack.back();
      stack.pop_back();
      if (bypass[n] || n == join) continue;
      bypass[n] = true;
      for (auto p : adj_.pred[n]) stack.push_back(p);
    }
    for (std::size_t i = 0; i < g_.nodes.size(); ++i)
      if (i != join && feeds_join[i] && !feeds_winner[i] && !bypass[i] && state_[i] != NodeState::Succeeded)
        frozen_[i] = true;
  }

  std::optional<std::pair<ActorId, ActorId>> collision() const {
    for (std::size_t i = 0; i < actors_.size(); ++i)
      for (std::size_t j = i + 1; j < actors_.size(); ++j) {
        const auto& a = actors_[i];
        const auto& b = actors_[j];
        if (std::abs(a.x - b.x) < a.half_length + b.half_length && std::abs(a.y - b.y) < a.half_width + b.half_width)
          return std::pair{a.id, b.id};
      }
    return std::nullopt;
  }

  void record_distances() {
    for (std::size_t i = 0; i < actors_.size(); ++i)
      for (std::size_t j = i + 1; j < actors_.size(); ++j) {
        const double d = std::hypot(actors_[i].x - actors_[j].x, actors_[i].y - actors_[j].y);
        if (!trace_.min_distance || d < *trace_.min_distance) trace_.min_distance = d;
      }
  }

  void store(double t) {
    if (!trace_.states.empty() && trace_.states.back().time == t) return;
    trace_.states.push_back(WorldState{t, actors_});
  }

  Trace finish(OutcomeKind kind, double t, std::optional<std::pair<ActorId, ActorId>> pair) {
    store(t);
    trace_.outcome = Outcome{kind, std::move(pair), t};
    return std::move(trace_);
  }

  ScenarioGraph g_;
  TickConfig cfg_;
  const Registry& reg_;
  Adjacency adj_;
  std::size_t root_ = 0, end_ = 0;
  std::vector<NodeState> state_;
  std::vector<bool> frozen_;
  std::vector<Progress> progress_;
  std::vector<const ActionSpec*> specs_;
  std::vector<ActorState> actors_;
  std::vector<ActorCategory> categories_;
  std::map<ActorId, std::size_t> actor_index_;
  Trace trace_;
};

nlohmann::ordered_json state_json(const WorldState& w) {
  auto actors = nlohmann::ordered_json::array();
  for (const auto& a : w.actors)
    actors.push_back(nlohmann::ordered_json{{"id", a.id},
                                            {"x", a.x},
                                            {"y", a.y},
                                            {"heading", a.heading},
                                            {"speed", a.speed},
                                            {"acceleration", a.acceleration},
                                            {"half_length", a.half_length},
                                            {"half_width", a.half_width}});
  return nlohmann::ordered_json{{"time", w.time}, {"actors", std::move(actors)}};
}

nlohmann::ordered_json pair_json(const std::optional<std::pair<ActorId, ActorId>>& p) {
  if (!p) return nullptr;
  return nlohmann::ordered_json::array({p->first, p->second});
}

template <typename T>
nlohmann::ordered_json opt_json(const std::optional<T>& v) {
  if (!v) return nullptr;
  return *v;
}

}  // namespace

Trace run(const ScenarioGraph& g, const TickConfig& config, const Registry& reg) {
  if (!(config.dt > 0.0) || !(config.max_time > 0.0) || config.sample_stride < 1)
    fail(ErrorCode::InvalidConfig, "tick config needs dt > 0, max_time > 0 and sample_stride >= 1");
  if (classify_level(g, reg) != AbstractionLevel::Concrete)
    fail(ErrorCode::LevelError, "only concrete scenarios can be executed");
  const auto report = validate(g, reg);
  if (!report.is_valid) {
    std::string first;
    for (const auto& f : report.findings)
      if (f.severity == Severity::Error) {
        first = f.rule_id + ": " + f.message;
        break;
      }
    fail(ErrorCode::InvalidScenario, "scenario is not valid (" + first + ")");
  }
  return Engine(flatten(g), config, reg).run();
}

OutcomeSummary outcome(const Trace& trace) {
  OutcomeSummary s;
  s.kind = trace.outcome.kind;
  s.collision_pair = trace.outcome.collision_pair;
  s.end_time = trace.outcome.time;
  if (s.kind == OutcomeKind::Collision) s.collision_time = trace.outcome.time;
  if (s.kind == OutcomeKind::Completed) s.completion_time = trace.outcome.time;
  s.min_distance = trace.min_distance;
  return s;
}

WorldState replay_states(const Trace& trace, double t) {
  if (trace.states.empty() || t < trace.states.front().time || t > trace.states.back().time)
    fail(ErrorCode::OutOfRange, "time " + format_number(t) + " outside the trace");
  auto hi = std::lower_bound(trace.states.begin(), trace.states.end(), t,
                             [](const WorldState& w, double v) { return w.time < v; });
  if (hi->time == t || hi == trace.states.begin()) return *hi;
  auto lo = std::prev(hi);
  const double f = (t - lo->time) / (hi->time - lo->time);
  WorldState w{t, lo->actors};
  auto lerp = [f](double a, double b) { return a + (b - a) * f; };
  for (std::size_t i = 0; i < w.actors.size(); ++i) {
    const auto& b = hi->actors[i];
    auto& a = w.actors[i];
    a.x = lerp(a.x, b.x);
    a.y = lerp(a.y, b.y);
    a.heading = lerp(a.heading, b.heading);
    a.speed = lerp(a.speed, b.speed);
    a.acceleration = lerp(a.acceleration, b.acceleration);
  }
  return w;
}

std::string world_state_to_json(const WorldState& w) { return state_json(w).dump(2) + "\n"; }

std::string trace_to_json(const Trace& trace) {
  nlohmann::ordered_json doc;
  doc["tick_config"] = {{"dt", trace.config.dt},
                        {"max_time", trace.config.max_time},
                        {"seed", trace.config.seed},
                        {"sample_stride", trace.config.sample_stride}};
  auto events = nlohmann::ordered_json::array();
  for (const auto& e : trace.events)
    events.push_back(nlohmann::ordered_json{{"time", e.time}, {"node", e.node}, {"state", to_string(e.state)}});
  doc["events"] = std::move(events);
  auto states = nlohmann::ordered_json::array();
  for (const auto& w : trace.states) states.push_back(state_json(w));
  doc["states"] = std::move(states);
  doc["outcome"] = {{"kind", to_string(trace.outcome.kind)},
                    {"collision_pair", pair_json(trace.outcome.collision_pair)},
                    {"time", trace.outcome.time}};
  doc["min_distance"] = opt_json(trace.min_distance);
  return doc.dump(2) + "\n";
}

std::string summary_to_json(const OutcomeSummary& s) {
  nlohmann::ordered_json doc;
  doc["kind"] = to_string(s.kind);
  doc["collision_pair"] = pair_json(s.collision_pair);
  doc["collision_time"] = opt_json(s.collision_time);
  doc["completion_time"] = opt_json(s.completion_time);
  doc["end_time"] = s.end_time;
  doc["min_distance"] = opt_json(s.min_distance);
  return doc.dump(2) + "\n";
}

std::string summary_line(const OutcomeSummary& s) {
  std::string out(to_string(s.kind));
  if (s.collision_pair) out += "(" + s.collision_pair->first + "," + s.collision_pair->second + ")";
  out += " at t=" + format_number(s.end_time);
  if (s.min_distance) out += ", min distance " + format_number(std::round(*s.min_distance * 1000.0) / 1000.0) + " m";
  return out;
}

}  // namespace scengraph
