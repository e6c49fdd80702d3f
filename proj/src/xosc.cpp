#include "scengraph/xosc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <nlohmann/json.hpp>

#include "graph_algo.hpp"
#include "scengraph/concretizer.hpp"
#include "scengraph/error.hpp"
#include "scengraph/modules.hpp"
#include "scengraph/validation.hpp"
#include "util.hpp"

namespace scengraph {

namespace {

// Minimal deterministic XML tree --------------------------------------------

struct Xml {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attrs;
  std::vector<Xml> children;

  Xml(std::string n, std::vector<std::pair<std::string, std::string>> a = {}, std::vector<Xml> c = {})
      : name(std::move(n)), attrs(std::move(a)), children(std::move(c)) {}

  Xml& add(Xml child) {
    children.push_back(std::move(child));
    return children.back();
  }
};

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

void render(const Xml& x, int depth, std::string& out) {
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
  out += "<" + x.name;
  for (const auto& [k, v] : x.attrs) out += " " + k + "=\"" + escape(v) + "\"";
  if (x.children.empty()) {
    out += "/>\n";
    return;
  }
  out += ">\n";
  for (const auto& c : x.children) render(c, depth + 1, out);
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
  out += "</" + x.name + ">\n";
}

std::string num(double v) { return format_number(v); }

// Trigger algebra: disjunction of conjunctions of leaf conditions -----------

using Conj = std::vector<Xml>;
using Dnf = std::vector<Conj>;

Dnf dnf_and(const Dnf& a, const Dnf& b) {
  Dnf out;
  for (const auto& x : a)
    for (const auto& y : b) {
      Conj c = x;
      for (const auto& leaf : y) {
        const auto& name = leaf.attrs.front().second;
        if (std::none_of(c.begin(), c.end(), [&](const Xml& e) { return e.attrs.front().second == name; }))
          c.push_back(leaf);
      }
      out.push_back(std::move(c));
    }
  return out;
}

Xml condition(const std::string& name, Xml body) {
  return Xml("Condition", {{"name", name}, {"delay", "0"}, {"conditionEdge", "none"}}, {std::move(body)});
}

Xml by_value(Xml inner) { return Xml("ByValueCondition", {}, {std::move(inner)}); }

Xml by_entity(const std::string& entity, Xml inner) {
  return Xml("ByEntityCondition", {},
             {Xml("TriggeringEntities", {{"triggeringEntitiesRule", "any"}}, {Xml("EntityRef", {{"entityRef", entity}})}),
              Xml("EntityCondition", {}, {std::move(inner)})});
}

Xml sim_time(const std::string& name, const std::string& value) {
  return condition(name, by_value(Xml("SimulationTimeCondition", {{"value", value}, {"rule", "greaterThan"}})));
}

Xml trigger(const char* tag, const Dnf& d) {
  Xml t(tag);
  for (const auto& conj : d) {
    Xml group("ConditionGroup");
    for (const auto& leaf : conj) group.add(leaf);
    t.add(std::move(group));
  }
  return t;
}

class Exporter {
public:
  Exporter(const ScenarioGraph& g, const ExportOptions& opt, const Registry& reg)
      : g_(g), opt_(opt), reg_(reg), adj_(g.nodes, g.edges) {
    for (const auto& p : opt_.parameterize) {
      const auto dot = p.rfind('.');
      const auto* node = dot == std::string::npos ? nullptr : g_.find_node(p.substr(0, dot));
      if (!node || !node->is_action() || !node->action().params.count(p.substr(dot + 1)))
        fail(ErrorCode::InvalidArgument, "cannot parameterize '" + p + "': no such node parameter");
      params_[{node->id, p.substr(dot + 1)}] = param_name(node->id, p.substr(dot + 1));
    }
    for (std::size_t i = 0; i < g_.nodes.size(); ++i) {
      if (g_.nodes[i].kind == NodeKind::EndNode) end_ = i;
      if (!g_.nodes[i].is_action()) continue;
      const auto& spec = reg_.at(g_.nodes[i].action().action_type);
      if (!spec.exportable)
        fail(ErrorCode::UnsupportedAction,
             "'" + g_.nodes[i].id + "' (" + spec.name + ") has no OpenSCENARIO counterpart");
    }
    memo_.resize(g_.nodes.size());
  }

  std::string build() {
    Xml root("OpenSCENARIO");
    root.add(Xml("FileHeader", {{"revMajor", "1"},
                                {"revMinor", "0"},
                                {"date", opt_.date},
                                {"description", g_.name},
                                {"author", opt_.author}}));
    root.add(parameter_declarations());
    root.add(catalog_locations());
    root.add(Xml("RoadNetwork", {}, {Xml("LogicFile", {{"filepath", g_.map_name}}), Xml("SceneGraphFile", {{"filepath", ""}})}));
    root.add(entities());
    root.add(storyboard());
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    render(root, 0, out);
    return out;
  }

private:
  static std::string param_name(const std::string& node, const std::string& key) {
    std::string s = node + "_" + key;
    for (auto& c : s)
      if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
    return s;
  }

  double value(std::size_t node, const std::string& key) const {
    const auto& params = g_.nodes[node].action().params;
    auto it = params.find(key);
    if (it != params.end() && it->second.number()) return *it->second.number();
    const auto* ps = reg_.at(g_.nodes[node].action().action_type).param(key);
    if (ps && ps->default_value) return *ps->default_value;
    fail(ErrorCode::InvalidScenario, "'" + g_.nodes[node].id + "' has no numeric " + key);
  }

  /// Attribute text for a node parameter: a literal or a $reference.
  std::string attr(std::size_t node, const std::string& key) const {
    auto it = params_.find({g_.nodes[node].id, key});
    if (it != params_.end()) return "$" + it->second;
    return num(value(node, key));
  }

  Xml parameter_declarations() const {
    Xml decls("ParameterDeclarations");
    for (const auto& [ref, name] : params_) {
      const auto i = *adj_.find(ref.first);
      decls.add(Xml("ParameterDeclaration", {{"name", name}, {"parameterType", "double"}, {"value", num(value(i, ref.second))}}));
    }
    return decls;
  }

  Xml catalog_locations() const {
    static constexpr std::pair<const char*, const char*> kKinds[] = {
        {"vehicle", "VehicleCatalog"},       {"controller", "ControllerCatalog"}, {"pedestrian", "PedestrianCatalog"},
        {"miscObject", "MiscObjectCatalog"}, {"environment", "EnvironmentCatalog"}, {"maneuver", "ManeuverCatalog"},
        {"trajectory", "TrajectoryCatalog"}, {"route", "RouteCatalog"}};
    Xml locs("CatalogLocations");
    for (const auto& [kind, tag] : kKinds) {
      Xml entry(tag);
      for (const auto& [k, path] : opt_.catalog_locations)
        if (k == kind) entry.add(Xml("Directory", {{"path", path}}));
      if (!entry.children.empty()) locs.add(std::move(entry));
    }
    return locs;
  }

  static Xml bounding_box(const CategoryLimits& lim, double height) {
    return Xml("BoundingBox", {},
               {Xml("Center", {{"x", "0"}, {"y", "0"}, {"z", num(height / 2)}}),
                Xml("Dimensions", {{"width", num(lim.width)}, {"length", num(lim.length)}, {"height", num(height)}})});
  }

  Xml entities() const {
    Xml ents("Entities");
    for (const auto& a : g_.actors) {
      const auto& lim = reg_.limits(a.category);
      const std::string model = a.model.empty() ? std::string(to_string(a.category)) : a.model;
      Xml obj("ScenarioObject", {{"name", a.id}});
      if (a.category == ActorCategory::Pedestrian) {
        obj.add(Xml("Pedestrian",
                    {{"model", model}, {"mass", "80"}, {"name", model}, {"pedestrianCategory", "pedestrian"}},
                    {Xml("ParameterDeclarations"), bounding_box(lim, 1.8), Xml("Properties")}));
      } else {
        const bool car = a.category == ActorCategory::FourWheeler;
        const double wheel = car ? 0.7 : 0.6;
        const double track = car ? 1.6 : 0.0;
        auto axle = [&](const char* tag, double x, double steer) {
          return Xml(tag, {{"maxSteering", num(steer)},
                           {"wheelDiameter", num(wheel)},
                           {"trackWidth", num(track)},
                           {"positionX", num(x)},
                           {"positionZ", num(wheel / 2)}});
        };
        obj.add(Xml("Vehicle", {{"name", model}, {"vehicleCategory", car ? "car" : "bicycle"}},
                    {Xml("ParameterDeclarations"),
                     Xml("Performance", {{"maxSpeed", num(lim.max_speed)},
                                         {"maxAcceleration", num(lim.max_accel)},
                                         {"maxDeceleration", num(lim.max_accel)}}),
                     bounding_box(lim, car ? 1.5 : 1.7),
                     Xml("Axles", {}, {axle("FrontAxle", car ? 2.8 : 1.1, 0.5), axle("RearAxle", 0, 0)}),
                     Xml("Properties")}));
      }
      ents.add(std::move(obj));
    }
    return ents;
  }

  std::optional<Xml> environment_action() const {
    if (g_.environment.empty()) return std::nullopt;
    auto text = [&](const char* key, std::string fallback) {
      auto it = g_.environment.find(key);
      if (it == g_.environment.end() || !it->second.is_scalar()) return fallback;
      const auto& lit = it->second.as_scalar().value;
      return std::holds_alternative<std::string>(lit) ? std::get<std::string>(lit) : num(std::get<double>(lit));
    };
    auto number = [&](const char* key, double fallback) {
      auto it = g_.environment.find(key);
      return it != g_.environment.end() && it->second.number() ? *it->second.number() : fallback;
    };
    const double hours = number("time_of_day", 12.0);
    const int secs = static_cast<int>(std::lround(std::clamp(hours, 0.0, 23.9997) * 3600.0));
    char clock[32];
    std::snprintf(clock, sizeof clock, "1970-01-01T%02d:%02d:%02d", secs / 3600, secs / 60 % 60, secs % 60);
    const double rain = number("precipitation", 0.0);
    Xml env("Environment", {{"name", "environment"}},
            {Xml("TimeOfDay", {{"animation", "false"}, {"dateTime", clock}}),
             Xml("Weather", {{"cloudState", text("cloud_state", "free")}},
                 {Xml("Sun", {{"intensity", "10000"}, {"azimuth", "0"}, {"elevation", "1.2"}}),
                  Xml("Fog", {{"visualRange", "100000"}}),
                  Xml("Precipitation", {{"precipitationType", rain > 0 ? "rain" : "dry"}, {"intensity", num(rain)}})}),
             Xml("RoadCondition", {{"frictionScaleFactor", num(number("friction", 1.0))}})});
    return Xml("GlobalAction", {}, {Xml("EnvironmentAction", {}, {std::move(env)})});
  }

  static Xml speed_action(Xml dynamics, Xml target) {
    return Xml("LongitudinalAction", {},
               {Xml("SpeedAction", {}, {std::move(dynamics), Xml("SpeedActionTarget", {}, {std::move(target)})})});
  }

  static Xml absolute_speed(const std::string& v) { return Xml("AbsoluteTargetSpeed", {{"value", v}}); }

  Xml init() const {
    Xml actions("Actions");
    if (auto env = environment_action()) actions.add(std::move(*env));
    for (const auto& a : g_.actors) {
      Xml priv("Private", {{"entityRef", a.id}});
      priv.add(Xml("PrivateAction", {},
                   {Xml("TeleportAction", {},
                        {Xml("Position", {},
                             {Xml("WorldPosition", {{"x", num(*a.start_pose.x.number())},
                                                    {"y", num(*a.start_pose.y.number())},
                                                    {"z", "0"},
                                                    {"h", num(*a.start_pose.heading.number())}})})})}));
      priv.add(Xml("PrivateAction", {},
                   {speed_action(Xml("SpeedActionDynamics", {{"dynamicsShape", "step"}, {"value", "0"}, {"dynamicsDimension", "time"}}),
                                 absolute_speed(num(*a.start_speed.number())))}));
      actions.add(std::move(priv));
    }
    return Xml("Init", {}, {std::move(actions)});
  }

  Xml private_action(std::size_t i) const {
    const auto& node = g_.nodes[i];
    const auto& act = node.action();
    const auto& spec = reg_.at(act.action_type);
    const auto& lim = reg_.limits(g_.find_actor(act.reference_actor)->category);
    auto linear = [&](double rate, std::string target) {
      return speed_action(
          Xml("SpeedActionDynamics", {{"dynamicsShape", "linear"}, {"value", num(rate)}, {"dynamicsDimension", "rate"}}),
          absolute_speed(std::move(target)));
    };
    auto hold = [&](const char* dimension, std::string amount) {
      return speed_action(
          Xml("SpeedActionDynamics", {{"dynamicsShape", "step"}, {"value", std::move(amount)}, {"dynamicsDimension", dimension}}),
          Xml("RelativeTargetSpeed", {{"entityRef", act.reference_actor},
                                      {"value", "0"},
                                      {"speedTargetValueType", "delta"},
                                      {"continuous", "false"}}));
    };
    Xml body("PrivateAction");
    switch (spec.behavior) {
      case Behavior::Accelerate:
        body.add(linear(value(i, "throttle") * lim.max_accel, attr(i, "target_velocity")));
        break;
      case Behavior::Decelerate:
        body.add(linear(value(i, "brake") * lim.max_accel, attr(i, "target_velocity")));
        break;
      case Behavior::Stop: body.add(linear(value(i, "deceleration"), "0")); break;
      case Behavior::KeepVelocity: body.add(hold("time", attr(i, "duration"))); break;
      case Behavior::DriveDistance: body.add(hold("distance", attr(i, "distance"))); break;
      case Behavior::FollowVehicle:
        body.add(Xml("LongitudinalAction", {},
                     {Xml("LongitudinalDistanceAction",
                          {{"entityRef", *act.target_actor}, {"distance", attr(i, "gap")}, {"freespace", "false"}, {"continuous", "true"}},
                          {Xml("DynamicConstraints", {{"maxAcceleration", num(lim.max_accel)},
                                                      {"maxDeceleration", num(lim.max_accel)},
                                                      {"maxSpeed", num(lim.max_speed)}})})}));
        break;
      case Behavior::LaneChangeLeft:
      case Behavior::LaneChangeRight:
        body.add(Xml("LateralAction", {},
                     {Xml("LaneChangeAction", {},
                          {Xml("LaneChangeActionDynamics",
                               {{"dynamicsShape", "sinusoidal"}, {"value", attr(i, "duration")}, {"dynamicsDimension", "time"}}),
                           Xml("LaneChangeTarget", {},
                               {Xml("RelativeTargetLane",
                                    {{"entityRef", act.reference_actor},
                                     {"value", spec.behavior == Behavior::LaneChangeLeft ? "1" : "-1"}})})})}));
        break;
      case Behavior::TurnLeft:
      case Behavior::TurnRight: {
        const double r = value(i, "radius");
        const double angle = value(i, "angle");
        const double sign = spec.behavior == Behavior::TurnLeft ? 1.0 : -1.0;
        auto waypoint = [&](double dx, double dy, double h) {
          return Xml("Waypoint", {{"routeStrategy", "shortest"}},
                     {Xml("Position", {},
                          {Xml("RelativeObjectPosition", {{"entityRef", act.reference_actor}, {"dx", num(dx)}, {"dy", num(dy)}},
                               {Xml("Orientation", {{"type", "relative"}, {"h", num(h)}})})})});
        };
        body.add(Xml("RoutingAction", {},
                     {Xml("AssignRouteAction", {},
                          {Xml("Route", {{"name", node.id + "_route"}, {"closed", "false"}},
                               {waypoint(0, 0, 0),
                                waypoint(r * std::sin(angle), sign * r * (1 - std::cos(angle)), sign * angle)})})}));
        break;
      }
      default:
        fail(ErrorCode::UnsupportedAction, "'" + node.id + "' (" + spec.name + ") is not a maneuver");
    }
    return body;
  }

  Xml predicate(std::size_t i) const {
    const auto& node = g_.nodes[i];
    const auto& act = node.action();
    switch (reg_.at(act.action_type).behavior) {
      case Behavior::InLocationRadius:
        return condition(node.id, by_entity(act.reference_actor,
                                            Xml("ReachPositionCondition", {{"tolerance", attr(i, "radius")}},
                                                {Xml("Position", {}, {Xml("WorldPosition", {{"x", attr(i, "x")}, {"y", attr(i, "y")}, {"z", "0"}, {"h", "0"}})})})));
      case Behavior::InVehicleRadius:
        return condition(node.id, by_entity(act.reference_actor,
                                            Xml("RelativeDistanceCondition", {{"entityRef", *act.target_actor},
                                                                              {"relativeDistanceType", "cartesianDistance"},
                                                                              {"value", attr(i, "radius")},
                                                                              {"freespace", "false"},
                                                                              {"rule", "lessThan"}})));
      case Behavior::TimeElapsed: return sim_time(node.id, attr(i, "duration"));
      case Behavior::SpeedReached:
        return condition(node.id, by_entity(act.reference_actor,
                                            Xml("SpeedCondition", {{"value", attr(i, "target_velocity")}, {"rule", "greaterThan"}})));
      default:
        fail(ErrorCode::UnsupportedAction, "'" + node.id + "' (" + act.action_type + ") is not a condition");
    }
  }

  /// Trigger that holds once node i has finished.
  Dnf done(std::size_t i) {
    const auto& node = g_.nodes[i];
    switch (node.kind) {
      case NodeKind::RootNode: return Dnf{{sim_time("start", "0")}};
      case NodeKind::Maneuver:
        return Dnf{{condition("after_" + node.id, by_value(Xml("StoryboardElementStateCondition",
                                                               {{"storyboardElementType", "event"},
                                                                {"storyboardElementRef", node.id},
                                                                {"state", "completeState"}})))}};
      case NodeKind::Condition: return dnf_and(activation(i), Dnf{{predicate(i)}});
      default: return activation(i);
    }
  }

  /// Trigger that holds once node i may start.
  Dnf activation(std::size_t i) {
    if (memo_[i]) return *memo_[i];
    const auto& node = g_.nodes[i];
    const bool any = node.kind == NodeKind::Join && node.join().policy() == JoinPolicy::OneFinished;
    Dnf d = any ? Dnf{} : Dnf{{}};
    for (auto p : adj_.pred[i]) {
      auto dp = done(p);
      if (any)
        d.insert(d.end(), dp.begin(), dp.end());
      else
        d = dnf_and(d, dp);
    }
    memo_[i] = d;
    return d;
  }

  /// Nodes that reach the end node only through `join`.
  std::vector<bool> exclusive_to(std::size_t join) const {
    std::vector<bool> bypass(g_.nodes.size(), false);
    std::vector<std::size_t> stack{end_};
    while (!stack.empty()) {
      auto n = stack.back();
      stack.pop_back();
      if (bypass[n] || n == join) continue;
      bypass[n] = true;
      for (auto p : adj_.pred[n]) stack.push_back(p);
    }
    auto feeds = adj_.reach({join}, false);
    for (std::size_t i = 0; i < feeds.size(); ++i) feeds[i] = feeds[i] && i != join && !bypass[i];
    return feeds;
  }

  Xml storyboard() {
    const auto order = *adj_.topo_order();
    std::vector<std::size_t> rank(g_.nodes.size());
    for (std::size_t k = 0; k < order.size(); ++k) rank[order[k]] = k;

    // Act assignment: maneuvers exclusive to a OneFinished join go to that
    // join's act (the nearest such join wins), everything else to "main".
    std::vector<std::string> act_of(g_.nodes.size(), "main");
    std::vector<std::size_t> join_acts;
    std::vector<std::size_t> best(g_.nodes.size(), SIZE_MAX);
    for (auto j : order) {
      const auto& n = g_.nodes[j];
      if (n.kind != NodeKind::Join || n.join().policy() != JoinPolicy::OneFinished) continue;
      const auto excl = exclusive_to(j);
      bool used = false;
      for (std::size_t i = 0; i < excl.size(); ++i) {
        if (!excl[i] || g_.nodes[i].kind != NodeKind::Maneuver) continue;
        if (best[i] == SIZE_MAX || rank[j] < rank[best[i]]) best[i] = j;
        used = true;
      }
      if (used) join_acts.push_back(j);
    }
    for (std::size_t i = 0; i < best.size(); ++i)
      if (best[i] != SIZE_MAX) act_of[i] = g_.nodes[best[i]].id + "_branches";

    const auto chains = maneuver_chains(order, act_of);

    Xml story("Story", {{"name", g_.name.empty() ? "story" : g_.name}});
    auto make_act = [&](const std::string& name, std::optional<std::size_t> join) {
      Xml act("Act", {{"name", name}});
      for (const auto& chain : chains) {
        if (act_of[chain.front()] != name) continue;
        const auto& actor = g_.nodes[chain.front()].action().reference_actor;
        const auto group = actor + "_mg" + std::to_string(++counters_[actor]);
        Xml mg("ManeuverGroup", {{"maximumExecutionCount", "1"}, {"name", group}},
               {Xml("Actors", {{"selectTriggeringEntities", "false"}}, {Xml("EntityRef", {{"entityRef", actor}})})});
        Xml maneuver("Maneuver", {{"name", group + "_maneuver"}});
        for (auto i : chain) {
          maneuver.add(Xml("Event", {{"name", g_.nodes[i].id}, {"priority", "parallel"}, {"maximumExecutionCount", "1"}},
                           {Xml("Action", {{"name", g_.nodes[i].id + "_action"}}, {private_action(i)}),
                            trigger("StartTrigger", activation(i))}));
        }
        mg.add(std::move(maneuver));
        act.add(std::move(mg));
      }
      if (act.children.empty()) return;
      act.add(trigger("StartTrigger", Dnf{{sim_time(name + "_start", "0")}}));
      if (join) act.add(trigger("StopTrigger", activation(*join)));
      story.add(std::move(act));
    };
    make_act("main", std::nullopt);
    for (auto j : join_acts) make_act(g_.nodes[j].id + "_branches", j);

    return Xml("Storyboard", {}, {init(), std::move(story), trigger("StopTrigger", activation(end_))});
  }

  /// Maximal per-actor sequences of maneuvers that follow each other with no
  /// other maneuver of the same actor in between.
  std::vector<std::vector<std::size_t>> maneuver_chains(const std::vector<std::size_t>& order,
                                                        const std::vector<std::string>& act_of) const {
    const auto n = g_.nodes.size();
    auto same_actor = [&](std::size_t a, std::size_t b) {
      return g_.nodes[b].kind == NodeKind::Maneuver &&
             g_.nodes[b].action().reference_actor == g_.nodes[a].action().reference_actor;
    };
    auto nearest = [&](std::size_t m, bool forward) {
      std::set<std::size_t> found;
      std::vector<bool> seen(n, false);
      std::vector<std::size_t> stack(forward ? adj_.succ[m] : adj_.pred[m]);
      while (!stack.empty()) {
        auto v = stack.back();
        stack.pop_back();
        if (seen[v]) continue;
        seen[v] = true;
        if (same_actor(m, v)) {
          found.insert(v);
          continue;
        }
        for (auto w : forward ? adj_.succ[v] : adj_.pred[v]) stack.push_back(w);
      }
      return found;
    };
    std::vector<std::optional<std::size_t>> next(n), prev(n);
    for (std::size_t m = 0; m < n; ++m) {
      if (g_.nodes[m].kind != NodeKind::Maneuver) continue;
      auto s = nearest(m, true);
      if (s.size() != 1) continue;
      auto m2 = *s.begin();
      auto p = nearest(m2, false);
      if (p.size() == 1 && *p.begin() == m && act_of[m] == act_of[m2]) {
        next[m] = m2;
        prev[m2] = m;
      }
    }
    std::vector<std::vector<std::size_t>> chains;
    for (auto m : order) {
      if (g_.nodes[m].kind != NodeKind::Maneuver || prev[m]) continue;
      std::vector<std::size_t> chain{m};
      while (next[chain.back()]) chain.push_back(*next[chain.back()]);
      chains.push_back(std::move(chain));
    }
    return chains;
  }

  const ScenarioGraph& g_;
  const ExportOptions& opt_;
  const Registry& reg_;
  Adjacency adj_;
  std::size_t end_ = 0;
  std::map<std::pair<std::string, std::string>, std::string> params_;
  std::vector<std::optional<Dnf>> memo_;
  std::map<std::string, int> counters_;
};

// Structure check ----------------------------------------------------------

using boost::property_tree::ptree;

std::string attribute(const ptree& node, const char* key) {
  return node.get<std::string>(std::string("<xmlattr>.") + key, "");
}

void walk(const std::string& tag, const ptree& node, const std::function<void(const std::string&, const ptree&)>& f) {
  f(tag, node);
  for (const auto& [child_tag, child] : node)
    if (child_tag != "<xmlattr>" && child_tag != "<xmlcomment>") walk(child_tag, child, f);
}

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_catalog_locations(const std::vector<std::string>& specs) {
  static const std::set<std::string> kKinds{"vehicle",     "controller", "pedestrian", "miscObject",
                                            "environment", "maneuver",   "trajectory", "route"};
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& s : specs) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      out.emplace_back("maneuver", s);
      continue;
    }
    auto kind = s.substr(0, eq);
    if (!kKinds.count(kind)) fail(ErrorCode::InvalidArgument, "unknown catalog kind '" + kind + "'");
    if (eq + 1 == s.size()) fail(ErrorCode::InvalidArgument, "empty catalog path for '" + kind + "'");
    out.emplace_back(kind, s.substr(eq + 1));
  }
  return out;
}

std::string export_xosc(const ScenarioGraph& input, const ExportOptions& options, const Registry& reg) {
  if (classify_level(input, reg) != AbstractionLevel::Concrete)
    fail(ErrorCode::LevelError, "functional and logical scenarios cannot be exported; concretize first");
  const auto report = validate(input, reg);
  if (!report.is_valid) {
    std::string ids;
    for (const auto& f : report.findings)
      if (f.severity == Severity::Error) ids += (ids.empty() ? "" : "; ") + f.rule_id + " " + f.message;
    fail(ErrorCode::InvalidScenario, "scenario has validation errors: " + ids);
  }
  const ScenarioGraph g = flatten(input);
  return Exporter(g, options, reg).build();
}

XoscReport verify_structure(std::string_view xml) {
  XoscReport r;
  auto issue = [&](std::string msg) {
    r.ok = false;
    r.issues.push_back(std::move(msg));
  };
  ptree doc;
  try {
    std::istringstream in{std::string(xml)};
    boost::property_tree::read_xml(in, doc);
  } catch (const boost::property_tree::xml_parser_error& e) {
    issue(std::string("not well-formed: ") + e.message() + " at line " + std::to_string(e.line()));
    return r;
  }
  std::size_t roots = 0;
  const ptree* root = nullptr;
  for (const auto& [tag, child] : doc) {
    if (tag == "<xmlcomment>") continue;
    ++roots;
    if (tag == "OpenSCENARIO") root = &child;
  }
  if (!root || roots != 1) {
    issue("document element must be a single OpenSCENARIO");
    return r;
  }
  if (root->count("FileHeader") != 1) issue("expected exactly one FileHeader");
  if (root->count("Storyboard") != 1) issue("expected exactly one Storyboard");
  if (root->count("Entities") != 1) issue("expected exactly one Entities");
  if (auto sb = root->get_child_optional("Storyboard")) {
    if (!sb->count("Init")) issue("Storyboard has no Init");
    if (!sb->count("StopTrigger")) issue("Storyboard has no StopTrigger");
  }

  std::set<std::string> entities, elements;
  std::vector<std::string> entity_refs, element_refs;
  walk("OpenSCENARIO", *root, [&](const std::string& tag, const ptree& node) {
    if (tag == "ScenarioObject") {
      ++r.entity_count;
      if (!entities.insert(attribute(node, "name")).second) issue("duplicate entity '" + attribute(node, "name") + "'");
    }
    if (tag == "Event") ++r.event_count;
    if (tag == "ManeuverGroup") ++r.maneuver_group_count;
    if (tag == "Condition") r.condition_names.push_back(attribute(node, "name"));
    if (tag == "Story" || tag == "Act" || tag == "ManeuverGroup" || tag == "Maneuver" || tag == "Event" ||
        tag == "Action")
      elements.insert(attribute(node, "name"));
    if (auto ref = node.get_optional<std::string>("<xmlattr>.entityRef")) entity_refs.push_back(*ref);
    if (auto ref = node.get_optional<std::string>("<xmlattr>.storyboardElementRef")) element_refs.push_back(*ref);
  });
  for (const auto& ref : entity_refs)
    if (!entities.count(ref)) issue("entityRef '" + ref + "' does not name a declared entity");
  for (const auto& ref : element_refs)
    if (!elements.count(ref)) issue("storyboardElementRef '" + ref + "' does not name a storyboard element");
  return r;
}

std::string xosc_report_to_json(const XoscReport& r) {
  nlohmann::ordered_json doc;
  doc["ok"] = r.ok;
  doc["issues"] = r.issues;
  doc["entity_count"] = r.entity_count;
  doc["event_count"] = r.event_count;
  doc["maneuver_group_count"] = r.maneuver_group_count;
  doc["condition_names"] = r.condition_names;
  return doc.dump(2) + "\n";
}

}  // namespace scengraph
