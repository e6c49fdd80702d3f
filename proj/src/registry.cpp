#include "scengraph/registry.hpp"

#include <numbers>

#include <nlohmann/json.hpp>

#include "scengraph/error.hpp"

namespace scengraph {

namespace {

using json = nlohmann::json;

const std::set<ActorCategory> kAll{ActorCategory::Pedestrian, ActorCategory::TwoWheeler, ActorCategory::FourWheeler};
const std::set<ActorCategory> kVehicles{ActorCategory::TwoWheeler, ActorCategory::FourWheeler};

ParamSpec num(std::string name, std::string unit, std::optional<double> def, BoundKind bound) {
  return ParamSpec{std::move(name), std::move(unit), ValueType::Number, true, def, bound};
}

ActionSpec action(std::string name, ActionCategory cat, Behavior behavior, std::vector<ParamSpec> params,
                  std::set<ActorCategory> refs = kAll, int complexity = 1) {
  ActionSpec a;
  a.name = std::move(name);
  a.category = cat;
  a.behavior = behavior;
  a.params = std::move(params);
  a.ref_categories = std::move(refs);
  a.complexity = complexity;
  return a;
}

std::optional<BoundKind> bound_from(std::string_view s) {
  if (s == "none") return BoundKind::None;
  if (s == "speed") return BoundKind::Speed;
  if (s == "acceleration") return BoundKind::Acceleration;
  if (s == "ratio") return BoundKind::Ratio;
  if (s == "positive") return BoundKind::Positive;
  if (s == "non_negative") return BoundKind::NonNegative;
  if (s == "angle") return BoundKind::Angle;
  return std::nullopt;
}

std::set<ActorCategory> categories_from(const json& arr, std::string_view what) {
  std::set<ActorCategory> out;
  for (const auto& c : arr) {
    auto cat = actor_category_from(c.get<std::string>());
    if (!cat) fail(ErrorCode::InvalidConfig, std::string(what) + ": unknown actor category " + c.dump());
    out.insert(*cat);
  }
  return out;
}

}  // namespace

const ParamSpec* ActionSpec::param(std::string_view key) const {
  for (const auto& p : params)
    if (p.name == key) return &p;
  return nullptr;
}

Registry Registry::make_builtin() {
  using AC = ActionCategory;
  using B = Behavior;
  using K = BoundKind;
  Registry r;
  constexpr double kQuarterTurn = std::numbers::pi / 2.0;

  r.add_action(action("Accelerate", AC::Longitudinal, B::Accelerate,
                      {num("target_velocity", "m/s", 5.0, K::Speed), num("throttle", "ratio", 0.5, K::Ratio)}));
  r.add_action(action("Decelerate", AC::Longitudinal, B::Decelerate,
                      {num("target_velocity", "m/s", 0.0, K::Speed), num("brake", "ratio", 0.5, K::Ratio)}));
  r.add_action(action("KeepVelocity", AC::Longitudinal, B::KeepVelocity, {num("duration", "s", 1.0, K::Positive)}));
  r.add_action(
      action("DriveDistance", AC::Longitudinal, B::DriveDistance, {num("distance", "m", std::nullopt, K::Positive)}));
  {
    auto follow = action("FollowVehicle", AC::Longitudinal, B::FollowVehicle,
                         {num("gap", "m", 10.0, K::Positive), num("duration", "s", 5.0, K::Positive)}, kVehicles, 2);
    follow.two_actor = true;
    follow.target_categories = kAll;
    r.add_action(std::move(follow));
  }
  r.add_action(action("Stop", AC::Longitudinal, B::Stop, {num("deceleration", "m/s2", 3.0, K::Acceleration)}));
  r.add_action(action("LaneChangeLeft", AC::Lateral, B::LaneChangeLeft,
                      {num("lane_width", "m", 3.5, K::Positive), num("duration", "s", 3.0, K::Positive)}, kVehicles, 2));
  r.add_action(action("LaneChangeRight", AC::Lateral, B::LaneChangeRight,
                      {num("lane_width", "m", 3.5, K::Positive), num("duration", "s", 3.0, K::Positive)}, kVehicles, 2));
  r.add_action(action("TurnLeft", AC::Lateral, B::TurnLeft,
                      {num("radius", "m", 6.0, K::Positive), num("angle", "rad", kQuarterTurn, K::Angle)}, kAll, 2));
  r.add_action(action("TurnRight", AC::Lateral, B::TurnRight,
                      {num("radius", "m", 6.0, K::Positive), num("angle", "rad", kQuarterTurn, K::Angle)}, kAll, 2));

  r.add_action(action("InLocationRadius", AC::Condition, B::InLocationRadius,
                      {num("x", "m", std::nullopt, K::None), num("y", "m", std::nullopt, K::None),
                       num("radius", "m", 2.0, K::Positive)}));
  {
    auto near = action("InVehicleRadius", AC::Condition, B::InVehicleRadius, {num("radius", "m", 10.0, K::Positive)});
    near.two_actor = true;
    near.target_categories = kVehicles;
    r.add_action(std::move(near));
  }
  r.add_action(action("TimeElapsed", AC::Condition, B::TimeElapsed, {num("duration", "s", 1.0, K::NonNegative)}));
  r.add_action(
      action("SpeedReached", AC::Condition, B::SpeedReached, {num("target_velocity", "m/s", 5.0, K::Speed)}));

  // Plausibility bounds double as executor performance limits; extents are
  // the collision boxes.
  r.limits(ActorCategory::Pedestrian) = {4.2, 3.0, 0.5, 0.5};
  r.limits(ActorCategory::TwoWheeler) = {16.7, 4.0, 1.8, 0.6};
  r.limits(ActorCategory::FourWheeler) = {69.4, 9.0, 4.5, 1.9};

  r.add_conflict("Accelerate", "Decelerate");
  r.add_conflict("Accelerate", "Stop");
  r.add_conflict("LaneChangeLeft", "LaneChangeRight");
  r.add_conflict("TurnLeft", "TurnRight");
  return r;
}

const Registry& Registry::builtin() {
  static const Registry instance = make_builtin();
  return instance;
}

const ActionSpec* Registry::find(std::string_view action_type) const {
  auto it = actions_.find(action_type);
  return it == actions_.end() ? nullptr : &it->second;
}

const ActionSpec& Registry::at(std::string_view action_type) const {
  if (const auto* a = find(action_type)) return *a;
  fail(ErrorCode::UnknownAction, "unknown action type '" + std::string(action_type) + "'");
}

bool Registry::conflicting(std::string_view a, std::string_view b) const {
  std::pair<std::string, std::string> key{std::string(std::min(a, b)), std::string(std::max(a, b))};
  return conflicts_.count(key) > 0;
}

void Registry::add_action(ActionSpec spec) {
  if (spec.name.empty()) fail(ErrorCode::InvalidConfig, "action type needs a name");
  auto name = spec.name;
  actions_.insert_or_assign(std::move(name), std::move(spec));
}

void Registry::add_conflict(std::string a, std::string b) {
  if (b < a) std::swap(a, b);
  conflicts_.emplace(std::move(a), std::move(b));
}

void Registry::apply_overrides(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::InvalidConfig, std::string("config: ") + e.what());
  }
  if (!doc.is_object()) fail(ErrorCode::InvalidConfig, "config must be an object");
  try {
    if (doc.contains("categories")) {
      for (const auto& [name, v] : doc["categories"].items()) {
        auto cat = actor_category_from(name);
        if (!cat) fail(ErrorCode::InvalidConfig, "config: unknown actor category " + name);
        auto& lim = limits(*cat);
        lim.max_speed = v.value("max_speed", lim.max_speed);
        lim.max_accel = v.value("max_accel", lim.max_accel);
        lim.length = v.value("length", lim.length);
        lim.width = v.value("width", lim.width);
      }
    }
    if (doc.contains("actions")) {
      for (const auto& a : doc["actions"]) {
        ActionSpec spec;
        spec.name = a.at("name").get<std::string>();
        auto cat = action_category_from(a.at("category").get<std::string>());
        auto beh = behavior_from(a.at("behavior").get<std::string>());
        if (!cat || !beh) fail(ErrorCode::InvalidConfig, "config: bad category/behavior for " + spec.name);
        spec.category = *cat;
        spec.behavior = *beh;
        spec.two_actor = a.value("two_actor", false);
        spec.exportable = a.value("exportable", true);
        spec.complexity = a.value("complexity", 1);
        spec.ref_categories = a.contains("ref_categories") ? categories_from(a["ref_categories"], spec.name) : kAll;
        spec.target_categories =
            a.contains("target_categories") ? categories_from(a["target_categories"], spec.name) : kAll;
        for (const auto& p : a.value("params", json::array())) {
          ParamSpec ps;
          ps.name = p.at("name").get<std::string>();
          ps.unit = p.value("unit", "");
          ps.type = p.value("type", "number") == "text" ? ValueType::Text : ValueType::Number;
          ps.required = p.value("required", true);
          if (p.contains("default") && !p["default"].is_null()) ps.default_value = p["default"].get<double>();
          auto bound = bound_from(p.value("bound", "none"));
          if (!bound) fail(ErrorCode::InvalidConfig, "config: bad bound for " + spec.name + "." + ps.name);
          ps.bound = *bound;
          spec.params.push_back(std::move(ps));
        }
        add_action(std::move(spec));
      }
    }
    if (doc.contains("defaults")) {
      for (const auto& [action_name, params] : doc["defaults"].items()) {
        auto it = actions_.find(action_name);
        if (it == actions_.end()) fail(ErrorCode::InvalidConfig, "config: unknown action " + action_name);
        for (const auto& [key, v] : params.items()) {
          ParamSpec* ps = nullptr;
          for (auto& candidate : it->second.params)
            if (candidate.name == key) ps = &candidate;
          if (!ps) fail(ErrorCode::InvalidConfig, "config: unknown parameter " + action_name + "." + key);
          if (v.is_null())
            ps->default_value.reset();
          else
            ps->default_value = v.get<double>();
        }
      }
    }
    if (doc.contains("conflicts")) {
      for (const auto& pair : doc["conflicts"]) add_conflict(pair.at(0).get<std::string>(), pair.at(1).get<std::string>());
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidConfig, std::string("config: ") + e.what());
  }
}

std::string_view to_string(ActorCategory c) {
  switch (c) {
    case ActorCategory::Pedestrian: return "Pedestrian";
    case ActorCategory::TwoWheeler: return "TwoWheeler";
    case ActorCategory::FourWheeler: return "FourWheeler";
  }
  return "";
}

std::string_view to_string(ActionCategory c) {
  switch (c) {
    case ActionCategory::Longitudinal: return "Longitudinal";
    case ActionCategory::Lateral: return "Lateral";
    case ActionCategory::Composite: return "Composite";
    case ActionCategory::Condition: return "Condition";
  }
  return "";
}

std::optional<ActorCategory> actor_category_from(std::string_view s) {
  for (auto c : {ActorCategory::Pedestrian, ActorCategory::TwoWheeler, ActorCategory::FourWheeler})
    if (to_string(c) == s) return c;
  return std::nullopt;
}

std::optional<ActionCategory> action_category_from(std::string_view s) {
  for (auto c : {ActionCategory::Longitudinal, ActionCategory::Lateral, ActionCategory::Composite,
                 ActionCategory::Condition})
    if (to_string(c) == s) return c;
  return std::nullopt;
}

std::optional<Behavior> behavior_from(std::string_view s) {
  static const std::pair<std::string_view, Behavior> table[] = {
      {"Accelerate", Behavior::Accelerate},
      {"Decelerate", Behavior::Decelerate},
      {"KeepVelocity", Behavior::KeepVelocity},
      {"DriveDistance", Behavior::DriveDistance},
      {"FollowVehicle", Behavior::FollowVehicle},
      {"Stop", Behavior::Stop},
      {"LaneChangeLeft", Behavior::LaneChangeLeft},
      {"LaneChangeRight", Behavior::LaneChangeRight},
      {"TurnLeft", Behavior::TurnLeft},
      {"TurnRight", Behavior::TurnRight},
      {"InLocationRadius", Behavior::InLocationRadius},
      {"InVehicleRadius", Behavior::InVehicleRadius},
      {"TimeElapsed", Behavior::TimeElapsed},
      {"SpeedReached", Behavior::SpeedReached},
  };
  for (const auto& [name, b] : table)
    if (name == s) return b;
  return std::nullopt;
}

}  // namespace scengraph
