#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "scengraph/param.hpp"

namespace scengraph {

enum class ActorCategory { Pedestrian, TwoWheeler, FourWheeler };
enum class ActionCategory { Longitudinal, Lateral, Composite, Condition };

/// Built-in update rule / predicate an action type runs with. Registry data
/// can add new action types, but each must reuse one of these.
enum class Behavior {
  Accelerate,
  Decelerate,
  KeepVelocity,
  DriveDistance,
  FollowVehicle,
  Stop,
  LaneChangeLeft,
  LaneChangeRight,
  TurnLeft,
  TurnRight,
  InLocationRadius,
  InVehicleRadius,
  TimeElapsed,
  SpeedReached,
};

/// How a numeric parameter is bounded. Speed and Acceleration use the
/// per-actor-category table; the rest are category independent.
enum class BoundKind { None, Speed, Acceleration, Ratio, Positive, NonNegative, Angle };

enum class ValueType { Number, Text };

struct ParamSpec {
  std::string name;
  std::string unit;
  ValueType type = ValueType::Number;
  bool required = true;
  std::optional<double> default_value;
  BoundKind bound = BoundKind::None;
};

struct ActionSpec {
  std::string name;
  ActionCategory category = ActionCategory::Longitudinal;
  Behavior behavior = Behavior::KeepVelocity;
  bool two_actor = false;
  std::vector<ParamSpec> params;
  std::set<ActorCategory> ref_categories;
  std::set<ActorCategory> target_categories;
  bool exportable = true;
  /// Opaque editor metadata, never interpreted.
  int complexity = 1;

  const ParamSpec* param(std::string_view key) const;
};

struct CategoryLimits {
  double max_speed = 0.0;   // m/s
  double max_accel = 0.0;   // m/s^2
  double length = 0.0;      // m, bounding box along world x
  double width = 0.0;       // m, bounding box along world y
};

/// Action types, parameter schemas, per-category bounds and conflict pairs.
/// Everything validation, export and execution needs to know about an action
/// lives here as data.
class Registry {
public:
  static const Registry& builtin();
  static Registry make_builtin();

  const ActionSpec* find(std::string_view action_type) const;
  const ActionSpec& at(std::string_view action_type) const;  // throws UnknownAction
  const std::map<std::string, ActionSpec, std::less<>>& actions() const { return actions_; }

  const CategoryLimits& limits(ActorCategory c) const { return limits_[static_cast<int>(c)]; }
  CategoryLimits& limits(ActorCategory c) { return limits_[static_cast<int>(c)]; }

  bool conflicting(std::string_view a, std::string_view b) const;
  const std::set<std::pair<std::string, std::string>>& conflicts() const { return conflicts_; }

  void add_action(ActionSpec spec);
  void add_conflict(std::string a, std::string b);

  /// Overlay a JSON config document: category limits, parameter defaults,
  /// extra action types and conflict pairs. See README for the schema.
  void apply_overrides(std::string_view json_text);

private:
  std::map<std::string, ActionSpec, std::less<>> actions_;
  std::array<CategoryLimits, 3> limits_{};
  std::set<std::pair<std::string, std::string>> conflicts_;
};

std::string_view to_string(ActorCategory c);
std::string_view to_string(ActionCategory c);
std::optional<ActorCategory> actor_category_from(std::string_view s);
std::optional<ActionCategory> action_category_from(std::string_view s);
std::optional<Behavior> behavior_from(std::string_view s);

}  // namespace scengraph
