#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>

#include "scengraph/error.hpp"
#include "scengraph/executor.hpp"
#include "testing.hpp"

using namespace scengraph;
using testing::make_actor;

namespace {

constexpr double kDt = 0.05;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidArgument;
}

/// root -> steps[0] -> steps[1] -> ... -> end, all performed by `actor`.
ScenarioGraph chain(std::vector<Actor> actors, const std::string& actor,
                    std::vector<std::pair<std::string, std::map<std::string, double>>> steps) {
  auto g = new_graph("chain", "Town01", AbstractionLevel::Concrete);
  for (auto& a : actors) add_actor(g, std::move(a));
  NodeId prev = "root";
  int k = 0;
  for (const auto& [type, params] : steps) {
    std::map<std::string, ParamValue> values;
    const auto& spec = Registry::builtin().at(type);
    for (const auto& [key, v] : params) values[key] = ParamValue::scalar(v, spec.param(key)->unit);
    const bool cond = spec.category == ActionCategory::Condition;
    const auto id = add_node(g, cond ? NodeKind::Condition : NodeKind::Maneuver,
                             make_action(type, actor, std::nullopt, values), Registry::builtin(),
                             "s" + std::to_string(k++));
    connect(g, prev, id);
    prev = id;
  }
  connect(g, prev, "end");
  return g;
}

const ActorState& final_state(const Trace& t, const std::string& id) {
  for (const auto& a : t.states.back().actors)
    if (a.id == id) return a;
  FAIL("no such actor");
  return t.states.back().actors.front();
}

std::optional<double> event_time(const Trace& t, const std::string& node, NodeState s) {
  for (const auto& e : t.events)
    if (e.node == node && e.state == s) return e.time;
  return std::nullopt;
}

/// First grid time t_k = k*dt with t_k >= t (up to rounding).
double tick_ceil(double t) { return std::ceil(t / kDt - 1e-9) * kDt; }

}  // namespace

TEST_CASE("constant speed drive completes when the distance is covered") {
  for (double v : {4.0, 5.0, 7.3}) {
    CAPTURE(v);
    const double d = 10.0;
    const auto trace = run(chain({make_actor("car", ActorCategory::FourWheeler, 0, 0, 0, v, true)}, "car",
                                 {{"DriveDistance", {{"distance", d}}}}));
    REQUIRE(trace.outcome.kind == OutcomeKind::Completed);
    CHECK(trace.outcome.time == doctest::Approx(tick_ceil(d / v)).epsilon(1e-9));
    const auto& car = final_state(trace, "car");
    CHECK(car.x == doctest::Approx(v * trace.outcome.time).epsilon(1e-9));
    CHECK(car.y == doctest::Approx(0.0));
  }
}

TEST_CASE("accelerate follows the integration oracle") {
  const double target = 10.0, throttle = 0.5;
  const double a = throttle * Registry::builtin().limits(ActorCategory::FourWheeler).max_accel;
  const auto trace = run(chain({make_actor("car", ActorCategory::FourWheeler, 0, 0, 0, 0, true)}, "car",
                               {{"Accelerate", {{"target_velocity", target}, {"throttle", throttle}}}}));
  REQUIRE(trace.outcome.kind == OutcomeKind::Completed);
  // Analytic time to reach the target, on the tick grid.
  CHECK(trace.outcome.time == doctest::Approx(tick_ceil(target / a)));

  // Semi-implicit Euler: speed first, then position with the new speed.
  double v = 0, x = 0;
  for (std::size_t k = 1; k < trace.states.size(); ++k) {
    v = std::min(v + a * kDt, target);
    x += v * kDt;
    const auto& s = trace.states[k].actors[0];
    CAPTURE(k);
    CHECK(s.speed == doctest::Approx(v).epsilon(1e-9));
    CHECK(s.x == doctest::Approx(x).epsilon(1e-9));
  }
  // Continuous kinematics bound the discrete position within v*dt.
  const double t = trace.outcome.time, t_star = target / a;
  const double exact = 0.5 * a * t_star * t_star + target * (t - t_star);
  CHECK(std::abs(final_state(trace, "car").x - exact) <= target * kDt);
}

TEST_CASE("stop brakes to standstill") {
  const double v0 = 10.0, decel = 5.0;
  const auto trace = run(chain({make_actor("car", ActorCategory::FourWheeler, 0, 0, 0, v0, true)}, "car",
                               {{"Stop", {{"deceleration", decel}}}}));
  REQUIRE(trace.outcome.kind == OutcomeKind::Completed);
  CHECK(trace.outcome.time == doctest::Approx(v0 / decel));
  CHECK(final_state(trace, "car").speed == 0.0);
  CHECK(final_state(trace, "car").x == doctest::Approx(v0 * v0 / (2 * decel)).epsilon(0.05));
}

TEST_CASE("turn right follows a circular arc") {
  const double r = 10.0, v = 5.0;
  const auto trace = run(chain({make_actor("car", ActorCategory::FourWheeler, 0, 0, 0, v, true)}, "car",
                               {{"TurnRight", {{"radius", r}, {"angle", std::numbers::pi / 2}}}}));
  REQUIRE(trace.outcome.kind == OutcomeKind::Completed);
  const double arc = r * std::numbers::pi / 2;
  CHECK(trace.outcome.time == doctest::Approx(tick_ceil(arc / v)));
  // Every stored position before completion lies on the circle centred at (0, -r).
  for (const auto& w : trace.states) {
    if (w.time >= trace.outcome.time - 1e-9) break;
    CHECK(std::hypot(w.actors[0].x, w.actors[0].y + r) == doctest::Approx(r).epsilon(1e-6));
  }
  // Arc end (r, -r), then the leftover of the last tick straight along -y.
  const double leftover = v * trace.outcome.time - arc;
  const auto& car = final_state(trace, "car");
  CHECK(car.x == doctest::Approx(r).epsilon(1e-6));
  CHECK(car.y == doctest::Approx(-r - leftover).epsilon(1e-6));
  CHECK(car.heading == doctest::Approx(-std::numbers::pi / 2));
}

TEST_CASE("lane change shifts one lane width over its duration") {
  const auto trace = run(chain({make_actor("car", ActorCategory::FourWheeler, 0, 0, 0, 10, true)}, "car",
                               {{"LaneChangeLeft", {{"lane_width", 3.5}, {"duration", 3.0}}}}));
  REQUIRE(trace.outcome.kind == OutcomeKind::Completed);
  CHECK(trace.outcome.time == doctest::Approx(3.0));
  const auto& car = final_state(trace, "car");
  CHECK(car.y == doctest::Approx(3.5).epsilon(1e-3));
  CHECK(std::abs(car.heading) < 1e-6);
  // Longitudinal travel keeps speed * time; the lateral offset comes on top.
  CHECK(car.x == doctest::Approx(30.0).epsilon(1e-9));
}

TEST_CASE("follow vehicle settles at the requested gap") {
  auto g = new_graph("follow", "Town01", AbstractionLevel::Concrete);
  add_actor(g, make_actor("lead", ActorCategory::FourWheeler, 30, 0, 0, 10));
  add_actor(g, make_actor("ego", ActorCategory::FourWheeler, 0, 0, 0, 10, true));
  add_node(g, NodeKind::Maneuver,
           make_action("FollowVehicle", "ego", std::string("lead"),
                       {{"gap", ParamValue::scalar(10, "m")}, {"duration", ParamValue::scalar(20, "s")}}),
           Registry::builtin(), "follow");
  connect(g, "root", "follow");
  connect(g, "follow", "end");
  const auto trace = run(g);
  REQUIRE(trace.outcome.kind == OutcomeKind::Completed);
  const auto& lead = final_state(trace, "lead");
  const auto& ego = final_state(trace, "ego");
  CHECK(lead.x - ego.x == doctest::Approx(10.0).epsilon(0.02));
}

TEST_CASE("head-on collision time matches the closing-speed oracle") {
  auto g = chain({make_actor("a", ActorCategory::FourWheeler, 0, 0, 0, 10, true),
                  make_actor("b", ActorCategory::FourWheeler, 100, 0, std::numbers::pi, 10)},
                 "a", {{"KeepVelocity", {{"duration", 20}}}});
  const auto trace = run(g);
  REQUIRE(trace.outcome.kind == OutcomeKind::Collision);
  CHECK(trace.outcome.collision_pair == std::pair<ActorId, ActorId>{"a", "b"});
  const double length = Registry::builtin().limits(ActorCategory::FourWheeler).length;
  const double contact = (100 - length) / 20.0;
  CHECK(trace.outcome.time > contact);
  CHECK(trace.outcome.time <= contact + kDt + 1e-9);
  REQUIRE(trace.min_distance.has_value());
  CHECK(*trace.min_distance < length);
}

TEST_CASE("initial overlap collides at t = 0") {
  auto g = chain({make_actor("a", ActorCategory::FourWheeler, 0, 0, 0, 0, true),
                  make_actor("b", ActorCategory::FourWheeler, 1, 0, 0, 0)},
                 "a", {{"KeepVelocity", {{"duration", 1}}}});
  const auto trace = run(g);
  CHECK(trace.outcome.kind == OutcomeKind::Collision);
  CHECK(trace.outcome.time == 0.0);
}

TEST_CASE("timeout after max_time") {
  auto g = chain({make_actor("car", ActorCategory::FourWheeler, 0, 0, 0, 1, true)}, "car",
                 {{"KeepVelocity", {{"duration", 100}}}});
  const auto trace = run(g, TickConfig{.dt = kDt, .max_time = 5.0});
  CHECK(trace.outcome.kind == OutcomeKind::Timeout);
  CHECK(trace.outcome.time > 5.0);
  CHECK(trace.outcome.time <= 5.0 + kDt + 1e-9);
}

TEST_CASE("join timing") {
  const auto one = run(testing::load_fixture("one_finished"));
  CHECK(one.outcome.kind == OutcomeKind::Completed);
  CHECK(std::abs(one.outcome.time - 1.0) <= kDt + 1e-9);
  CHECK(event_time(one, "te1", NodeState::Succeeded) == doctest::Approx(1.0));
  CHECK_FALSE(event_time(one, "te5", NodeState::Succeeded).has_value());

  const auto all = run(testing::load_fixture("all_finished"));
  CHECK(all.outcome.kind == OutcomeKind::Completed);
  CHECK(std::abs(all.outcome.time - 5.0) <= kDt + 1e-9);
}

TEST_CASE("events are ordered and consistent") {
  const auto trace = run(testing::load_fixture("uis2"));
  for (std::size_t i = 1; i < trace.events.size(); ++i) CHECK(trace.events[i - 1].time <= trace.events[i].time);
  // Nothing succeeds before it runs.
  for (const auto& e : trace.events)
    if (e.state == NodeState::Succeeded) {
      const auto running = event_time(trace, e.node, NodeState::Running);
      REQUIRE(running.has_value());
      CHECK(*running <= e.time);
    }
}

TEST_CASE("worked scenarios complete without collision") {
  const auto uis1 = run(testing::load_fixture("uis1"));
  CHECK(uis1.outcome.kind == OutcomeKind::Completed);
  CHECK(summary_line(outcome(uis1)) == "Completed at t=9.1, min distance 2.559 m");
  const auto uis2 = run(testing::load_fixture("uis2"));
  CHECK(uis2.outcome.kind == OutcomeKind::Completed);
}

TEST_CASE("halving dt keeps the outcome") {
  const auto g = testing::load_fixture("uis1");
  const auto coarse = run(g, TickConfig{.dt = 0.05});
  const auto fine = run(g, TickConfig{.dt = 0.025});
  CHECK(coarse.outcome.kind == fine.outcome.kind);
  CHECK(std::abs(coarse.outcome.time - fine.outcome.time) <= 0.1);
}

TEST_CASE("run is deterministic") {
  const auto g = testing::load_fixture("uis2");
  CHECK(run(g) == run(g));
  CHECK(trace_to_json(run(g)) == trace_to_json(run(g)));
}

TEST_CASE("sample stride thins stored states") {
  const auto g = testing::load_fixture("uis1");
  const auto full = run(g);
  const auto thin = run(g, TickConfig{.sample_stride = 10});
  CHECK(thin.outcome == full.outcome);
  CHECK(thin.events == full.events);
  CHECK(thin.states.front().time == 0.0);
  CHECK(thin.states.back().time == full.states.back().time);
  CHECK(thin.states.size() < full.states.size() / 5);
}

TEST_CASE("replay interpolates stored states") {
  const auto g = testing::load_fixture("uis1");
  const auto full = run(g);
  const auto thin = run(g, TickConfig{.sample_stride = 2});
  // Odd ticks are missing from the thinned trace; interpolation of constant
  // speed straight driving reproduces them.
  const auto w = replay_states(thin, 0.05);
  CHECK(w.actors[0].y == doctest::Approx(full.states[1].actors[0].y));
  CHECK(replay_states(full, 0.0) == full.states.front());
  CHECK(code_of([&] { (void)replay_states(full, -0.1); }) == ErrorCode::OutOfRange);
  CHECK(code_of([&] { (void)replay_states(full, full.outcome.time + 1); }) == ErrorCode::OutOfRange);
}

TEST_CASE("run rejects bad input") {
  const auto g = testing::load_fixture("uis1");
  CHECK(code_of([&] { (void)run(g, TickConfig{.dt = 0}); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([&] { (void)run(g, TickConfig{.max_time = -1}); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([&] { (void)run(g, TickConfig{.sample_stride = 0}); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([&] { (void)run(testing::load_fixture("uis1_logical")); }) == ErrorCode::LevelError);
  CHECK(code_of([&] { (void)run(testing::load_fixture("uis1_functional")); }) == ErrorCode::LevelError);
  CHECK(code_of([&] { (void)run(testing::load_fixture("bad_join")); }) == ErrorCode::InvalidScenario);
  auto neg = chain({make_actor("car", ActorCategory::FourWheeler, 0, 0, 0, 1, true)}, "car",
                   {{"DriveDistance", {{"distance", -5}}}});
  CHECK(code_of([&] { (void)run(neg); }) == ErrorCode::InvalidScenario);
}
