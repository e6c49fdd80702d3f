#include <doctest.h>

#include <functional>
#include <string>

#include "scengraph/document.hpp"
#include "scengraph/error.hpp"
#include "testing.hpp"

using namespace scengraph;
using scengraph::testing::fixture_path;
using scengraph::testing::load_fixture;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidArgument;
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("shipped fixtures are in canonical form") {
  for (const char* name : {"uis1", "uis1_logical", "uis1_functional", "uis2", "minimal", "one_finished",
                           "all_finished", "bad_join", "pedestrian_50kmh"}) {
    CAPTURE(name);
    const auto text = read_text_file(fixture_path(name));
    CHECK(serialize(parse(text)) == text);
  }
}

TEST_CASE("serialize is deterministic and ends with a newline") {
  const auto g = load_fixture("uis2");
  const auto a = serialize(g);
  CHECK(a == serialize(g));
  CHECK(a.back() == '\n');
  CHECK(parse(a) == g);
}

TEST_CASE("uis1 structure") {
  const auto g = load_fixture("uis1");
  REQUIRE(g.actors.size() == 2);
  CHECK(g.find_actor("ego")->category == ActorCategory::FourWheeler);
  CHECK(g.find_actor("bike")->category == ActorCategory::TwoWheeler);
  CHECK(g.count(NodeKind::RootNode) == 1);
  CHECK(g.count(NodeKind::EndNode) == 1);
  CHECK(g.count(NodeKind::Condition) == 3);
}

TEST_CASE("malformed JSON reports a position") {
  const auto msg = message_of([] { (void)parse("{\n  \"format_version\": \"1\",\n  oops\n}"); });
  CHECK(msg.find("line 3") != std::string::npos);
  CHECK(code_of([] { (void)parse("{"); }) == ErrorCode::ParseError);
}

TEST_CASE("schema violations name the offending field") {
  CHECK(code_of([] { (void)parse(R"({"format_version":"2"})"); }) == ErrorCode::SchemaError);
  const auto msg = message_of([] {
    (void)parse(R"({"format_version":"1","name":"x","map":"m","abstraction_level":"Concrete",
                    "actors":[],"nodes":[{"id":"a","kind":"Bogus"}],"edges":[]})");
  });
  CHECK(msg.find("$.nodes[0].kind") != std::string::npos);
  const auto unit = message_of([] {
    (void)parse(R"({"format_version":"1","name":"x","map":"m","abstraction_level":"Concrete","actors":[],
      "nodes":[{"id":"k","kind":"Maneuver","action_type":"KeepVelocity","ref_actor":"a",
                "params":{"duration":{"scalar":1,"unit":"m"}}}],"edges":[]})");
  });
  CHECK(unit.find("$.nodes[0].params.duration") != std::string::npos);
  CHECK(code_of([] {
          (void)parse(R"({"format_version":"1","name":"x","map":"m","abstraction_level":"Concrete","actors":[],
            "nodes":[{"id":"k","kind":"Maneuver","action_type":"Teleport","ref_actor":"a"}],"edges":[]})");
        }) == ErrorCode::SchemaError);
}

TEST_CASE("mutation API") {
  auto g = new_graph("t", "Town01", AbstractionLevel::Concrete);
  add_actor(g, testing::make_actor("ego", ActorCategory::FourWheeler, 0, 0, 0, 5, true));
  CHECK(code_of([&] { add_actor(g, testing::make_actor("ego", ActorCategory::FourWheeler, 0, 0, 0, 5)); }) ==
        ErrorCode::InvalidArgument);
  CHECK(code_of([&] { add_actor(g, testing::make_actor("other", ActorCategory::FourWheeler, 0, 0, 0, 5, true)); }) ==
        ErrorCode::InvalidArgument);

  const NodeId root = g.first_of(NodeKind::RootNode);
  CHECK(root == "root");
  CHECK(code_of([&] { (void)add_node(g, NodeKind::RootNode, Terminal{}); }) == ErrorCode::DuplicateTerminal);
  CHECK(code_of([&] { (void)add_node(g, NodeKind::EndNode, Terminal{}); }) == ErrorCode::DuplicateTerminal);
  const auto k = add_node(g, NodeKind::Maneuver, make_action("KeepVelocity", "ego"));
  CHECK(k != root);
  CHECK(code_of([&] { (void)add_node(g, NodeKind::Maneuver, make_action("Teleport", "ego")); }) ==
        ErrorCode::UnknownAction);

  connect(g, root, k);
  CHECK(code_of([&] { connect(g, root, k); }) == ErrorCode::DuplicateEdge);
  CHECK(code_of([&] { connect(g, root, "ghost"); }) == ErrorCode::UnknownNode);

  set_parameter(g, k, "duration", ParamValue::scalar(2, "s"));
  CHECK(g.find_node(k)->action().params.at("duration") == ParamValue::scalar(2, "s"));
  CHECK(code_of([&] { set_parameter(g, k, "speed", ParamValue::scalar(2)); }) == ErrorCode::UnknownParameter);
  CHECK(code_of([&] { set_parameter(g, k, "duration", ParamValue::text("long")); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { set_parameter(g, "ghost", "duration", ParamValue::scalar(1)); }) == ErrorCode::UnknownNode);
}

TEST_CASE("module documents round trip") {
  const auto text = read_text_file(testing::source_path("fixtures/modules/crossing_maneuver.module.json"));
  const auto def = parse_module(text);
  CHECK(def.name == "CrossingManeuver");
  CHECK(serialize_module(def) == text);
  CHECK(parse_module(serialize_module(def)) == def);
}
