#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <functional>

#include <unistd.h>

#include "scengraph/catalog.hpp"
#include "scengraph/document.hpp"
#include "scengraph/error.hpp"
#include "scengraph/modules.hpp"
#include "testing.hpp"

using namespace scengraph;
namespace fs = std::filesystem;

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

GraphNode element(const std::string& id, const std::string& type, const std::string& role,
                  std::optional<std::string> target = std::nullopt) {
  const bool cond = Registry::builtin().at(type).category == ActionCategory::Condition;
  return GraphNode{id, cond ? NodeKind::Condition : NodeKind::Maneuver, make_action(type, role, target)};
}

/// wait -> go, one role.
ModuleSpec simple_spec(const std::string& name) {
  ModuleSpec s;
  s.name = name;
  s.roles = {"driver"};
  s.elements = {element("wait", "TimeElapsed", "driver"), element("go", "KeepVelocity", "driver")};
  s.edges = {Edge{"", "wait", std::nullopt, "go", std::nullopt}};
  s.in_ports = {{"in", "wait"}};
  s.out_ports = {{"out", "go"}};
  return s;
}

fs::path temp_dir(const std::string& tag) {
  auto p = fs::temp_directory_path() / ("scengraph_test_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("define_module assigns a content revision") {
  const auto a = define_module(simple_spec("Wait"));
  const auto b = define_module(simple_spec("Wait"));
  CHECK(a.revision.size() == 16);
  CHECK(a.revision == b.revision);
  auto changed = simple_spec("Wait");
  changed.elements[0].action().params["duration"] = ParamValue::scalar(2, "s");
  CHECK(define_module(changed).revision != a.revision);
  CHECK(compute_revision(a) == a.revision);
}

TEST_CASE("shipped module revision is stable") {
  const auto def =
      parse_module(read_text_file(testing::source_path("fixtures/modules/crossing_maneuver.module.json")));
  CHECK(compute_revision(def) == def.revision);
  CHECK(def.revision == "60b202a2963d3666");
}

TEST_CASE("define_module rejects malformed definitions") {
  auto with_root = simple_spec("M");
  with_root.elements.push_back(GraphNode{"r", NodeKind::RootNode, Terminal{}});
  CHECK(code_of([&] { (void)define_module(with_root); }) == ErrorCode::IllegalElement);

  auto bad_role = simple_spec("M");
  bad_role.elements[1].action().reference_actor = "ghost";
  CHECK(code_of([&] { (void)define_module(bad_role); }) == ErrorCode::UnboundRole);

  auto no_ports = simple_spec("M");
  no_ports.out_ports.clear();
  CHECK(code_of([&] { (void)define_module(no_ports); }) == ErrorCode::InvalidArgument);

  auto dangling = simple_spec("M");
  dangling.elements.push_back(element("lost", "KeepVelocity", "driver"));
  CHECK(code_of([&] { (void)define_module(dangling); }) == ErrorCode::InvalidArgument);

  auto self = simple_spec("Self");
  self.elements.push_back(GraphNode{"me", NodeKind::ModuleInstance, ModuleInstance{"Self", {{"driver", "driver"}}, {}}});
  self.edges.push_back(Edge{"", "go", std::nullopt, "me", "in"});
  self.out_ports = {{"out", "me"}};
  CHECK(code_of([&] { (void)define_module(self); }) == ErrorCode::RecursiveModule);
}

TEST_CASE("mutual recursion through known definitions is rejected") {
  const auto inner = define_module(simple_spec("Inner"));
  // A definition named Inner that nests Outer, which nests Inner.
  auto outer = simple_spec("Outer");
  outer.elements.push_back(GraphNode{"sub", NodeKind::ModuleInstance, ModuleInstance{"Inner", {{"driver", "driver"}}, {}}});
  outer.edges.push_back(Edge{"", "go", std::nullopt, "sub", "in"});
  outer.out_ports = {{"out", "sub"}};
  const auto outer_def = define_module(outer, std::vector<ModuleDef>{inner});

  auto cyclic = simple_spec("Inner");
  cyclic.elements.push_back(GraphNode{"sub", NodeKind::ModuleInstance, ModuleInstance{"Outer", {{"driver", "driver"}}, {}}});
  cyclic.edges.push_back(Edge{"", "go", std::nullopt, "sub", "in"});
  cyclic.out_ports = {{"out", "sub"}};
  CHECK(code_of([&] { (void)define_module(cyclic, std::vector<ModuleDef>{outer_def, inner}); }) ==
        ErrorCode::RecursiveModule);
}

TEST_CASE("uis2 flattening expands the crossing module") {
  const auto g = testing::load_fixture("uis2");
  CHECK(has_instances(g));
  const auto flat = flatten(g);
  CHECK_FALSE(has_instances(flat));
  for (const char* id : {"crossing/sync3", "crossing/walk", "crossing/cross", "crossing/sync4", "crossing/stop"})
    CHECK(flat.find_node(id) != nullptr);
  CHECK(flat.find_node("crossing") == nullptr);

  // Overrides applied, roles bound.
  const auto& sync3 = flat.find_node("crossing/sync3")->action();
  CHECK(sync3.params.at("radius") == ParamValue::scalar(15, "m"));
  CHECK(sync3.reference_actor == "ped");
  CHECK(sync3.target_actor == std::optional<std::string>("car"));
  CHECK(flat.find_node("crossing/cross")->action().params.at("distance") == ParamValue::scalar(12, "m"));

  // Boundary edges are rewired to the port elements.
  auto has_edge = [&](const std::string& from, const std::string& to) {
    return std::any_of(flat.edges.begin(), flat.edges.end(),
                       [&](const Edge& e) { return e.from == from && e.to == to; });
  };
  CHECK(has_edge("root", "crossing/sync3"));
  CHECK(has_edge("crossing/stop", "end"));
  CHECK(has_edge("crossing/sync4", "crossing/stop"));
  CHECK(flatten(flat) == flat);
}

TEST_CASE("instantiate checks bindings") {
  auto g = testing::load_fixture("minimal");
  add_actor(g, testing::make_actor("walker", ActorCategory::Pedestrian, 0, 10, 0, 0));
  ModuleSpec lane;
  lane.name = "Lane";
  lane.roles = {"v"};
  lane.elements = {element("lc", "LaneChangeLeft", "v")};
  lane.in_ports = {{"in", "lc"}};
  lane.out_ports = {{"out", "lc"}};
  const auto def = define_module(lane);

  CHECK(code_of([&] { (void)instantiate(g, def, {}); }) == ErrorCode::UnboundRole);
  CHECK(code_of([&] { (void)instantiate(g, def, {{"v", "nobody"}}); }) == ErrorCode::UnboundRole);
  CHECK(code_of([&] { (void)instantiate(g, def, {{"v", "walker"}}); }) == ErrorCode::BindingMismatch);
  CHECK(code_of([&] { (void)instantiate(g, def, {{"v", "car"}}, {{"ghost", "duration", ParamValue::scalar(1, "s")}}); }) ==
        ErrorCode::UnknownNode);

  const auto id = instantiate(g, def, {{"v", "car"}}, {{"lc", "duration", ParamValue::scalar(4, "s")}});
  CHECK(g.find_node(id)->kind == NodeKind::ModuleInstance);
  CHECK(g.find_module("Lane") != nullptr);
  // Same id, different content: the graph keeps one revision per definition.
  auto other = lane;
  other.elements[0].action().params["duration"] = ParamValue::scalar(1, "s");
  CHECK(code_of([&] { (void)instantiate(g, define_module(other), {{"v", "car"}}); }) == ErrorCode::Conflict);
}

TEST_CASE("flatten depth limit") {
  testing::Gen gen(3);
  ModuleDef inner = define_module(simple_spec("L1"));
  std::vector<ModuleDef> defs{inner};
  for (int d = 2; d <= 4; ++d) {
    auto s = simple_spec("L" + std::to_string(d));
    s.elements.push_back(GraphNode{"sub", NodeKind::ModuleInstance,
                                   ModuleInstance{"L" + std::to_string(d - 1), {{"driver", "driver"}}, {}}});
    s.edges.push_back(Edge{"", "go", std::nullopt, "sub", "in"});
    s.out_ports = {{"out", "sub"}};
    defs.push_back(define_module(s, defs));
  }
  auto g = testing::load_fixture("minimal");
  const auto id = instantiate(g, defs.back(), {{"driver", "car"}}, {}, std::span(defs.data(), defs.size() - 1));
  CHECK(flatten(g, 4).find_node(id + "/sub/sub/sub/go") != nullptr);
  CHECK(code_of([&] { (void)flatten(g, 3); }) == ErrorCode::DepthExceeded);
}

TEST_CASE("catalog save, load, list and optimistic concurrency") {
  const auto dir = temp_dir("catalog");
  Catalog cat(dir.string());
  const auto v1 = define_module(simple_spec("Wait"));
  CHECK(cat.save(v1) == v1.revision);
  CHECK(cat.save(v1) == v1.revision);  // idempotent
  CHECK(cat.load("Wait") == v1);

  auto changed = simple_spec("Wait");
  changed.elements[0].action().params["duration"] = ParamValue::scalar(3, "s");
  const auto v2 = define_module(changed);
  CHECK(code_of([&] { (void)cat.save(v2, std::string("0000000000000000")); }) == ErrorCode::Conflict);
  CHECK(cat.save(v2, v1.revision) == v2.revision);
  CHECK(cat.latest("Wait") == std::optional<std::string>(v2.revision));
  CHECK(cat.load("Wait") == v2);
  CHECK(cat.load("Wait", v1.revision) == v1);
  CHECK(cat.list().size() == 2);
  CHECK(code_of([&] { (void)cat.load("Nope"); }) == ErrorCode::NotFound);
  CHECK(code_of([&] { (void)cat.load("Wait", std::string("ffffffffffffffff")); }) == ErrorCode::NotFound);
  fs::remove_all(dir);
}
