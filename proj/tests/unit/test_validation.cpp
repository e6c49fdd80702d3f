#include <doctest.h>

#include <set>
#include <string>

#include "scengraph/document.hpp"
#include "scengraph/error.hpp"
#include "scengraph/validation.hpp"
#include "testing.hpp"

using namespace scengraph;

namespace {

ScenarioGraph rule_fixture(int rule, bool fail) {
  return testing::load_fixture("rules/r" + std::to_string(rule) + (fail ? "_fail" : "_pass"));
}

std::set<std::string> rules_of(const ValidationReport& r) {
  std::set<std::string> out;
  for (const auto& f : r.findings) out.insert(f.rule_id);
  return out;
}

}  // namespace

TEST_CASE("every rule has a failing and a passing fixture") {
  for (int rule = 1; rule <= 10; ++rule) {
    const std::string id = "R" + std::to_string(rule);
    CAPTURE(id);
    const auto failing = validate(rule_fixture(rule, true));
    CHECK(failing.has(id));
    // Warnings leave the report valid unless strict.
    CHECK(failing.is_valid == (rule_severity(id) == Severity::Warning));
    CHECK_FALSE(validate(rule_fixture(rule, true), Registry::builtin(), {.strict = true}).is_valid);

    const auto passing = validate(rule_fixture(rule, false));
    CHECK(passing.is_valid);
    CHECK(passing.findings.empty());
  }
}

TEST_CASE("failing rule fixtures are minimal") {
  for (int rule : {1, 2, 4, 5, 6, 7, 8, 9, 10}) {
    CAPTURE(rule);
    CHECK(rules_of(validate(rule_fixture(rule, true))) == std::set<std::string>{"R" + std::to_string(rule)});
  }
  // An edge into the root necessarily closes a cycle as well.
  CHECK(rules_of(validate(rule_fixture(3, true))) == std::set<std::string>{"R3", "R9"});
}

TEST_CASE("pedestrian at 50 km/h triggers exactly R8") {
  const auto r = validate(testing::load_fixture("pedestrian_50kmh"));
  REQUIRE(r.findings.size() == 1);
  CHECK(r.findings[0].rule_id == "R8");
  CHECK(r.findings[0].severity == Severity::Warning);
  CHECK(r.findings[0].node_ids == std::vector<NodeId>{"actor:ped"});
  CHECK(r.is_valid);
}

TEST_CASE("worked scenarios validate") {
  for (const char* name : {"uis1", "uis1_logical", "uis1_functional", "uis2", "minimal", "one_finished", "all_finished"}) {
    CAPTURE(name);
    const auto r = validate(testing::load_fixture(name));
    CHECK(r.is_valid);
    CHECK(r.findings.empty());
  }
}

TEST_CASE("bad_join reports R5 on the join") {
  const auto r = validate(testing::load_fixture("bad_join"));
  CHECK_FALSE(r.is_valid);
  REQUIRE(r.count("R5") == 1);
  CHECK(r.findings[0].node_ids == std::vector<NodeId>{"join"});
}

TEST_CASE("R6 depends on the abstraction level") {
  auto g = testing::load_fixture("uis1_logical");
  CHECK(validate(g).is_valid);
  g.abstraction_level = AbstractionLevel::Concrete;
  const auto r = validate(g);
  CHECK(r.has("R6"));
  CHECK_FALSE(r.is_valid);
  auto f = testing::load_fixture("uis1_functional");
  f.abstraction_level = AbstractionLevel::Logical;
  CHECK(validate(f).has("R6"));
}

TEST_CASE("findings inside modules carry flattened ids") {
  auto g = testing::load_fixture("uis2");
  // Break the module's bound actor category: a pedestrian cannot be targeted
  // by InVehicleRadius.
  g.module_defs[0].elements[0].action().target_actor = "crosser";
  const auto r = validate(g);
  REQUIRE(r.has("R10"));
  bool found = false;
  for (const auto& f : r.findings)
    for (const auto& id : f.node_ids) found |= id == "crossing/sync3";
  CHECK(found);
}

TEST_CASE("unknown module definitions are R10 findings") {
  auto g = testing::load_fixture("uis2");
  g.module_defs.clear();
  const auto r = validate(g);
  CHECK(r.has("R10"));
  CHECK_FALSE(r.is_valid);
}

TEST_CASE("report ordering is stable") {
  const auto r = validate(rule_fixture(3, true));
  for (std::size_t i = 1; i < r.findings.size(); ++i)
    CHECK(r.findings[i - 1].node_ids.front() <= r.findings[i].node_ids.front());
  CHECK(report_to_json(r) == report_to_json(validate(rule_fixture(3, true))));
}

TEST_CASE("explain") {
  for (int rule = 1; rule <= 10; ++rule) CHECK_FALSE(explain("R" + std::to_string(rule)).empty());
  CHECK(explain("R8").find("pedestrian") != std::string::npos);
  CHECK_THROWS_AS(explain("R11"), Error);
  try {
    (void)explain("nope");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownRule);
  }
  CHECK(rule_severity("R7") == Severity::Warning);
  CHECK(rule_severity("R4") == Severity::Error);
}
