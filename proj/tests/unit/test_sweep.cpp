#include <doctest.h>

#include "scengraph/concretizer.hpp"
#include "scengraph/document.hpp"
#include "scengraph/sweep.hpp"
#include "testing.hpp"

using namespace scengraph;

TEST_CASE("logical uis1 sweep reproduces the committed table") {
  const auto g = testing::load_fixture("uis1_logical");
  const auto rows = sweep(g, {}, 0);
  CHECK(rows.size() == plan(g).total_count);
  CHECK(sweep_to_csv(rows) == read_text_file(testing::source_path("tests/fixtures/uis1_logical_sweep.csv")));
}

TEST_CASE("sweep rows agree with individual runs") {
  const auto g = testing::load_fixture("uis1_logical");
  const auto p = plan(g);
  const auto rows = sweep(g, {}, 2);
  REQUIRE(rows.size() == p.total_count);
  bool collision = false, completed = false;
  for (const auto& row : rows) {
    CAPTURE(row.index);
    const auto single = outcome(run(enumerate(g, p, row.index)));
    CHECK(outcome_label(row.summary) == outcome_label(single));
    CHECK(row.summary.completion_time == single.completion_time);
    CHECK(row.summary.min_distance == single.min_distance);
    collision |= row.summary.kind == OutcomeKind::Collision;
    completed |= row.summary.kind == OutcomeKind::Completed;
  }
  CHECK(collision);
  CHECK(completed);
}

TEST_CASE("thread count does not change the table") {
  const auto g = testing::load_fixture("uis1_logical");
  const auto one = sweep_to_csv(sweep(g, {}, 1));
  CHECK(sweep_to_csv(sweep(g, {}, 3)) == one);
  CHECK(sweep_to_csv(sweep(g, {}, 8)) == one);
}

TEST_CASE("csv formatting") {
  std::vector<SweepRow> rows(2);
  rows[0].index = 0;
  rows[0].summary.kind = OutcomeKind::Completed;
  rows[0].summary.completion_time = 9.2;
  rows[0].summary.min_distance = 3.10099;
  rows[1].index = 1;
  rows[1].summary.kind = OutcomeKind::Collision;
  rows[1].summary.collision_pair = std::pair<ActorId, ActorId>{"ego", "bike"};
  rows[1].summary.collision_time = 5.0;
  CHECK(sweep_to_csv(rows) ==
        "index,outcome,min_distance,completion_time\n"
        "0,Completed,3.101,9.200\n"
        "1,\"Collision(ego,bike)\",,\n");
  CHECK(outcome_label(rows[1].summary) == "Collision(ego,bike)");
}

TEST_CASE("concrete scenarios sweep to a single row") {
  const auto rows = sweep(testing::load_fixture("uis1"));
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].summary.kind == OutcomeKind::Completed);
}
