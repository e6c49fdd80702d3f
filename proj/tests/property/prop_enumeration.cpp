#include <doctest.h>

#include <cstdio>
#include <set>

#include "scengraph/concretizer.hpp"
#include "testing.hpp"

using namespace scengraph;
using Tuple = std::vector<std::string>;

namespace {

std::string key(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9f", v);
  return buf;
}

/// Values of a free parameter, listed by walking the grid or the set.
std::vector<std::string> domain(const ParamValue& v) {
  std::vector<std::string> out;
  if (v.is_range()) {
    const auto& r = v.as_range();
    for (int k = 0;; ++k) {
      const double x = r.min + k * r.step;
      if (x > r.max + 1e-9) break;
      out.push_back(key(x));
    }
  } else {
    for (const auto& l : v.as_set().values) out.push_back(key(std::get<double>(l)));
  }
  return out;
}

std::set<Tuple> cartesian(const std::vector<std::vector<std::string>>& domains) {
  std::set<Tuple> out{{}};
  for (const auto& d : domains) {
    std::set<Tuple> next;
    for (const auto& t : out)
      for (const auto& v : d) {
        auto u = t;
        u.push_back(v);
        next.insert(u);
      }
    out = std::move(next);
  }
  return out;
}

Tuple read_back(ScenarioGraph g, const std::vector<testing::Slot>& slots) {
  Tuple t;
  for (const auto& s : slots) {
    const auto& v = testing::slot_value(g, s);
    REQUIRE(v.is_scalar());
    t.push_back(key(*v.number()));
  }
  return t;
}

}  // namespace

TEST_CASE("enumeration covers the Cartesian product exactly once") {
  testing::Gen gen(0x5eed0301);
  for (int i = 0; i < 150; ++i) {
    CAPTURE(i);
    auto c = testing::random_logical(gen);
    std::vector<std::vector<std::string>> domains;
    std::size_t expected_count = 1;
    for (const auto& s : c.slots) {
      domains.push_back(domain(testing::slot_value(c.graph, s)));
      expected_count *= domains.back().size();
    }
    REQUIRE(expected_count <= 10000);
    const auto oracle = cartesian(domains);

    const auto p = plan(c.graph);
    REQUIRE(p.total_count == expected_count);
    CHECK(p.free_params.size() == c.slots.size());
    std::set<Tuple> seen;
    for (std::uint64_t k = 0; k < p.total_count; ++k) {
      const auto g = enumerate(c.graph, p, k);
      CHECK(classify_level(g) == AbstractionLevel::Concrete);
      const auto t = read_back(g, c.slots);
      CHECK(oracle.count(t) == 1);
      CHECK(seen.insert(t).second);
    }
    CHECK(seen == oracle);

    for (std::uint64_t seed = 0; seed < 5; ++seed) CHECK(oracle.count(read_back(sample(c.graph, p, seed), c.slots)) == 1);
  }
}

TEST_CASE("unaffected values pass through enumeration unchanged") {
  testing::Gen gen(0x5eed0302);
  for (int i = 0; i < 50; ++i) {
    CAPTURE(i);
    auto c = testing::random_logical(gen);
    const auto p = plan(c.graph);
    auto g = enumerate(c.graph, p, p.total_count - 1);
    // Re-widen the assigned slots: the result must equal the input.
    for (const auto& s : c.slots) testing::slot_value(g, s) = testing::slot_value(c.graph, s);
    g.abstraction_level = c.graph.abstraction_level;
    CHECK(g == c.graph);
  }
}
