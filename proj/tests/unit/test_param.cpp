#include <doctest.h>

#include "scengraph/error.hpp"
#include "scengraph/param.hpp"
#include "testing.hpp"

using namespace scengraph;

namespace {

/// Counts grid points by walking them, with a relative tolerance for the
/// last point.
std::size_t walk_count(const Range& r) {
  std::size_t n = 0;
  for (std::size_t i = 0;; ++i) {
    const double v = r.min + static_cast<double>(i) * r.step;
    if (v > r.max + 1e-9 * r.step) break;
    ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("range cardinality matches the grid") {
  CHECK(ParamValue::range(3, 8, 1).cardinality() == 6);
  CHECK(ParamValue::range(0, 1, 0.1).cardinality() == 11);
  CHECK(ParamValue::range(0, 1, 0.3).cardinality() == 4);
  CHECK(ParamValue::range(2, 2, 0.5).cardinality() == 1);
  CHECK(ParamValue::set({5.0, 10.0}).cardinality() == 2);
  CHECK(ParamValue::scalar(1).cardinality() == 1);
  CHECK(ParamValue().cardinality() == 0);
}

TEST_CASE("range cardinality agrees with walking the grid") {
  testing::Gen gen(7);
  for (int i = 0; i < 2000; ++i) {
    // Steps on a decimal grid are where binary rounding bites.
    const double step = gen.uniform(1, 40) * 0.05;
    const double min = gen.uniform(-100, 100) * 0.1;
    const double max = min + gen.uniform(0, 60) * (gen.coin() ? step : 0.07);
    const Range r{min, max, step, ""};
    CAPTURE(min);
    CAPTURE(max);
    CAPTURE(step);
    CHECK(range_cardinality(r) == walk_count(r));
  }
}

TEST_CASE("invalid ranges and sets are rejected") {
  CHECK_THROWS_AS(ParamValue::range(5, 3, 1), Error);
  CHECK_THROWS_AS(ParamValue::range(0, 3, 0), Error);
  CHECK_THROWS_AS(ParamValue::range(0, 3, -1), Error);
  CHECK_THROWS_AS(ParamValue::set({}), Error);
}

TEST_CASE("pick returns grid points and elements") {
  const auto r = ParamValue::range(3, 8, 1, "m/s");
  CHECK(r.pick(0) == ParamValue::scalar(3, "m/s"));
  CHECK(r.pick(5) == ParamValue::scalar(8, "m/s"));
  const auto s = ParamValue::set({std::string("free"), std::string("overcast")});
  CHECK(s.pick(1) == ParamValue::text("overcast"));
  try {
    (void)r.pick(6);
    FAIL("expected OutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OutOfRange);
  }
  CHECK_THROWS_AS((void)ParamValue().pick(0), Error);
  CHECK(ParamValue::scalar(2).pick(0) == ParamValue::scalar(2));
}

TEST_CASE("value classification") {
  CHECK(ParamValue().is_unset());
  CHECK(ParamValue::range(0, 1, 1).is_free());
  CHECK(ParamValue::set({1.0}).is_free());
  CHECK_FALSE(ParamValue::scalar(1).is_free());
  CHECK(ParamValue::scalar(2.5).number() == doctest::Approx(2.5));
  CHECK_FALSE(ParamValue::text("x").number().has_value());
  CHECK(describe(ParamValue::range(3, 8, 1, "m/s")) == "[3..8 step 1] m/s");
  CHECK(describe(ParamValue::set({5.0, std::string("a")})) == "{5, \"a\"}");
  CHECK(describe(ParamValue()) == "unset");
}
