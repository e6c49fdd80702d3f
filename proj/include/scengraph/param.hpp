#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace scengraph {

/// A literal parameter value: numeric or text.
using Literal = std::variant<double, std::string>;

struct Scalar {
  Literal value;
  std::string unit;
  bool operator==(const Scalar&) const = default;
};

/// Grid min, min+step, ... up to max. max is a grid point only when
/// (max - min) is an integer multiple of step.
struct Range {
  double min = 0.0;
  double max = 0.0;
  double step = 1.0;
  std::string unit;
  bool operator==(const Range&) const = default;
};

struct DiscreteSet {
  std::vector<Literal> values;
  std::string unit;
  bool operator==(const DiscreteSet&) const = default;
};

struct Unset {
  bool operator==(const Unset&) const = default;
};

/// Parameter value carrying the abstraction-level semantics:
/// Unset (functional), Range/DiscreteSet (logical), Scalar (concrete).
class ParamValue {
public:
  using Storage = std::variant<Unset, Scalar, Range, DiscreteSet>;

  ParamValue() = default;
  ParamValue(Unset) {}
  ParamValue(Scalar s) : v_(std::move(s)) {}
  ParamValue(Range r);
  ParamValue(DiscreteSet s);

  static ParamValue scalar(double v, std::string unit = {}) { return Scalar{v, std::move(unit)}; }
  static ParamValue text(std::string v, std::string unit = {}) {
    return Scalar{std::move(v), std::move(unit)};
  }
  static ParamValue range(double min, double max, double step, std::string unit = {}) {
    return Range{min, max, step, std::move(unit)};
  }
  static ParamValue set(std::vector<Literal> values, std::string unit = {}) {
    return DiscreteSet{std::move(values), std::move(unit)};
  }

  bool is_unset() const { return std::holds_alternative<Unset>(v_); }
  bool is_scalar() const { return std::holds_alternative<Scalar>(v_); }
  bool is_range() const { return std::holds_alternative<Range>(v_); }
  bool is_set() const { return std::holds_alternative<DiscreteSet>(v_); }
  /// Range or DiscreteSet.
  bool is_free() const { return is_range() || is_set(); }

  const Storage& storage() const { return v_; }
  const Scalar& as_scalar() const { return std::get<Scalar>(v_); }
  const Range& as_range() const { return std::get<Range>(v_); }
  const DiscreteSet& as_set() const { return std::get<DiscreteSet>(v_); }

  /// Numeric scalar value, if this is a Scalar holding a number.
  std::optional<double> number() const;
  std::string unit() const;

  /// Number of grid points for Range/DiscreteSet; 1 for Scalar, 0 for Unset.
  std::size_t cardinality() const;
  /// The i-th grid point (Range) or element (DiscreteSet) as a Scalar.
  ParamValue pick(std::size_t index) const;

  bool operator==(const ParamValue&) const = default;

private:
  Storage v_;
};

/// floor((max - min) / step) + 1, tolerant to binary rounding of the quotient.
std::size_t range_cardinality(const Range& r);

std::string describe(const ParamValue& v);

}  // namespace scengraph
