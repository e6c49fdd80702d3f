#include "scengraph/param.hpp"

#include <cmath>

#include "scengraph/error.hpp"
#include "util.hpp"

namespace scengraph {

ParamValue::ParamValue(Range r) {
  if (!std::isfinite(r.min) || !std::isfinite(r.max) || !std::isfinite(r.step))
    fail(ErrorCode::InvalidArgument, "range bounds must be finite");
  if (r.min > r.max) fail(ErrorCode::InvalidArgument, "range requires min <= max");
  if (!(r.step > 0.0)) fail(ErrorCode::InvalidArgument, "range requires step > 0");
  v_ = std::move(r);
}

ParamValue::ParamValue(DiscreteSet s) {
  if (s.values.empty()) fail(ErrorCode::InvalidArgument, "discrete set must not be empty");
  v_ = std::move(s);
}

std::optional<double> ParamValue::number() const {
  if (const auto* s = std::get_if<Scalar>(&v_)) {
    if (const auto* d = std::get_if<double>(&s->value)) return *d;
  }
  return std::nullopt;
}

std::string ParamValue::unit() const {
  return std::visit(
      [](const auto& v) -> std::string {
        if constexpr (std::is_same_v<std::decay_t<decltype(v)>, Unset>)
          return {};
        else
          return v.unit;
      },
      v_);
}

std::size_t range_cardinality(const Range& r) {
  const double q = (r.max - r.min) / r.step;
  // 1e-9 absorbs quotients like 4.999999999 that should be 5.
  return static_cast<std::size_t>(std::floor(q + 1e-9)) + 1;
}

std::size_t ParamValue::cardinality() const {
  switch (v_.index()) {
    case 0: return 0;
    case 1: return 1;
    case 2: return range_cardinality(as_range());
    default: return as_set().values.size();
  }
}

ParamValue ParamValue::pick(std::size_t index) const {
  if (is_scalar()) {
    if (index != 0) fail(ErrorCode::OutOfRange, "scalar has a single value");
    return *this;
  }
  if (is_range()) {
    const auto& r = as_range();
    if (index >= range_cardinality(r)) fail(ErrorCode::OutOfRange, "range index out of range");
    return Scalar{r.min + static_cast<double>(index) * r.step, r.unit};
  }
  if (is_set()) {
    const auto& s = as_set();
    if (index >= s.values.size()) fail(ErrorCode::OutOfRange, "set index out of range");
    return Scalar{s.values[index], s.unit};
  }
  fail(ErrorCode::OutOfRange, "unset parameter has no values");
}

std::string describe(const ParamValue& v) {
  auto lit = [](const Literal& l) {
    if (const auto* d = std::get_if<double>(&l)) return format_number(*d);
    return "\"" + std::get<std::string>(l) + "\"";
  };
  auto with_unit = [](std::string s, const std::string& unit) {
    return unit.empty() ? s : s + " " + unit;
  };
  if (v.is_unset()) return "unset";
  if (v.is_scalar()) return with_unit(lit(v.as_scalar().value), v.as_scalar().unit);
  if (v.is_range()) {
    const auto& r = v.as_range();
    return with_unit("[" + format_number(r.min) + ".." + format_number(r.max) + " step " + format_number(r.step) + "]",
                     r.unit);
  }
  std::string out = "{";
  for (std::size_t i = 0; i < v.as_set().values.size(); ++i) {
    if (i) out += ", ";
    out += lit(v.as_set().values[i]);
  }
  return with_unit(out + "}", v.as_set().unit);
}

}  // namespace scengraph
