#pragma once

// Internal helpers shared by the core translation units.

#include <charconv>
#include <cmath>
#include <string>
#include <string_view>

namespace scengraph {

/// Shortest round-trip decimal, '.' separator, no exponent for the ranges
/// scenarios use. -0 prints as 0.
inline std::string format_number(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

}  // namespace scengraph
