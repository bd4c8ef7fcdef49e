#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace pdp {

/// Shortest decimal text that reads back to exactly the same double.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace pdp
