/**
 * @file format.hpp
 * @brief Locale-independent decimal formatting of doubles.
 */
#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <system_error>

namespace roughfilm {

/// Shortest decimal string that parses back to exactly v.
inline std::string format_shortest(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// At most `precision` significant digits, trailing zeros dropped.
inline std::string format_precision(double v, int precision) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, precision);
  return std::string(buf, res.ptr);
}

}  // namespace roughfilm
