#pragma once

#include <charconv>
#include <string>

namespace costcode {

// Shortest round-trip representation; byte-stable for equal inputs.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

} // namespace costcode
