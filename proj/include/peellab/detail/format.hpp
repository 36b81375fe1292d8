#pragma once

#include <charconv>
#include <string>

namespace peellab::fmt {

// Shortest round-trip decimal representation.
inline std::string num(double x) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

}  // namespace peellab::fmt
