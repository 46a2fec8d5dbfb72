#pragma once

#include <charconv>
#include <stdexcept>
#include <string>
#include <system_error>

namespace hhfreak::detail {

// Shortest round-trippable decimal form of v.
inline void append_double(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{})
    throw std::logic_error("append_double: to_chars failed");
  out.append(buf, ptr);
}

inline std::string format_double(double v) {
  std::string s;
  append_double(s, v);
  return s;
}

} // namespace hhfreak::detail
