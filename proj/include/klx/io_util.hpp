#pragma once

#include <cstdio>
#include <string>

namespace klx {

/// Fixed 17-significant-digit decimal rendering. All CSV/JSON emitted by
/// this project goes through here so identical runs produce identical bytes
/// and doubles round-trip exactly.
inline std::string num17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return std::string(buf);
}

}  // namespace klx
