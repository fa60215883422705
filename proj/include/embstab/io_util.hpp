#pragma once

#include <cstdio>
#include <string>

#include "embstab/types.hpp"

namespace embstab {

/// Formats a double with 17 significant digits, enough to round-trip the
/// bit pattern through decimal text.
inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace embstab
