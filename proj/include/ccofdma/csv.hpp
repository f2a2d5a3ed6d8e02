#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace ccofdma {

/// 12 significant digits, the precision of every CSV column.
inline std::string format_csv(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

/// Round-trip precision for config.resolved.
inline std::string format_exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace ccofdma
