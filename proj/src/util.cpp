#include "arena/util.hpp"

#include <cstdio>

namespace arena {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

}  // namespace arena
