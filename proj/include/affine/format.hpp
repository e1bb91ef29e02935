#ifndef AFFINE_FORMAT_HPP
#define AFFINE_FORMAT_HPP

#include <cstdio>
#include <string>

namespace affine {

/// Decimal form with enough digits to round-trip a double exactly.
inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace affine

#endif
