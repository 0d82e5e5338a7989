#include "tvf/angles.hpp"

#include <cmath>

namespace tvf {

double wrap_angle(double angle) {
  // std::remainder is exact and lands in [-pi, pi]; fold the lower end up.
  double r = std::remainder(angle, 2.0 * kPi);
  if (r <= -kPi) {
    r += 2.0 * kPi;
  }
  return r;
}

double angle_diff(double a, double b) { return wrap_angle(a - b); }

}  // namespace tvf
