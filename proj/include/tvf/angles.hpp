#pragma once

#include <numbers>

namespace tvf {

inline constexpr double kPi = std::numbers::pi;

/// Maps any finite angle into (-pi, pi].
double wrap_angle(double angle);

/// Wrapped difference a - b, in (-pi, pi].
double angle_diff(double a, double b);

}  // namespace tvf
