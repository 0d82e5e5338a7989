#pragma once

#include <array>
#include <cstddef>

namespace tvf {

struct Pose {
  double x = 0.0;      // m
  double y = 0.0;      // m
  double theta = 0.0;  // rad, (-pi, pi] when reported
};

struct VelocityCommand {
  double v = 0.0;      // m/s
  double omega = 0.0;  // rad/s
};

struct PoseRate {
  double dx = 0.0;
  double dy = 0.0;
  double dtheta = 0.0;
};

/// Differential-drive geometry. `c` is the distance from the rear-axle
/// centre to the controlled reference point.
struct RobotGeometry {
  double c = 0.1;
  double wheel_radius = 0.05;
  double track_width = 0.2;

  void validate() const;
};

struct WheelSpeeds {
  double left = 0.0;   // rad/s
  double right = 0.0;  // rad/s
};

/// Unicycle kinematics of the axle centre, driven through an offset point:
///   xdot = v cos(theta) - c w sin(theta)
///   ydot = v sin(theta) + c w cos(theta)
///   thetadot = w
PoseRate unicycle_rate(const Pose& pose, const VelocityCommand& cmd, double c);

/// One RK4 step with the command held constant. Throws on dt < 0.
Pose integrate_step(const Pose& pose, const VelocityCommand& cmd, double c, double dt);

/// Throws std::invalid_argument on non-positive wheel radius or track width.
WheelSpeeds wheel_speeds(const VelocityCommand& cmd, const RobotGeometry& geom);

bool is_finite(const VelocityCommand& cmd);

/// Classical 4-stage Runge-Kutta step for y' = f(t, y) over any
/// fixed-size or resizable container of doubles.
template <class State, class Rhs>
State rk4_step(const State& y, double t, double dt, Rhs&& f) {
  const std::size_t n = y.size();
  auto axpy = [n](const State& base, double a, const State& k) {
    State out = base;
    for (std::size_t i = 0; i < n; ++i) out[i] += a * k[i];
    return out;
  };
  const State k1 = f(t, y);
  const State k2 = f(t + 0.5 * dt, axpy(y, 0.5 * dt, k1));
  const State k3 = f(t + 0.5 * dt, axpy(y, 0.5 * dt, k2));
  const State k4 = f(t + dt, axpy(y, dt, k3));
  State out = y;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return out;
}

}  // namespace tvf
