#include "tvf/kinematics.hpp"

#include <cmath>
#include <stdexcept>

#include "tvf/angles.hpp"

namespace tvf {

void RobotGeometry::validate() const {
  if (!(c >= 0.0) || !std::isfinite(c)) {
    throw std::invalid_argument("robot geometry: c must be finite and non-negative");
  }
  if (!(wheel_radius > 0.0) || !std::isfinite(wheel_radius)) {
    throw std::invalid_argument("robot geometry: wheel_radius must be positive");
  }
  if (!(track_width > 0.0) || !std::isfinite(track_width)) {
    throw std::invalid_argument("robot geometry: track_width must be positive");
  }
}

PoseRate unicycle_rate(const Pose& pose, const VelocityCommand& cmd, double c) {
  const double ct = std::cos(pose.theta);
  const double st = std::sin(pose.theta);
  return {cmd.v * ct - c * cmd.omega * st, cmd.v * st + c * cmd.omega * ct, cmd.omega};
}

Pose integrate_step(const Pose& pose, const VelocityCommand& cmd, double c, double dt) {
  if (!(dt >= 0.0)) {
    throw std::invalid_argument("integrate_step: dt must be non-negative");
  }
  if (dt == 0.0) {
    return {pose.x, pose.y, wrap_angle(pose.theta)};
  }
  using State = std::array<double, 3>;
  const State y0{pose.x, pose.y, pose.theta};
  const State y1 = rk4_step(y0, 0.0, dt, [&](double, const State& s) {
    const PoseRate r = unicycle_rate({s[0], s[1], s[2]}, cmd, c);
    return State{r.dx, r.dy, r.dtheta};
  });
  return {y1[0], y1[1], wrap_angle(y1[2])};
}

WheelSpeeds wheel_speeds(const VelocityCommand& cmd, const RobotGeometry& geom) {
  if (!(geom.wheel_radius > 0.0)) {
    throw std::invalid_argument("wheel_speeds: wheel_radius must be positive");
  }
  if (!(geom.track_width > 0.0)) {
    throw std::invalid_argument("wheel_speeds: track_width must be positive");
  }
  const double half_track = 0.5 * geom.track_width;
  return {(cmd.v - cmd.omega * half_track) / geom.wheel_radius,
          (cmd.v + cmd.omega * half_track) / geom.wheel_radius};
}

bool is_finite(const VelocityCommand& cmd) {
  return std::isfinite(cmd.v) && std::isfinite(cmd.omega);
}

}  // namespace tvf
