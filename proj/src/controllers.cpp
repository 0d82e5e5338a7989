#include "tvf/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tvf/angles.hpp"

namespace tvf {

Gains derive_gains(double k1, double k2, double k3, double c) {
  if (!(k1 > 0.0) || !(k2 > 0.0) || !(k3 > 0.0)) {
    throw std::invalid_argument("controller gains must be positive");
  }
  if (!(c > 0.0)) {
    throw std::invalid_argument("offset c must be positive");
  }
  return {k1, k2, k3, c * k3 / (2.0 * k2), k3 * k3 / k2};
}

ControlOutput backstepping_command(const LocalError& e_hat, const VelocityCommand& leader_cmd,
                                   const FrameAngles& angles, const FormationSample& spec,
                                   const Gains& gains, double c) {
  if (!(c > 0.0)) {
    throw std::invalid_argument("backstepping_command: c must be positive");
  }
  const double cg = std::cos(angles.gamma);
  const double sg = std::sin(angles.gamma);
  const double turn = leader_cmd.omega + spec.alpha_d_rate;

  const double feed_v = leader_cmd.v * std::cos(angles.lambda) + spec.l_d_rate * cg -
                        spec.l_d * turn * sg;
  const double feed_w = leader_cmd.v * std::sin(angles.lambda) + spec.l_d * turn * cg +
                        spec.l_d_rate * sg;

  ControlOutput out;
  out.cmd.v = feed_v + gains.k1 * e_hat.ex_hat;
  out.cmd.omega = (feed_w + gains.k2 * e_hat.ey_hat + gains.k3 * e_hat.etheta_hat) / c;
  out.omega_d = (feed_w + 2.0 * gains.k2 * e_hat.ey_hat) / c;
  return out;
}

VelocityCommand saturate(const VelocityCommand& cmd, const CommandLimits& limits) {
  VelocityCommand out = cmd;
  if (limits.max_v) {
    out.v = std::clamp(out.v, -*limits.max_v, *limits.max_v);
  }
  if (limits.max_omega) {
    out.omega = std::clamp(out.omega, -*limits.max_omega, *limits.max_omega);
  }
  return out;
}

double update_desired_heading(double theta_d, double omega_d, double dt) {
  if (!(dt >= 0.0)) {
    throw std::invalid_argument("update_desired_heading: dt must be non-negative");
  }
  return wrap_angle(theta_d + omega_d * dt);
}

}  // namespace tvf
