#pragma once

#include <optional>

#include "tvf/formation.hpp"
#include "tvf/kinematics.hpp"

namespace tvf {

/// Backstepping gains. k4 and k5 are derived so that the composite
/// Lyapunov function V2 = (ex^2 + ey^2)/2 + k4 eth^2 has
/// dV2/dt = -k1 ex^2 - k2 ey^2 - k5 eth^2.
struct Gains {
  double k1 = 0.0;
  double k2 = 0.0;
  double k3 = 0.0;
  double k4 = 0.0;  // c k3 / (2 k2)
  double k5 = 0.0;  // k3^2 / k2
};

/// Throws std::invalid_argument unless k1, k2, k3 and c are all positive.
Gains derive_gains(double k1, double k2, double k3, double c);

struct ControlOutput {
  VelocityCommand cmd;
  double omega_d = 0.0;  // desired angular velocity of the follower
};

/// Optional symmetric command limits; both unset by default.
struct CommandLimits {
  std::optional<double> max_v;
  std::optional<double> max_omega;

  bool active() const { return max_v.has_value() || max_omega.has_value(); }
};

/// Backstepping law
///   v_f  = v_l cos(lambda) + l' cos(gamma) - l (w_l + alpha') sin(gamma) + k1 ex
///   w_f  = (F + k2 ey + k3 eth) / c
///   w_d  = (F + 2 k2 ey) / c
/// with F = v_l sin(lambda) + l (w_l + alpha') cos(gamma) + l' sin(gamma).
/// Throws std::invalid_argument on c <= 0.
ControlOutput backstepping_command(const LocalError& e_hat, const VelocityCommand& leader_cmd,
                                   const FrameAngles& angles, const FormationSample& spec,
                                   const Gains& gains, double c);

VelocityCommand saturate(const VelocityCommand& cmd, const CommandLimits& limits);

/// theta_d + omega_d dt, wrapped. Throws on dt < 0.
double update_desired_heading(double theta_d, double omega_d, double dt);

}  // namespace tvf
