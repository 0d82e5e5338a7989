#pragma once

#include "tvf/kinematics.hpp"

namespace tvf {

/// Time-varying formation parameters at one instant. A negative distance is
/// allowed and places the follower on the reflected bearing.
struct FormationSample {
  double l_d = 0.0;           // desired relative distance (m)
  double l_d_rate = 0.0;      // m/s
  double alpha_d = 0.0;       // desired relative bearing (rad)
  double alpha_d_rate = 0.0;  // rad/s

  void validate() const;
};

/// Tracking error in the world frame; etheta wrapped to (-pi, pi].
struct GlobalError {
  double ex = 0.0;
  double ey = 0.0;
  double etheta = 0.0;
};

/// Tracking error expressed in the follower's body frame.
struct LocalError {
  double ex_hat = 0.0;
  double ey_hat = 0.0;
  double etheta_hat = 0.0;
};

struct LocalErrorRate {
  double ex_hat = 0.0;
  double ey_hat = 0.0;
  double etheta_hat = 0.0;
};

/// gamma = alpha_d + theta_l - theta_f, lambda = theta_l - theta_f.
/// Left unwrapped; they only ever enter through sin/cos.
struct FrameAngles {
  double gamma = 0.0;
  double lambda = 0.0;
};

FrameAngles frame_angles(double theta_leader, double theta_follower, double alpha_d);

/// Desired follower pose from the leader pose and the formation sample:
///   x_d = x_l - c cos(theta_l) + l_d cos(beta),  beta = alpha_d + theta_l
///   y_d = y_l - c sin(theta_l) + l_d sin(beta)
/// The desired heading is not geometric; the caller owns it.
Pose desired_pose(const Pose& leader, const FormationSample& spec, double c, double theta_d);

/// Time derivative of desired_pose for an open-loop leader following the
/// unicycle model. dtheta is the supplied desired angular velocity.
PoseRate desired_pose_rate(const Pose& leader, const VelocityCommand& leader_cmd,
                           const FormationSample& spec, double omega_d);

GlobalError global_error(const Pose& desired, const Pose& actual);

LocalError to_local(const GlobalError& e, double theta_f);
GlobalError from_local(const LocalError& e_hat, double theta_f);

/// Closed-form local error dynamics:
///   ex' =  w_f ey + v_l cos(lambda) + l' cos(gamma) - v_f - l (w_l + alpha') sin(gamma)
///   ey' =  v_l sin(lambda) + l (w_l + alpha') cos(gamma) + l' sin(gamma) - w_f ex - c w_f
///   eth' = w_d - w_f
LocalErrorRate error_rates(const LocalError& e_hat, const FrameAngles& angles,
                           const VelocityCommand& leader_cmd, const VelocityCommand& follower_cmd,
                           const FormationSample& spec, double omega_d, double c);

struct PlanarVelocity {
  double dx = 0.0;
  double dy = 0.0;
};

/// Recovers the follower's world-frame velocity from local error rates by
/// undoing the body-frame rotation (the inverse of the error mapping).
PlanarVelocity remap_global_rates(const LocalErrorRate& e_hat_rate, const GlobalError& e,
                                  double theta_f, double omega_f, const PoseRate& desired_rate);

/// Actual leader-follower distance measured between the follower axle and
/// the leader's offset-corrected reference, i.e. the quantity that equals
/// |l_d| when the formation is held.
double actual_distance(const Pose& leader, const Pose& follower, double c);

}  // namespace tvf
