#include "tvf/formation.hpp"

#include <cmath>
#include <stdexcept>

#include "tvf/angles.hpp"

namespace tvf {

void FormationSample::validate() const {
  if (!std::isfinite(l_d) || !std::isfinite(l_d_rate) || !std::isfinite(alpha_d) ||
      !std::isfinite(alpha_d_rate)) {
    throw std::invalid_argument("formation sample: all fields must be finite");
  }
}

FrameAngles frame_angles(double theta_leader, double theta_follower, double alpha_d) {
  return {alpha_d + theta_leader - theta_follower, theta_leader - theta_follower};
}

Pose desired_pose(const Pose& leader, const FormationSample& spec, double c, double theta_d) {
  const double beta = spec.alpha_d + leader.theta;
  return {leader.x - c * std::cos(leader.theta) + spec.l_d * std::cos(beta),
          leader.y - c * std::sin(leader.theta) + spec.l_d * std::sin(beta), theta_d};
}

PoseRate desired_pose_rate(const Pose& leader, const VelocityCommand& leader_cmd,
                           const FormationSample& spec, double omega_d) {
  // The -c cos(theta_l) offset cancels the c-term of the leader's own rate.
  const double beta = spec.alpha_d + leader.theta;
  const double beta_rate = spec.alpha_d_rate + leader_cmd.omega;
  const double cb = std::cos(beta);
  const double sb = std::sin(beta);
  return {leader_cmd.v * std::cos(leader.theta) + spec.l_d_rate * cb - spec.l_d * beta_rate * sb,
          leader_cmd.v * std::sin(leader.theta) + spec.l_d_rate * sb + spec.l_d * beta_rate * cb,
          omega_d};
}

GlobalError global_error(const Pose& desired, const Pose& actual) {
  return {desired.x - actual.x, desired.y - actual.y, angle_diff(desired.theta, actual.theta)};
}

LocalError to_local(const GlobalError& e, double theta_f) {
  const double ct = std::cos(theta_f);
  const double st = std::sin(theta_f);
  return {ct * e.ex + st * e.ey, -st * e.ex + ct * e.ey, e.etheta};
}

GlobalError from_local(const LocalError& e_hat, double theta_f) {
  const double ct = std::cos(theta_f);
  const double st = std::sin(theta_f);
  return {ct * e_hat.ex_hat - st * e_hat.ey_hat, st * e_hat.ex_hat + ct * e_hat.ey_hat,
          e_hat.etheta_hat};
}

LocalErrorRate error_rates(const LocalError& e_hat, const FrameAngles& angles,
                           const VelocityCommand& leader_cmd, const VelocityCommand& follower_cmd,
                           const FormationSample& spec, double omega_d, double c) {
  const double cg = std::cos(angles.gamma);
  const double sg = std::sin(angles.gamma);
  const double v_l = leader_cmd.v;
  const double w_l = leader_cmd.omega;
  const double v_f = follower_cmd.v;
  const double w_f = follower_cmd.omega;
  const double l = spec.l_d;

  LocalErrorRate r;
  r.ex_hat = w_f * e_hat.ey_hat + v_l * std::cos(angles.lambda) + spec.l_d_rate * cg - v_f -
             l * w_l * sg - l * spec.alpha_d_rate * sg;
  // The offset term carries the follower's own turn rate (c w_f).
  r.ey_hat = v_l * std::sin(angles.lambda) + l * w_l * cg + spec.l_d_rate * sg +
             l * spec.alpha_d_rate * cg - w_f * e_hat.ex_hat - c * w_f;
  r.etheta_hat = omega_d - w_f;
  return r;
}

PlanarVelocity remap_global_rates(const LocalErrorRate& e_hat_rate, const GlobalError& e,
                                  double theta_f, double omega_f, const PoseRate& desired_rate) {
  const double ct = std::cos(theta_f);
  const double st = std::sin(theta_f);
  const double vartheta = -e_hat_rate.ex_hat - omega_f * st * e.ex + omega_f * ct * e.ey +
                          ct * desired_rate.dx + st * desired_rate.dy;
  const double sigma = e_hat_rate.ey_hat + omega_f * ct * e.ex + omega_f * st * e.ey +
                       st * desired_rate.dx - ct * desired_rate.dy;
  return {ct * vartheta + st * sigma, st * vartheta - ct * sigma};
}

double actual_distance(const Pose& leader, const Pose& follower, double c) {
  return std::hypot(follower.x - leader.x + c * std::cos(leader.theta),
                    follower.y - leader.y + c * std::sin(leader.theta));
}

}  // namespace tvf
