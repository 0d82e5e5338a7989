#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tvf/controllers.hpp"
#include "tvf/exprlang.hpp"
#include "tvf/formation.hpp"
#include "tvf/fuzzy.hpp"
#include "tvf/kinematics.hpp"

namespace tvf::sim {

enum class ControllerKind { Backstepping, FuzzyAdaptive };

const char* to_string(ControllerKind kind);

struct LeaderSpec {
  Pose initial;
  expr::Expr v;
  expr::Expr omega;
};

/// Formation parameters as functions of time. Rates are supplied by the
/// user rather than differentiated.
struct FormationSpec {
  expr::Expr l;
  expr::Expr l_rate;
  expr::Expr alpha;
  expr::Expr alpha_rate;

  FormationSample at(double t) const;
};

struct FollowerSpec {
  std::string name;
  Pose initial;
  FormationSpec formation;
  ControllerKind kind = ControllerKind::Backstepping;
  double k1 = 3.0;
  double k2 = 3.0;
  double k3 = 4.0;
  CommandLimits limits;
};

struct Scenario {
  LeaderSpec leader;
  std::vector<FollowerSpec> followers;
  RobotGeometry geometry;
  fuzzy::TunerConfig fuzzy;
  double dt = 1e-3;
  double horizon = 0.0;

  /// Throws std::invalid_argument on any violated precondition.
  void validate() const;
  std::size_t steps() const;
};

/// Copy of `scenario` with every follower switched to `kind`.
Scenario with_controller(Scenario scenario, ControllerKind kind);

struct LyapunovValues {
  double v1 = 0.0;
  double v2 = 0.0;
};

/// V1 = (ex^2 + ey^2) / 2, V2 = V1 + k4 eth^2.
LyapunovValues lyapunov(const LocalError& e_hat, const Gains& gains);

/// Analytic dV2/dt = -k1 ex^2 - k2 ey^2 - k5 eth^2 under the backstepping law.
double lyapunov_rate(const LocalError& e_hat, const Gains& gains);

/// Everything recorded for one follower at one instant.
struct FollowerSample {
  Pose pose;
  LocalError e_hat;
  LocalErrorRate e_hat_rate;
  VelocityCommand cmd;
  WheelSpeeds wheels;
  Gains gains;
  double omega_d = 0.0;
  double theta_d = 0.0;
  double v1 = 0.0;
  double v2 = 0.0;
  double l_actual = 0.0;
  double l_desired = 0.0;
};

struct TraceRow {
  double t = 0.0;
  Pose leader;
  std::span<const FollowerSample> followers;
};

/// Time-indexed record of one run. Row k is at t = k * dt.
class Trace {
 public:
  Trace(std::vector<std::string> names, std::vector<ControllerKind> kinds, double dt,
        std::size_t expected_rows);

  void append(const Pose& leader, std::span<const FollowerSample> followers);

  std::size_t rows() const { return leader_.size(); }
  std::size_t follower_count() const { return names_.size(); }
  double dt() const { return dt_; }
  double time(std::size_t row) const { return static_cast<double>(row) * dt_; }
  const Pose& leader(std::size_t row) const { return leader_[row]; }
  const FollowerSample& sample(std::size_t row, std::size_t follower) const {
    return samples_[row * names_.size() + follower];
  }
  TraceRow row(std::size_t k) const;

  const std::vector<std::string>& names() const { return names_; }
  const std::vector<ControllerKind>& kinds() const { return kinds_; }

 private:
  std::vector<std::string> names_;
  std::vector<ControllerKind> kinds_;
  double dt_;
  std::vector<Pose> leader_;
  std::vector<FollowerSample> samples_;
};

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Closed loop of the leader and one follower. The state packs the leader
/// pose, the follower pose and the desired heading, all unwrapped.
class FollowerLoop {
 public:
  using State = std::array<double, 7>;

  struct Evaluation {
    FormationSample spec;
    VelocityCommand leader_cmd;
    Pose leader;
    Pose follower;
    Pose desired;
    GlobalError error;
    LocalError e_hat;
    FrameAngles angles;
    ControlOutput control;
    LocalErrorRate rates;
  };

  FollowerLoop(const Scenario& scenario, std::size_t follower);

  State initial_state() const;
  Evaluation evaluate(const State& s, double t, const Gains& gains) const;
  State derivative(const State& s, double t, const Gains& gains) const;
  /// One RK4 step with gains held, control law evaluated at every stage.
  State step(const State& s, double t, double dt, const Gains& gains) const;

  /// Gains for the coming step. `previous` is used only by the fuzzy
  /// controller, to evaluate the error rates fed to the tuner.
  Gains gains_for(const State& s, double t, const std::optional<Gains>& previous) const;

  FollowerSample sample(const State& s, double t, const Gains& gains) const;

 private:
  LeaderSpec leader_;
  FollowerSpec follower_;
  double c_;
  RobotGeometry geometry_;
  fuzzy::GainTuner tuner_;
  Gains fixed_gains_;
};

/// Runs the scenario to its horizon. Throws SimulationError if any state
/// becomes non-finite and propagates expression evaluation errors.
Trace run(const Scenario& scenario);

struct ControllerSummary {
  double max_left = 0.0;  // max |left wheel|, rad/s
  double max_right = 0.0;
  double peak_left = 0.0;  // signed value at that maximum
  double peak_right = 0.0;
  double max_v = 0.0;
  double max_omega = 0.0;
  double initial_error_norm = 0.0;
  double final_error_norm = 0.0;
  std::optional<double> settling_time;
};

/// 100 (1 - fabc / bc) when bc > 0, otherwise 0.
double percent_decrease(double max_bc, double max_fabc);

double error_norm(const LocalError& e_hat);

/// First time the local error norm drops below `fraction` of its initial
/// value (time 0 when the initial error is already zero).
std::optional<double> settling_time(const Trace& trace, std::size_t follower,
                                    double fraction = 0.01);

ControllerSummary summarize(const Trace& trace, std::size_t follower);

struct FollowerComparison {
  std::string name;
  ControllerSummary bc;
  ControllerSummary fabc;
  double left_decrease = 0.0;  // percent
  double right_decrease = 0.0;
  double v_decrease = 0.0;
  double omega_decrease = 0.0;
};

struct ComparisonReport {
  std::vector<FollowerComparison> followers;
};

/// Throws std::invalid_argument unless both traces come from the same
/// scenario (same step, length, followers and leader trajectory).
ComparisonReport compare(const Trace& trace_bc, const Trace& trace_fabc);

}  // namespace tvf::sim
