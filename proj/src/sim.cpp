#include "tvf/sim.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "tvf/angles.hpp"

namespace tvf::sim {

const char* to_string(ControllerKind kind) {
  return kind == ControllerKind::Backstepping ? "bc" : "fabc";
}

FormationSample FormationSpec::at(double t) const {
  return {l.eval(t), l_rate.eval(t), alpha.eval(t), alpha_rate.eval(t)};
}

void Scenario::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("horizon must be non-negative");
  }
  geometry.validate();
  if (!(geometry.c > 0.0)) throw std::invalid_argument("offset c must be positive");
  if (followers.empty()) throw std::invalid_argument("scenario needs at least one follower");
  fuzzy.validate();
  std::set<std::string> names;
  for (const auto& f : followers) {
    if (!names.insert(f.name).second) {
      throw std::invalid_argument("duplicate follower name '" + f.name + "'");
    }
    derive_gains(f.k1, f.k2, f.k3, geometry.c);
    for (const auto& lim : {f.limits.max_v, f.limits.max_omega}) {
      if (lim && !(*lim > 0.0)) throw std::invalid_argument("command limits must be positive");
    }
  }
}

std::size_t Scenario::steps() const {
  const double n = horizon / dt;
  const double rounded = std::round(n);
  // Tolerate representation error in T/dt, e.g. 120 / 0.001.
  if (std::abs(n - rounded) <= 1e-9 * std::max(1.0, n)) return static_cast<std::size_t>(rounded);
  return static_cast<std::size_t>(std::floor(n));
}

Scenario with_controller(Scenario scenario, ControllerKind kind) {
  for (auto& f : scenario.followers) f.kind = kind;
  return scenario;
}

LyapunovValues lyapunov(const LocalError& e_hat, const Gains& gains) {
  const double v1 = 0.5 * (e_hat.ex_hat * e_hat.ex_hat + e_hat.ey_hat * e_hat.ey_hat);
  return {v1, v1 + gains.k4 * e_hat.etheta_hat * e_hat.etheta_hat};
}

double lyapunov_rate(const LocalError& e_hat, const Gains& gains) {
  return -gains.k1 * e_hat.ex_hat * e_hat.ex_hat - gains.k2 * e_hat.ey_hat * e_hat.ey_hat -
         gains.k5 * e_hat.etheta_hat * e_hat.etheta_hat;
}

Trace::Trace(std::vector<std::string> names, std::vector<ControllerKind> kinds, double dt,
             std::size_t expected_rows)
    : names_(std::move(names)), kinds_(std::move(kinds)), dt_(dt) {
  leader_.reserve(expected_rows);
  samples_.reserve(expected_rows * names_.size());
}

void Trace::append(const Pose& leader, std::span<const FollowerSample> followers) {
  if (followers.size() != names_.size()) {
    throw std::invalid_argument("Trace::append: follower count mismatch");
  }
  leader_.push_back(leader);
  samples_.insert(samples_.end(), followers.begin(), followers.end());
}

TraceRow Trace::row(std::size_t k) const {
  return {time(k), leader_[k],
          std::span<const FollowerSample>(samples_.data() + k * names_.size(), names_.size())};
}

FollowerLoop::FollowerLoop(const Scenario& scenario, std::size_t follower)
    : leader_(scenario.leader),
      follower_(scenario.followers.at(follower)),
      c_(scenario.geometry.c),
      geometry_(scenario.geometry),
      tuner_(scenario.fuzzy),
      fixed_gains_(derive_gains(follower_.k1, follower_.k2, follower_.k3, c_)) {}

FollowerLoop::State FollowerLoop::initial_state() const {
  const Pose& l = leader_.initial;
  const Pose& f = follower_.initial;
  // Desired heading starts on the follower's heading: zero initial heading error.
  return {l.x, l.y, l.theta, f.x, f.y, f.theta, f.theta};
}

FollowerLoop::Evaluation FollowerLoop::evaluate(const State& s, double t,
                                                const Gains& gains) const {
  Evaluation ev;
  ev.spec = follower_.formation.at(t);
  ev.leader_cmd = {leader_.v.eval(t), leader_.omega.eval(t)};
  ev.leader = {s[0], s[1], s[2]};
  ev.follower = {s[3], s[4], s[5]};
  ev.desired = desired_pose(ev.leader, ev.spec, c_, s[6]);
  ev.error = global_error(ev.desired, ev.follower);
  ev.e_hat = to_local(ev.error, ev.follower.theta);
  ev.angles = frame_angles(ev.leader.theta, ev.follower.theta, ev.spec.alpha_d);
  ev.control = backstepping_command(ev.e_hat, ev.leader_cmd, ev.angles, ev.spec, gains, c_);
  if (follower_.limits.active()) ev.control.cmd = saturate(ev.control.cmd, follower_.limits);
  ev.rates = error_rates(ev.e_hat, ev.angles, ev.leader_cmd, ev.control.cmd, ev.spec,
                         ev.control.omega_d, c_);
  return ev;
}

FollowerLoop::State FollowerLoop::derivative(const State& s, double t, const Gains& gains) const {
  const Evaluation ev = evaluate(s, t, gains);
  const PoseRate leader_rate = unicycle_rate(ev.leader, ev.leader_cmd, c_);
  const PoseRate follower_rate = unicycle_rate(ev.follower, ev.control.cmd, c_);
  return {leader_rate.dx,   leader_rate.dy,   leader_rate.dtheta,  follower_rate.dx,
          follower_rate.dy, follower_rate.dtheta, ev.control.omega_d};
}

FollowerLoop::State FollowerLoop::step(const State& s, double t, double dt,
                                       const Gains& gains) const {
  return rk4_step(s, t, dt,
                  [&](double tau, const State& y) { return derivative(y, tau, gains); });
}

Gains FollowerLoop::gains_for(const State& s, double t, const std::optional<Gains>& previous) const {
  if (follower_.kind == ControllerKind::Backstepping) return fixed_gains_;

  auto tuned = [&](const LocalError& e_hat, const LocalErrorRate& rates) {
    const fuzzy::TunedGains g = tuner_.tune(e_hat, rates);
    return derive_gains(g.k1, g.k2, g.k3, c_);
  };
  if (previous) {
    const Evaluation ev = evaluate(s, t, *previous);
    return tuned(ev.e_hat, ev.rates);
  }
  // First step: the rates depend on the gains being chosen, so iterate from
  // the zero-rate guess towards a consistent pair.
  const Evaluation ev0 = evaluate(s, t, fixed_gains_);
  Gains g = tuned(ev0.e_hat, LocalErrorRate{});
  for (int i = 0; i < 50; ++i) {
    const Gains next = tuned(ev0.e_hat, evaluate(s, t, g).rates);
    const bool settled = std::abs(next.k1 - g.k1) < 1e-12 && std::abs(next.k2 - g.k2) < 1e-12;
    g = next;
    if (settled) break;
  }
  return g;
}

FollowerSample FollowerLoop::sample(const State& s, double t, const Gains& gains) const {
  const Evaluation ev = evaluate(s, t, gains);
  FollowerSample out;
  out.pose = {ev.follower.x, ev.follower.y, wrap_angle(ev.follower.theta)};
  out.e_hat = ev.e_hat;
  out.e_hat_rate = ev.rates;
  out.cmd = ev.control.cmd;
  out.wheels = wheel_speeds(ev.control.cmd, geometry_);
  out.gains = gains;
  out.omega_d = ev.control.omega_d;
  out.theta_d = wrap_angle(s[6]);
  const LyapunovValues v = lyapunov(ev.e_hat, gains);
  out.v1 = v.v1;
  out.v2 = v.v2;
  out.l_actual = actual_distance(ev.leader, ev.follower, c_);
  out.l_desired = ev.spec.l_d;
  return out;
}

namespace {

bool all_finite(const FollowerLoop::State& s) {
  return std::all_of(s.begin(), s.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

Trace run(const Scenario& scenario) {
  scenario.validate();
  const std::size_t n_followers = scenario.followers.size();
  const std::size_t steps = scenario.steps();

  std::vector<std::string> names;
  std::vector<ControllerKind> kinds;
  std::vector<FollowerLoop> loops;
  std::vector<FollowerLoop::State> states;
  std::vector<std::optional<Gains>> gains(n_followers);
  for (std::size_t i = 0; i < n_followers; ++i) {
    names.push_back(scenario.followers[i].name);
    kinds.push_back(scenario.followers[i].kind);
    loops.emplace_back(scenario, i);
    states.push_back(loops.back().initial_state());
  }

  Trace trace(names, kinds, scenario.dt, steps + 1);
  std::vector<FollowerSample> row(n_followers);
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * scenario.dt;
    for (std::size_t i = 0; i < n_followers; ++i) {
      gains[i] = loops[i].gains_for(states[i], t, gains[i]);
      row[i] = loops[i].sample(states[i], t, *gains[i]);
    }
    const auto& s0 = states.front();
    trace.append(Pose{s0[0], s0[1], wrap_angle(s0[2])}, row);
    if (k == steps) break;

    for (std::size_t i = 0; i < n_followers; ++i) {
      states[i] = loops[i].step(states[i], t, scenario.dt, *gains[i]);
      if (!all_finite(states[i])) {
        throw SimulationError("non-finite state for follower '" + names[i] + "' at t = " +
                              std::to_string(static_cast<double>(k + 1) * scenario.dt));
      }
    }
  }
  return trace;
}

double percent_decrease(double max_bc, double max_fabc) {
  if (!(max_bc > 0.0)) return 0.0;
  return 100.0 * (1.0 - max_fabc / max_bc);
}

double error_norm(const LocalError& e) {
  return std::sqrt(e.ex_hat * e.ex_hat + e.ey_hat * e.ey_hat + e.etheta_hat * e.etheta_hat);
}

std::optional<double> settling_time(const Trace& trace, std::size_t follower, double fraction) {
  if (trace.rows() == 0) return std::nullopt;
  const double threshold = fraction * error_norm(trace.sample(0, follower).e_hat);
  if (threshold == 0.0) return 0.0;
  for (std::size_t k = 0; k < trace.rows(); ++k) {
    if (error_norm(trace.sample(k, follower).e_hat) < threshold) return trace.time(k);
  }
  return std::nullopt;
}

ControllerSummary summarize(const Trace& trace, std::size_t follower) {
  ControllerSummary s;
  for (std::size_t k = 0; k < trace.rows(); ++k) {
    const FollowerSample& f = trace.sample(k, follower);
    if (std::abs(f.wheels.left) > s.max_left) {
      s.max_left = std::abs(f.wheels.left);
      s.peak_left = f.wheels.left;
    }
    if (std::abs(f.wheels.right) > s.max_right) {
      s.max_right = std::abs(f.wheels.right);
      s.peak_right = f.wheels.right;
    }
    s.max_v = std::max(s.max_v, std::abs(f.cmd.v));
    s.max_omega = std::max(s.max_omega, std::abs(f.cmd.omega));
  }
  if (trace.rows() > 0) {
    s.initial_error_norm = error_norm(trace.sample(0, follower).e_hat);
    s.final_error_norm = error_norm(trace.sample(trace.rows() - 1, follower).e_hat);
  }
  s.settling_time = settling_time(trace, follower);
  return s;
}

ComparisonReport compare(const Trace& trace_bc, const Trace& trace_fabc) {
  if (trace_bc.dt() != trace_fabc.dt() || trace_bc.rows() != trace_fabc.rows() ||
      trace_bc.names() != trace_fabc.names()) {
    throw std::invalid_argument("compare: traces come from different scenarios");
  }
  for (std::size_t k = 0; k < trace_bc.rows(); ++k) {
    const Pose& a = trace_bc.leader(k);
    const Pose& b = trace_fabc.leader(k);
    if (a.x != b.x || a.y != b.y || a.theta != b.theta) {
      throw std::invalid_argument("compare: leader trajectories differ");
    }
  }
  ComparisonReport report;
  for (std::size_t i = 0; i < trace_bc.follower_count(); ++i) {
    FollowerComparison fc;
    fc.name = trace_bc.names()[i];
    fc.bc = summarize(trace_bc, i);
    fc.fabc = summarize(trace_fabc, i);
    fc.left_decrease = percent_decrease(fc.bc.max_left, fc.fabc.max_left);
    fc.right_decrease = percent_decrease(fc.bc.max_right, fc.fabc.max_right);
    fc.v_decrease = percent_decrease(fc.bc.max_v, fc.fabc.max_v);
    fc.omega_decrease = percent_decrease(fc.bc.max_omega, fc.fabc.max_omega);
    report.followers.push_back(std::move(fc));
  }
  return report;
}

}  // namespace tvf::sim
