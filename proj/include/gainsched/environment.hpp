#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "gainsched/cascade.hpp"
#include "gainsched/dynamics.hpp"
#include "gainsched/trajectory.hpp"

namespace gainsched {

// Policy action: one normalized value per gain, each in [-1, 1].
struct ActionVector {
  std::array<double, 6> a{};

  ActionVector clamped() const {
    ActionVector out;
    for (int i = 0; i < 6; ++i) out.a[i] = std::clamp(a[i], -1.0, 1.0);
    return out;
  }
};

enum class EpisodeOutcome { Running, TimeOut, Deviation, Success };

inline const char* to_string(EpisodeOutcome o) {
  switch (o) {
    case EpisodeOutcome::Running: return "Running";
    case EpisodeOutcome::TimeOut: return "TimeOut";
    case EpisodeOutcome::Deviation: return "Deviation";
    case EpisodeOutcome::Success: return "Success";
  }
  return "?";
}

// Affine map from [-1,1]^6 onto the per-gain ranges.
inline GainVector rescale_action(const ActionVector& action,
                                 const GainBounds& bounds = {}) {
  std::array<double, 6> g;
  for (int i = 0; i < 6; ++i) {
    const double u = (action.a[i] + 1.0) / 2.0;
    g[i] = bounds.lo[i] * (1.0 - u) + bounds.hi[i] * u; // endpoints map exactly
  }
  return GainVector::from_array(g);
}

struct EnvConfig {
  QuadParams params;
  double dt = 0.02;
  double deviation_limit = 10.0;   // [m] from current reference
  double timeout_factor = 1.2;     // of expected duration
  double success_pos_tol = 0.1;    // [m]
  double success_vel_tol = 0.1;    // [m/s]
  double eps_div = 1e-6;           // guards deviation-ratio and success ISE divisions
  GainBounds gain_bounds;
};

// Reward: -1 time-out, -5 deviation, 10/ISE on success,
// 0.05*min(prev/curr - 1, 2) while running.
inline double compute_reward(EpisodeOutcome outcome, double accumulated_ise,
                             double prev_dev, double curr_dev,
                             double eps_div = 1e-6) {
  switch (outcome) {
    case EpisodeOutcome::TimeOut: return -1.0;
    case EpisodeOutcome::Deviation: return -5.0;
    case EpisodeOutcome::Success: return 10.0 / std::max(accumulated_ise, eps_div);
    case EpisodeOutcome::Running:
      return 0.05 * std::min(prev_dev / std::max(curr_dev, eps_div) - 1.0, 2.0);
  }
  return 0.0;
}

struct StepResult {
  ErrorVector observation;
  double reward = 0.0;
  EpisodeOutcome outcome = EpisodeOutcome::Running;
};

// One episode's MDP: binds dynamics, cascade controller and a trajectory.
class Environment {
 public:
  Environment(Trajectory traj, EnvConfig cfg = {})
      : cfg_(cfg), traj_(std::move(traj)) {
    if (!cfg_.params.valid()) throw std::invalid_argument("environment: invalid quad params");
    reset();
  }

  ErrorVector reset() {
    quad_ = QuadState{};
    t_ = 0.0;
    step_index_ = 0;
    accumulated_ise_ = 0.0;
    terminal_ = false;
    gains_ = cfg_.gain_bounds.midpoint();
    prev_deviation_ = deviation();
    last_thrusts_ = RotorThrusts{};
    last_reward_ = 0.0;
    return observe();
  }

  void set_trajectory(Trajectory traj) {
    traj_ = std::move(traj);
    reset();
  }

  StepResult step(const ActionVector& action) {
    return step_with_gains(rescale_action(action.clamped(), cfg_.gain_bounds));
  }

  // Direct gain path used for static-gain evaluation; the action path feeds
  // through rescale_action into here.
  StepResult step_with_gains(const GainVector& gains) {
    if (terminal_) throw std::logic_error("environment: step after terminal outcome");
    gains_ = gains;

    const auto cascade = compute_cascade(quad_, traj_.at(t_), gains_, cfg_.params);
    last_thrusts_ = cascade.thrusts;
    const auto next = step_rk4(quad_, cascade.thrusts, cfg_.params, cfg_.dt);
    if (!next) throw std::runtime_error("environment: non-finite state after integration");
    quad_ = *next;
    t_ += cfg_.dt;
    ++step_index_;

    const RefPoint ref = traj_.at(t_);
    const double ex = ref.x - quad_.px;
    const double ey = ref.y - quad_.py;
    accumulated_ise_ += (ex * ex + ey * ey) * cfg_.dt;

    StepResult res;
    res.outcome = check_termination();
    const double curr_dev = deviation();
    res.reward = compute_reward(res.outcome, accumulated_ise_, prev_deviation_,
                                curr_dev, cfg_.eps_div);
    prev_deviation_ = curr_dev;
    terminal_ = res.outcome != EpisodeOutcome::Running;
    res.observation = observe();
    last_reward_ = res.reward;
    return res;
  }

  // Deviation first, then time-out, then success.
  EpisodeOutcome check_termination() const {
    if (deviation() > cfg_.deviation_limit) return EpisodeOutcome::Deviation;
    const double expected = expected_duration(traj_);
    if (t_ > cfg_.timeout_factor * expected) return EpisodeOutcome::TimeOut;
    if (t_ >= traj_.nominal_duration() - 1e-12) {
      const RefPoint term = traj_.terminal();
      const double pos_err = std::hypot(term.x - quad_.px, term.y - quad_.py);
      const double speed = std::hypot(quad_.vx, quad_.vy);
      if (pos_err < cfg_.success_pos_tol && speed < cfg_.success_vel_tol)
        return EpisodeOutcome::Success;
    }
    return EpisodeOutcome::Running;
  }

  double deviation() const {
    const RefPoint ref = traj_.at(t_);
    return std::hypot(ref.x - quad_.px, ref.y - quad_.py);
  }

  ErrorVector observe() const {
    return compute_cascade(quad_, traj_.at(t_), gains_, cfg_.params).errors;
  }

  const QuadState& quad() const { return quad_; }
  const Trajectory& trajectory() const { return traj_; }
  const GainVector& gains() const { return gains_; }
  const RotorThrusts& last_thrusts() const { return last_thrusts_; }
  double last_reward() const { return last_reward_; }
  double time() const { return t_; }
  long step_index() const { return step_index_; }
  double accumulated_ise() const { return accumulated_ise_; }
  bool terminal() const { return terminal_; }
  const EnvConfig& config() const { return cfg_; }

 private:
  EnvConfig cfg_;
  Trajectory traj_;
  QuadState quad_;
  GainVector gains_;
  RotorThrusts last_thrusts_;
  double t_ = 0.0;
  long step_index_ = 0;
  double accumulated_ise_ = 0.0;
  double prev_deviation_ = 0.0;
  double last_reward_ = 0.0;
  bool terminal_ = false;
};

} // namespace gainsched
