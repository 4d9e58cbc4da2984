#pragma once

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "gainsched/environment.hpp"
#include "gainsched/policy.hpp"
#include "gainsched/trajectory.hpp"

namespace gainsched {

struct PosError {
  double ex = 0.0;
  double ey = 0.0;
};

// Left-Riemann sum of squared position error.
inline double ise(const std::vector<PosError>& errors, double dt) {
  if (errors.empty()) throw std::invalid_argument("ise: empty series");
  double acc = 0.0;
  for (const auto& e : errors) acc += (e.ex * e.ex + e.ey * e.ey) * dt;
  return acc;
}

// Left-Riemann sum of time-weighted squared position error, t = index*dt.
inline double itse(const std::vector<PosError>& errors, double dt) {
  if (errors.empty()) throw std::invalid_argument("itse: empty series");
  double acc = 0.0;
  for (std::size_t i = 0; i < errors.size(); ++i)
    acc += i * dt * (errors[i].ex * errors[i].ex + errors[i].ey * errors[i].ey) * dt;
  return acc;
}

struct LogRow {
  double t = 0.0;
  QuadState quad;
  RefPoint ref;
  GainVector gains;
  RotorThrusts thrusts;
  ErrorVector errors;
  double reward = 0.0;
};

struct EpisodeLog {
  std::vector<LogRow> rows;
  EpisodeOutcome outcome = EpisodeOutcome::Running;
  double dt = 0.02;
  double accumulated_ise = 0.0; // environment's in-episode accumulator

  std::vector<PosError> position_errors() const {
    std::vector<PosError> e;
    e.reserve(rows.size());
    for (const auto& r : rows) e.push_back({r.ref.x - r.quad.px, r.ref.y - r.quad.py});
    return e;
  }

  double duration() const { return rows.empty() ? 0.0 : rows.back().t; }

  void export_csv(std::ostream& os) const {
    os << "t,px,py,theta,vx,vy,omega,x_ref,y_ref,kp_x,kp_vx,kp_theta,kp_omega,"
          "kp_y,kp_vy,t1,t2,reward\n";
    char buf[512];
    for (const auto& r : rows) {
      std::snprintf(buf, sizeof(buf),
                    "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                    "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                    r.t, r.quad.px, r.quad.py, r.quad.theta, r.quad.vx, r.quad.vy,
                    r.quad.omega, r.ref.x, r.ref.y, r.gains.kp_x, r.gains.kp_vx,
                    r.gains.kp_theta, r.gains.kp_omega, r.gains.kp_y, r.gains.kp_vy,
                    r.thrusts.t1, r.thrusts.t2, r.reward);
      os << buf;
    }
  }

  static EpisodeLog import_csv(std::istream& is) {
    EpisodeLog log;
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("episode csv: empty file");
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      std::istringstream ss(line);
      std::string tok;
      double v[18];
      for (int i = 0; i < 18; ++i) {
        if (!std::getline(ss, tok, ',')) throw std::runtime_error("episode csv: bad row");
        v[i] = std::stod(tok);
      }
      LogRow r;
      r.t = v[0];
      r.quad = {v[1], v[2], v[3], v[4], v[5], v[6]};
      r.ref = {v[7], v[8]};
      r.gains = {v[9], v[10], v[11], v[12], v[13], v[14]};
      r.thrusts = {v[15], v[16]};
      r.reward = v[17];
      log.rows.push_back(r);
    }
    if (log.rows.size() > 1) log.dt = log.rows[1].t - log.rows[0].t;
    return log;
  }
};

// Either fixed gains or a trained policy evaluated at the actor mean.
using GainSource = std::variant<GainVector, PolicyParams>;

// Run one closed-loop episode to its terminal outcome.
inline EpisodeLog run_episode(const GainSource& source, const Trajectory& traj,
                              const EnvConfig& cfg = {}) {
  if (const auto* g = std::get_if<GainVector>(&source)) {
    if (!cfg.gain_bounds.contains(*g))
      throw std::invalid_argument("run_episode: static gains out of range");
  }

  Environment env(traj, cfg);
  EpisodeLog log;
  log.dt = cfg.dt;
  ErrorVector obs = env.observe();

  while (true) {
    StepResult res;
    if (const auto* g = std::get_if<GainVector>(&source)) {
      res = env.step_with_gains(*g);
    } else {
      res = env.step(mean_action(std::get<PolicyParams>(source), obs));
    }
    obs = res.observation;

    LogRow row;
    row.t = env.time();
    row.quad = env.quad();
    row.ref = env.trajectory().at(env.time());
    row.gains = env.gains();
    row.thrusts = env.last_thrusts();
    row.errors = res.observation;
    row.reward = res.reward;
    log.rows.push_back(row);

    if (res.outcome != EpisodeOutcome::Running) {
      log.outcome = res.outcome;
      log.accumulated_ise = env.accumulated_ise();
      break;
    }
  }
  return log;
}

struct TrajectoryMetrics {
  std::string name;
  EpisodeOutcome baseline_outcome = EpisodeOutcome::Running;
  EpisodeOutcome rl_outcome = EpisodeOutcome::Running;
  std::optional<double> baseline_ise, baseline_itse;
  std::optional<double> rl_ise, rl_itse;
  std::optional<double> pct_diff_ise, pct_diff_itse; // 100*(rl-base)/base
};

struct EvalReport {
  std::vector<TrajectoryMetrics> rows;

  // Published ISE improvement range for a learned scheduler over a hand-tuned
  // static baseline; reported alongside the measured differences for context.
  static constexpr double kReferenceBandLoPct = -44.9;
  static constexpr double kReferenceBandHiPct = -42.6;

  nlohmann::json to_json() const {
    nlohmann::json rows_json = nlohmann::json::array();
    auto put = [](nlohmann::json& o, const char* k, const std::optional<double>& v) {
      if (v) o[k] = *v;
      else o[k] = nullptr;
    };
    for (const auto& r : rows) {
      nlohmann::json o;
      o["trajectory"] = r.name;
      o["baseline_outcome"] = to_string(r.baseline_outcome);
      o["rl_outcome"] = to_string(r.rl_outcome);
      put(o, "baseline_ise", r.baseline_ise);
      put(o, "baseline_itse", r.baseline_itse);
      put(o, "rl_ise", r.rl_ise);
      put(o, "rl_itse", r.rl_itse);
      put(o, "pct_diff_ise", r.pct_diff_ise);
      put(o, "pct_diff_itse", r.pct_diff_itse);
      rows_json.push_back(o);
    }
    nlohmann::json j;
    j["trajectories"] = std::move(rows_json);
    j["reference_band_pct_ise"] = {kReferenceBandLoPct, kReferenceBandHiPct};
    return j;
  }

  // Fixed-width table with ISE, ITSE and percentage-difference columns.
  std::string to_table() const {
    std::ostringstream os;
    os << std::left << std::setw(14) << ""
       << std::right << std::setw(14) << "ISE base" << std::setw(14) << "ISE RL"
       << std::setw(14) << "ITSE base" << std::setw(14) << "ITSE RL"
       << std::setw(12) << "ISE %" << std::setw(12) << "ITSE %" << "\n";
    auto cell = [](const std::optional<double>& v, int w, int prec) {
      std::ostringstream c;
      if (v) c << std::fixed << std::setprecision(prec) << *v;
      else c << "n/a";
      std::ostringstream p;
      p << std::right << std::setw(w) << c.str();
      return p.str();
    };
    for (const auto& r : rows) {
      os << std::left << std::setw(14) << r.name << std::right
         << cell(r.baseline_ise, 14, 3) << cell(r.rl_ise, 14, 3)
         << cell(r.baseline_itse, 14, 3) << cell(r.rl_itse, 14, 3)
         << cell(r.pct_diff_ise, 12, 1) << cell(r.pct_diff_itse, 12, 1) << "\n";
    }
    os << "reference band ISE %: " << std::fixed << std::setprecision(1)
       << kReferenceBandHiPct << " .. " << kReferenceBandLoPct << "\n";
    return os.str();
  }
};

struct NamedTrajectory {
  std::string name;
  Trajectory traj;
};

struct ComparisonLogs {
  std::vector<EpisodeLog> baseline;
  std::vector<EpisodeLog> rl;
};

inline EvalReport compare(const GainVector& baseline, const PolicyParams& policy,
                          const std::vector<NamedTrajectory>& trajectories,
                          const EnvConfig& cfg = {}, ComparisonLogs* logs = nullptr) {
  EvalReport report;
  for (const auto& nt : trajectories) {
    TrajectoryMetrics m;
    m.name = nt.name;

    const EpisodeLog base_log = run_episode(baseline, nt.traj, cfg);
    const EpisodeLog rl_log = run_episode(policy, nt.traj, cfg);
    m.baseline_outcome = base_log.outcome;
    m.rl_outcome = rl_log.outcome;

    if (base_log.outcome == EpisodeOutcome::Success) {
      m.baseline_ise = ise(base_log.position_errors(), base_log.dt);
      m.baseline_itse = itse(base_log.position_errors(), base_log.dt);
    }
    if (rl_log.outcome == EpisodeOutcome::Success) {
      m.rl_ise = ise(rl_log.position_errors(), rl_log.dt);
      m.rl_itse = itse(rl_log.position_errors(), rl_log.dt);
    }
    if (m.baseline_ise && m.rl_ise)
      m.pct_diff_ise = 100.0 * (*m.rl_ise - *m.baseline_ise) / *m.baseline_ise;
    if (m.baseline_itse && m.rl_itse)
      m.pct_diff_itse = 100.0 * (*m.rl_itse - *m.baseline_itse) / *m.baseline_itse;

    if (logs) {
      logs->baseline.push_back(base_log);
      logs->rl.push_back(rl_log);
    }
    report.rows.push_back(std::move(m));
  }
  return report;
}

// The three fixed-seed evaluation trajectories.
inline std::vector<NamedTrajectory> evaluation_suite(double dt) {
  std::vector<NamedTrajectory> suite;
  for (std::uint64_t seed : {1ull, 2ull, 3ull})
    suite.push_back({"trajectory-" + std::to_string(seed),
                     random_waypoint_trajectory(seed, dt)});
  return suite;
}

} // namespace gainsched
