#include <doctest.h>

#include <cmath>
#include <sstream>

#include "gainsched/metrics.hpp"

using namespace gainsched;

TEST_CASE("ise of constant unit error") {
  const double dt = 0.01;
  std::vector<PosError> e(200, {1.0, 0.0}); // 2 s
  CHECK(std::abs(ise(e, dt) - 2.0) < 0.011);
}

TEST_CASE("ise of zero error") {
  std::vector<PosError> e(100, {0.0, 0.0});
  CHECK(ise(e, 0.01) == 0.0);
  CHECK(itse(e, 0.01) == 0.0);
}

TEST_CASE("ise of a linear ramp approximates t^3/3") {
  const double dt = 0.001;
  std::vector<PosError> e;
  for (int i = 0; i < 1000; ++i) e.push_back({i * dt, 0.0});
  CHECK(std::abs(ise(e, dt) - 1.0 / 3.0) < 2e-3);
}

TEST_CASE("itse of constant unit error approximates t^2/2") {
  const double dt = 0.01;
  std::vector<PosError> e(200, {1.0, 0.0});
  CHECK(std::abs(itse(e, dt) - 2.0) < 0.03);
}

TEST_CASE("itse/ise ratio is T/2 for constant error") {
  const double dt = 0.005;
  for (double T : {1.0, 4.0, 10.0}) {
    std::vector<PosError> e(static_cast<std::size_t>(T / dt), {1.0, 0.0});
    CHECK(itse(e, dt) / ise(e, dt) == doctest::Approx(T / 2.0).epsilon(0.01));
  }
}

TEST_CASE("ise and itse empty series rejected") {
  CHECK_THROWS(ise({}, 0.01));
  CHECK_THROWS(itse({}, 0.01));
}

TEST_CASE("static midpoint gains succeed on the 1 m step") {
  EnvConfig cfg;
  const EpisodeLog log =
      run_episode(cfg.gain_bounds.midpoint(), step_reference(1.0, 5.0, cfg.dt), cfg);
  CHECK(log.outcome == EpisodeOutcome::Success);
  const double v = ise(log.position_errors(), log.dt);
  CHECK(v > 0.0);
  CHECK(std::isfinite(v));
}

TEST_CASE("zero-amplitude step: success with near-zero ise") {
  EnvConfig cfg;
  const EpisodeLog log =
      run_episode(cfg.gain_bounds.midpoint(), step_reference(0.0, 5.0, cfg.dt), cfg);
  CHECK(log.outcome == EpisodeOutcome::Success);
  CHECK(ise(log.position_errors(), log.dt) < 1e-9);
}

TEST_CASE("itse bounded by duration times ise on real episodes") {
  EnvConfig cfg;
  for (auto& nt : evaluation_suite(cfg.dt)) {
    const EpisodeLog log = run_episode(cfg.gain_bounds.midpoint(), nt.traj, cfg);
    const auto errs = log.position_errors();
    CHECK(itse(errs, log.dt) <= log.duration() * ise(errs, log.dt) + 1e-12);
  }
}

TEST_CASE("baseline controller completes the evaluation suite") {
  // regression oracle: frozen ISE values under the midpoint baseline live in
  // the acceptance suite; here we only require successful completion
  EnvConfig cfg;
  for (auto& nt : evaluation_suite(cfg.dt)) {
    const EpisodeLog log = run_episode(cfg.gain_bounds.midpoint(), nt.traj, cfg);
    CHECK(log.outcome == EpisodeOutcome::Success);
  }
}

TEST_CASE("out-of-range static gains rejected by run_episode") {
  EnvConfig cfg;
  GainVector g = cfg.gain_bounds.midpoint();
  g.kp_omega = 30.0;
  CHECK_THROWS(run_episode(g, step_reference(1.0, 5.0, cfg.dt), cfg));
}

TEST_CASE("episode csv round trip preserves the metrics to 1e-9") {
  EnvConfig cfg;
  const EpisodeLog log =
      run_episode(cfg.gain_bounds.midpoint(), step_reference(1.0, 5.0, cfg.dt), cfg);
  std::stringstream ss;
  log.export_csv(ss);
  const EpisodeLog back = EpisodeLog::import_csv(ss);
  REQUIRE(back.rows.size() == log.rows.size());
  CHECK(std::abs(ise(back.position_errors(), back.dt) -
                 ise(log.position_errors(), log.dt)) < 1e-9);
  CHECK(std::abs(itse(back.position_errors(), back.dt) -
                 itse(log.position_errors(), log.dt)) < 1e-9);
}

TEST_CASE("identical controllers give zero percent difference") {
  EnvConfig cfg;
  // wrap the baseline gains as a degenerate "policy": a zero-weight actor
  // whose mean action is all zeros, i.e. exactly the midpoint gains
  PolicyParams p;
  p.actor.layers.push_back({6, 6, std::vector<double>(36, 0.0), std::vector<double>(6, 0.0)});
  p.critic.layers.push_back({6, 1, std::vector<double>(6, 0.0), std::vector<double>(1, 0.0)});

  std::vector<NamedTrajectory> suite;
  suite.push_back({"step", step_reference(1.0, 5.0, cfg.dt)});
  const EvalReport report = compare(cfg.gain_bounds.midpoint(), p, suite, cfg);
  REQUIRE(report.rows.size() == 1);
  REQUIRE(report.rows[0].pct_diff_ise.has_value());
  CHECK(*report.rows[0].pct_diff_ise == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(*report.rows[0].pct_diff_itse == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("percentage difference arithmetic") {
  TrajectoryMetrics m;
  m.baseline_ise = 2.0;
  m.rl_ise = 1.0;
  m.pct_diff_ise = 100.0 * (*m.rl_ise - *m.baseline_ise) / *m.baseline_ise;
  CHECK(*m.pct_diff_ise == doctest::Approx(-50.0));
}

TEST_CASE("report renders three rows with six metric columns") {
  EvalReport r;
  for (int i = 1; i <= 3; ++i) {
    TrajectoryMetrics m;
    m.name = "trajectory-" + std::to_string(i);
    m.baseline_ise = 0.5;
    m.rl_ise = 0.3;
    m.baseline_itse = 70.0;
    m.rl_itse = 37.0;
    m.pct_diff_ise = -40.0;
    m.pct_diff_itse = -47.0;
    r.rows.push_back(m);
  }
  const std::string table = r.to_table();
  CHECK(table.find("ISE base") != std::string::npos);
  CHECK(table.find("ITSE RL") != std::string::npos);
  CHECK(std::count(table.begin(), table.end(), '\n') == 5); // header + 3 rows + band
  CHECK(table.find("reference band ISE %: -42.6 .. -44.9") != std::string::npos);
  const auto j = r.to_json();
  CHECK(j["trajectories"].size() == 3);
  CHECK(j["trajectories"][0].contains("pct_diff_itse"));
  CHECK(j["reference_band_pct_ise"].size() == 2);
}
