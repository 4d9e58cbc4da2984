#include <doctest.h>

#include <cmath>
#include <random>

#include "gainsched/environment.hpp"
#include "gainsched/metrics.hpp"

using namespace gainsched;

TEST_CASE("action rescaling hits the range endpoints and midpoints") {
  ActionVector zero{};
  const auto mid = rescale_action(zero).as_array();
  const std::array<double, 6> expected_mid{1.25, -0.3, 7.5, 13.0, 1.75, 10.0};
  for (int i = 0; i < 6; ++i) CHECK(mid[i] == doctest::Approx(expected_mid[i]));

  ActionVector lo;
  lo.a.fill(-1.0);
  const auto glo = rescale_action(lo).as_array();
  const std::array<double, 6> expected_lo{0.5, -0.5, 5.0, 10.0, 0.5, 5.0};
  for (int i = 0; i < 6; ++i) CHECK(glo[i] == expected_lo[i]);

  ActionVector hi;
  hi.a.fill(1.0);
  const auto ghi = rescale_action(hi).as_array();
  const std::array<double, 6> expected_hi{2.0, -0.1, 10.0, 16.0, 3.0, 15.0};
  for (int i = 0; i < 6; ++i) CHECK(ghi[i] == expected_hi[i]);
}

TEST_CASE("rescaling is monotone per component") {
  for (int i = 0; i < 6; ++i) {
    double prev = -1e300;
    for (double a = -1.0; a <= 1.0; a += 0.1) {
      ActionVector act{};
      act.a[i] = a;
      const double g = rescale_action(act).as_array()[i];
      CHECK(g > prev);
      prev = g;
    }
  }
}

TEST_CASE("reward branches of the four scenarios") {
  CHECK(compute_reward(EpisodeOutcome::TimeOut, 1.0, 0, 0) == -1.0);
  CHECK(compute_reward(EpisodeOutcome::Deviation, 1.0, 0, 0) == -5.0);
  CHECK(compute_reward(EpisodeOutcome::Success, 2.0, 0, 0) == doctest::Approx(5.0));
  CHECK(compute_reward(EpisodeOutcome::Running, 1.0, 1.0, 1.0) == doctest::Approx(0.0));
  CHECK(compute_reward(EpisodeOutcome::Running, 1.0, 4.0, 1.0) == doctest::Approx(0.1));
}

TEST_CASE("running reward lies in [-0.05, 0.1] for random deviation pairs") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (int i = 0; i < 10000; ++i) {
    const double r = compute_reward(EpisodeOutcome::Running, 1.0, u(rng), u(rng));
    CHECK(r >= -0.05 - 1e-12);
    CHECK(r <= 0.1 + 1e-12);
  }
  // zero current deviation guarded
  const double r = compute_reward(EpisodeOutcome::Running, 1.0, 1.0, 0.0);
  CHECK(r == doctest::Approx(0.1));
}

TEST_CASE("termination checks in order: deviation, time-out, success") {
  EnvConfig cfg;
  Environment env(step_reference(1.0, 5.0, cfg.dt), cfg);
  CHECK(env.check_termination() == EpisodeOutcome::Running);

  SUBCASE("deviation fires beyond 10 m") {
    // drive the episode with a hard-down gain set so it cannot track; instead
    // check the geometry directly through a custom trajectory far away
    Environment far(step_reference(11.0, 5.0, cfg.dt), cfg);
    CHECK(far.check_termination() == EpisodeOutcome::Deviation);
  }
  SUBCASE("time-out fires past 120% of the expected duration") {
    Environment e(step_reference(0.0, 0.1, cfg.dt), cfg);
    // zero-amplitude: success needs t >= nominal; step to success first
    const auto res = e.step_with_gains(cfg.gain_bounds.midpoint());
    // t = 0.02 < 0.1: running
    CHECK(res.outcome == EpisodeOutcome::Running);
  }
}

TEST_CASE("reset returns the cascade observation at the origin") {
  EnvConfig cfg;
  Environment env(step_reference(1.0, 5.0, cfg.dt), cfg);
  const ErrorVector obs = env.reset();
  CHECK(obs.e_x == doctest::Approx(1.0));
  CHECK(obs.e_y == doctest::Approx(1.0));

  Environment zero(step_reference(0.0, 5.0, cfg.dt), cfg);
  const auto z = zero.reset().as_array();
  for (double v : z) CHECK(v == 0.0);
}

TEST_CASE("reset is deterministic") {
  EnvConfig cfg;
  Environment a(step_reference(1.0, 5.0, cfg.dt), cfg);
  Environment b(step_reference(1.0, 5.0, cfg.dt), cfg);
  const auto oa = a.reset().as_array();
  const auto ob = b.reset().as_array();
  for (int i = 0; i < 6; ++i) CHECK(oa[i] == ob[i]);
}

TEST_CASE("first step reward on the 1 m step is in the running range") {
  EnvConfig cfg;
  Environment env(step_reference(1.0, 5.0, cfg.dt), cfg);
  ActionVector mid{}; // zeros map to midpoint gains
  const auto res = env.step(mid);
  CHECK(res.outcome == EpisodeOutcome::Running);
  CHECK(res.reward >= -0.05);
  CHECK(res.reward <= 0.1);
}

TEST_CASE("zero-amplitude step with midpoint gains succeeds with ~zero ISE") {
  EnvConfig cfg;
  Environment env(step_reference(0.0, 5.0, cfg.dt), cfg);
  StepResult res;
  int guard = 0;
  do {
    res = env.step_with_gains(cfg.gain_bounds.midpoint());
    REQUIRE(++guard < 1000);
  } while (res.outcome == EpisodeOutcome::Running);
  CHECK(res.outcome == EpisodeOutcome::Success);
  CHECK(env.time() == doctest::Approx(5.0));
  CHECK(env.accumulated_ise() < 1e-6);
}

TEST_CASE("stepping a terminated episode is a contract violation") {
  EnvConfig cfg;
  Environment env(step_reference(0.0, 0.1, cfg.dt), cfg);
  StepResult res;
  int guard = 0;
  do {
    res = env.step_with_gains(cfg.gain_bounds.midpoint());
    REQUIRE(++guard < 100);
  } while (res.outcome == EpisodeOutcome::Running);
  CHECK_THROWS_AS(env.step_with_gains(cfg.gain_bounds.midpoint()), std::logic_error);
}

TEST_CASE("episode determinism: identical action sequences, identical results") {
  EnvConfig cfg;
  Environment a(step_reference(1.0, 5.0, cfg.dt), cfg);
  Environment b(step_reference(1.0, 5.0, cfg.dt), cfg);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    ActionVector act;
    for (auto& v : act.a) v = u(rng);
    const auto ra = a.step(act);
    const auto rb = b.step(act);
    CHECK(ra.reward == rb.reward);
    const auto oa = ra.observation.as_array();
    const auto ob = rb.observation.as_array();
    for (int j = 0; j < 6; ++j) CHECK(oa[j] == ob[j]);
    if (ra.outcome != EpisodeOutcome::Running) break;
  }
}

TEST_CASE("accumulated ISE matches the metric recomputed from the log") {
  EnvConfig cfg;
  const EpisodeLog log =
      run_episode(cfg.gain_bounds.midpoint(), step_reference(1.0, 5.0, cfg.dt), cfg);
  REQUIRE(log.outcome == EpisodeOutcome::Success);
  const double recomputed = ise(log.position_errors(), log.dt);
  CHECK(std::abs(recomputed - log.accumulated_ise) < 1e-9);
}
