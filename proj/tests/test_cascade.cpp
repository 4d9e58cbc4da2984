#include <doctest.h>

#include <cmath>
#include <random>

#include "gainsched/cascade.hpp"
#include "gainsched/dynamics.hpp"

using namespace gainsched;

namespace {
const QuadParams kParams{};
const GainBounds kBounds{};
}

TEST_CASE("at rest on reference: zero errors, gravity feedforward split") {
  const auto out = compute_cascade(QuadState{}, {0.0, 0.0}, kBounds.midpoint(), kParams);
  const auto e = out.errors.as_array();
  for (double v : e) CHECK(v == 0.0);
  CHECK(out.thrusts.t1 == doctest::Approx(12.25875));
  CHECK(out.thrusts.t2 == doctest::Approx(12.25875));
}

TEST_CASE("proportional chain on the x loops") {
  GainVector k = kBounds.midpoint();
  k.kp_x = 1.0;
  k.kp_vx = -0.3;
  QuadState s{};
  const auto out = compute_cascade(s, {1.0, 0.0}, k, kParams);
  CHECK(out.errors.e_x == doctest::Approx(1.0));
  CHECK(out.errors.e_vx == doctest::Approx(1.0));   // vx_ref = 1.0, vx = 0
  CHECK(out.errors.e_theta == doctest::Approx(-0.3)); // theta_ref = -0.3
}

TEST_CASE("full cascade at origin toward (1,1) with midpoint gains") {
  // Frozen from an independent scalar evaluation of the chain.
  const auto out = compute_cascade(QuadState{}, {1.0, 1.0}, kBounds.midpoint(), kParams);
  const auto e = out.errors.as_array();
  CHECK(e[0] == doctest::Approx(1.0));
  CHECK(e[1] == doctest::Approx(1.25));
  CHECK(e[2] == doctest::Approx(-0.375));
  CHECK(e[3] == doctest::Approx(-2.8125));
  CHECK(e[4] == doctest::Approx(1.0));
  CHECK(e[5] == doctest::Approx(1.75));
  // u_diff = -36.5625, u_coll = 42.0175: t1 saturates at t_max, t2 = 2.7275
  CHECK(out.thrusts.t1 == doctest::Approx(36.77625));
  CHECK(out.thrusts.t2 == doctest::Approx(2.7275));
}

TEST_CASE("thrusts saturate for arbitrary extreme inputs") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1e4, 1e4);
  for (int i = 0; i < 1000; ++i) {
    QuadState s{u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
    std::array<double, 6> g;
    for (int j = 0; j < 6; ++j)
      g[j] = kBounds.lo[j] + (kBounds.hi[j] - kBounds.lo[j]) *
                                 std::uniform_real_distribution<double>(0, 1)(rng);
    const auto out = compute_cascade(s, {u(rng), u(rng)}, GainVector::from_array(g), kParams);
    CHECK(out.thrusts.t1 >= 0.0);
    CHECK(out.thrusts.t1 <= kParams.t_max);
    CHECK(out.thrusts.t2 >= 0.0);
    CHECK(out.thrusts.t2 <= kParams.t_max);
  }
}

TEST_CASE("sign consistency: positive e_x pitches toward +x") {
  const auto out = compute_cascade(QuadState{}, {1.0, 0.0}, kBounds.midpoint(), kParams);
  // theta_ref = kp_vx * e_vx < 0 for positive x error
  CHECK(out.errors.e_theta < 0.0);
  // resulting torque at theta=0 is negative, so theta heads negative and
  // -(t1+t2) sin(theta) accelerates toward +x
  const auto d = derivatives(QuadState{}, out.thrusts, kParams);
  CHECK(d.domega < 0.0);
}

TEST_CASE("pre-saturation errors are affine: doubling position errors") {
  GainVector k = kBounds.midpoint();
  const auto a = compute_cascade(QuadState{}, {1.0, 2.0}, k, kParams).errors;
  const auto b = compute_cascade(QuadState{}, {2.0, 4.0}, k, kParams).errors;
  CHECK(b.e_x == doctest::Approx(2.0 * a.e_x));
  CHECK(b.e_vx == doctest::Approx(2.0 * a.e_vx));
  CHECK(b.e_theta == doctest::Approx(2.0 * a.e_theta));
  CHECK(b.e_y == doctest::Approx(2.0 * a.e_y));
  CHECK(b.e_vy == doctest::Approx(2.0 * a.e_vy));
}

TEST_CASE("gain bounds validation names the violated component") {
  GainVector g = kBounds.midpoint();
  CHECK(kBounds.first_violation(g) == -1);
  g.kp_theta = 11.0;
  CHECK(kBounds.first_violation(g) == 2);
  CHECK(std::string(GainBounds::names[2]) == "kp_theta");
}
