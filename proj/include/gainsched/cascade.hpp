#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "gainsched/dynamics.hpp"

namespace gainsched {

// Six proportional gains of the cascade, in loop order:
// x-position -> x-velocity -> attitude -> rate, and y-position -> y-velocity.
struct GainVector {
  double kp_x = 0.0;
  double kp_vx = 0.0;
  double kp_theta = 0.0;
  double kp_omega = 0.0;
  double kp_y = 0.0;
  double kp_vy = 0.0;

  std::array<double, 6> as_array() const {
    return {kp_x, kp_vx, kp_theta, kp_omega, kp_y, kp_vy};
  }
  static GainVector from_array(const std::array<double, 6>& a) {
    return {a[0], a[1], a[2], a[3], a[4], a[5]};
  }
};

// Allowed range per gain.
struct GainBounds {
  std::array<double, 6> lo{0.5, -0.5, 5.0, 10.0, 0.5, 5.0};
  std::array<double, 6> hi{2.0, -0.1, 10.0, 16.0, 3.0, 15.0};

  static constexpr std::array<const char*, 6> names{
      "kp_x", "kp_vx", "kp_theta", "kp_omega", "kp_y", "kp_vy"};

  GainVector midpoint() const {
    std::array<double, 6> m;
    for (int i = 0; i < 6; ++i) m[i] = 0.5 * (lo[i] + hi[i]);
    return GainVector::from_array(m);
  }

  // Index of the first out-of-range component, or -1 when all are in range.
  int first_violation(const GainVector& g) const {
    const auto a = g.as_array();
    for (int i = 0; i < 6; ++i)
      if (a[i] < lo[i] || a[i] > hi[i]) return i;
    return -1;
  }

  bool contains(const GainVector& g) const { return first_violation(g) < 0; }
};

// Tracking errors of the six loops; also the MDP observation,
// ordered [e_x; e_vx; e_theta; e_omega; e_y; e_vy].
struct ErrorVector {
  double e_x = 0.0;
  double e_vx = 0.0;
  double e_theta = 0.0;
  double e_omega = 0.0;
  double e_y = 0.0;
  double e_vy = 0.0;

  std::array<double, 6> as_array() const {
    return {e_x, e_vx, e_theta, e_omega, e_y, e_vy};
  }
};

struct RefPoint {
  double x = 0.0;
  double y = 0.0;
};

struct CascadeOutput {
  ErrorVector errors;   // pre-saturation
  RotorThrusts thrusts; // saturated to [0, t_max]
};

// One pass through the cascade. The x chain commands a differential thrust,
// the y chain a collective thrust with gravity feedforward m*g.
inline CascadeOutput compute_cascade(const QuadState& s, const RefPoint& ref,
                                     const GainVector& k, const QuadParams& p) {
  CascadeOutput out;
  ErrorVector& e = out.errors;

  e.e_x = ref.x - s.px;
  const double vx_ref = k.kp_x * e.e_x;
  e.e_vx = vx_ref - s.vx;
  const double theta_ref = k.kp_vx * e.e_vx;
  e.e_theta = theta_ref - s.theta;
  const double omega_ref = k.kp_theta * e.e_theta;
  e.e_omega = omega_ref - s.omega;
  const double u_diff = k.kp_omega * e.e_omega;

  e.e_y = ref.y - s.py;
  const double vy_ref = k.kp_y * e.e_y;
  e.e_vy = vy_ref - s.vy;
  const double u_coll = k.kp_vy * e.e_vy + p.m * p.g;

  out.thrusts.t1 = std::clamp((u_coll - u_diff) / 2.0, 0.0, p.t_max);
  out.thrusts.t2 = std::clamp((u_coll + u_diff) / 2.0, 0.0, p.t_max);
  return out;
}

} // namespace gainsched
