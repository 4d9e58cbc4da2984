#pragma once

#include <cmath>
#include <optional>

namespace gainsched {

// Planar quadcopter: 3 DOF (x, y translation, in-plane rotation), two rotor thrusts.
struct QuadState {
  double px = 0.0;     // position x [m]
  double py = 0.0;     // position y [m]
  double theta = 0.0;  // attitude angle [rad]
  double vx = 0.0;     // velocity x [m/s]
  double vy = 0.0;     // velocity y [m/s]
  double omega = 0.0;  // angular rate [rad/s]

  bool finite() const {
    return std::isfinite(px) && std::isfinite(py) && std::isfinite(theta) &&
           std::isfinite(vx) && std::isfinite(vy) && std::isfinite(omega);
  }
};

struct QuadStateDerivative {
  double dpx = 0.0;
  double dpy = 0.0;
  double dtheta = 0.0;
  double dvx = 0.0;
  double dvy = 0.0;
  double domega = 0.0;
};

enum class AngularDenominator { Inertia, Mass };

struct QuadParams {
  double m = 2.5;            // mass [kg]
  double inertia = 1.0;      // rotational inertia [kg m^2]
  double l = 1.0;            // rotor arm length [m]
  double g = 9.807;          // gravitational acceleration [m/s^2]
  double cd_v = 0.25;        // linear drag coefficient [-]
  double cd_omega = 0.02255; // rotational drag coefficient [-]
  double t_max = 1.5 * 2.5 * 9.807; // per-rotor thrust saturation [N]
  AngularDenominator angular_denominator = AngularDenominator::Inertia;

  bool valid() const {
    return m > 0 && inertia > 0 && l > 0 && g > 0 && cd_v >= 0 &&
           cd_omega >= 0 && t_max > 0;
  }

  double hover_thrust_total() const { return m * g; }
};

struct RotorThrusts {
  double t1 = 0.0; // left rotor [N]
  double t2 = 0.0; // right rotor [N]
};

// Equations of motion. Drag opposes velocity on both translational axes;
// the angular row divides by inertia (switchable to mass via params).
inline QuadStateDerivative derivatives(const QuadState& s, const RotorThrusts& u,
                                       const QuadParams& p) {
  const double thrust = u.t1 + u.t2;
  const double denom =
      p.angular_denominator == AngularDenominator::Inertia ? p.inertia : p.m;
  QuadStateDerivative d;
  d.dpx = s.vx;
  d.dpy = s.vy;
  d.dtheta = s.omega;
  d.dvx = (-thrust * std::sin(s.theta) - p.cd_v * s.vx) / p.m;
  d.dvy = (thrust * std::cos(s.theta) - p.cd_v * s.vy) / p.m - p.g;
  d.domega = ((u.t2 - u.t1) * p.l - p.cd_omega * s.omega) / denom;
  return d;
}

namespace detail {
inline QuadState advance(const QuadState& s, const QuadStateDerivative& d,
                         double h) {
  return {s.px + h * d.dpx,    s.py + h * d.dpy, s.theta + h * d.dtheta,
          s.vx + h * d.dvx,    s.vy + h * d.dvy, s.omega + h * d.domega};
}
} // namespace detail

// Classical RK4 with zero-order-hold thrusts. Empty optional on non-finite output.
inline std::optional<QuadState> step_rk4(const QuadState& s, const RotorThrusts& u,
                                         const QuadParams& p, double dt) {
  const QuadStateDerivative k1 = derivatives(s, u, p);
  const QuadStateDerivative k2 = derivatives(detail::advance(s, k1, dt / 2), u, p);
  const QuadStateDerivative k3 = derivatives(detail::advance(s, k2, dt / 2), u, p);
  const QuadStateDerivative k4 = derivatives(detail::advance(s, k3, dt), u, p);

  QuadState out;
  const double h = dt / 6.0;
  out.px = s.px + h * (k1.dpx + 2 * k2.dpx + 2 * k3.dpx + k4.dpx);
  out.py = s.py + h * (k1.dpy + 2 * k2.dpy + 2 * k3.dpy + k4.dpy);
  out.theta = s.theta + h * (k1.dtheta + 2 * k2.dtheta + 2 * k3.dtheta + k4.dtheta);
  out.vx = s.vx + h * (k1.dvx + 2 * k2.dvx + 2 * k3.dvx + k4.dvx);
  out.vy = s.vy + h * (k1.dvy + 2 * k2.dvy + 2 * k3.dvy + k4.dvy);
  out.omega = s.omega + h * (k1.domega + 2 * k2.domega + 2 * k3.domega + k4.domega);
  if (!out.finite()) return std::nullopt;
  return out;
}

} // namespace gainsched
