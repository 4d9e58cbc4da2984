#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gainsched/cascade.hpp"

namespace gainsched {

// Reference sampled at fixed dt; held at `terminal` beyond nominal_duration.
class Trajectory {
 public:
  Trajectory(std::vector<RefPoint> samples, double dt)
      : samples_(std::move(samples)), dt_(dt) {
    if (samples_.empty()) throw std::invalid_argument("trajectory: empty sample set");
    if (dt_ <= 0) throw std::invalid_argument("trajectory: dt must be positive");
  }

  double dt() const { return dt_; }
  std::size_t size() const { return samples_.size(); }
  const std::vector<RefPoint>& samples() const { return samples_; }
  double nominal_duration() const { return (samples_.size() - 1) * dt_; }
  RefPoint terminal() const { return samples_.back(); }

  RefPoint at(double t) const {
    if (t <= 0) return samples_.front();
    const auto idx = static_cast<std::size_t>(std::llround(t / dt_));
    return idx >= samples_.size() ? samples_.back() : samples_[idx];
  }

  void export_csv(std::ostream& os) const {
    os << "t,x_ref,y_ref\n";
    char buf[96];
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", i * dt_,
                    samples_[i].x, samples_[i].y);
      os << buf;
    }
  }

  static Trajectory import_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("trajectory csv: empty file");
    std::vector<RefPoint> pts;
    double dt = 0.0, t0 = 0.0, t1 = 0.0;
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      std::istringstream ss(line);
      std::string tok;
      double v[3];
      for (int i = 0; i < 3; ++i) {
        if (!std::getline(ss, tok, ',')) throw std::runtime_error("trajectory csv: bad row");
        v[i] = std::stod(tok);
      }
      if (pts.empty()) t0 = v[0];
      else if (pts.size() == 1) t1 = v[0];
      pts.push_back({v[1], v[2]});
    }
    if (pts.empty()) throw std::runtime_error("trajectory csv: no samples");
    dt = pts.size() > 1 ? t1 - t0 : 0.02;
    if (dt <= 0) throw std::runtime_error("trajectory csv: non-increasing time column");
    return Trajectory(std::move(pts), dt);
  }

 private:
  std::vector<RefPoint> samples_;
  double dt_;
};

// Constant reference at (amplitude, amplitude). nominal_duration doubles as
// the configured settle time used by the time-out check.
inline Trajectory step_reference(double amplitude, double nominal_duration,
                                 double dt) {
  if (!std::isfinite(amplitude)) throw std::invalid_argument("step_reference: non-finite amplitude");
  if (nominal_duration <= 0) throw std::invalid_argument("step_reference: duration must be positive");
  const auto n = static_cast<std::size_t>(std::llround(nominal_duration / dt)) + 1;
  return Trajectory(std::vector<RefPoint>(n, {amplitude, amplitude}), dt);
}

// Piecewise minimum-jerk interpolation; each segment lasts length/speed, so
// the reference velocity is zero at every waypoint.
inline Trajectory waypoint_trajectory(const std::vector<RefPoint>& waypoints,
                                      double speed, double dt) {
  if (waypoints.size() < 2) throw std::invalid_argument("waypoint_trajectory: need at least 2 waypoints");
  if (speed <= 0) throw std::invalid_argument("waypoint_trajectory: speed must be positive");

  std::vector<double> seg_t;
  for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
    const double len = std::hypot(waypoints[i + 1].x - waypoints[i].x,
                                  waypoints[i + 1].y - waypoints[i].y);
    if (len == 0.0) throw std::invalid_argument("waypoint_trajectory: duplicate consecutive waypoints");
    seg_t.push_back(len / speed);
  }

  double total = 0.0;
  for (double t : seg_t) total += t;
  const auto n = static_cast<std::size_t>(std::ceil(total / dt - 1e-9)) + 1;

  std::vector<RefPoint> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double t = i * dt;
    std::size_t seg = 0;
    while (seg < seg_t.size() && t > seg_t[seg] + 1e-12) {
      t -= seg_t[seg];
      ++seg;
    }
    if (seg >= seg_t.size()) {
      pts.push_back(waypoints.back());
      continue;
    }
    const double s = std::clamp(t / seg_t[seg], 0.0, 1.0);
    const double a = s * s * s * (10.0 + s * (-15.0 + 6.0 * s)); // min-jerk blend
    const RefPoint& p0 = waypoints[seg];
    const RefPoint& p1 = waypoints[seg + 1];
    pts.push_back({p0.x + a * (p1.x - p0.x), p0.y + a * (p1.y - p0.y)});
  }
  if (pts.back().x != waypoints.back().x || pts.back().y != waypoints.back().y)
    pts.push_back(waypoints.back());
  return Trajectory(std::move(pts), dt);
}

inline double expected_duration(const Trajectory& traj) {
  return traj.nominal_duration();
}

// Fixed-seed evaluation trajectory: 5 waypoints uniform in [0,10]^2 plus the
// origin start, tracked at 1 m/s.
inline Trajectory random_waypoint_trajectory(std::uint64_t seed, double dt,
                                             int n_waypoints = 5,
                                             double box = 10.0,
                                             double speed = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, box);
  std::vector<RefPoint> wps;
  wps.push_back({0.0, 0.0});
  for (int i = 0; i < n_waypoints; ++i) {
    const double x = u(rng);
    const double y = u(rng);
    wps.push_back({x, y});
  }
  return waypoint_trajectory(wps, speed, dt);
}

} // namespace gainsched
