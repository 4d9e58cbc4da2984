#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "gainsched/policy.hpp"

namespace gainsched {

// Actor + log_std + critic gradients, same shapes as PolicyParams.
struct PolicyGrads {
  Mlp actor;
  std::array<double, 6> log_std{};
  Mlp critic;

  static PolicyGrads zeros_like(const PolicyParams& p) {
    PolicyGrads g;
    g.actor = Mlp::zeros_like(p.actor);
    g.critic = Mlp::zeros_like(p.critic);
    g.log_std.fill(0.0);
    return g;
  }

  void zero() {
    actor.fill(0.0);
    critic.fill(0.0);
    log_std.fill(0.0);
  }

  void scale(double s) {
    for (auto& l : actor.layers) {
      for (double& v : l.w) v *= s;
      for (double& v : l.b) v *= s;
    }
    for (auto& l : critic.layers) {
      for (double& v : l.w) v *= s;
      for (double& v : l.b) v *= s;
    }
    for (double& v : log_std) v *= s;
  }
};

namespace detail {

template <typename P, typename Fn>
void for_each_tensor(P& p, Fn&& fn) {
  for (auto& l : p.actor.layers) {
    fn(std::span<double>(l.w));
    fn(std::span<double>(l.b));
  }
  fn(std::span<double>(p.log_std));
  for (auto& l : p.critic.layers) {
    fn(std::span<double>(l.w));
    fn(std::span<double>(l.b));
  }
}

} // namespace detail

inline double grad_norm(PolicyGrads& g) {
  double sq = 0.0;
  detail::for_each_tensor(g, [&](std::span<double> t) {
    for (double v : t) sq += v * v;
  });
  return std::sqrt(sq);
}

// Global L2 norm clipping; returns the pre-clip norm.
inline double clip_grad_norm(PolicyGrads& g, double max_norm) {
  const double norm = grad_norm(g);
  if (norm > max_norm && norm > 0.0) g.scale(max_norm / norm);
  return norm;
}

// Adam with bias correction.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(const PolicyParams& ref, double lr = 3e-4,
                         double beta1 = 0.9, double beta2 = 0.999,
                         double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    PolicyParams tmp = ref;
    detail::for_each_tensor(tmp, [&](std::span<double> t) {
      m_.emplace_back(t.size(), 0.0);
      v_.emplace_back(t.size(), 0.0);
    });
  }

  long step_count() const { return step_; }
  double lr() const { return lr_; }

  void update(PolicyParams& params, PolicyGrads& grads) {
    ++step_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));

    std::size_t ti = 0;
    std::vector<std::span<double>> pt, gt;
    detail::for_each_tensor(params, [&](std::span<double> t) { pt.push_back(t); });
    detail::for_each_tensor(grads, [&](std::span<double> t) { gt.push_back(t); });
    if (pt.size() != m_.size() || gt.size() != m_.size())
      throw std::invalid_argument("adam: parameter/gradient shape mismatch");

    for (ti = 0; ti < pt.size(); ++ti) {
      if (pt[ti].size() != m_[ti].size() || gt[ti].size() != m_[ti].size())
        throw std::invalid_argument("adam: tensor size mismatch");
      auto& m = m_[ti];
      auto& v = v_[ti];
      for (std::size_t i = 0; i < m.size(); ++i) {
        const double g = gt[ti][i];
        m[i] = beta1_ * m[i] + (1.0 - beta1_) * g;
        v[i] = beta2_ * v[i] + (1.0 - beta2_) * g * g;
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        pt[ti][i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
      }
    }
    params.clamp_log_std();
  }

 private:
  double lr_, beta1_, beta2_, eps_;
  long step_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

} // namespace gainsched
