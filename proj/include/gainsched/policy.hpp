#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gainsched/cascade.hpp"
#include "gainsched/environment.hpp"
#include "gainsched/mlp.hpp"
#include "gainsched/rng.hpp"

namespace gainsched {

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;
inline constexpr double kHalfLog2Pi = 0.9189385332046727; // 0.5*ln(2*pi)

// Actor-critic parameters: Gaussian mean network, state-independent log
// standard deviations, and a scalar value network.
struct PolicyParams {
  Mlp actor;                       // obs -> 6 Gaussian means
  std::array<double, 6> log_std{}; // trainable, clamped to [-20, 2]
  Mlp critic;                      // obs -> 1 value

  void clamp_log_std() {
    for (double& v : log_std) v = std::clamp(v, kLogStdMin, kLogStdMax);
  }

  static PolicyParams init(std::mt19937_64& rng,
                           const std::vector<int>& hidden = {64, 64}) {
    PolicyParams p;
    std::vector<int> actor_sizes{6};
    actor_sizes.insert(actor_sizes.end(), hidden.begin(), hidden.end());
    actor_sizes.push_back(6);
    std::vector<int> critic_sizes{6};
    critic_sizes.insert(critic_sizes.end(), hidden.begin(), hidden.end());
    critic_sizes.push_back(1);
    p.actor = make_mlp(actor_sizes, 0.01, rng);
    p.critic = make_mlp(critic_sizes, 1.0, rng);
    p.log_std.fill(0.0);
    return p;
  }
};

inline double gaussian_log_prob(std::span<const double> mean,
                                std::span<const double> log_std,
                                std::span<const double> action) {
  double lp = 0.0;
  for (std::size_t i = 0; i < mean.size(); ++i) {
    const double z = (action[i] - mean[i]) * std::exp(-log_std[i]);
    lp += -0.5 * z * z - log_std[i] - kHalfLog2Pi;
  }
  return lp;
}

// Entropy of the diagonal Gaussian: sum(log_std + 0.5*ln(2*pi*e)).
inline double gaussian_entropy(std::span<const double> log_std) {
  double h = 0.0;
  for (double ls : log_std) h += ls + kHalfLog2Pi + 0.5;
  return h;
}

struct ActionSample {
  ActionVector action;               // clamped to [-1,1]
  std::array<double, 6> raw{};       // unclamped Gaussian draw
  double log_prob = 0.0;             // computed on the unclamped draw
  double value = 0.0;
};

inline ActionSample sample_action(const PolicyParams& policy, const ErrorVector& obs,
                                  std::mt19937_64& rng) {
  const auto o = obs.as_array();
  const auto mean = forward(policy.actor, o);
  std::normal_distribution<double> nd(0.0, 1.0);

  ActionSample s;
  for (int i = 0; i < 6; ++i) {
    const double sigma = std::exp(policy.log_std[i]);
    s.raw[i] = mean[i] + sigma * nd(rng);
  }
  s.log_prob = gaussian_log_prob(mean, policy.log_std, s.raw);
  for (int i = 0; i < 6; ++i) s.action.a[i] = std::clamp(s.raw[i], -1.0, 1.0);
  s.value = forward(policy.critic, o)[0];
  return s;
}

// Deterministic evaluation action: the actor mean, clamped.
inline ActionVector mean_action(const PolicyParams& policy, const ErrorVector& obs) {
  const auto mean = forward(policy.actor, obs.as_array());
  ActionVector a;
  for (int i = 0; i < 6; ++i) a.a[i] = std::clamp(mean[i], -1.0, 1.0);
  return a;
}

// --- checkpoint serialization -------------------------------------------

namespace detail {

inline nlohmann::json mlp_to_json(const Mlp& net) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& l : net.layers)
    j.push_back({{"in", l.in}, {"out", l.out}, {"w", l.w}, {"b", l.b}});
  return j;
}

inline Mlp mlp_from_json(const nlohmann::json& j) {
  Mlp net;
  for (const auto& lj : j) {
    Layer l;
    l.in = lj.at("in").get<int>();
    l.out = lj.at("out").get<int>();
    l.w = lj.at("w").get<std::vector<double>>();
    l.b = lj.at("b").get<std::vector<double>>();
    if (static_cast<int>(l.w.size()) != l.in * l.out ||
        static_cast<int>(l.b.size()) != l.out)
      throw std::runtime_error("checkpoint: layer size mismatch");
    net.layers.push_back(std::move(l));
  }
  if (net.layers.empty()) throw std::runtime_error("checkpoint: empty network");
  return net;
}

} // namespace detail

inline nlohmann::json checkpoint_to_json(const PolicyParams& p, long training_step,
                                         const std::string& created = "") {
  nlohmann::json meta{{"format", "gainsched-checkpoint-v1"},
                      {"activation", "tanh"},
                      {"training_step", training_step}};
  if (!created.empty()) meta["created"] = created;
  std::vector<int> sizes;
  for (const auto& l : p.actor.layers) sizes.push_back(l.in);
  sizes.push_back(p.actor.output_size());
  meta["actor_sizes"] = sizes;
  return nlohmann::json{{"meta", meta},
                        {"actor", detail::mlp_to_json(p.actor)},
                        {"log_std", p.log_std},
                        {"critic", detail::mlp_to_json(p.critic)}};
}

inline PolicyParams checkpoint_from_json(const nlohmann::json& j) {
  PolicyParams p;
  p.actor = detail::mlp_from_json(j.at("actor"));
  p.critic = detail::mlp_from_json(j.at("critic"));
  const auto ls = j.at("log_std").get<std::vector<double>>();
  if (ls.size() != 6) throw std::runtime_error("checkpoint: log_std must have 6 entries");
  std::copy(ls.begin(), ls.end(), p.log_std.begin());
  return p;
}

inline void save_checkpoint(const PolicyParams& p, const std::string& path,
                            long training_step, const std::string& created = "") {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("checkpoint: cannot write " + path);
  os << checkpoint_to_json(p, training_step, created).dump(1) << "\n";
}

inline PolicyParams load_checkpoint(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
  nlohmann::json j;
  is >> j;
  return checkpoint_from_json(j);
}

} // namespace gainsched
