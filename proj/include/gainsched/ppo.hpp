#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "gainsched/adam.hpp"
#include "gainsched/environment.hpp"
#include "gainsched/policy.hpp"
#include "gainsched/rng.hpp"
#include "gainsched/trajectory.hpp"

namespace gainsched {

struct TrainConfig {
  long total_steps = 240000;
  int n_envs = 3;
  int n_steps_per_env = 2048;
  int batch_size = 64;
  double gamma = 0.99;
  double lr = 3e-4;
  double gae_lambda = 0.95;
  double clip_eps = 0.2;
  int n_epochs = 10;
  double value_coef = 0.5;
  double entropy_coef = 0.0;
  double max_grad_norm = 0.5;
  std::uint64_t seed = 0;
  int monitor_every = 2; // iterations per monitoring window

  // training task: step reference of `step_amplitude` in x and y
  double step_amplitude = 1.0;
  double settle_time = 5.0;
  EnvConfig env;

  long buffer_capacity() const {
    return static_cast<long>(n_envs) * n_steps_per_env;
  }
  long n_iterations() const {
    return (total_steps + buffer_capacity() - 1) / buffer_capacity();
  }
};

// On-policy experience, env-major layout: index = env*n_steps + t.
struct RolloutBuffer {
  int n_envs = 0;
  int n_steps = 0;
  std::vector<std::array<double, 6>> obs;
  std::vector<std::array<double, 6>> actions; // unclamped Gaussian draws
  std::vector<double> log_probs;
  std::vector<double> values;
  std::vector<double> rewards;
  std::vector<std::uint8_t> terminals;
  std::vector<double> last_values; // bootstrap value per env
  std::vector<double> advantages;
  std::vector<double> returns;

  long size() const { return static_cast<long>(n_envs) * n_steps; }
};

struct EpisodeCounters {
  long successes = 0;
  long deviations = 0;
  long timeouts = 0;
  std::vector<double> episode_rewards;

  void merge(const EpisodeCounters& o) {
    successes += o.successes;
    deviations += o.deviations;
    timeouts += o.timeouts;
    episode_rewards.insert(episode_rewards.end(), o.episode_rewards.begin(),
                           o.episode_rewards.end());
  }

  double mean_episode_reward() const {
    if (episode_rewards.empty()) return 0.0;
    return std::accumulate(episode_rewards.begin(), episode_rewards.end(), 0.0) /
           static_cast<double>(episode_rewards.size());
  }
};

// Environments plus their per-env RNG streams and episode bookkeeping.
// Stepping order never affects results: each env consumes only its own stream.
struct VecEnv {
  std::vector<Environment> envs;
  std::vector<std::mt19937_64> rngs;
  std::vector<ErrorVector> obs;
  std::vector<double> episode_reward;

  VecEnv(int n, const Trajectory& traj, const EnvConfig& cfg, std::uint64_t root_seed) {
    for (int i = 0; i < n; ++i) {
      envs.emplace_back(traj, cfg);
      rngs.push_back(make_stream(root_seed, "env-" + std::to_string(i)));
      obs.push_back(envs.back().reset());
      episode_reward.push_back(0.0);
    }
  }
};

inline RolloutBuffer collect_rollouts(VecEnv& vec, const PolicyParams& policy,
                                      int n_steps_per_env,
                                      EpisodeCounters& counters) {
  const int n_envs = static_cast<int>(vec.envs.size());
  RolloutBuffer buf;
  buf.n_envs = n_envs;
  buf.n_steps = n_steps_per_env;
  const long n = buf.size();
  buf.obs.resize(n);
  buf.actions.resize(n);
  buf.log_probs.resize(n);
  buf.values.resize(n);
  buf.rewards.resize(n);
  buf.terminals.resize(n);
  buf.last_values.resize(n_envs);

  for (int e = 0; e < n_envs; ++e) {
    Environment& env = vec.envs[e];
    auto& rng = vec.rngs[e];
    for (int t = 0; t < n_steps_per_env; ++t) {
      const long idx = static_cast<long>(e) * n_steps_per_env + t;
      const ActionSample s = sample_action(policy, vec.obs[e], rng);
      buf.obs[idx] = vec.obs[e].as_array();
      buf.actions[idx] = s.raw;
      buf.log_probs[idx] = s.log_prob;
      buf.values[idx] = s.value;

      const StepResult r = env.step(s.action);
      buf.rewards[idx] = r.reward;
      buf.terminals[idx] = r.outcome != EpisodeOutcome::Running;
      vec.episode_reward[e] += r.reward;

      if (r.outcome != EpisodeOutcome::Running) {
        switch (r.outcome) {
          case EpisodeOutcome::Success: ++counters.successes; break;
          case EpisodeOutcome::Deviation: ++counters.deviations; break;
          case EpisodeOutcome::TimeOut: ++counters.timeouts; break;
          default: break;
        }
        counters.episode_rewards.push_back(vec.episode_reward[e]);
        vec.episode_reward[e] = 0.0;
        vec.obs[e] = env.reset();
      } else {
        vec.obs[e] = r.observation;
      }
    }
    // bootstrap for a window truncated mid-episode
    buf.last_values[e] = forward(policy.critic, vec.obs[e].as_array())[0];
  }
  return buf;
}

// GAE over one env stream.
inline void compute_gae(const std::vector<double>& rewards,
                        const std::vector<double>& values,
                        const std::vector<std::uint8_t>& terminals,
                        double last_value, double gamma, double lambda,
                        std::vector<double>& advantages,
                        std::vector<double>& returns) {
  const std::size_t n = rewards.size();
  if (values.size() != n || terminals.size() != n)
    throw std::invalid_argument("compute_gae: length mismatch");
  advantages.assign(n, 0.0);
  returns.assign(n, 0.0);
  double gae = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double nonterminal = terminals[i] ? 0.0 : 1.0;
    const double next_value = (i + 1 < n) ? values[i + 1] : last_value;
    const double delta = rewards[i] + gamma * next_value * nonterminal - values[i];
    gae = delta + gamma * lambda * nonterminal * gae;
    advantages[i] = gae;
    returns[i] = gae + values[i];
  }
}

inline void compute_advantages(RolloutBuffer& buf, double gamma, double lambda) {
  buf.advantages.assign(buf.size(), 0.0);
  buf.returns.assign(buf.size(), 0.0);
  std::vector<double> r(buf.n_steps), v(buf.n_steps), adv, ret;
  std::vector<std::uint8_t> term(buf.n_steps);
  for (int e = 0; e < buf.n_envs; ++e) {
    const long base = static_cast<long>(e) * buf.n_steps;
    for (int t = 0; t < buf.n_steps; ++t) {
      r[t] = buf.rewards[base + t];
      v[t] = buf.values[base + t];
      term[t] = buf.terminals[base + t];
    }
    compute_gae(r, v, term, buf.last_values[e], gamma, lambda, adv, ret);
    for (int t = 0; t < buf.n_steps; ++t) {
      buf.advantages[base + t] = adv[t];
      buf.returns[base + t] = ret[t];
    }
  }
}

struct MiniBatch {
  std::vector<std::array<double, 6>> obs;
  std::vector<std::array<double, 6>> actions;
  std::vector<double> old_log_probs;
  std::vector<double> advantages; // already normalized by the caller
  std::vector<double> returns;

  std::size_t size() const { return obs.size(); }
};

struct LossComponents {
  double total = 0.0;
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0; // entropy loss, i.e. -mean(H)
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
};

// Clipped-surrogate loss:
//   policy  = -mean(min(rho*A, clip(rho, 1-eps, 1+eps)*A))
//   value   = mean((V - return)^2)
//   entropy = -mean(H)
//   total   = policy + value_coef*value + entropy_coef*entropy
// Gradients accumulate into *grads when non-null.
inline LossComponents ppo_loss(const PolicyParams& policy, const MiniBatch& batch,
                               double clip_eps, double value_coef,
                               double entropy_coef, PolicyGrads* grads) {
  const std::size_t n = batch.size();
  if (n == 0) throw std::invalid_argument("ppo_loss: empty batch");
  const double inv_n = 1.0 / static_cast<double>(n);

  LossComponents c;
  Activations actor_acts, critic_acts;
  PolicyGrads scratch; // unused unless grads

  for (std::size_t i = 0; i < n; ++i) {
    const auto& o = batch.obs[i];
    const auto mean = forward_cached(policy.actor, o, actor_acts);
    const double logp = gaussian_log_prob(mean, policy.log_std, batch.actions[i]);
    const double ratio = std::exp(logp - batch.old_log_probs[i]);
    const double adv = batch.advantages[i];

    const double surr1 = ratio * adv;
    const double clipped = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps);
    const double surr2 = clipped * adv;
    c.policy += -std::min(surr1, surr2) * inv_n;
    c.approx_kl += (batch.old_log_probs[i] - logp) * inv_n;
    if (std::abs(ratio - 1.0) > clip_eps) c.clip_fraction += inv_n;

    const double value = forward_cached(policy.critic, o, critic_acts)[0];
    const double verr = value - batch.returns[i];
    c.value += verr * verr * inv_n;

    if (grads) {
      // d policy / d logp: only when the unclipped side is active
      const double dpol_dlogp = (surr1 <= surr2) ? -adv * inv_n * ratio : 0.0;
      std::array<double, 6> dmean{};
      for (int j = 0; j < 6; ++j) {
        const double inv_sigma = std::exp(-policy.log_std[j]);
        const double z = (batch.actions[i][j] - mean[j]) * inv_sigma;
        dmean[j] = dpol_dlogp * (z * inv_sigma); // d logp / d mean_j = z/sigma
        grads->log_std[j] += dpol_dlogp * (z * z - 1.0);
      }
      backward(policy.actor, actor_acts, dmean, grads->actor);

      const std::array<double, 1> dvalue{value_coef * 2.0 * verr * inv_n};
      backward(policy.critic, critic_acts, dvalue, grads->critic);
    }
  }

  c.entropy = -gaussian_entropy(policy.log_std);
  if (grads)
    for (int j = 0; j < 6; ++j) grads->log_std[j] += entropy_coef * (-1.0);
  c.total = c.policy + value_coef * c.value + entropy_coef * c.entropy;
  return c;
}

struct TrainStats {
  long iteration = 0;
  long env_steps = 0; // cumulative
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy_loss = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  double explained_variance = 0.0;
  double grad_norm = 0.0; // mean pre-clip norm
};

struct WindowRecord {
  long window = 0;
  long env_steps = 0;
  long successes = 0;
  long deviations = 0;
  long timeouts = 0;
  double mean_episode_reward = 0.0;
};

inline double explained_variance(const std::vector<double>& returns,
                                 const std::vector<double>& values) {
  const std::size_t n = returns.size();
  if (n == 0 || values.size() != n) return 0.0;
  double mr = 0.0;
  for (double v : returns) mr += v;
  mr /= static_cast<double>(n);
  double var_r = 0.0, var_d = 0.0, md = 0.0;
  for (std::size_t i = 0; i < n; ++i) md += returns[i] - values[i];
  md /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    var_r += (returns[i] - mr) * (returns[i] - mr);
    const double d = returns[i] - values[i] - md;
    var_d += d * d;
  }
  if (var_r <= 0.0) return var_d <= 0.0 ? 1.0 : 0.0;
  return 1.0 - var_d / var_r;
}

// One PPO update: n_epochs passes over shuffled minibatches; advantages
// normalized per minibatch; global grad-norm clipping before each Adam step.
inline TrainStats update(RolloutBuffer& buf, PolicyParams& policy,
                         AdamOptimizer& opt, const TrainConfig& cfg,
                         std::mt19937_64& shuffle_rng) {
  if (buf.advantages.empty()) compute_advantages(buf, cfg.gamma, cfg.gae_lambda);

  TrainStats stats;
  stats.explained_variance = explained_variance(buf.returns, buf.values);

  const long n = buf.size();
  std::vector<long> idx(n);
  std::iota(idx.begin(), idx.end(), 0l);

  long n_batches = 0;
  PolicyGrads grads = PolicyGrads::zeros_like(policy);
  for (int epoch = 0; epoch < cfg.n_epochs; ++epoch) {
    std::shuffle(idx.begin(), idx.end(), shuffle_rng);
    for (long start = 0; start + cfg.batch_size <= n; start += cfg.batch_size) {
      MiniBatch mb;
      mb.obs.reserve(cfg.batch_size);
      for (long k = start; k < start + cfg.batch_size; ++k) {
        const long i = idx[k];
        mb.obs.push_back(buf.obs[i]);
        mb.actions.push_back(buf.actions[i]);
        mb.old_log_probs.push_back(buf.log_probs[i]);
        mb.advantages.push_back(buf.advantages[i]);
        mb.returns.push_back(buf.returns[i]);
      }
      // normalize advantages within the minibatch
      double ma = 0.0;
      for (double a : mb.advantages) ma += a;
      ma /= static_cast<double>(mb.advantages.size());
      double sa = 0.0;
      for (double a : mb.advantages) sa += (a - ma) * (a - ma);
      sa = std::sqrt(sa / static_cast<double>(mb.advantages.size()));
      for (double& a : mb.advantages) a = (a - ma) / (sa + 1e-8);

      grads.zero();
      const LossComponents c = ppo_loss(policy, mb, cfg.clip_eps, cfg.value_coef,
                                        cfg.entropy_coef, &grads);
      if (!std::isfinite(c.total))
        throw std::runtime_error("ppo update: non-finite loss");
      stats.grad_norm += clip_grad_norm(grads, cfg.max_grad_norm);
      opt.update(policy, grads);

      stats.policy_loss += c.policy;
      stats.value_loss += c.value;
      stats.entropy_loss += c.entropy;
      stats.approx_kl += c.approx_kl;
      stats.clip_fraction += c.clip_fraction;
      ++n_batches;
    }
  }
  if (n_batches > 0) {
    const double inv = 1.0 / static_cast<double>(n_batches);
    stats.policy_loss *= inv;
    stats.value_loss *= inv;
    stats.entropy_loss *= inv;
    stats.approx_kl *= inv;
    stats.clip_fraction *= inv;
    stats.grad_norm *= inv;
  }
  return stats;
}

struct TrainSink {
  std::function<void(const TrainStats&)> on_update;
  std::function<void(const WindowRecord&)> on_window;
  std::function<void(const PolicyParams&, long env_steps, long window)> on_checkpoint;
};

struct TrainResult {
  PolicyParams policy;
  std::vector<TrainStats> history;
  std::vector<WindowRecord> windows;
};

inline TrainResult train(const TrainConfig& cfg, const TrainSink& sink = {}) {
  const Trajectory traj =
      step_reference(cfg.step_amplitude, cfg.settle_time, cfg.env.dt);

  auto init_rng = make_stream(cfg.seed, "init");
  auto shuffle_rng = make_stream(cfg.seed, "sampler");

  TrainResult result;
  result.policy = PolicyParams::init(init_rng);
  AdamOptimizer opt(result.policy, cfg.lr);
  VecEnv vec(cfg.n_envs, traj, cfg.env, cfg.seed);

  const long n_iters = cfg.n_iterations();
  EpisodeCounters window_counters;
  long env_steps = 0;
  long window = 0;

  for (long iter = 0; iter < n_iters; ++iter) {
    RolloutBuffer buf =
        collect_rollouts(vec, result.policy, cfg.n_steps_per_env, window_counters);
    env_steps += buf.size();
    compute_advantages(buf, cfg.gamma, cfg.gae_lambda);

    TrainStats stats = update(buf, result.policy, opt, cfg, shuffle_rng);
    stats.iteration = iter;
    stats.env_steps = env_steps;
    result.history.push_back(stats);
    if (sink.on_update) sink.on_update(stats);

    const bool window_done =
        (iter + 1) % cfg.monitor_every == 0 || iter + 1 == n_iters;
    if (window_done) {
      WindowRecord rec;
      rec.window = window++;
      rec.env_steps = env_steps;
      rec.successes = window_counters.successes;
      rec.deviations = window_counters.deviations;
      rec.timeouts = window_counters.timeouts;
      rec.mean_episode_reward = window_counters.mean_episode_reward();
      result.windows.push_back(rec);
      if (sink.on_window) sink.on_window(rec);
      if (sink.on_checkpoint) sink.on_checkpoint(result.policy, env_steps, rec.window);
      window_counters = EpisodeCounters{};
    }
  }
  return result;
}

} // namespace gainsched
