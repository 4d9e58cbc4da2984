#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "gainsched/environment.hpp"
#include "gainsched/ppo.hpp"

namespace gainsched {

// Flat key = value document; '#' starts a comment. Flags override file keys.
class KeyValueConfig {
 public:
  void load_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("config: cannot open " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error("config: missing '=' at line " + std::to_string(lineno));
      set(trim(trimmed.substr(0, eq)), trim(trimmed.substr(eq + 1)));
    }
  }

  void set(const std::string& key, const std::string& value) { kv_[key] = value; }
  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    try {
      std::size_t pos = 0;
      const double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument(it->second);
      return v;
    } catch (const std::exception&) {
      throw std::runtime_error("config: key '" + key + "' is not a number: " + it->second);
    }
  }

  long get_long(const std::string& key, long fallback) const {
    const double v = get_double(key, static_cast<double>(fallback));
    return static_cast<long>(v);
  }

  // Resolved document, sorted keys; reruns from this echo are identical.
  std::string echo() const {
    std::ostringstream os;
    for (const auto& [k, v] : kv_) os << k << " = " << v << "\n";
    return os.str();
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  std::map<std::string, std::string> kv_;
};

// Record a resolved default without clobbering a user-provided string.
inline void record_double(KeyValueConfig& c, const std::string& key, double v) {
  if (c.has(key)) return;
  std::ostringstream os;
  os.precision(17);
  os << v;
  c.set(key, os.str());
}

inline void record_string(KeyValueConfig& c, const std::string& key,
                          const std::string& v) {
  if (!c.has(key)) c.set(key, v);
}

inline EnvConfig resolve_env_config(KeyValueConfig& c);

// Pull the documented keys out of a config, defaulting everything unset,
// and write the resolved values back so echo() shows the full picture.
inline TrainConfig resolve_train_config(KeyValueConfig& c) {
  TrainConfig t;
  t.total_steps = c.get_long("total-steps", t.total_steps);
  t.n_envs = static_cast<int>(c.get_long("n-envs", t.n_envs));
  t.n_steps_per_env = static_cast<int>(c.get_long("n-steps-per-env", t.n_steps_per_env));
  t.batch_size = static_cast<int>(c.get_long("batch-size", t.batch_size));
  t.gamma = c.get_double("gamma", t.gamma);
  t.lr = c.get_double("lr", t.lr);
  t.gae_lambda = c.get_double("gae-lambda", t.gae_lambda);
  t.clip_eps = c.get_double("clip-eps", t.clip_eps);
  t.n_epochs = static_cast<int>(c.get_long("n-epochs", t.n_epochs));
  t.value_coef = c.get_double("value-coef", t.value_coef);
  t.entropy_coef = c.get_double("entropy-coef", t.entropy_coef);
  t.max_grad_norm = c.get_double("max-grad-norm", t.max_grad_norm);
  t.seed = static_cast<std::uint64_t>(c.get_long("seed", static_cast<long>(t.seed)));
  t.monitor_every = static_cast<int>(c.get_long("monitor-every", t.monitor_every));
  t.step_amplitude = c.get_double("step-amplitude", t.step_amplitude);
  t.settle_time = c.get_double("settle-time", t.settle_time);
  t.env = resolve_env_config(c);

  record_string(c, "total-steps", std::to_string(t.total_steps));
  record_string(c, "n-envs", std::to_string(t.n_envs));
  record_string(c, "n-steps-per-env", std::to_string(t.n_steps_per_env));
  record_string(c, "batch-size", std::to_string(t.batch_size));
  record_double(c, "gamma", t.gamma);
  record_double(c, "lr", t.lr);
  record_double(c, "gae-lambda", t.gae_lambda);
  record_double(c, "clip-eps", t.clip_eps);
  record_string(c, "n-epochs", std::to_string(t.n_epochs));
  record_double(c, "value-coef", t.value_coef);
  record_double(c, "entropy-coef", t.entropy_coef);
  record_double(c, "max-grad-norm", t.max_grad_norm);
  record_string(c, "seed", std::to_string(t.seed));
  record_string(c, "monitor-every", std::to_string(t.monitor_every));
  record_double(c, "step-amplitude", t.step_amplitude);
  record_double(c, "settle-time", t.settle_time);
  return t;
}

inline EnvConfig resolve_env_config(KeyValueConfig& c) {
  EnvConfig e;
  e.dt = c.get_double("dt", e.dt);
  e.deviation_limit = c.get_double("deviation-limit", e.deviation_limit);
  e.timeout_factor = c.get_double("timeout-factor", e.timeout_factor);
  e.success_pos_tol = c.get_double("success-pos-tol", e.success_pos_tol);
  e.success_vel_tol = c.get_double("success-vel-tol", e.success_vel_tol);
  e.params.m = c.get_double("mass", e.params.m);
  e.params.inertia = c.get_double("inertia", e.params.inertia);
  e.params.l = c.get_double("arm-length", e.params.l);
  e.params.g = c.get_double("gravity", e.params.g);
  e.params.cd_v = c.get_double("drag-linear", e.params.cd_v);
  e.params.cd_omega = c.get_double("drag-rotational", e.params.cd_omega);
  e.params.t_max = c.get_double("thrust-max", 1.5 * e.params.m * e.params.g);
  const std::string denom = c.get_string("angular-denominator", "inertia");
  if (denom == "inertia") e.params.angular_denominator = AngularDenominator::Inertia;
  else if (denom == "mass") e.params.angular_denominator = AngularDenominator::Mass;
  else throw std::runtime_error("config: angular-denominator must be inertia or mass");
  if (!e.params.valid()) throw std::runtime_error("config: invalid quad parameters");

  record_double(c, "dt", e.dt);
  record_double(c, "deviation-limit", e.deviation_limit);
  record_double(c, "timeout-factor", e.timeout_factor);
  record_double(c, "success-pos-tol", e.success_pos_tol);
  record_double(c, "success-vel-tol", e.success_vel_tol);
  record_double(c, "mass", e.params.m);
  record_double(c, "inertia", e.params.inertia);
  record_double(c, "arm-length", e.params.l);
  record_double(c, "gravity", e.params.g);
  record_double(c, "drag-linear", e.params.cd_v);
  record_double(c, "drag-rotational", e.params.cd_omega);
  record_double(c, "thrust-max", e.params.t_max);
  record_string(c, "angular-denominator", denom);
  return e;
}

} // namespace gainsched
