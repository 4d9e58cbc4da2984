#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gainsched/config.hpp"
#include "gainsched/metrics.hpp"
#include "gainsched/policy.hpp"
#include "gainsched/ppo.hpp"
#include "gainsched/trajectory.hpp"

namespace fs = std::filesystem;
using namespace gainsched;

namespace {

// Remaining "--key value" tokens become config overrides, so every
// documented key is reachable from the command line.
void apply_extras(KeyValueConfig& cfg, const std::vector<std::string>& extras) {
  for (std::size_t i = 0; i < extras.size(); ++i) {
    std::string key = extras[i];
    if (key.rfind("--", 0) != 0)
      throw std::runtime_error("unexpected argument: " + key);
    key = key.substr(2);
    const auto eq = key.find('=');
    if (eq != std::string::npos) {
      cfg.set(key.substr(0, eq), key.substr(eq + 1));
    } else {
      if (i + 1 >= extras.size())
        throw std::runtime_error("missing value for --" + key);
      cfg.set(key, extras[++i]);
    }
  }
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << content;
}

GainVector parse_gains(const std::string& csv, const GainBounds& bounds) {
  std::istringstream ss(csv);
  std::string tok;
  std::array<double, 6> g;
  for (int i = 0; i < 6; ++i) {
    if (!std::getline(ss, tok, ','))
      throw std::runtime_error("expected 6 comma-separated gains, got: " + csv);
    g[i] = std::stod(tok);
  }
  if (std::getline(ss, tok, ','))
    throw std::runtime_error("expected exactly 6 gains, got more: " + csv);
  const GainVector gv = GainVector::from_array(g);
  const int bad = bounds.first_violation(gv);
  if (bad >= 0) {
    std::ostringstream os;
    os << "gain " << GainBounds::names[bad] << " = " << g[bad]
       << " outside allowed range [" << bounds.lo[bad] << ", " << bounds.hi[bad] << "]";
    throw std::runtime_error(os.str());
  }
  return gv;
}

Trajectory load_trajectory(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open trajectory file " + path);
  return Trajectory::import_csv(is);
}

nlohmann::json stats_to_json(const TrainStats& s) {
  return {{"iteration", s.iteration},
          {"env_steps", s.env_steps},
          {"policy_loss", s.policy_loss},
          {"value_loss", s.value_loss},
          {"entropy_loss", s.entropy_loss},
          {"approx_kl", s.approx_kl},
          {"clip_fraction", s.clip_fraction},
          {"explained_variance", s.explained_variance},
          {"grad_norm", s.grad_norm}};
}

int cmd_train(KeyValueConfig& cfg, const std::string& out_dir) {
  const TrainConfig tc = resolve_train_config(cfg);
  fs::create_directories(out_dir);
  write_file(fs::path(out_dir) / "config_resolved.txt", cfg.echo());

  std::ofstream log(fs::path(out_dir) / "train_log.jsonl", std::ios::binary);
  std::ofstream mon(fs::path(out_dir) / "monitoring.csv", std::ios::binary);
  mon << "window,env_steps,successes,deviations,timeouts,mean_episode_reward\n";

  TrainSink sink;
  sink.on_update = [&](const TrainStats& s) {
    log << stats_to_json(s).dump() << "\n";
    std::cerr << "iter " << s.iteration << " steps " << s.env_steps
              << " ev " << s.explained_variance << " vloss " << s.value_loss << "\n";
  };
  sink.on_window = [&](const WindowRecord& w) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%ld,%ld,%ld,%ld,%ld,%.17g\n", w.window,
                  w.env_steps, w.successes, w.deviations, w.timeouts,
                  w.mean_episode_reward);
    mon << buf;
  };
  sink.on_checkpoint = [&](const PolicyParams& p, long steps, long window) {
    char name[64];
    std::snprintf(name, sizeof(name), "checkpoint_window%03ld.json", window);
    save_checkpoint(p, (fs::path(out_dir) / name).string(), steps);
  };

  const TrainResult result = train(tc, sink);
  save_checkpoint(result.policy, (fs::path(out_dir) / "checkpoint_final.json").string(),
                  tc.total_steps);
  std::cerr << "training complete: " << result.history.size() << " iterations, "
            << result.windows.size() << " monitoring windows\n";
  return 0;
}

int cmd_eval(KeyValueConfig& cfg, const std::string& out_dir,
             const std::string& checkpoint, const std::string& baseline_gains,
             const std::vector<std::string>& traj_files) {
  const EnvConfig env = resolve_env_config(cfg);
  const PolicyParams policy = load_checkpoint(checkpoint);
  const GainVector baseline = baseline_gains.empty()
                                  ? env.gain_bounds.midpoint()
                                  : parse_gains(baseline_gains, env.gain_bounds);

  std::vector<NamedTrajectory> suite;
  if (traj_files.empty()) {
    suite = evaluation_suite(env.dt);
  } else {
    for (const auto& f : traj_files)
      suite.push_back({fs::path(f).stem().string(), load_trajectory(f)});
  }

  fs::create_directories(out_dir);
  write_file(fs::path(out_dir) / "config_resolved.txt", cfg.echo());

  ComparisonLogs logs;
  const EvalReport report = compare(baseline, policy, suite, env, &logs);

  write_file(fs::path(out_dir) / "report.json", report.to_json().dump(1) + "\n");
  write_file(fs::path(out_dir) / "report.txt", report.to_table());
  for (std::size_t i = 0; i < suite.size(); ++i) {
    std::ofstream b(fs::path(out_dir) / ("baseline_" + suite[i].name + ".csv"),
                    std::ios::binary);
    logs.baseline[i].export_csv(b);
    std::ofstream r(fs::path(out_dir) / ("rl_" + suite[i].name + ".csv"),
                    std::ios::binary);
    logs.rl[i].export_csv(r);
  }
  std::cout << report.to_table();
  return 0;
}

int cmd_simulate(KeyValueConfig& cfg, const std::string& out_dir,
                 const std::string& checkpoint, const std::string& gains_csv,
                 const std::string& traj_file) {
  const EnvConfig env = resolve_env_config(cfg);
  GainSource source = env.gain_bounds.midpoint();
  if (!checkpoint.empty()) source = load_checkpoint(checkpoint);
  else if (!gains_csv.empty()) source = parse_gains(gains_csv, env.gain_bounds);

  Trajectory traj = traj_file.empty()
                        ? step_reference(cfg.get_double("step-amplitude", 1.0),
                                         cfg.get_double("settle-time", 5.0), env.dt)
                        : load_trajectory(traj_file);

  fs::create_directories(out_dir);
  write_file(fs::path(out_dir) / "config_resolved.txt", cfg.echo());

  const EpisodeLog log = run_episode(source, traj, env);
  std::ofstream os(fs::path(out_dir) / "episode.csv", std::ios::binary);
  log.export_csv(os);
  std::cerr << "outcome: " << to_string(log.outcome)
            << " duration: " << log.duration()
            << " ise: " << ise(log.position_errors(), log.dt) << "\n";
  return log.outcome == EpisodeOutcome::Success ? 0 : 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"PPO-scheduled cascade gains for a planar quadcopter"};
  app.require_subcommand(1);

  std::string config_file, out_dir = "out", checkpoint, baseline_gains, gains_csv;
  std::vector<std::string> traj_files;
  std::string traj_file;
  long seed = -1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_file, "key = value config file");
    sub->add_option("--seed", seed, "root RNG seed");
    sub->add_option("-o,--out", out_dir, "output directory");
    sub->allow_extras();
  };

  CLI::App* train_cmd = app.add_subcommand("train", "run PPO training on the step reference");
  add_common(train_cmd);

  CLI::App* eval_cmd = app.add_subcommand("eval", "compare a trained policy against a static baseline");
  add_common(eval_cmd);
  eval_cmd->add_option("--checkpoint", checkpoint, "policy checkpoint JSON")->required();
  eval_cmd->add_option("--baseline-gains", baseline_gains,
                       "six comma-separated static gains (default: range midpoints)");
  eval_cmd->add_option("--trajectory", traj_files,
                       "trajectory CSV (repeatable; default: 3 fixed-seed waypoint paths)");

  CLI::App* sim_cmd = app.add_subcommand("simulate", "run one episode and export its log");
  add_common(sim_cmd);
  sim_cmd->add_option("--checkpoint", checkpoint, "policy checkpoint JSON");
  sim_cmd->add_option("--gains", gains_csv, "six comma-separated static gains");
  sim_cmd->add_option("--trajectory", traj_file, "trajectory CSV (default: 1 m step)");

  CLI11_PARSE(app, argc, argv);

  try {
    CLI::App* sub = app.get_subcommands().front();
    KeyValueConfig cfg;
    if (!config_file.empty()) cfg.load_file(config_file);
    apply_extras(cfg, sub->remaining());
    if (seed >= 0) cfg.set("seed", std::to_string(seed));

    if (sub == train_cmd) return cmd_train(cfg, out_dir);
    if (sub == eval_cmd) return cmd_eval(cfg, out_dir, checkpoint, baseline_gains, traj_files);
    if (sub == sim_cmd) return cmd_simulate(cfg, out_dir, checkpoint, gains_csv, traj_file);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
