// Command-line front end: train one strategy stack, sweep all of them for an
// environment, or replay a saved policy.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "replaykit/errors.hpp"
#include "replaykit/experiment.hpp"

namespace fs = std::filesystem;
using namespace replaykit;

namespace {

struct CommonOptions {
  std::string env = "cartpole";
  std::string agent;
  bool combined = false;
  bool prioritized = false;
  bool hindsight = false;
  std::uint64_t seed = 0;
  int episodes = 500;
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out = "runs";
};

void add_common(CLI::App* cmd, CommonOptions& o, bool strategy_flags) {
  cmd->add_option("--env", o.env, "cartpole | mountaincar | pendulum")->required();
  cmd->add_option("--agent", o.agent, "dqn | ddpg (default: by action space)");
  if (strategy_flags) {
    cmd->add_flag("--combined", o.combined, "always include the latest transition (CER)");
    cmd->add_flag("--prioritized", o.prioritized, "TD-error prioritized sampling (PER)");
    cmd->add_flag("--hindsight", o.hindsight, "final-state goal relabeling (HER)");
  }
  cmd->add_option("--seed", o.seed, "run seed")->required();
  cmd->add_option("--episodes", o.episodes, "training episode limit")->required();
  cmd->add_option("--config", o.config_path, "key=value config file");
  cmd->add_option("--set", o.overrides, "key=value override, repeatable");
  cmd->add_option("--out", o.out, "output directory")->required();
}

RunConfig make_config(const CommonOptions& o) {
  RunConfig cfg;
  if (!o.config_path.empty()) apply_config_file(cfg, o.config_path);
  cfg.env = o.env;
  cfg.agent = o.agent.empty() ? default_agent_for(o.env) : o.agent;
  cfg.strategy.combined = cfg.strategy.combined || o.combined;
  cfg.strategy.prioritized = cfg.strategy.prioritized || o.prioritized;
  cfg.strategy.hindsight = cfg.strategy.hindsight || o.hindsight;
  cfg.seed = o.seed;
  cfg.episodes = o.episodes;
  for (const std::string& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

int run_train(const CommonOptions& o) {
  const RunConfig cfg = make_config(o);
  Experiment exp = build_run(cfg);
  fs::create_directories(o.out);
  write_manifest(cfg, (fs::path(o.out) / "manifest.txt").string());
  TrainHooks hooks;
  hooks.on_record = [](const TrainRecord& r) {
    if (r.evaluated) {
      std::printf("episode %d  steps %lld  train %.1f  eval %.2f +- %.2f\n", r.episode,
                  static_cast<long long>(r.steps), r.train_reward, r.eval_mean, r.eval_std);
      std::fflush(stdout);
    }
  };
  const auto records = train(exp, hooks);
  if (!records.empty()) emit_csv(records, (fs::path(o.out) / "train.csv").string());
  save_checkpoint(exp, (fs::path(o.out) / "checkpoint.txt").string());
  const auto converged = check_convergence(records, exp.env_spec(), cfg.solve_threshold);
  std::printf("%s %s: %s\n", cfg.env.c_str(), cfg.strategy.name().c_str(),
              converged ? ("converged at episode " + std::to_string(*converged)).c_str()
                        : "no convergence within limit");
  return 0;
}

int run_sweep_cmd(const CommonOptions& o, int jobs) {
  const RunConfig base = make_config(o);
  const auto entries = run_sweep(base, o.out, jobs);
  std::ofstream summary(fs::path(o.out) / "summary.csv");
  write_sweep_summary(summary, entries);
  write_sweep_summary(std::cout, entries);
  return 0;
}

int run_eval(const std::string& checkpoint, int episodes, std::uint64_t seed) {
  const Checkpoint ck = load_checkpoint(checkpoint);
  const EnvSpec& spec = env_spec(ck.env);
  const InputEncoder enc(spec, ck.hindsight);
  auto env = make_env(ck.env);
  Rng rng = make_stream(seed, Stream::kEval);
  std::optional<Vector> goal;
  if (ck.hindsight) goal = spec.native_goal;
  const EvalSummary s = evaluate_policy(*env, spec, enc, ck.policy, goal, episodes, rng);
  std::printf("env=%s agent=%s episodes=%d mean=%.6f std=%.6f\n", ck.env.c_str(), ck.agent.c_str(),
              episodes, s.mean, s.std);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Experience replay strategy experiments (CER / PER / HER with DQN and DDPG)"};
  app.require_subcommand(1);

  CommonOptions train_opts;
  auto* train_cmd = app.add_subcommand("train", "train one agent with one replay strategy stack");
  add_common(train_cmd, train_opts, true);

  CommonOptions sweep_opts;
  int jobs = 1;
  auto* sweep_cmd = app.add_subcommand("sweep", "train every strategy combination for an environment");
  add_common(sweep_cmd, sweep_opts, false);
  sweep_cmd->add_option("--jobs", jobs, "parallel worker threads");

  std::string checkpoint;
  int eval_episodes = 100;
  std::uint64_t eval_seed = 0;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a saved policy without exploration");
  eval_cmd->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  eval_cmd->add_option("--episodes", eval_episodes, "evaluation episodes");
  eval_cmd->add_option("--seed", eval_seed, "evaluation seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) return run_train(train_opts);
    if (*sweep_cmd) return run_sweep_cmd(sweep_opts, jobs);
    if (*eval_cmd) return run_eval(checkpoint, eval_episodes, eval_seed);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
