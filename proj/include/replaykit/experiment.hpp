#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "replaykit/agents.hpp"
#include "replaykit/envs.hpp"
#include "replaykit/hindsight.hpp"
#include "replaykit/replay_stack.hpp"
#include "replaykit/run_config.hpp"

namespace replaykit {

/// One row of the training log. Evaluation fields carry the most recent
/// evaluation forward and are NaN before the first one.
struct TrainRecord {
  int episode = 0;  // 1-based
  double train_reward = 0.0;
  double eval_mean = 0.0;
  double eval_std = 0.0;
  bool evaluated = false;  // an evaluation ran at the end of this episode
  std::int64_t steps = 0;
  std::int64_t wallclock_ms = 0;

  bool operator==(const TrainRecord&) const = default;
};

/// Optional instrumentation for tests and diagnostics.
struct TrainHooks {
  /// Every batch handed to the learner, with the buffer it came from.
  std::function<void(const Batch&, const ReplayBuffer&)> on_batch;
  /// Episode length and the number of transitions stored for that episode.
  std::function<void(int episode, std::size_t length, std::size_t stored)> on_episode_stored;
  std::function<void(const TrainRecord&)> on_record;
};

class Experiment;

/// Trains up to the episode limit, stopping early at convergence when
/// configured. Evaluation runs every eval_interval episodes.
std::vector<TrainRecord> train(Experiment& exp, const TrainHooks& hooks = {});

/// Fully assembled run: environment, agent and replay stack with matching
/// dimensions, and independent random streams.
class Experiment {
 public:
  explicit Experiment(RunConfig cfg);

  const RunConfig& config() const { return cfg_; }
  const EnvSpec& env_spec() const { return *spec_; }
  Agent& agent() { return *agent_; }
  const Agent& agent() const { return *agent_; }
  const ReplayStack& replay() const { return *replay_; }
  const std::optional<GoalSpec>& goal_spec() const { return goal_spec_; }

  /// Goal conditioning input for acting: the native goal when hindsight is on.
  std::optional<Vector> acting_goal() const;

 private:
  friend std::vector<TrainRecord> train(Experiment& exp, const TrainHooks& hooks);
  RunConfig cfg_;
  const EnvSpec* spec_;
  std::unique_ptr<Environment> env_;
  std::unique_ptr<Environment> eval_env_;
  std::unique_ptr<Agent> agent_;
  std::unique_ptr<ReplayStack> replay_;
  std::optional<GoalSpec> goal_spec_;
  Rng env_rng_, explore_rng_, sample_rng_, eval_rng_;
  std::int64_t total_steps_ = 0;
};

/// Validates `cfg` and assembles the replay stack as ring buffer, then
/// optional priority sampler, then optional combined-replay decorator.
Experiment build_run(const RunConfig& cfg);

struct EvalSummary {
  double mean = 0.0;
  double std = 0.0;
  std::vector<double> returns;
};

/// Runs `episodes` deterministic episodes of `policy` (no exploration).
EvalSummary evaluate_policy(Environment& env, const EnvSpec& spec, const InputEncoder& enc,
                            const Mlp& policy, const std::optional<Vector>& goal, int episodes,
                            Rng& rng);

/// First evaluated episode whose mean reaches the threshold (the
/// environment's solve reward unless overridden); none without a threshold.
std::optional<int> check_convergence(const std::vector<TrainRecord>& records, const EnvSpec& env,
                                     std::optional<double> threshold_override = std::nullopt);

/// header `episode,train_reward,eval_mean,eval_std,steps,wallclock_ms`, six
/// decimals for rewards.
void write_csv(std::ostream& out, const std::vector<TrainRecord>& records);
void emit_csv(const std::vector<TrainRecord>& records, const std::string& path);

void write_manifest(const RunConfig& cfg, const std::string& path);

/// Policy checkpoint: run metadata followed by the policy network.
void save_checkpoint(const Experiment& exp, const std::string& path);

struct Checkpoint {
  std::string env;
  std::string agent;
  bool hindsight = false;
  Mlp policy;
};

Checkpoint load_checkpoint(const std::string& path);

/// Outcome of one strategy in a sweep.
struct SweepEntry {
  StrategyFlags strategy;
  std::string status;  // converged | no-convergence-within-limit | unsupported | error
  std::optional<int> episodes_to_convergence;
  double best_eval_mean = 0.0;
  std::string message;
};

/// All eight strategy combinations for `base.env`; combinations the env
/// cannot run are reported as unsupported. Each run writes its CSV, manifest
/// and checkpoint under out_dir/<strategy>/ when out_dir is non-empty.
std::vector<SweepEntry> run_sweep(const RunConfig& base, const std::string& out_dir, int jobs);

void write_sweep_summary(std::ostream& out, const std::vector<SweepEntry>& entries);

}  // namespace replaykit
