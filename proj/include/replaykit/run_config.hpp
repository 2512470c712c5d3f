#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "replaykit/agents.hpp"
#include "replaykit/prioritized.hpp"
#include "replaykit/replay_stack.hpp"

namespace replaykit {

/// Complete description of one training run.
struct RunConfig {
  std::string env = "cartpole";
  std::string agent = "dqn";
  StrategyFlags strategy;
  std::uint64_t seed = 0;
  int episodes = 500;
  int eval_interval = 50;
  int eval_episodes = 100;
  bool stop_on_convergence = true;
  /// Overrides the environment's solve reward for convergence detection.
  std::optional<double> solve_threshold;
  /// Writes real elapsed time into the CSV; the file is then no longer
  /// byte-reproducible, so the column is 0 unless enabled.
  bool record_wallclock = false;
  std::optional<double> goal_tolerance;

  DqnConfig dqn;
  DdpgConfig ddpg;
  PerConfig per;

  /// Throws ConfigError naming the conflicting pair for invalid combinations.
  void validate() const;

  /// Applies one `key=value` setting; throws ConfigError for unknown keys or
  /// unparsable values.
  void set(const std::string& key, const std::string& value);

  /// Every effective setting in a fixed order, as written to the manifest.
  std::vector<std::pair<std::string, std::string>> to_key_values() const;
};

/// Reads `key = value` lines ('#' starts a comment) and applies them to `cfg`.
void apply_config_file(RunConfig& cfg, const std::string& path);
void apply_config_text(RunConfig& cfg, const std::string& text);

/// Default agent for an environment: DDPG for continuous actions, else DQN.
std::string default_agent_for(const std::string& env);

}  // namespace replaykit
