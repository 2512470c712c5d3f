#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "replaykit/envs.hpp"
#include "replaykit/mlp.hpp"
#include "replaykit/random.hpp"
#include "replaykit/replay_buffer.hpp"

namespace replaykit {

/// Builds network inputs from raw observations: a fixed affine scaling per
/// environment, then the scaled goal appended when hindsight is enabled.
class InputEncoder {
 public:
  InputEncoder(const EnvSpec& env, bool use_goal);

  std::size_t input_dim() const { return obs_dim_ + goal_dim_; }
  std::size_t obs_dim() const { return obs_dim_; }
  std::size_t goal_dim() const { return goal_dim_; }

  Vector encode(std::span<const double> state, const std::optional<Vector>& goal) const;
  /// Writes the encoding of each (state, goal) into one column of `out`.
  void encode_column(std::span<const double> state, const std::optional<Vector>& goal,
                     Eigen::MatrixXd& out, Eigen::Index column) const;

 private:
  std::size_t obs_dim_;
  std::size_t goal_dim_;
  Vector obs_offset_, obs_scale_, goal_offset_, goal_scale_;
};

// ---------------------------------------------------------------------------
// DQN

struct DqnConfig {
  double gamma = 0.99;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  std::int64_t epsilon_decay_steps = 10000;
  std::int64_t target_update_period = 500;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  std::size_t warmup = 1000;
  std::size_t buffer_capacity = 50000;
  std::vector<std::size_t> hidden = {64, 64};
  double divergence_limit = 1e6;

  void validate() const;
  /// Linear decay from epsilon_start to epsilon_end over epsilon_decay_steps.
  double epsilon_at(std::int64_t step) const;
};

/// Greedy action with probability 1 - epsilon (ties go to the lowest index),
/// otherwise a uniformly random action.
std::int64_t dqn_act(const Mlp& q, std::span<const double> input, double epsilon, Rng& rng);

/// r if the transition terminated, else r + gamma * max_a' Q_target(s', a').
double dqn_td_target(const Mlp& target, const InputEncoder& enc, const Transition& t, double gamma);

struct UpdateResult {
  std::vector<double> td_errors;  // Q(s, a) - y per sample, before the step
  double loss = 0.0;
};

/// One optimizer step on mean_i w_i (Q(s_i, a_i) - y_i)^2.
UpdateResult dqn_update(Mlp& q, Adam& opt, const Mlp& target, const InputEncoder& enc,
                        const Batch& batch, const DqnConfig& cfg);

// ---------------------------------------------------------------------------
// DDPG

/// Discrete Ornstein-Uhlenbeck process n <- n + theta (mu - n) + sigma * N(0, 1).
class OuNoise {
 public:
  OuNoise(std::size_t dim, double theta, double sigma, double mu);

  void reset();
  const Vector& sample(Rng& rng);
  const Vector& state() const { return state_; }

 private:
  double theta_, sigma_, mu_;
  Vector state_;
  std::normal_distribution<double> normal_;
};

struct DdpgConfig {
  double gamma = 0.99;
  double tau = 0.005;
  double actor_learning_rate = 1e-4;
  double critic_learning_rate = 1e-3;
  double ou_theta = 0.15;
  double ou_sigma = 0.2;
  double ou_mu = 0.0;
  std::size_t batch_size = 64;
  std::size_t warmup = 1000;
  std::size_t buffer_capacity = 100000;
  std::vector<std::size_t> hidden = {64, 64};
  double divergence_limit = 1e6;

  void validate() const;
};

/// clip(mu(s) + noise) to the action bounds. A null `noise` acts greedily.
Vector ddpg_act(const Mlp& actor, std::span<const double> input, OuNoise* noise, Rng& rng,
                const ActionSpace& space);

/// Critic input: encoded state stacked over the action divided by the bound.
Eigen::MatrixXd critic_input(const Eigen::MatrixXd& states, const Eigen::MatrixXd& actions,
                             const ActionSpace& space);

/// y = r + gamma * Q'(s', mu'(s')) (just r on termination), one step on the
/// weighted squared TD error. Returns Q(s, a) - y per sample.
UpdateResult ddpg_critic_update(Mlp& critic, Adam& opt, const Mlp& critic_target,
                                const Mlp& actor_target, const InputEncoder& enc,
                                const ActionSpace& space, const Batch& batch,
                                const DdpgConfig& cfg);

/// Gradient of -mean Q(s, mu(s)) with respect to the actor parameters. Also
/// reports the objective mean Q(s, mu(s)) when `objective` is non-null.
MlpGradients ddpg_actor_gradient(const Mlp& actor, const Mlp& critic, const InputEncoder& enc,
                                 const ActionSpace& space, const Batch& batch,
                                 double* objective = nullptr);

/// One step ascending mean Q(s, mu(s)); the critic's input gradient with
/// respect to the action is chained into the actor. Returns the objective
/// before the step.
double ddpg_actor_update(Mlp& actor, Adam& opt, const Mlp& critic, const InputEncoder& enc,
                         const ActionSpace& space, const Batch& batch);

// ---------------------------------------------------------------------------
// Agent interface used by the training loop.

enum class AgentKind { kDqn, kDdpg };

class Agent {
 public:
  virtual ~Agent() = default;

  virtual AgentKind kind() const = 0;
  virtual void begin_episode() {}
  /// explore = false selects the deterministic evaluation policy.
  virtual Action act(std::span<const double> state, const std::optional<Vector>& goal,
                     bool explore, Rng& rng) = 0;
  /// One learning step on `batch`; returns the per-sample TD errors.
  virtual std::vector<double> learn(const Batch& batch) = 0;
  /// Target-network schedule, called once after every environment step.
  virtual void after_env_step(std::int64_t total_steps) = 0;

  virtual std::size_t batch_size() const = 0;
  virtual std::size_t warmup() const = 0;
  virtual const InputEncoder& encoder() const = 0;
  /// Network that maps encoded observations to the acting policy.
  virtual const Mlp& policy_network() const = 0;
};

class DqnAgent final : public Agent {
 public:
  DqnAgent(const EnvSpec& env, bool use_goal, DqnConfig cfg, Rng& init_rng);

  AgentKind kind() const override { return AgentKind::kDqn; }
  Action act(std::span<const double> state, const std::optional<Vector>& goal, bool explore,
             Rng& rng) override;
  std::vector<double> learn(const Batch& batch) override;
  void after_env_step(std::int64_t total_steps) override;

  std::size_t batch_size() const override { return cfg_.batch_size; }
  std::size_t warmup() const override { return cfg_.warmup; }
  const InputEncoder& encoder() const override { return encoder_; }
  const Mlp& policy_network() const override { return q_; }

  const Mlp& q_network() const { return q_; }
  const Mlp& target_network() const { return target_; }
  const DqnConfig& config() const { return cfg_; }
  double current_epsilon() const { return cfg_.epsilon_at(env_steps_); }

 private:
  DqnConfig cfg_;
  InputEncoder encoder_;
  Mlp q_;
  Mlp target_;
  Adam opt_;
  std::int64_t env_steps_ = 0;
};

class DdpgAgent final : public Agent {
 public:
  DdpgAgent(const EnvSpec& env, bool use_goal, DdpgConfig cfg, Rng& init_rng);

  AgentKind kind() const override { return AgentKind::kDdpg; }
  void begin_episode() override { noise_.reset(); }
  Action act(std::span<const double> state, const std::optional<Vector>& goal, bool explore,
             Rng& rng) override;
  std::vector<double> learn(const Batch& batch) override;
  void after_env_step(std::int64_t total_steps) override;

  std::size_t batch_size() const override { return cfg_.batch_size; }
  std::size_t warmup() const override { return cfg_.warmup; }
  const InputEncoder& encoder() const override { return encoder_; }
  const Mlp& policy_network() const override { return actor_; }

  const Mlp& actor() const { return actor_; }
  const Mlp& critic() const { return critic_; }
  const Mlp& actor_target() const { return actor_target_; }
  const Mlp& critic_target() const { return critic_target_; }

 private:
  DdpgConfig cfg_;
  ActionSpace space_;
  InputEncoder encoder_;
  Mlp actor_, critic_, actor_target_, critic_target_;
  Adam actor_opt_, critic_opt_;
  OuNoise noise_;
};

/// Greedy action of a bare policy network, as used when replaying a checkpoint.
Action greedy_action(const Mlp& policy, const ActionSpace& space, std::span<const double> input);

}  // namespace replaykit
