#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "replaykit/envs.hpp"
#include "replaykit/transition.hpp"

namespace replaykit {

struct GoalReward {
  double reward = 0.0;
  bool success = false;
};

/// Goal-conditioned reward evaluated on the state a transition arrives in.
using GoalRewardFn = std::function<GoalReward(std::span<const double> achieved_state,
                                              const Action& action, std::span<const double> goal)>;

struct GoalSpec {
  std::function<Vector(std::span<const double>)> extract_achieved;
  GoalRewardFn goal_reward;
  std::size_t goal_dim = 0;
  double tolerance = 0.0;
  /// Relabeled transitions are marked done when they succeed (MountainCar).
  bool terminate_on_success = false;
};

/// Default tolerances: MountainCar 0.05 position units, Pendulum 0.1 rad.
double default_goal_tolerance(const EnvSpec& env);

/// Goal space for `env`; throws UnsupportedGoalError for CartPole.
GoalSpec make_goal_spec(const EnvSpec& env, std::optional<double> tolerance = std::nullopt);

/// Transitions from reset to the end of an episode, all carrying the
/// original goal.
struct Episode {
  std::vector<Transition> transitions;

  const Vector& final_state() const;
  /// Throws IntegrityError unless the episode is non-empty, chained
  /// (next_state[i] == state[i + 1]) and only the last step is terminal.
  void validate() const;
};

struct RelabeledEpisode {
  std::vector<Transition> original;
  std::vector<Transition> relabeled;
  std::vector<bool> relabeled_success;

  /// Originals followed by relabeled copies; length 2 * episode length.
  std::vector<Transition> all() const;
};

/// Final-state hindsight relabeling: every transition is kept with its
/// original goal and duplicated with goal m(final_state), its reward and done
/// flag recomputed under that goal.
RelabeledEpisode relabel_episode(const Episode& ep, const GoalSpec& spec);

/// [state; goal]. With goal_dim = 0 the state is returned unchanged.
Vector augment_observation(std::span<const double> state, std::span<const double> goal,
                           std::size_t state_dim, std::size_t goal_dim);

/// Success when the position is within `tolerance` of the goal. Goals at or
/// beyond the flag (>= 0.5) use the flag rule position >= goal, which matches
/// the environment's own termination. Reward 0 on success, -1 otherwise.
GoalReward mountaincar_goal_reward(std::span<const double> state, const Action& action,
                                   std::span<const double> goal, double tolerance);

/// -(dtheta^2 + 0.1 theta_dot^2 + 0.001 action^2) with dtheta the wrapped
/// angular distance to the goal angle; success when |dtheta| <= tolerance.
GoalReward pendulum_goal_reward(std::span<const double> state, const Action& action,
                                std::span<const double> goal, double tolerance);

}  // namespace replaykit
