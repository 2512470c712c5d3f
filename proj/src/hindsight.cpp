#include "replaykit/hindsight.hpp"

#include <cmath>
#include <string>

#include "replaykit/errors.hpp"

namespace replaykit {

double default_goal_tolerance(const EnvSpec& env) {
  switch (env.id) {
    case EnvId::kMountainCar:
      return 0.05;
    case EnvId::kPendulum:
      return 0.1;
    default:
      throw UnsupportedGoalError(env.name + " does not support hindsight goals");
  }
}

GoalSpec make_goal_spec(const EnvSpec& env, std::optional<double> tolerance) {
  const double tol = tolerance.value_or(default_goal_tolerance(env));
  if (!(tol >= 0.0)) throw ConfigError("goal tolerance must be non-negative");
  GoalSpec spec;
  spec.goal_dim = env.goal_dim;
  spec.tolerance = tol;
  spec.extract_achieved = [env](std::span<const double> s) { return extract_achieved_goal(env, s); };
  switch (env.id) {
    case EnvId::kMountainCar:
      spec.goal_reward = [tol](std::span<const double> s, const Action& a,
                               std::span<const double> g) {
        return mountaincar_goal_reward(s, a, g, tol);
      };
      spec.terminate_on_success = true;
      break;
    case EnvId::kPendulum:
      spec.goal_reward = [tol](std::span<const double> s, const Action& a,
                               std::span<const double> g) {
        return pendulum_goal_reward(s, a, g, tol);
      };
      spec.terminate_on_success = false;
      break;
    default:
      throw UnsupportedGoalError(env.name + " does not support hindsight goals");
  }
  return spec;
}

const Vector& Episode::final_state() const {
  if (transitions.empty()) throw IntegrityError("episode has no transitions");
  return transitions.back().next_state;
}

void Episode::validate() const {
  if (transitions.empty()) throw IntegrityError("episode has no transitions");
  for (std::size_t i = 0; i + 1 < transitions.size(); ++i) {
    if (transitions[i].next_state != transitions[i + 1].state) {
      throw IntegrityError("episode chain broken between steps " + std::to_string(i) + " and " +
                           std::to_string(i + 1));
    }
    if (transitions[i].done) {
      throw IntegrityError("terminal transition at step " + std::to_string(i) +
                           " is not the last of the episode");
    }
  }
}

std::vector<Transition> RelabeledEpisode::all() const {
  std::vector<Transition> out;
  out.reserve(original.size() + relabeled.size());
  out.insert(out.end(), original.begin(), original.end());
  out.insert(out.end(), relabeled.begin(), relabeled.end());
  return out;
}

RelabeledEpisode relabel_episode(const Episode& ep, const GoalSpec& spec) {
  ep.validate();
  const Vector achieved = spec.extract_achieved(ep.final_state());
  if (achieved.size() != spec.goal_dim) throw ShapeError("achieved goal has the wrong dimension");

  RelabeledEpisode out;
  out.original = ep.transitions;
  out.relabeled.reserve(ep.transitions.size());
  out.relabeled_success.reserve(ep.transitions.size());
  for (const Transition& t : ep.transitions) {
    Transition copy = t;
    const GoalReward gr = spec.goal_reward(t.next_state, t.action, achieved);
    copy.goal = achieved;
    copy.reward = gr.reward;
    copy.done = spec.terminate_on_success && gr.success;
    out.relabeled.push_back(std::move(copy));
    out.relabeled_success.push_back(gr.success);
  }
  return out;
}

Vector augment_observation(std::span<const double> state, std::span<const double> goal,
                           std::size_t state_dim, std::size_t goal_dim) {
  if (state.size() != state_dim) {
    throw ShapeError("state has dimension " + std::to_string(state.size()) + ", expected " +
                     std::to_string(state_dim));
  }
  if (goal.size() != goal_dim) {
    throw ShapeError("goal has dimension " + std::to_string(goal.size()) + ", expected " +
                     std::to_string(goal_dim));
  }
  Vector out(state.begin(), state.end());
  out.insert(out.end(), goal.begin(), goal.end());
  return out;
}

GoalReward mountaincar_goal_reward(std::span<const double> state, const Action& /*action*/,
                                   std::span<const double> goal, double tolerance) {
  if (goal.size() != 1) throw ShapeError("mountaincar goal is a single position");
  if (state.empty()) throw ShapeError("mountaincar state is empty");
  const double position = state[0];
  const bool success = goal[0] >= mountaincar::kGoalPosition
                           ? position >= goal[0]
                           : std::abs(position - goal[0]) <= tolerance;
  return GoalReward{success ? 0.0 : -1.0, success};
}

GoalReward pendulum_goal_reward(std::span<const double> state, const Action& action,
                                std::span<const double> goal, double tolerance) {
  if (goal.size() != 1) throw ShapeError("pendulum goal is a single angle");
  if (state.size() != 3) throw ShapeError("pendulum observation has 3 components");
  double torque = 0.0;
  if (!is_discrete(action)) {
    const Vector& v = action_values(action);
    if (v.size() != 1) throw ShapeError("pendulum action is one-dimensional");
    torque = v[0];
  }
  const double theta = std::atan2(state[1], state[0]);
  const double delta = wrap_angle(theta - goal[0]);
  const double theta_dot = state[2];
  const double reward = -(delta * delta + 0.1 * theta_dot * theta_dot + 0.001 * torque * torque);
  return GoalReward{reward, std::abs(delta) <= tolerance};
}

}  // namespace replaykit
