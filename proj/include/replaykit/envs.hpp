#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "replaykit/random.hpp"
#include "replaykit/transition.hpp"

namespace replaykit {

enum class EnvId { kCartPole, kMountainCar, kPendulum, kCustom };

struct ActionSpace {
  bool discrete = true;
  std::size_t n = 0;    // number of discrete actions
  std::size_t dim = 0;  // continuous action dimension
  double low = 0.0;
  double high = 0.0;
};

/// Static description of an environment. Network inputs are built as
/// (obs - obs_offset) * obs_scale, with the same affine map for goals.
struct EnvSpec {
  std::string name;
  EnvId id = EnvId::kCustom;
  std::size_t obs_dim = 0;
  ActionSpace action;
  int max_episode_steps = 0;
  std::optional<double> solve_reward;

  std::size_t goal_dim = 0;  // 0: no hindsight goal space
  Vector native_goal;

  Vector obs_offset;
  Vector obs_scale;
  Vector goal_offset;
  Vector goal_scale;

  bool supports_goals() const { return goal_dim > 0; }
};

/// Looks up "cartpole", "mountaincar" or "pendulum"; throws ConfigError otherwise.
const EnvSpec& env_spec(std::string_view name);

struct StepResult {
  Vector next_state;
  double reward = 0.0;
  bool done = false;       // task termination
  bool truncated = false;  // time limit reached
};

namespace cartpole {
inline constexpr double kGravity = 9.8;
inline constexpr double kCartMass = 1.0;
inline constexpr double kPoleMass = 0.1;
inline constexpr double kHalfLength = 0.5;
inline constexpr double kForce = 10.0;
inline constexpr double kDt = 0.02;
inline constexpr double kXThreshold = 2.4;
inline constexpr double kThetaThreshold = 12.0 * 2.0 * 3.14159265358979323846 / 360.0;
}  // namespace cartpole

namespace mountaincar {
inline constexpr double kForce = 0.001;
inline constexpr double kGravity = 0.0025;
inline constexpr double kMinPosition = -1.2;
inline constexpr double kMaxPosition = 0.6;
inline constexpr double kMaxSpeed = 0.07;
inline constexpr double kGoalPosition = 0.5;
}  // namespace mountaincar

namespace pendulum {
inline constexpr double kGravity = 10.0;
inline constexpr double kMass = 1.0;
inline constexpr double kLength = 1.0;
inline constexpr double kDt = 0.05;
inline constexpr double kMaxTorque = 2.0;
inline constexpr double kMaxSpeed = 8.0;
}  // namespace pendulum

/// State [x, x_dot, theta, theta_dot], each uniform in [-0.05, 0.05].
Vector cartpole_reset(Rng& rng);
/// One Euler step. Reward +1; done when |x| > 2.4 or |theta| > 12 degrees.
StepResult cartpole_step(std::span<const double> state, std::int64_t action);

/// State [position, velocity]; position uniform in [-0.6, -0.4], velocity 0.
Vector mountaincar_reset(Rng& rng);
/// Action 0 pushes left, 1 coasts, 2 pushes right. Reward -1, or 0 with
/// done once position >= 0.5.
StepResult mountaincar_step(std::span<const double> state, std::int64_t action);

/// Physical pendulum state. The observation is [cos theta, sin theta, theta_dot].
struct PendulumState {
  double theta = 0.0;
  double theta_dot = 0.0;
};

/// Maps an angle to (-pi, pi]; values already in range are returned unchanged.
double wrap_angle(double angle);

/// -(theta^2 + 0.1 theta_dot^2 + 0.001 action^2) with theta wrapped first.
double pendulum_reward(double theta, double theta_dot, double action);

Vector pendulum_observation(const PendulumState& s);
PendulumState pendulum_reset(Rng& rng);

struct PendulumStep {
  PendulumState next;
  Vector observation;
  double reward = 0.0;
  double torque = 0.0;  // action after clipping
};

/// Advances the pendulum with the torque clipped to [-2, 2]. The reward is
/// evaluated on the resulting observation so that it agrees bit-for-bit with
/// the hindsight goal reward at the upright goal.
PendulumStep pendulum_step(const PendulumState& s, double action);

/// Achieved goal for hindsight relabeling: MountainCar [position], Pendulum
/// [angle]. CartPole has no goal space and throws UnsupportedGoalError.
Vector extract_achieved_goal(const EnvSpec& spec, std::span<const double> observation);

/// Stateful episode wrapper adding the time limit on top of the dynamics.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual const EnvSpec& spec() const = 0;

  Vector reset(Rng& rng);
  StepResult step(const Action& action);

  int steps() const { return steps_; }

 protected:
  virtual Vector do_reset(Rng& rng) = 0;
  virtual StepResult do_step(const Action& action) = 0;

 private:
  int steps_ = 0;
  bool finished_ = true;
};

std::unique_ptr<Environment> make_env(std::string_view name);

}  // namespace replaykit
