#include "replaykit/envs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "replaykit/errors.hpp"

namespace replaykit {

namespace {

EnvSpec make_cartpole_spec() {
  EnvSpec s;
  s.name = "cartpole";
  s.id = EnvId::kCartPole;
  s.obs_dim = 4;
  s.action = ActionSpace{true, 2, 0, 0.0, 0.0};
  s.max_episode_steps = 200;
  s.solve_reward = 200.0;
  s.obs_offset = {0.0, 0.0, 0.0, 0.0};
  s.obs_scale = {1.0 / 2.4, 0.5, 1.0 / 0.21, 0.5};
  return s;
}

EnvSpec make_mountaincar_spec() {
  EnvSpec s;
  s.name = "mountaincar";
  s.id = EnvId::kMountainCar;
  s.obs_dim = 2;
  s.action = ActionSpace{true, 3, 0, 0.0, 0.0};
  s.max_episode_steps = 200;
  s.solve_reward = -110.0;
  s.goal_dim = 1;
  s.native_goal = {mountaincar::kGoalPosition};
  s.obs_offset = {-0.3, 0.0};
  s.obs_scale = {1.0 / 0.9, 1.0 / mountaincar::kMaxSpeed};
  s.goal_offset = {-0.3};
  s.goal_scale = {1.0 / 0.9};
  return s;
}

EnvSpec make_pendulum_spec() {
  EnvSpec s;
  s.name = "pendulum";
  s.id = EnvId::kPendulum;
  s.obs_dim = 3;
  s.action = ActionSpace{false, 0, 1, -pendulum::kMaxTorque, pendulum::kMaxTorque};
  s.max_episode_steps = 200;
  s.goal_dim = 1;
  s.native_goal = {0.0};
  s.obs_offset = {0.0, 0.0, 0.0};
  s.obs_scale = {1.0, 1.0, 1.0 / pendulum::kMaxSpeed};
  s.goal_offset = {0.0};
  s.goal_scale = {1.0 / std::numbers::pi};
  return s;
}

std::int64_t checked_discrete(const Action& action, std::int64_t n, const char* env) {
  if (!is_discrete(action)) {
    throw DomainError(std::string(env) + " expects a discrete action index");
  }
  const std::int64_t a = action_index(action);
  if (a < 0 || a >= n) {
    throw DomainError(std::string(env) + " action " + std::to_string(a) + " out of range");
  }
  return a;
}

class CartPoleEnv final : public Environment {
 public:
  const EnvSpec& spec() const override { return env_spec("cartpole"); }

 protected:
  Vector do_reset(Rng& rng) override {
    state_ = cartpole_reset(rng);
    return state_;
  }
  StepResult do_step(const Action& action) override {
    StepResult r = cartpole_step(state_, checked_discrete(action, 2, "cartpole"));
    state_ = r.next_state;
    return r;
  }

 private:
  Vector state_;
};

class MountainCarEnv final : public Environment {
 public:
  const EnvSpec& spec() const override { return env_spec("mountaincar"); }

 protected:
  Vector do_reset(Rng& rng) override {
    state_ = mountaincar_reset(rng);
    return state_;
  }
  StepResult do_step(const Action& action) override {
    StepResult r = mountaincar_step(state_, checked_discrete(action, 3, "mountaincar"));
    state_ = r.next_state;
    return r;
  }

 private:
  Vector state_;
};

class PendulumEnv final : public Environment {
 public:
  const EnvSpec& spec() const override { return env_spec("pendulum"); }

 protected:
  Vector do_reset(Rng& rng) override {
    state_ = pendulum_reset(rng);
    return pendulum_observation(state_);
  }
  StepResult do_step(const Action& action) override {
    if (is_discrete(action) || action_values(action).size() != 1) {
      throw DomainError("pendulum expects a one-dimensional continuous action");
    }
    PendulumStep r = pendulum_step(state_, action_values(action)[0]);
    state_ = r.next;
    return StepResult{std::move(r.observation), r.reward, false, false};
  }

 private:
  PendulumState state_;
};

}  // namespace

const EnvSpec& env_spec(std::string_view name) {
  static const EnvSpec kCartPole = make_cartpole_spec();
  static const EnvSpec kMountainCar = make_mountaincar_spec();
  static const EnvSpec kPendulum = make_pendulum_spec();
  if (name == "cartpole") return kCartPole;
  if (name == "mountaincar") return kMountainCar;
  if (name == "pendulum") return kPendulum;
  throw ConfigError("unknown environment '" + std::string(name) +
                    "' (expected cartpole, mountaincar or pendulum)");
}

Vector cartpole_reset(Rng& rng) {
  Vector s(4);
  for (auto& x : s) x = uniform(rng, -0.05, 0.05);
  return s;
}

StepResult cartpole_step(std::span<const double> state, std::int64_t action) {
  using namespace cartpole;
  if (state.size() != 4) throw ShapeError("cartpole state must have 4 components");
  if (action != 0 && action != 1) throw DomainError("cartpole action must be 0 or 1");
  constexpr double kTotalMass = kCartMass + kPoleMass;
  constexpr double kPoleMassLength = kPoleMass * kHalfLength;

  double x = state[0], x_dot = state[1], theta = state[2], theta_dot = state[3];
  const double force = action == 1 ? kForce : -kForce;
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);
  const double temp = (force + kPoleMassLength * theta_dot * theta_dot * sin_t) / kTotalMass;
  const double theta_acc = (kGravity * sin_t - cos_t * temp) /
                           (kHalfLength * (4.0 / 3.0 - kPoleMass * cos_t * cos_t / kTotalMass));
  const double x_acc = temp - kPoleMassLength * theta_acc * cos_t / kTotalMass;

  x += kDt * x_dot;
  x_dot += kDt * x_acc;
  theta += kDt * theta_dot;
  theta_dot += kDt * theta_acc;

  StepResult r;
  r.next_state = {x, x_dot, theta, theta_dot};
  r.done = x < -kXThreshold || x > kXThreshold || theta < -kThetaThreshold ||
           theta > kThetaThreshold;
  r.reward = 1.0;
  return r;
}

Vector mountaincar_reset(Rng& rng) { return {uniform(rng, -0.6, -0.4), 0.0}; }

StepResult mountaincar_step(std::span<const double> state, std::int64_t action) {
  using namespace mountaincar;
  if (state.size() != 2) throw ShapeError("mountaincar state must have 2 components");
  if (action < 0 || action > 2) throw DomainError("mountaincar action must be 0, 1 or 2");

  double position = state[0];
  double velocity = state[1];
  velocity += static_cast<double>(action - 1) * kForce - std::cos(3.0 * position) * kGravity;
  velocity = std::clamp(velocity, -kMaxSpeed, kMaxSpeed);
  position += velocity;
  position = std::clamp(position, kMinPosition, kMaxPosition);
  if (position == kMinPosition && velocity < 0.0) velocity = 0.0;

  StepResult r;
  r.next_state = {position, velocity};
  r.done = position >= kGoalPosition;
  r.reward = r.done ? 0.0 : -1.0;
  return r;
}

double wrap_angle(double angle) {
  constexpr double kPi = std::numbers::pi;
  if (angle > -kPi && angle <= kPi) return angle;
  const double r = std::remainder(angle, 2.0 * kPi);
  return r <= -kPi ? kPi : r;
}

double pendulum_reward(double theta, double theta_dot, double action) {
  const double th = wrap_angle(theta);
  return -(th * th + 0.1 * theta_dot * theta_dot + 0.001 * action * action);
}

Vector pendulum_observation(const PendulumState& s) {
  return {std::cos(s.theta), std::sin(s.theta), s.theta_dot};
}

PendulumState pendulum_reset(Rng& rng) {
  PendulumState s;
  s.theta = uniform(rng, -std::numbers::pi, std::numbers::pi);
  s.theta_dot = uniform(rng, -1.0, 1.0);
  return s;
}

PendulumStep pendulum_step(const PendulumState& s, double action) {
  using namespace pendulum;
  if (!std::isfinite(action)) throw DomainError("pendulum action must be finite");
  const double u = std::clamp(action, -kMaxTorque, kMaxTorque);
  double theta_dot = s.theta_dot + (3.0 * kGravity / (2.0 * kLength) * std::sin(s.theta) +
                                    3.0 / (kMass * kLength * kLength) * u) *
                                       kDt;
  theta_dot = std::clamp(theta_dot, -kMaxSpeed, kMaxSpeed);
  const double theta = s.theta + theta_dot * kDt;

  PendulumStep r;
  r.next = PendulumState{theta, theta_dot};
  r.observation = pendulum_observation(r.next);
  r.torque = u;
  const double observed_angle = std::atan2(r.observation[1], r.observation[0]);
  r.reward = pendulum_reward(observed_angle, r.observation[2], u);
  return r;
}

Vector extract_achieved_goal(const EnvSpec& spec, std::span<const double> observation) {
  if (observation.size() != spec.obs_dim) {
    throw ShapeError("observation dimension does not match " + spec.name);
  }
  switch (spec.id) {
    case EnvId::kMountainCar:
      return {observation[0]};
    case EnvId::kPendulum:
      return {std::atan2(observation[1], observation[0])};
    default:
      throw UnsupportedGoalError(spec.name + " does not support hindsight goals");
  }
}

Vector Environment::reset(Rng& rng) {
  steps_ = 0;
  finished_ = false;
  return do_reset(rng);
}

StepResult Environment::step(const Action& action) {
  if (finished_) throw IntegrityError("step called on a finished episode; call reset first");
  StepResult r = do_step(action);
  ++steps_;
  r.truncated = steps_ >= spec().max_episode_steps;
  finished_ = r.done || r.truncated;
  return r;
}

std::unique_ptr<Environment> make_env(std::string_view name) {
  const EnvSpec& spec = env_spec(name);
  switch (spec.id) {
    case EnvId::kCartPole:
      return std::make_unique<CartPoleEnv>();
    case EnvId::kMountainCar:
      return std::make_unique<MountainCarEnv>();
    case EnvId::kPendulum:
      return std::make_unique<PendulumEnv>();
    default:
      break;
  }
  throw ConfigError("no environment registered for '" + std::string(name) + "'");
}

}  // namespace replaykit
