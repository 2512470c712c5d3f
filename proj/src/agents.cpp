#include "replaykit/agents.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "replaykit/errors.hpp"

namespace replaykit {

namespace {

std::vector<std::size_t> layer_plan(std::size_t in, const std::vector<std::size_t>& hidden,
                                    std::size_t out) {
  std::vector<std::size_t> sizes;
  sizes.push_back(in);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

std::size_t argmax_lowest(const double* q, std::size_t n) {
  std::size_t best = 0;
  for (std::size_t a = 1; a < n; ++a) {
    if (q[a] > q[best]) best = a;
  }
  return best;
}

void guard_divergence(const std::vector<double>& td, double limit, const char* who) {
  for (std::size_t i = 0; i < td.size(); ++i) {
    if (!std::isfinite(td[i]) || std::abs(td[i]) > limit) {
      throw NumericalError(std::string(who) + " diverged: td error " + std::to_string(td[i]) +
                           " at batch position " + std::to_string(i));
    }
  }
}

Eigen::MatrixXd encode_states(const InputEncoder& enc, const Batch& batch, bool next) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(enc.input_dim()),
                    static_cast<Eigen::Index>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Transition& t = batch[i].get();
    enc.encode_column(next ? t.next_state : t.state, t.goal, x, static_cast<Eigen::Index>(i));
  }
  return x;
}

}  // namespace

InputEncoder::InputEncoder(const EnvSpec& env, bool use_goal)
    : obs_dim_(env.obs_dim),
      goal_dim_(use_goal ? env.goal_dim : 0),
      obs_offset_(env.obs_offset),
      obs_scale_(env.obs_scale),
      goal_offset_(env.goal_offset),
      goal_scale_(env.goal_scale) {
  if (use_goal && !env.supports_goals()) {
    throw UnsupportedGoalError(env.name + " does not support hindsight goals");
  }
  if (obs_offset_.empty()) obs_offset_.assign(obs_dim_, 0.0);
  if (obs_scale_.empty()) obs_scale_.assign(obs_dim_, 1.0);
  if (goal_offset_.empty()) goal_offset_.assign(goal_dim_, 0.0);
  if (goal_scale_.empty()) goal_scale_.assign(goal_dim_, 1.0);
}

void InputEncoder::encode_column(std::span<const double> state, const std::optional<Vector>& goal,
                                 Eigen::MatrixXd& out, Eigen::Index column) const {
  if (state.size() != obs_dim_) {
    throw ShapeError("state has dimension " + std::to_string(state.size()) + ", expected " +
                     std::to_string(obs_dim_));
  }
  if (goal_dim_ > 0 && (!goal || goal->size() != goal_dim_)) {
    throw ShapeError("goal-conditioned input needs a goal of dimension " + std::to_string(goal_dim_));
  }
  for (std::size_t i = 0; i < obs_dim_; ++i) {
    out(static_cast<Eigen::Index>(i), column) = (state[i] - obs_offset_[i]) * obs_scale_[i];
  }
  for (std::size_t i = 0; i < goal_dim_; ++i) {
    out(static_cast<Eigen::Index>(obs_dim_ + i), column) =
        ((*goal)[i] - goal_offset_[i]) * goal_scale_[i];
  }
}

Vector InputEncoder::encode(std::span<const double> state, const std::optional<Vector>& goal) const {
  Eigen::MatrixXd col(static_cast<Eigen::Index>(input_dim()), 1);
  encode_column(state, goal, col, 0);
  return Vector(col.data(), col.data() + col.size());
}

// ---------------------------------------------------------------------------

void DqnConfig::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("dqn gamma must lie in [0, 1]");
  if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_end >= 0.0 &&
        epsilon_end <= epsilon_start)) {
    throw ConfigError("dqn epsilon schedule must satisfy 0 <= end <= start <= 1");
  }
  if (epsilon_decay_steps < 0) throw ConfigError("dqn epsilon decay steps must be non-negative");
  if (target_update_period < 1) throw ConfigError("dqn target update period must be positive");
  if (batch_size < 1) throw ConfigError("dqn batch size must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("dqn learning rate must be positive");
  if (buffer_capacity < 1) throw ConfigError("dqn buffer capacity must be positive");
}

double DqnConfig::epsilon_at(std::int64_t step) const {
  if (epsilon_decay_steps <= 0 || step >= epsilon_decay_steps) return epsilon_end;
  const double frac = static_cast<double>(std::max<std::int64_t>(step, 0)) /
                      static_cast<double>(epsilon_decay_steps);
  return epsilon_start + frac * (epsilon_end - epsilon_start);
}

std::int64_t dqn_act(const Mlp& q, std::span<const double> input, double epsilon, Rng& rng) {
  const std::size_t n = q.output_dim();
  if (epsilon > 0.0 && uniform01(rng) < epsilon) {
    return static_cast<std::int64_t>(uniform_index(rng, n));
  }
  const Vector values = q.forward(input);
  return static_cast<std::int64_t>(argmax_lowest(values.data(), n));
}

double dqn_td_target(const Mlp& target, const InputEncoder& enc, const Transition& t, double gamma) {
  if (t.done) return t.reward;
  const Vector next = target.forward(enc.encode(t.next_state, t.goal));
  const double best = next[argmax_lowest(next.data(), next.size())];
  return t.reward + gamma * best;
}

UpdateResult dqn_update(Mlp& q, Adam& opt, const Mlp& target, const InputEncoder& enc,
                        const Batch& batch, const DqnConfig& cfg) {
  if (batch.empty()) throw ConfigError("dqn update needs a non-empty batch");
  const auto n = static_cast<Eigen::Index>(batch.size());
  const Eigen::MatrixXd states = encode_states(enc, batch, false);
  const Eigen::MatrixXd next_states = encode_states(enc, batch, true);

  const Eigen::MatrixXd next_q = target.forward(next_states);
  ForwardCache cache;
  const Eigen::MatrixXd q_values = q.forward(states, &cache);

  UpdateResult result;
  result.td_errors.resize(batch.size());
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(q_values.rows(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Sample& s = batch[static_cast<std::size_t>(i)];
    const Transition& t = s.get();
    const std::int64_t a = action_index(t.action);
    if (a < 0 || a >= q_values.rows()) throw DomainError("transition action outside the q head");
    double y = t.reward;
    if (!t.done) y += cfg.gamma * next_q.col(i).maxCoeff();
    const double delta = q_values(a, i) - y;
    result.td_errors[static_cast<std::size_t>(i)] = delta;
    result.loss += s.weight * delta * delta;
    grad(a, i) = 2.0 * s.weight * delta / static_cast<double>(n);
  }
  result.loss /= static_cast<double>(n);
  guard_divergence(result.td_errors, cfg.divergence_limit, "dqn");
  opt.step(q, q.backward(cache, grad));
  return result;
}

DqnAgent::DqnAgent(const EnvSpec& env, bool use_goal, DqnConfig cfg, Rng& init_rng)
    : cfg_(std::move(cfg)), encoder_(env, use_goal) {
  cfg_.validate();
  if (!env.action.discrete) throw ConfigError("dqn requires a discrete action space (" + env.name + ")");
  q_ = Mlp::initialized(layer_plan(encoder_.input_dim(), cfg_.hidden, env.action.n),
                        Activation::kRelu, Activation::kIdentity, init_rng);
  target_ = q_;
  opt_ = Adam(q_, AdamConfig{cfg_.learning_rate});
  if (q_.input_dim() != env.obs_dim + (use_goal ? env.goal_dim : 0)) {
    throw ShapeError("dqn input dimension does not match observation plus goal");
  }
}

Action DqnAgent::act(std::span<const double> state, const std::optional<Vector>& goal, bool explore,
                     Rng& rng) {
  const double eps = explore ? current_epsilon() : 0.0;
  return dqn_act(q_, encoder_.encode(state, goal), eps, rng);
}

std::vector<double> DqnAgent::learn(const Batch& batch) {
  return dqn_update(q_, opt_, target_, encoder_, batch, cfg_).td_errors;
}

void DqnAgent::after_env_step(std::int64_t total_steps) {
  env_steps_ = total_steps;
  if (total_steps > 0 && total_steps % cfg_.target_update_period == 0) hard_copy(target_, q_);
}

// ---------------------------------------------------------------------------

OuNoise::OuNoise(std::size_t dim, double theta, double sigma, double mu)
    : theta_(theta), sigma_(sigma), mu_(mu), state_(dim, mu) {}

void OuNoise::reset() {
  std::fill(state_.begin(), state_.end(), mu_);
  normal_.reset();
}

const Vector& OuNoise::sample(Rng& rng) {
  for (double& n : state_) n += theta_ * (mu_ - n) + sigma_ * normal_(rng);
  return state_;
}

void DdpgConfig::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("ddpg gamma must lie in [0, 1]");
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("ddpg tau must lie in (0, 1)");
  if (!(actor_learning_rate > 0.0) || !(critic_learning_rate > 0.0)) {
    throw ConfigError("ddpg learning rates must be positive");
  }
  if (!(ou_sigma >= 0.0) || !(ou_theta >= 0.0)) throw ConfigError("ddpg ou parameters must be non-negative");
  if (batch_size < 1) throw ConfigError("ddpg batch size must be positive");
  if (buffer_capacity < 1) throw ConfigError("ddpg buffer capacity must be positive");
}

Vector ddpg_act(const Mlp& actor, std::span<const double> input, OuNoise* noise, Rng& rng,
                const ActionSpace& space) {
  Vector action = actor.forward(input);
  if (noise) {
    const Vector& n = noise->sample(rng);
    if (n.size() != action.size()) throw ShapeError("noise dimension differs from the action");
    for (std::size_t i = 0; i < action.size(); ++i) action[i] += n[i];
  }
  for (double& a : action) a = std::clamp(a, space.low, space.high);
  return action;
}

Eigen::MatrixXd critic_input(const Eigen::MatrixXd& states, const Eigen::MatrixXd& actions,
                             const ActionSpace& space) {
  if (states.cols() != actions.cols()) throw ShapeError("state and action batches differ in size");
  const double bound = std::max(std::abs(space.low), std::abs(space.high));
  Eigen::MatrixXd x(states.rows() + actions.rows(), states.cols());
  x.topRows(states.rows()) = states;
  x.bottomRows(actions.rows()) = actions / bound;
  return x;
}

UpdateResult ddpg_critic_update(Mlp& critic, Adam& opt, const Mlp& critic_target,
                                const Mlp& actor_target, const InputEncoder& enc,
                                const ActionSpace& space, const Batch& batch,
                                const DdpgConfig& cfg) {
  if (batch.empty()) throw ConfigError("ddpg update needs a non-empty batch");
  const auto n = static_cast<Eigen::Index>(batch.size());
  const Eigen::MatrixXd states = encode_states(enc, batch, false);
  const Eigen::MatrixXd next_states = encode_states(enc, batch, true);
  Eigen::MatrixXd actions(static_cast<Eigen::Index>(space.dim), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector& a = action_values(batch[static_cast<std::size_t>(i)].get().action);
    if (a.size() != space.dim) throw ShapeError("transition action has the wrong dimension");
    for (std::size_t d = 0; d < space.dim; ++d) actions(static_cast<Eigen::Index>(d), i) = a[d];
  }

  const Eigen::MatrixXd next_actions = actor_target.forward(next_states);
  const Eigen::MatrixXd next_q = critic_target.forward(critic_input(next_states, next_actions, space));
  ForwardCache cache;
  const Eigen::MatrixXd q = critic.forward(critic_input(states, actions, space), &cache);

  UpdateResult result;
  result.td_errors.resize(batch.size());
  Eigen::MatrixXd grad(1, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Sample& s = batch[static_cast<std::size_t>(i)];
    const Transition& t = s.get();
    double y = t.reward;
    if (!t.done) y += cfg.gamma * next_q(0, i);
    const double delta = q(0, i) - y;
    result.td_errors[static_cast<std::size_t>(i)] = delta;
    result.loss += s.weight * delta * delta;
    grad(0, i) = 2.0 * s.weight * delta / static_cast<double>(n);
  }
  result.loss /= static_cast<double>(n);
  guard_divergence(result.td_errors, cfg.divergence_limit, "ddpg critic");
  opt.step(critic, critic.backward(cache, grad));
  return result;
}

MlpGradients ddpg_actor_gradient(const Mlp& actor, const Mlp& critic, const InputEncoder& enc,
                                 const ActionSpace& space, const Batch& batch, double* objective) {
  if (batch.empty()) throw ConfigError("ddpg update needs a non-empty batch");
  const auto n = static_cast<Eigen::Index>(batch.size());
  const Eigen::MatrixXd states = encode_states(enc, batch, false);
  ForwardCache actor_cache;
  const Eigen::MatrixXd actions = actor.forward(states, &actor_cache);
  ForwardCache critic_cache;
  const Eigen::MatrixXd q = critic.forward(critic_input(states, actions, space), &critic_cache);
  if (objective) *objective = q.mean();

  // Minimize -mean Q(s, mu(s)).
  const Eigen::MatrixXd dq = Eigen::MatrixXd::Constant(1, n, -1.0 / static_cast<double>(n));
  Eigen::MatrixXd d_input;
  critic.backward(critic_cache, dq, &d_input);
  const double bound = std::max(std::abs(space.low), std::abs(space.high));
  const Eigen::MatrixXd d_action = d_input.bottomRows(actions.rows()) / bound;
  return actor.backward(actor_cache, d_action);
}

double ddpg_actor_update(Mlp& actor, Adam& opt, const Mlp& critic, const InputEncoder& enc,
                         const ActionSpace& space, const Batch& batch) {
  double objective = 0.0;
  const MlpGradients grads = ddpg_actor_gradient(actor, critic, enc, space, batch, &objective);
  opt.step(actor, grads);
  return objective;
}

DdpgAgent::DdpgAgent(const EnvSpec& env, bool use_goal, DdpgConfig cfg, Rng& init_rng)
    : cfg_(std::move(cfg)),
      space_(env.action),
      encoder_(env, use_goal),
      noise_(env.action.dim, cfg_.ou_theta, cfg_.ou_sigma, cfg_.ou_mu) {
  cfg_.validate();
  if (space_.discrete) throw ConfigError("ddpg requires a continuous action space (" + env.name + ")");
  const double bound = std::max(std::abs(space_.low), std::abs(space_.high));
  actor_ = Mlp::initialized(layer_plan(encoder_.input_dim(), cfg_.hidden, space_.dim),
                            Activation::kRelu, Activation::kTanh, init_rng, bound, 1e-3);
  critic_ = Mlp::initialized(layer_plan(encoder_.input_dim() + space_.dim, cfg_.hidden, 1),
                             Activation::kRelu, Activation::kIdentity, init_rng);
  actor_target_ = actor_;
  critic_target_ = critic_;
  actor_opt_ = Adam(actor_, AdamConfig{cfg_.actor_learning_rate});
  critic_opt_ = Adam(critic_, AdamConfig{cfg_.critic_learning_rate});
  if (actor_.input_dim() != env.obs_dim + (use_goal ? env.goal_dim : 0)) {
    throw ShapeError("ddpg input dimension does not match observation plus goal");
  }
}

Action DdpgAgent::act(std::span<const double> state, const std::optional<Vector>& goal, bool explore,
                      Rng& rng) {
  return ddpg_act(actor_, encoder_.encode(state, goal), explore ? &noise_ : nullptr, rng, space_);
}

std::vector<double> DdpgAgent::learn(const Batch& batch) {
  UpdateResult r = ddpg_critic_update(critic_, critic_opt_, critic_target_, actor_target_, encoder_,
                                      space_, batch, cfg_);
  ddpg_actor_update(actor_, actor_opt_, critic_, encoder_, space_, batch);
  return std::move(r.td_errors);
}

void DdpgAgent::after_env_step(std::int64_t /*total_steps*/) {
  soft_update(actor_target_, actor_, cfg_.tau);
  soft_update(critic_target_, critic_, cfg_.tau);
}

Action greedy_action(const Mlp& policy, const ActionSpace& space, std::span<const double> input) {
  if (space.discrete) {
    const Vector q = policy.forward(input);
    return static_cast<std::int64_t>(argmax_lowest(q.data(), q.size()));
  }
  Vector a = policy.forward(input);
  for (double& x : a) x = std::clamp(x, space.low, space.high);
  return a;
}

}  // namespace replaykit
