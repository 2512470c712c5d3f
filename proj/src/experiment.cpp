#include "replaykit/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "replaykit/errors.hpp"

namespace replaykit {

namespace {

std::string fixed6(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::ofstream open_for_write(const std::string& path) {
  if (std::filesystem::is_directory(path)) throw IoError("'" + path + "' is a directory");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

Experiment::Experiment(RunConfig cfg)
    : cfg_(std::move(cfg)),
      spec_(&replaykit::env_spec(cfg_.env)),
      env_rng_(make_stream(cfg_.seed, Stream::kEnv)),
      explore_rng_(make_stream(cfg_.seed, Stream::kExplore)),
      sample_rng_(make_stream(cfg_.seed, Stream::kSample)),
      eval_rng_(make_stream(cfg_.seed, Stream::kEval)) {
  cfg_.validate();
  env_ = make_env(cfg_.env);
  eval_env_ = make_env(cfg_.env);
  Rng init_rng = make_stream(cfg_.seed, Stream::kInit);
  const bool her = cfg_.strategy.hindsight;
  std::size_t capacity = 0;
  if (cfg_.agent == "dqn") {
    agent_ = std::make_unique<DqnAgent>(*spec_, her, cfg_.dqn, init_rng);
    capacity = cfg_.dqn.buffer_capacity;
  } else {
    agent_ = std::make_unique<DdpgAgent>(*spec_, her, cfg_.ddpg, init_rng);
    capacity = cfg_.ddpg.buffer_capacity;
  }
  std::optional<PerConfig> per;
  if (cfg_.strategy.prioritized) per = cfg_.per;
  replay_ = std::make_unique<ReplayStack>(capacity, cfg_.strategy.combined, per);
  if (her) goal_spec_ = make_goal_spec(*spec_, cfg_.goal_tolerance);
}

std::optional<Vector> Experiment::acting_goal() const {
  if (!cfg_.strategy.hindsight) return std::nullopt;
  return spec_->native_goal;
}

Experiment build_run(const RunConfig& cfg) { return Experiment(cfg); }

EvalSummary evaluate_policy(Environment& env, const EnvSpec& spec, const InputEncoder& enc,
                            const Mlp& policy, const std::optional<Vector>& goal, int episodes,
                            Rng& rng) {
  EvalSummary out;
  out.returns.reserve(static_cast<std::size_t>(std::max(episodes, 0)));
  for (int e = 0; e < episodes; ++e) {
    Vector state = env.reset(rng);
    double total = 0.0;
    while (true) {
      StepResult r = env.step(greedy_action(policy, spec.action, enc.encode(state, goal)));
      total += r.reward;
      state = std::move(r.next_state);
      if (r.done || r.truncated) break;
    }
    out.returns.push_back(total);
  }
  if (!out.returns.empty()) {
    double sum = 0.0;
    for (double r : out.returns) sum += r;
    out.mean = sum / static_cast<double>(out.returns.size());
    double sq = 0.0;
    for (double r : out.returns) sq += (r - out.mean) * (r - out.mean);
    out.std = std::sqrt(sq / static_cast<double>(out.returns.size()));
  }
  return out;
}

std::vector<TrainRecord> train(Experiment& exp, const TrainHooks& hooks) {
  const RunConfig& cfg = exp.cfg_;
  const EnvSpec& spec = *exp.spec_;
  Agent& agent = *exp.agent_;
  ReplayStack& replay = *exp.replay_;
  const std::optional<Vector> goal = exp.acting_goal();
  const auto start = std::chrono::steady_clock::now();
  const std::size_t warmup = std::max<std::size_t>(agent.warmup(), 1);
  const std::optional<double> threshold =
      cfg.solve_threshold ? cfg.solve_threshold : spec.solve_reward;

  std::vector<TrainRecord> records;
  double last_mean = std::numeric_limits<double>::quiet_NaN();
  double last_std = std::numeric_limits<double>::quiet_NaN();
  for (int episode = 1; episode <= cfg.episodes; ++episode) {
    Vector state = exp.env_->reset(exp.env_rng_);
    agent.begin_episode();
    Episode ep;
    double episode_reward = 0.0;
    std::size_t stored = 0;
    while (true) {
      Action action = agent.act(state, goal, true, exp.explore_rng_);
      StepResult r = exp.env_->step(action);
      episode_reward += r.reward;
      Transition t{state, std::move(action), r.reward, r.next_state, r.done, goal};
      if (goal) ep.transitions.push_back(t);
      replay.append(std::move(t));
      ++stored;
      ++exp.total_steps_;

      if (replay.size() >= warmup) {
        const Batch batch = replay.sample(agent.batch_size(), exp.sample_rng_);
        if (hooks.on_batch) hooks.on_batch(batch, replay.buffer());
        std::vector<double> td;
        try {
          td = agent.learn(batch);
        } catch (const NumericalError& e) {
          throw NumericalError(std::string(e.what()) + " (episode " + std::to_string(episode) +
                               ", step " + std::to_string(exp.total_steps_) + ")");
        }
        replay.update_priorities(batch, td);
      }
      agent.after_env_step(exp.total_steps_);

      state = std::move(r.next_state);
      if (r.done || r.truncated) break;
    }
    if (goal) {
      RelabeledEpisode relabeled = relabel_episode(ep, *exp.goal_spec_);
      for (Transition& t : relabeled.relabeled) {
        replay.append(std::move(t));
        ++stored;
      }
    }
    if (hooks.on_episode_stored) {
      hooks.on_episode_stored(episode, static_cast<std::size_t>(exp.env_->steps()), stored);
    }

    TrainRecord rec;
    rec.episode = episode;
    rec.train_reward = episode_reward;
    rec.steps = exp.total_steps_;
    if (cfg.eval_interval > 0 && episode % cfg.eval_interval == 0) {
      const EvalSummary s = evaluate_policy(*exp.eval_env_, spec, agent.encoder(),
                                            agent.policy_network(), goal, cfg.eval_episodes,
                                            exp.eval_rng_);
      last_mean = s.mean;
      last_std = s.std;
      rec.evaluated = true;
    }
    rec.eval_mean = last_mean;
    rec.eval_std = last_std;
    if (cfg.record_wallclock) {
      rec.wallclock_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - start)
                             .count();
    }
    records.push_back(rec);
    if (hooks.on_record) hooks.on_record(rec);
    if (cfg.stop_on_convergence && rec.evaluated && threshold && rec.eval_mean >= *threshold) break;
  }
  return records;
}

std::optional<int> check_convergence(const std::vector<TrainRecord>& records, const EnvSpec& env,
                                     std::optional<double> threshold_override) {
  const std::optional<double> threshold = threshold_override ? threshold_override : env.solve_reward;
  if (!threshold) return std::nullopt;
  for (const TrainRecord& r : records) {
    if (r.evaluated && r.eval_mean >= *threshold) return r.episode;
  }
  return std::nullopt;
}

void write_csv(std::ostream& out, const std::vector<TrainRecord>& records) {
  out << "episode,train_reward,eval_mean,eval_std,steps,wallclock_ms\n";
  for (const TrainRecord& r : records) {
    out << r.episode << ',' << fixed6(r.train_reward) << ',' << fixed6(r.eval_mean) << ','
        << fixed6(r.eval_std) << ',' << r.steps << ',' << r.wallclock_ms << '\n';
  }
}

void emit_csv(const std::vector<TrainRecord>& records, const std::string& path) {
  if (records.empty()) throw ConfigError("no training records to write");
  std::ofstream out = open_for_write(path);
  write_csv(out, records);
  if (!out.flush()) throw IoError("failed writing '" + path + "'");
}

void write_manifest(const RunConfig& cfg, const std::string& path) {
  std::ofstream out = open_for_write(path);
  for (const auto& [k, v] : cfg.to_key_values()) out << k << '=' << v << '\n';
  if (cfg.strategy.hindsight) {
    const EnvSpec& spec = env_spec(cfg.env);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", cfg.goal_tolerance.value_or(default_goal_tolerance(spec)));
    out << "effective.her.tolerance=" << buf << '\n';
  }
  if (!out.flush()) throw IoError("failed writing '" + path + "'");
}

void save_checkpoint(const Experiment& exp, const std::string& path) {
  std::ofstream out = open_for_write(path);
  out << "replaykit-checkpoint 1\n";
  out << "env " << exp.config().env << "\n";
  out << "agent " << exp.config().agent << "\n";
  out << "hindsight " << (exp.config().strategy.hindsight ? 1 : 0) << "\n";
  save_mlp(out, exp.agent().policy_network());
  if (!out.flush()) throw IoError("failed writing '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint '" + path + "'");
  std::string tag;
  int version = 0;
  if (!(in >> tag >> version) || tag != "replaykit-checkpoint" || version != 1) {
    throw IoError("'" + path + "' is not a replaykit checkpoint");
  }
  Checkpoint ck;
  int her = 0;
  if (!(in >> tag >> ck.env) || tag != "env") throw IoError("checkpoint missing env");
  if (!(in >> tag >> ck.agent) || tag != "agent") throw IoError("checkpoint missing agent");
  if (!(in >> tag >> her) || tag != "hindsight") throw IoError("checkpoint missing hindsight flag");
  ck.hindsight = her != 0;
  ck.policy = load_mlp(in);
  const EnvSpec& spec = env_spec(ck.env);
  const InputEncoder enc(spec, ck.hindsight);
  if (ck.policy.input_dim() != enc.input_dim()) {
    throw ShapeError("checkpoint policy input does not match " + ck.env);
  }
  return ck;
}

std::vector<SweepEntry> run_sweep(const RunConfig& base, const std::string& out_dir, int jobs) {
  const EnvSpec& spec = env_spec(base.env);
  std::vector<SweepEntry> entries;
  for (int mask = 0; mask < 8; ++mask) {
    SweepEntry e;
    e.strategy.combined = (mask & 1) != 0;
    e.strategy.prioritized = (mask & 2) != 0;
    e.strategy.hindsight = (mask & 4) != 0;
    entries.push_back(e);
  }
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);

  std::atomic<std::size_t> next{0};
  std::mutex fs_mutex;
  auto worker = [&]() {
    for (std::size_t i = next++; i < entries.size(); i = next++) {
      SweepEntry& e = entries[i];
      if (e.strategy.hindsight && !spec.supports_goals()) {
        e.status = "unsupported";
        e.message = spec.name + " does not support hindsight goals";
        continue;
      }
      RunConfig cfg = base;
      cfg.strategy = e.strategy;
      try {
        Experiment exp = build_run(cfg);
        const std::vector<TrainRecord> records = train(exp);
        e.episodes_to_convergence = check_convergence(records, spec, cfg.solve_threshold);
        e.status = e.episodes_to_convergence ? "converged" : "no-convergence-within-limit";
        e.best_eval_mean = -std::numeric_limits<double>::infinity();
        for (const auto& r : records) {
          if (r.evaluated) e.best_eval_mean = std::max(e.best_eval_mean, r.eval_mean);
        }
        if (!out_dir.empty() && !records.empty()) {
          const std::filesystem::path dir = std::filesystem::path(out_dir) / e.strategy.name();
          {
            std::lock_guard<std::mutex> lock(fs_mutex);
            std::filesystem::create_directories(dir);
          }
          emit_csv(records, (dir / "train.csv").string());
          write_manifest(cfg, (dir / "manifest.txt").string());
          save_checkpoint(exp, (dir / "checkpoint.txt").string());
        }
      } catch (const Error& err) {
        e.status = "error";
        e.message = err.what();
      }
    }
  };
  const int n = std::max(1, jobs);
  std::vector<std::thread> threads;
  for (int t = 1; t < n; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  return entries;
}

void write_sweep_summary(std::ostream& out, const std::vector<SweepEntry>& entries) {
  out << "strategy,status,episodes_to_convergence,best_eval_mean\n";
  for (const SweepEntry& e : entries) {
    out << e.strategy.name() << ',' << e.status << ',';
    if (e.episodes_to_convergence) out << *e.episodes_to_convergence;
    out << ',';
    if (e.status == "converged" || e.status == "no-convergence-within-limit") {
      out << (std::isfinite(e.best_eval_mean) ? fixed6(e.best_eval_mean) : std::string("nan"));
    }
    out << '\n';
  }
}

}  // namespace replaykit
