// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "oracles.hpp"
#include "replaykit/agents.hpp"
#include "replaykit/envs.hpp"
#include "replaykit/experiment.hpp"
#include "replaykit/hindsight.hpp"
#include "replaykit/mlp.hpp"
#include "replaykit/prioritized.hpp"
#include "replaykit/sum_tree.hpp"
#include "scenarios.hpp"

using namespace replaykit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  double budget_s;
  std::function<Outcome()> check;
};

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

double median3(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

RunConfig cartpole_run(std::uint64_t seed, bool combined) {
  RunConfig cfg;
  cfg.env = "cartpole";
  cfg.agent = "dqn";
  cfg.seed = seed;
  cfg.episodes = 2000;
  cfg.eval_interval = 10;
  cfg.eval_episodes = 100;
  cfg.strategy.combined = combined;
  return cfg;
}

// Episodes to convergence, or the episode limit + 1 when the run never converges.
double episodes_to_convergence(const RunConfig& cfg) {
  Experiment exp = build_run(cfg);
  const auto records = train(exp);
  const auto hit = check_convergence(records, exp.env_spec(), cfg.solve_threshold);
  return hit ? *hit : cfg.episodes + 1;
}

Outcome trend() {
  std::vector<double> base, cer;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    base.push_back(episodes_to_convergence(cartpole_run(seed, false)));
    cer.push_back(episodes_to_convergence(cartpole_run(seed, true)));
  }
  const double mb = median3(base), mc = median3(cer);
  return {mc <= 1.25 * mb,
          format("baseline %g/%g/%g (median %g), CER %g/%g/%g (median %g), ratio %.3f <= 1.25",
                 base[0], base[1], base[2], mb, cer[0], cer[1], cer[2], mc, mc / mb)};
}

Outcome cartpole_solvable() {
  std::string detail;
  bool any = false;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    RunConfig cfg = cartpole_run(seed, false);
    cfg.solve_threshold = 195.0;
    const auto t0 = std::chrono::steady_clock::now();
    const double ep = episodes_to_convergence(cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool ok = ep <= cfg.episodes && secs <= 600.0;
    any = any || ok;
    detail += format("seed %llu: %s in %.1fs; ", static_cast<unsigned long long>(seed),
                     ep <= cfg.episodes ? format("eval mean >= 195 at episode %g", ep).c_str() : "not reached",
                     secs);
  }
  return {any, detail + "need >= 1 of 3"};
}

Outcome per_fidelity() {
  ReplayBuffer buf(16);
  for (int i = 0; i < 16; ++i) buf.append(testutil::numbered(i));
  Rng rng(11);
  PerConfig cfg;
  cfg.alpha = 1.0;

  SumTree pair(2);
  pair.set(0, 3.0);
  pair.set(1, 1.0);
  ReplayBuffer two(2);
  two.append(testutil::numbered(0));
  two.append(testutil::numbered(1));
  const int draws = 1000000;
  std::uint64_t first = 0;
  for (int i = 0; i < draws; ++i) first += per_sample(two, pair, 1, cfg, rng)[0].index == 0;
  const double f0 = static_cast<double>(first) / draws;
  const bool freq_ok = std::abs(f0 - 0.75) <= 0.005 && std::abs((1.0 - f0) - 0.25) <= 0.005;

  PerConfig flat;
  flat.alpha = 0.0;
  PrioritizedSampler sampler(16, flat);
  std::vector<std::size_t> slots(16);
  std::vector<double> td(16);
  for (std::size_t i = 0; i < 16; ++i) {
    sampler.insert(i);
    slots[i] = i;
    td[i] = 0.1 + 5.0 * static_cast<double>(i * i);
  }
  sampler.update(slots, td);
  std::vector<std::uint64_t> counts(16, 0);
  for (int i = 0; i < 100000; ++i) ++counts[sampler.sample(buf, 1, rng)[0].index];
  const std::vector<double> uniform_p(16, 1.0 / 16.0);
  const double stat = oracle::chi_square_statistic(counts, uniform_p);
  const double crit = oracle::chi_square_critical(15, 0.01);
  return {freq_ok && stat < crit,
          format("[3,1] alpha=1: %.5f/%.5f over 1e6 draws (+-0.005); alpha=0 chi2 %.2f < %.2f", f0,
                 1.0 - f0, stat, crit)};
}

Outcome sum_tree_oracle() {
  Rng rng(99);
  double worst_imbalance = 0.0;
  std::uint64_t comparisons = 0, mismatches = 0;
  for (int seq = 0; seq < 10000; ++seq) {
    const std::size_t cap = 1 + uniform_index(rng, 100);
    SumTree tree(cap);
    std::vector<double> flat(cap, 0.0);
    double running_max = 1.0;
    std::size_t cursor = 0;
    const int ops = 20 + static_cast<int>(uniform_index(rng, 40));
    for (int op = 0; op < ops; ++op) {
      const double kind = uniform01(rng);
      if (kind < 0.4) {  // insert at the ring cursor with the running maximum
        tree.set(cursor, running_max);
        flat[cursor] = running_max;
        cursor = (cursor + 1) % cap;
      } else if (kind < 0.8) {  // set an arbitrary leaf
        const std::size_t i = uniform_index(rng, cap);
        const double v = uniform01(rng) < 0.1 ? 0.0 : uniform(rng, 0.0, 20.0);
        tree.set(i, v);
        flat[i] = v;
        running_max = std::max(running_max, v);
      } else if (tree.total() > 0.0) {
        const double u = uniform01(rng) * tree.total();
        ++comparisons;
        if (tree.sample(u) != oracle::linear_scan_sample(flat, u)) ++mismatches;
      }
      double flat_total = 0.0;
      for (double v : flat) flat_total += v;
      ++comparisons;
      if (std::abs(tree.total() - flat_total) > 1e-9 * std::max(flat_total, 1.0)) ++mismatches;
      for (std::size_t i = 0; i < cap; ++i) mismatches += tree.get(i) != flat[i];
      worst_imbalance = std::max(worst_imbalance, tree.max_relative_imbalance());
    }
  }
  return {mismatches == 0 && worst_imbalance <= 1e-9,
          format("10^4 sequences, %llu checks, %llu mismatches, max node imbalance %.2e <= 1e-9",
                 static_cast<unsigned long long>(comparisons), static_cast<unsigned long long>(mismatches),
                 worst_imbalance)};
}

Outcome gradients() {
  double worst_param = 0.0, worst_input = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto c = scenario::mlp_gradient_check(1000 + seed);
    worst_param = std::max(worst_param, c.max_param_error);
    worst_input = std::max(worst_input, c.max_input_error);
  }
  return {worst_param < 1e-4 && worst_input < 1e-4,
          format("100 networks, worst relative error params %.2e, input %.2e (< 1e-4)", worst_param,
                 worst_input)};
}

Outcome toy_mdp() {
  const double err = scenario::toy_mdp_error(1);
  return {err <= 1e-2, format("max |Q - Q*| = %.2e (<= 1e-2, gamma 0.9)", err)};
}

Outcome cer_invariant() {
  RunConfig cfg = cartpole_run(1, true);
  Experiment exp = build_run(cfg);
  std::uint64_t batches = 0, hits = 0;
  TrainHooks hooks;
  hooks.on_batch = [&](const Batch& b, const ReplayBuffer& buf) {
    ++batches;
    hits += !b.empty() && b[0].index == buf.latest_index() && &b[0].get() == &buf.latest();
  };
  const auto records = train(exp, hooks);
  return {batches > 0 && hits == batches,
          format("%llu/%llu batches led by the latest transition over %zu episodes",
                 static_cast<unsigned long long>(hits), static_cast<unsigned long long>(batches),
                 records.size())};
}

Outcome her_mountaincar() {
  // Storage accounting inside a training run.
  RunConfig cfg;
  cfg.env = "mountaincar";
  cfg.strategy.hindsight = true;
  cfg.episodes = 20;
  cfg.eval_interval = 0;
  Experiment exp = build_run(cfg);
  std::uint64_t episodes = 0, doubled = 0;
  TrainHooks hooks;
  hooks.on_episode_stored = [&](int, std::size_t length, std::size_t stored) {
    ++episodes;
    doubled += stored == 2 * length;
  };
  train(exp, hooks);

  // Relabeled final transitions of fresh episodes.
  const EnvSpec& spec = env_spec("mountaincar");
  const GoalSpec goals = make_goal_spec(spec);
  auto env = make_env("mountaincar");
  Rng rng(5);
  std::uint64_t finals = 0, final_ok = 0;
  for (int e = 0; e < 200; ++e) {
    Vector s = env->reset(rng);
    Episode ep;
    const int limit = 1 + static_cast<int>(uniform_index(rng, 200));
    for (int t = 0; t < limit; ++t) {
      const Action a{static_cast<std::int64_t>(uniform_index(rng, 3))};
      const StepResult r = env->step(a);
      ep.transitions.push_back(Transition{s, a, r.reward, r.next_state, r.done, spec.native_goal});
      s = r.next_state;
      if (r.done || r.truncated) break;
    }
    const RelabeledEpisode out = relabel_episode(ep, goals);
    ++finals;
    final_ok += out.relabeled.size() == ep.transitions.size() && out.relabeled_success.back() &&
                out.relabeled.back().reward == 0.0;
  }

  // Native goal against the native reward.
  std::uint64_t agree = 0;
  for (int i = 0; i < 10000; ++i) {
    const Vector st{uniform(rng, -1.2, 0.6), uniform(rng, -0.07, 0.07)};
    const auto a = static_cast<std::int64_t>(uniform_index(rng, 3));
    const StepResult native = mountaincar_step(st, a);
    const GoalReward g = goals.goal_reward(native.next_state, Action{a}, spec.native_goal);
    agree += g.reward == native.reward && g.success == native.done;
  }
  return {episodes > 0 && doubled == episodes && final_ok == finals && agree == 10000,
          format("storage 2x in %llu/%llu episodes; final relabel success+reward 0 in %llu/%llu; "
                 "native goal reproduces %llu/10000 rewards",
                 static_cast<unsigned long long>(doubled), static_cast<unsigned long long>(episodes),
                 static_cast<unsigned long long>(final_ok), static_cast<unsigned long long>(finals),
                 static_cast<unsigned long long>(agree))};
}

Outcome pendulum_checks() {
  Rng rng(8);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const PendulumState s{uniform(rng, -10.0, 10.0), uniform(rng, -8.0, 8.0)};
    const double a = uniform(rng, -2.0, 2.0);
    const PendulumStep r = pendulum_step(s, a);
    const double th = std::atan2(r.observation[1], r.observation[0]);
    const double thd = r.observation[2];
    const double expected = -(th * th + 0.1 * thd * thd + 0.001 * a * a);
    worst = std::max(worst, std::abs(r.reward - expected) / std::max(std::abs(expected), 1.0));
  }
  const bool reward_ok = worst <= 4.0 * std::numeric_limits<double>::epsilon();

  OuNoise noise(1, 0.15, 0.2, 0.0);
  for (int i = 0; i < 1000; ++i) noise.sample(rng);
  double sum = 0.0, sq = 0.0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    const double x = noise.sample(rng)[0];
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sq / n - mean * mean);
  const double target = 0.2 / std::sqrt(2.0 * 0.15);
  const double rel = std::abs(sd - target) / target;
  return {reward_ok && rel <= 0.1,
          format("reward max relative deviation %.1e over 10^4 tuples; OU std %.4f vs %.4f (%.1f%% <= 10%%)",
                 worst, sd, target, 100.0 * rel)};
}

double distance(const Mlp& a, const Mlp& b) {
  double sq = 0.0;
  for (std::size_t l = 0; l < a.layers().size(); ++l) {
    sq += (a.layers()[l].weight - b.layers()[l].weight).squaredNorm();
    sq += (a.layers()[l].bias - b.layers()[l].bias).squaredNorm();
  }
  return std::sqrt(sq);
}

Outcome soft_update_algebra() {
  Rng rng(21);
  const Mlp online = Mlp::initialized({4, 32, 32, 2}, Activation::kRelu, Activation::kIdentity, rng);
  const Mlp start = Mlp::initialized({4, 32, 32, 2}, Activation::kRelu, Activation::kIdentity, rng);
  bool exact = true;
  for (double tau : {0.0, 0.5, 1.0}) {
    Mlp target = start;
    soft_update(target, online, tau);
    for (std::size_t l = 0; l < online.layers().size(); ++l) {
      const auto& t = target.layers()[l];
      const auto& o = online.layers()[l];
      const auto& s = start.layers()[l];
      for (Eigen::Index r = 0; r < t.weight.rows(); ++r) {
        for (Eigen::Index c = 0; c < t.weight.cols(); ++c) {
          const double want = tau == 0.0 ? s.weight(r, c) : tau == 1.0 ? o.weight(r, c) : 0.5 * o.weight(r, c) + 0.5 * s.weight(r, c);
          exact = exact && t.weight(r, c) == want;
        }
        const double want = tau == 0.0 ? s.bias(r) : tau == 1.0 ? o.bias(r) : 0.5 * o.bias(r) + 0.5 * s.bias(r);
        exact = exact && t.bias(r) == want;
      }
    }
  }
  double worst = 0.0;
  for (double tau : {0.001, 0.005, 0.1, 0.5}) {
    Mlp target = start;
    double gap = distance(target, online);
    for (int i = 0; i < 100; ++i) {
      soft_update(target, online, tau);
      const double next = distance(target, online);
      worst = std::max(worst, std::abs(next / gap - (1.0 - tau)));
      gap = next;
      if (gap < 1e-3) break;
    }
  }
  return {exact && worst <= 1e-12,
          format("tau in {0, 0.5, 1} %s; worst contraction deviation %.2e <= 1e-12",
                 exact ? "exact" : "NOT exact", worst)};
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / ("replaykit_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  std::vector<RunConfig> configs;
  RunConfig cp = cartpole_run(7, true);
  cp.strategy.prioritized = true;
  cp.episodes = 60;
  configs.push_back(cp);
  RunConfig mc;
  mc.env = "mountaincar";
  mc.strategy = {true, true, true};
  mc.episodes = 10;
  mc.eval_interval = 5;
  mc.eval_episodes = 5;
  configs.push_back(mc);
  RunConfig pd;
  pd.env = "pendulum";
  pd.agent = "ddpg";
  pd.strategy.hindsight = true;
  pd.episodes = 8;
  pd.eval_interval = 4;
  pd.eval_episodes = 5;
  configs.push_back(pd);

  int identical = 0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    std::string bytes[2];
    for (int rep = 0; rep < 2; ++rep) {
      Experiment exp = build_run(configs[i]);
      const fs::path file = dir / (std::to_string(i) + "_" + std::to_string(rep) + ".csv");
      emit_csv(train(exp), file.string());
      std::ifstream in(file, std::ios::binary);
      std::ostringstream s;
      s << in.rdbuf();
      bytes[rep] = s.str();
    }
    identical += !bytes[0].empty() && bytes[0] == bytes[1];
  }
  fs::remove_all(dir);
  return {identical == static_cast<int>(configs.size()),
          format("%d/%zu configurations produced byte-identical CSV on rerun", identical, configs.size())};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"cer-trend", 1800.0, trend},
      {"cartpole-solvable", 1800.0, cartpole_solvable},
      {"per-distribution", 10.0, per_fidelity},
      {"sum-tree-oracle", 30.0, sum_tree_oracle},
      {"gradient-check", 30.0, gradients},
      {"toy-mdp", 60.0, toy_mdp},
      {"cer-invariant", 600.0, cer_invariant},
      {"her-mountaincar", 60.0, her_mountaincar},
      {"pendulum-reward-ou", 60.0, pendulum_checks},
      {"soft-update", 10.0, soft_update_algebra},
      {"determinism", 300.0, determinism},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_budget = secs <= c.budget_s;
    const bool pass = o.pass && in_budget;
    failures += !pass;
    std::printf("%s %-20s %s [%.1fs, budget %.0fs%s]\n", pass ? "PASS" : "FAIL", c.name.c_str(),
                o.detail.c_str(), secs, c.budget_s, in_budget ? "" : ", OVER BUDGET");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
