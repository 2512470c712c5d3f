#include "doctest.h"
#include "oracles.hpp"
#include "replaykit/errors.hpp"
#include "replaykit/prioritized.hpp"
#include "replaykit/sum_tree.hpp"

using namespace replaykit;
using testutil::numbered;

namespace {

SumTree tree_of(const std::vector<double>& leaves) {
  SumTree t(leaves.size());
  for (std::size_t i = 0; i < leaves.size(); ++i) t.set(i, leaves[i]);
  return t;
}

ReplayBuffer filled(std::size_t n) {
  ReplayBuffer buf(n);
  for (std::size_t i = 0; i < n; ++i) buf.append(numbered(static_cast<int>(i)));
  return buf;
}

}  // namespace

TEST_CASE("tree_set maintains sums") {
  SumTree t = tree_of({1, 2, 3, 4});
  CHECK(t.total() == 10.0);
  t.set(0, 5);
  CHECK(t.total() == 14.0);
  CHECK_THROWS_AS(t.set(1, -1.0), DomainError);
  CHECK_THROWS_AS(t.set(4, 1.0), BoundsError);
  CHECK_THROWS_AS(SumTree(0), ConfigError);
}

TEST_CASE("tree_sample examples agree with a linear scan") {
  const std::vector<double> leaves{1, 2, 3, 4};
  const SumTree t = tree_of(leaves);
  CHECK(t.sample(0.5) == 0);
  CHECK(oracle::linear_scan_sample(leaves, 0.5) == 0);
  CHECK(t.sample(9.99) == 3);
  CHECK(oracle::linear_scan_sample(leaves, 9.99) == 3);
  CHECK(t.sample(1.0) == 1);
  CHECK(t.sample(3.0) == 2);

  const SumTree only = tree_of({0, 0, 5, 0});
  for (double u : {0.0, 1.0, 2.5, 4.999}) CHECK(only.sample(u) == 2);

  CHECK_THROWS_AS(SumTree(4).sample(0.0), NotReadyError);
  CHECK_THROWS_AS(t.sample(10.0), DomainError);
}

TEST_CASE("non power of two capacities keep leaf order") {
  const std::vector<double> leaves{1, 1, 1};
  const SumTree t = tree_of(leaves);
  CHECK(t.sample(0.5) == 0);
  CHECK(t.sample(1.5) == 1);
  CHECK(t.sample(2.5) == 2);
}

TEST_CASE("random operation sequences match a flat-array oracle") {
  Rng rng(2024);
  for (int seq = 0; seq < 300; ++seq) {
    const std::size_t cap = 1 + uniform_index(rng, 70);
    SumTree tree(cap);
    std::vector<double> flat(cap, 0.0);
    for (int op = 0; op < 60; ++op) {
      const std::size_t i = uniform_index(rng, cap);
      const double v = uniform01(rng) < 0.1 ? 0.0 : uniform(rng, 0.0, 10.0);
      tree.set(i, v);
      flat[i] = v;
      REQUIRE(tree.max_relative_imbalance() <= 1e-9);
      REQUIRE(tree.get(i) == flat[i]);
      if (tree.total() > 0.0) {
        const double u = uniform01(rng) * tree.total();
        REQUIRE(tree.sample(u) == oracle::linear_scan_sample(flat, u));
      }
    }
  }
}

TEST_CASE("proportional probabilities") {
  SUBCASE("[3, 1] with alpha 1") {
    const auto p = oracle::proportional_probabilities(std::vector<double>{3, 1}, 1.0);
    CHECK(p[0] == doctest::Approx(0.75));
    CHECK(p[1] == doctest::Approx(0.25));
    PrioritizedSampler per(2, PerConfig{1.0, 0.4, 0.01, 1.0});
    per.insert(0);
    per.insert(1);
    const std::vector<std::size_t> slots{0, 1};
    const std::vector<double> td{3.0 - 0.01, 1.0 - 0.01};
    per.update(slots, td);
    CHECK(per.probability(0) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(per.probability(1) == doctest::Approx(0.25).epsilon(1e-12));
  }
  SUBCASE("[4, 1] with alpha 0.5") {
    PrioritizedSampler per(2, PerConfig{0.5, 0.4, 0.01, 1.0});
    const std::vector<std::size_t> slots{0, 1};
    const std::vector<double> td{4.0 - 0.01, 1.0 - 0.01};
    per.update(slots, td);
    CHECK(per.probability(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(per.probability(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  }
  SUBCASE("alpha 0 is uniform") {
    PrioritizedSampler per(5, PerConfig{0.0, 0.4, 0.01, 1.0});
    const std::vector<std::size_t> slots{0, 1, 2, 3, 4};
    const std::vector<double> td{0.3, 7.0, 0.0, 100.0, 2.0};
    per.update(slots, td);
    for (std::size_t i = 0; i < 5; ++i) CHECK(per.probability(i) == doctest::Approx(0.2));
  }
}

TEST_CASE("per_sample frequencies follow the priorities") {
  Rng rng(17);
  const ReplayBuffer buf = filled(4);
  const std::vector<double> raw{1.0, 4.0, 2.0, 0.5};
  const double alpha = 0.7;
  SumTree tree(4);
  for (std::size_t i = 0; i < 4; ++i) tree.set(i, std::pow(raw[i], alpha));
  const PerConfig cfg{alpha, 0.4, 0.01, 1.0};
  std::vector<std::uint64_t> counts(4, 0);
  for (int k = 0; k < 20000; ++k) {
    for (const auto& s : per_sample(buf, tree, 50, cfg, rng)) ++counts[s.index];
  }
  CHECK(oracle::passes_chi_square(counts, oracle::proportional_probabilities(raw, alpha)));
}

TEST_CASE("importance weights") {
  Rng rng(8);
  const ReplayBuffer buf = filled(6);
  SumTree tree(6);
  for (std::size_t i = 0; i < 6; ++i) tree.set(i, 1.0 + static_cast<double>(i));

  SUBCASE("beta 0 gives unit weights") {
    const PerConfig cfg{1.0, 0.0, 0.01, 1.0};
    for (const auto& s : per_sample(buf, tree, 32, cfg, rng)) CHECK(s.weight == 1.0);
  }
  SUBCASE("weights lie in (0, 1] with a maximum of 1") {
    const PerConfig cfg{1.0, 0.7, 0.01, 1.0};
    for (int trial = 0; trial < 100; ++trial) {
      const Batch b = per_sample(buf, tree, 16, cfg, rng);
      double max_w = 0.0;
      for (const auto& s : b) {
        REQUIRE(s.weight > 0.0);
        REQUIRE(s.weight <= 1.0);
        max_w = std::max(max_w, s.weight);
      }
      REQUIRE(max_w == 1.0);
    }
  }
  SUBCASE("weights are (N P(i))^-beta over the batch max") {
    const PerConfig cfg{1.0, 0.5, 0.01, 1.0};
    const Batch b = per_sample(buf, tree, 16, cfg, rng);
    double max_raw = 0.0;
    for (const auto& s : b) max_raw = std::max(max_raw, std::pow(6.0 * tree.get(s.index) / 21.0, -0.5));
    for (const auto& s : b) {
      const double expected = std::pow(6.0 * tree.get(s.index) / 21.0, -0.5) / max_raw;
      CHECK(s.weight == doctest::Approx(expected).epsilon(1e-12));
    }
  }
  SUBCASE("empty buffer") {
    ReplayBuffer empty(6);
    CHECK_THROWS_AS(per_sample(empty, tree, 4, PerConfig{}, rng), NotReadyError);
  }
}

TEST_CASE("priority updates") {
  const PerConfig cfg{1.0, 0.4, 0.01, 1.0};
  SumTree tree(4);
  const std::vector<std::size_t> slot{0};
  per_update_priorities(tree, slot, std::vector<double>{0.0}, cfg);
  CHECK(tree.get(0) == doctest::Approx(0.01));
  per_update_priorities(tree, slot, std::vector<double>{-2.0}, cfg);
  CHECK(tree.get(0) == doctest::Approx(2.01));
  CHECK_THROWS_AS(per_update_priorities(tree, slot, std::vector<double>{std::nan("")}, cfg),
                  NumericalError);
  CHECK_THROWS_AS(per_update_priorities(tree, slot, std::vector<double>{1.0, 2.0}, cfg), ShapeError);
}

TEST_CASE("insert uses the running maximum priority") {
  PrioritizedSampler per(3, PerConfig{1.0, 0.4, 0.01, 1.0});
  per.insert(0);
  CHECK(per.tree().get(0) == 1.0);
  const std::vector<std::size_t> slot{0};
  per.update(slot, std::vector<double>{5.0});
  per.insert(1);
  CHECK(per.tree().get(1) == doctest::Approx(5.01));

  // Overwriting an evicted slot replaces its old priority completely.
  per.update(std::vector<std::size_t>{2}, std::vector<double>{0.0});
  per.insert(2);
  CHECK(per.tree().get(2) == doctest::Approx(5.01));
  CHECK(per.tree().total() == doctest::Approx(per.tree().get(0) + per.tree().get(1) + per.tree().get(2)));
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS((PerConfig{1.5, 0.4, 0.01, 1.0}.validate()), ConfigError);
  CHECK_THROWS_AS((PerConfig{0.5, -0.1, 0.01, 1.0}.validate()), ConfigError);
  CHECK_THROWS_AS((PerConfig{0.5, 0.4, 0.0, 1.0}.validate()), ConfigError);
  CHECK_NOTHROW(PerConfig{}.validate());
}
