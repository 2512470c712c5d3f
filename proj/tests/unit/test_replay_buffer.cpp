#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "replaykit/errors.hpp"
#include "replaykit/prioritized.hpp"
#include "replaykit/replay_buffer.hpp"

using namespace replaykit;
using testutil::numbered;

TEST_CASE("buffer construction") {
  ReplayBuffer one(1);
  CHECK(one.size() == 0);
  CHECK(one.capacity() == 1);
  ReplayBuffer big(50000);
  CHECK(big.empty());
  CHECK(big.capacity() == 50000);
  CHECK_THROWS_AS(ReplayBuffer(0), ConfigError);
}

TEST_CASE("append evicts the oldest entry once full") {
  ReplayBuffer buf(2);
  buf.append(numbered(1));
  buf.append(numbered(2));
  buf.append(numbered(3));
  CHECK(buf.size() == 2);
  std::multiset<double> held{buf.at(0).reward, buf.at(1).reward};
  CHECK(held == std::multiset<double>{2.0, 3.0});
  CHECK(buf.latest().reward == 3.0);
}

TEST_CASE("append to empty buffer") {
  ReplayBuffer buf(10);
  buf.append(numbered(7));
  CHECK(buf.size() == 1);
  CHECK(buf.latest() == numbered(7));
}

TEST_CASE("append rejects mismatched shapes and bad values") {
  ReplayBuffer buf(10);
  buf.append(numbered(1, 4));
  CHECK_THROWS_AS(buf.append(numbered(2, 3)), ShapeError);

  Transition t = numbered(3, 4);
  t.next_state.pop_back();
  CHECK_THROWS_AS(buf.append(t), ShapeError);

  Transition nan_reward = numbered(4, 4);
  nan_reward.reward = std::nan("");
  CHECK_THROWS_AS(buf.append(nan_reward), DomainError);

  Transition with_goal = numbered(5, 4);
  with_goal.goal = Vector{1.0};
  CHECK_THROWS_AS(buf.append(with_goal), ShapeError);
}

TEST_CASE("FIFO property: stored set is the last `capacity` appends") {
  Rng rng(123);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t cap = 1 + uniform_index(rng, 40);
    const int total = static_cast<int>(uniform_index(rng, 150));
    ReplayBuffer buf(cap);
    for (int i = 0; i < total; ++i) buf.append(numbered(i));
    std::set<double> held;
    for (std::size_t i = 0; i < buf.size(); ++i) held.insert(buf.at(i).reward);
    std::set<double> expected;
    for (int i = std::max(0, total - static_cast<int>(cap)); i < total; ++i) expected.insert(i);
    REQUIRE(held == expected);
    if (total > 0) REQUIRE(buf.latest().reward == total - 1);
  }
}

TEST_CASE("uniform sampling") {
  Rng rng(5);
  SUBCASE("single element support") {
    ReplayBuffer buf(8);
    buf.append(numbered(42));
    const Batch b = sample_uniform(buf, 4, rng);
    REQUIRE(b.size() == 4);
    for (const auto& s : b) CHECK(s.get().reward == 42.0);
  }
  SUBCASE("empty buffer is not ready") {
    ReplayBuffer buf(8);
    CHECK_THROWS_AS(sample_uniform(buf, 4, rng), NotReadyError);
  }
  SUBCASE("frequencies match 1/n") {
    constexpr std::size_t n = 1000;
    constexpr std::size_t draws = 1000000;
    ReplayBuffer buf(n);
    for (std::size_t i = 0; i < n; ++i) buf.append(numbered(static_cast<int>(i)));
    std::vector<std::uint64_t> counts(n, 0);
    for (std::size_t done = 0; done < draws; done += 1000) {
      for (const auto& s : sample_uniform(buf, 1000, rng)) ++counts[s.index];
    }
    const double p = 1.0 / n;
    const double sigma = std::sqrt(draws * p * (1.0 - p));
    for (auto c : counts) REQUIRE(std::abs(static_cast<double>(c) - draws * p) < 5.0 * sigma);
    const std::vector<double> probs(n, p);
    CHECK(oracle::passes_chi_square(counts, probs, 0.01));
  }
}

TEST_CASE("sampling is reproducible for a fixed seed") {
  ReplayBuffer buf(100);
  for (int i = 0; i < 100; ++i) buf.append(numbered(i));
  Rng a(99), b(99);
  const Batch x = sample_uniform(buf, 64, a);
  const Batch y = sample_uniform(buf, 64, b);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(x[i].index == y[i].index);
}

TEST_CASE("combined sampling puts the latest transition first") {
  Rng rng(11);
  ReplayBuffer buf(50);
  for (int i = 0; i < 75; ++i) buf.append(numbered(i));
  InnerSampler uniform_inner = [&](std::size_t n, Rng& r) { return sample_uniform(buf, n, r); };

  const Batch one = sample_combined(buf, 1, uniform_inner, rng);
  REQUIRE(one.size() == 1);
  CHECK(one[0].get().reward == 74.0);
  CHECK(one[0].index == buf.latest_index());

  const Batch full = sample_combined(buf, 32, uniform_inner, rng);
  REQUIRE(full.size() == 32);
  CHECK(full[0].get().reward == 74.0);
  CHECK(full[0].weight == 1.0);

  CHECK_THROWS_AS(sample_combined(buf, 0, uniform_inner, rng), ConfigError);
  ReplayBuffer empty(4);
  CHECK_THROWS_AS(sample_combined(empty, 4, uniform_inner, rng), NotReadyError);
}

TEST_CASE("combined over prioritized: latest has weight 1, rest are IS weights") {
  Rng rng(3);
  ReplayBuffer buf(16);
  PrioritizedSampler per(16, PerConfig{});
  for (int i = 0; i < 16; ++i) per.insert(buf.append(numbered(i)));
  std::vector<std::size_t> slots;
  std::vector<double> td;
  for (std::size_t i = 0; i < 16; ++i) {
    slots.push_back(i);
    td.push_back(0.1 * static_cast<double>(i));
  }
  per.update(slots, td);
  InnerSampler inner = [&](std::size_t n, Rng& r) { return per.sample(buf, n, r); };
  for (int trial = 0; trial < 50; ++trial) {
    const Batch b = sample_combined(buf, 8, inner, rng);
    REQUIRE(b[0].index == buf.latest_index());
    REQUIRE(b[0].weight == 1.0);
    double max_rest = 0.0;
    for (std::size_t i = 1; i < b.size(); ++i) {
      REQUIRE(b[i].weight > 0.0);
      REQUIRE(b[i].weight <= 1.0);
      max_rest = std::max(max_rest, b[i].weight);
    }
    CHECK(max_rest == 1.0);
  }
}
