#pragma once

#include <cstddef>
#include <span>

#include "replaykit/random.hpp"
#include "replaykit/replay_buffer.hpp"
#include "replaykit/sum_tree.hpp"

namespace replaykit {

/// Proportional prioritization parameters. Leaves store (|delta| + epsilon)^alpha.
struct PerConfig {
  double alpha = 0.6;
  double beta = 0.4;
  double epsilon = 0.01;
  double max_priority_init = 1.0;

  void validate() const;
};

/// Sum-tree priorities kept in lockstep with the slots of a ReplayBuffer.
class PrioritizedSampler {
 public:
  PrioritizedSampler(std::size_t capacity, PerConfig cfg);

  const PerConfig& config() const { return cfg_; }
  const SumTree& tree() const { return tree_; }

  /// Gives a freshly written slot the largest raw priority seen so far
  /// (max_priority_init before any update), raised to alpha.
  void insert(std::size_t slot);

  /// Sets each slot's leaf to (|td| + epsilon)^alpha.
  void update(std::span<const std::size_t> slots, std::span<const double> td_errors);

  /// Raw (pre-exponent) priority handed to the next insert.
  double max_raw_priority() const { return max_raw_; }

  /// Sampling probability of `slot` under the current priorities.
  double probability(std::size_t slot) const;

  Batch sample(const ReplayBuffer& buf, std::size_t batch_size, Rng& rng) const;

 private:
  PerConfig cfg_;
  SumTree tree_;
  double max_raw_;
};

/// Stratified proportional sampling: the total mass is split into
/// `batch_size` equal segments with one draw per segment. Weights are
/// (N P(i))^-beta normalized by the batch maximum.
Batch per_sample(const ReplayBuffer& buf, const SumTree& tree, std::size_t batch_size,
                 const PerConfig& cfg, Rng& rng);

/// Writes (|td| + epsilon)^alpha into each slot's leaf and returns the largest
/// raw priority |td| + epsilon among them.
double per_update_priorities(SumTree& tree, std::span<const std::size_t> slots,
                             std::span<const double> td_errors, const PerConfig& cfg);

}  // namespace replaykit
