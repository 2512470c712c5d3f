#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "replaykit/random.hpp"
#include "replaykit/transition.hpp"

namespace replaykit {

/// One sampled entry: the storage slot it came from, the transition, and its
/// importance-sampling weight (1.0 outside prioritized replay).
struct Sample {
  std::size_t index;
  std::reference_wrapper<const Transition> transition;
  double weight = 1.0;

  const Transition& get() const { return transition.get(); }
};

using Batch = std::vector<Sample>;

/// Fixed-capacity ring of transitions with FIFO eviction.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  /// Stores `t` and returns the slot it was written to. Once full, the oldest
  /// transition is overwritten.
  std::size_t append(Transition t);

  std::size_t size() const { return count_; }
  std::size_t capacity() const { return storage_.size(); }
  bool empty() const { return count_ == 0; }

  /// Slot holding the most recently appended transition.
  std::size_t latest_index() const;
  const Transition& latest() const { return storage_[latest_index()]; }

  const Transition& at(std::size_t index) const;

  /// Total number of appends since construction.
  std::size_t appended() const { return appended_; }

 private:
  std::vector<Transition> storage_;
  std::size_t cursor_ = 0;
  std::size_t count_ = 0;
  std::size_t appended_ = 0;
  std::size_t state_dim_ = 0;
  std::size_t goal_dim_ = 0;
  bool has_goal_ = false;
};

/// Draws `batch_size` entries independently and uniformly with replacement.
Batch sample_uniform(const ReplayBuffer& buf, std::size_t batch_size, Rng& rng);

/// Sampler signature used as the inner draw of combined replay.
using InnerSampler = std::function<Batch(std::size_t batch_size, Rng& rng)>;

/// Combined replay: position 0 holds the latest transition with weight 1.0 and
/// the remaining `batch_size - 1` entries come from `inner`.
Batch sample_combined(const ReplayBuffer& buf, std::size_t batch_size, const InnerSampler& inner,
                      Rng& rng);

}  // namespace replaykit
