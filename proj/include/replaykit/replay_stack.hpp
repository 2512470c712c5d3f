#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include "replaykit/prioritized.hpp"
#include "replaykit/replay_buffer.hpp"

namespace replaykit {

/// Which replay strategies are stacked for a run.
struct StrategyFlags {
  bool combined = false;
  bool prioritized = false;
  bool hindsight = false;

  /// Baseline, CER, PER, HER, CPER, HPER, CHER or CHPER.
  std::string name() const;
  /// Inverse of name(), case-insensitive. Throws ConfigError for unknown names.
  static StrategyFlags parse(const std::string& name);
  bool operator==(const StrategyFlags&) const = default;
};

/// Ring buffer, optionally sampled by priority, optionally decorated with the
/// combined-replay rule. Hindsight relabeling happens upstream: relabeled
/// transitions arrive through append() like any other.
class ReplayStack {
 public:
  ReplayStack(std::size_t capacity, bool combined, std::optional<PerConfig> per);

  std::size_t append(Transition t);
  Batch sample(std::size_t batch_size, Rng& rng) const;

  /// Refreshes the priorities of every sampled slot, including the forced
  /// latest transition under combined replay. No-op without prioritization.
  void update_priorities(const Batch& batch, std::span<const double> td_errors);

  const ReplayBuffer& buffer() const { return buffer_; }
  const PrioritizedSampler* prioritized() const { return per_ ? &*per_ : nullptr; }
  bool combined() const { return combined_; }
  std::size_t size() const { return buffer_.size(); }

 private:
  ReplayBuffer buffer_;
  bool combined_;
  std::optional<PrioritizedSampler> per_;
};

}  // namespace replaykit
