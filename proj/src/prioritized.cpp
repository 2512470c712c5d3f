#include "replaykit/prioritized.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "replaykit/errors.hpp"

namespace replaykit {

void PerConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("per alpha must lie in [0, 1]");
  if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("per beta must lie in [0, 1]");
  if (!(epsilon > 0.0)) throw ConfigError("per epsilon must be positive");
  if (!(max_priority_init > 0.0)) throw ConfigError("per max_priority_init must be positive");
}

PrioritizedSampler::PrioritizedSampler(std::size_t capacity, PerConfig cfg)
    : cfg_(cfg), tree_(capacity), max_raw_(cfg.max_priority_init) {
  cfg_.validate();
}

void PrioritizedSampler::insert(std::size_t slot) { tree_.set(slot, std::pow(max_raw_, cfg_.alpha)); }

void PrioritizedSampler::update(std::span<const std::size_t> slots,
                                std::span<const double> td_errors) {
  max_raw_ = std::max(max_raw_, per_update_priorities(tree_, slots, td_errors, cfg_));
}

double PrioritizedSampler::probability(std::size_t slot) const {
  return tree_.get(slot) / tree_.total();
}

Batch PrioritizedSampler::sample(const ReplayBuffer& buf, std::size_t batch_size, Rng& rng) const {
  return per_sample(buf, tree_, batch_size, cfg_, rng);
}

Batch per_sample(const ReplayBuffer& buf, const SumTree& tree, std::size_t batch_size,
                 const PerConfig& cfg, Rng& rng) {
  if (buf.empty()) throw NotReadyError("cannot sample from an empty replay buffer");
  if (tree.capacity() < buf.capacity()) {
    throw IntegrityError("priority tree is smaller than the replay buffer");
  }
  const double total = tree.total();
  if (!(total > 0.0)) throw NotReadyError("priority tree holds no mass");

  const double n = static_cast<double>(buf.size());
  const double segment = total / static_cast<double>(batch_size);
  const double u_max = std::nextafter(total, 0.0);
  Batch batch;
  batch.reserve(batch_size);
  double max_weight = 0.0;
  for (std::size_t i = 0; i < batch_size; ++i) {
    double u = segment * (static_cast<double>(i) + uniform01(rng));
    u = std::min(u, u_max);
    const std::size_t idx = tree.sample(u);
    if (idx >= buf.size()) throw IntegrityError("priority tree sampled an unoccupied slot");
    const double p = tree.get(idx) / total;
    const double w = std::pow(n * p, -cfg.beta);
    max_weight = std::max(max_weight, w);
    batch.push_back(Sample{idx, std::cref(buf.at(idx)), w});
  }
  for (auto& s : batch) s.weight /= max_weight;
  return batch;
}

double per_update_priorities(SumTree& tree, std::span<const std::size_t> slots,
                             std::span<const double> td_errors, const PerConfig& cfg) {
  if (slots.size() != td_errors.size()) {
    throw ShapeError("priority update needs one td error per index");
  }
  double max_raw = 0.0;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!std::isfinite(td_errors[i])) {
      throw NumericalError("non-finite td error for replay slot " + std::to_string(slots[i]));
    }
    const double raw = std::abs(td_errors[i]) + cfg.epsilon;
    tree.set(slots[i], std::pow(raw, cfg.alpha));
    max_raw = std::max(max_raw, raw);
  }
  return max_raw;
}

}  // namespace replaykit
