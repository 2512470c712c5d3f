#include "replaykit/replay_stack.hpp"

#include <cctype>
#include <vector>

#include "replaykit/errors.hpp"

namespace replaykit {

std::string StrategyFlags::name() const {
  if (!combined && !prioritized && !hindsight) return "Baseline";
  std::string s;
  if (combined) s += 'C';
  if (hindsight) s += 'H';
  if (prioritized) s += 'P';
  // Single strategies keep their own acronym: CER, HER, PER.
  return s + "ER";
}

StrategyFlags StrategyFlags::parse(const std::string& name) {
  std::string upper;
  for (char c : name) upper += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (int mask = 0; mask < 8; ++mask) {
    const StrategyFlags f{(mask & 1) != 0, (mask & 2) != 0, (mask & 4) != 0};
    std::string candidate;
    for (char c : f.name()) candidate += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (candidate == upper) return f;
  }
  throw ConfigError("unknown replay strategy '" + name + "'");
}

ReplayStack::ReplayStack(std::size_t capacity, bool combined, std::optional<PerConfig> per)
    : buffer_(capacity), combined_(combined) {
  if (per) per_.emplace(capacity, *per);
}

std::size_t ReplayStack::append(Transition t) {
  const std::size_t slot = buffer_.append(std::move(t));
  if (per_) per_->insert(slot);
  return slot;
}

Batch ReplayStack::sample(std::size_t batch_size, Rng& rng) const {
  InnerSampler inner = [this](std::size_t n, Rng& r) {
    return per_ ? per_->sample(buffer_, n, r) : sample_uniform(buffer_, n, r);
  };
  if (combined_) return sample_combined(buffer_, batch_size, inner, rng);
  return inner(batch_size, rng);
}

void ReplayStack::update_priorities(const Batch& batch, std::span<const double> td_errors) {
  if (!per_) return;
  if (batch.size() != td_errors.size()) throw ShapeError("one td error per sampled transition required");
  std::vector<std::size_t> slots;
  slots.reserve(batch.size());
  for (const auto& s : batch) slots.push_back(s.index);
  per_->update(slots, td_errors);
}

}  // namespace replaykit
