#include "replaykit/replay_buffer.hpp"

#include <cmath>
#include <string>

#include "replaykit/errors.hpp"

namespace replaykit {

namespace {

bool all_finite(const Vector& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

void validate(const Transition& t) {
  if (t.state.size() != t.next_state.size()) {
    throw ShapeError("transition state has dimension " + std::to_string(t.state.size()) +
                     " but next_state has " + std::to_string(t.next_state.size()));
  }
  if (!std::isfinite(t.reward)) throw DomainError("transition reward is not finite");
  if (!all_finite(t.state) || !all_finite(t.next_state)) {
    throw DomainError("transition state is not finite");
  }
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) {
  if (capacity == 0) throw ConfigError("replay buffer capacity must be at least 1");
  storage_.resize(capacity);
}

std::size_t ReplayBuffer::append(Transition t) {
  validate(t);
  if (appended_ == 0) {
    state_dim_ = t.state.size();
    has_goal_ = t.goal.has_value();
    goal_dim_ = has_goal_ ? t.goal->size() : 0;
  } else {
    if (t.state.size() != state_dim_) {
      throw ShapeError("appended state dimension " + std::to_string(t.state.size()) +
                       " differs from stored dimension " + std::to_string(state_dim_));
    }
    if (t.goal.has_value() != has_goal_ || (has_goal_ && t.goal->size() != goal_dim_)) {
      throw ShapeError("appended goal shape differs from stored transitions");
    }
  }
  const std::size_t slot = cursor_;
  storage_[slot] = std::move(t);
  cursor_ = (cursor_ + 1) % storage_.size();
  if (count_ < storage_.size()) ++count_;
  ++appended_;
  return slot;
}

std::size_t ReplayBuffer::latest_index() const {
  if (count_ == 0) throw NotReadyError("replay buffer is empty");
  return (cursor_ + storage_.size() - 1) % storage_.size();
}

const Transition& ReplayBuffer::at(std::size_t index) const {
  if (index >= count_) {
    throw BoundsError("replay index " + std::to_string(index) + " out of range (size " +
                      std::to_string(count_) + ")");
  }
  return storage_[index];
}

Batch sample_uniform(const ReplayBuffer& buf, std::size_t batch_size, Rng& rng) {
  if (buf.empty()) throw NotReadyError("cannot sample from an empty replay buffer");
  Batch batch;
  batch.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) {
    const std::size_t idx = uniform_index(rng, buf.size());
    batch.push_back(Sample{idx, std::cref(buf.at(idx)), 1.0});
  }
  return batch;
}

Batch sample_combined(const ReplayBuffer& buf, std::size_t batch_size, const InnerSampler& inner,
                      Rng& rng) {
  if (batch_size == 0) throw ConfigError("batch size must be at least 1");
  if (buf.empty()) throw NotReadyError("cannot sample from an empty replay buffer");
  Batch batch;
  batch.reserve(batch_size);
  const std::size_t latest = buf.latest_index();
  batch.push_back(Sample{latest, std::cref(buf.at(latest)), 1.0});
  if (batch_size > 1) {
    Batch rest = inner(batch_size - 1, rng);
    batch.insert(batch.end(), rest.begin(), rest.end());
  }
  return batch;
}

}  // namespace replaykit
