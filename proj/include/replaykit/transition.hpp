#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

namespace replaykit {

using Vector = std::vector<double>;

/// Discrete actions are stored as an index, continuous actions as a vector in
/// environment units.
using Action = std::variant<std::int64_t, Vector>;

inline bool is_discrete(const Action& a) { return std::holds_alternative<std::int64_t>(a); }
inline std::int64_t action_index(const Action& a) { return std::get<std::int64_t>(a); }
inline const Vector& action_values(const Action& a) { return std::get<Vector>(a); }

/// One environment interaction. `done` marks task termination only; a time
/// limit truncation is stored with done = false so learners bootstrap through it.
struct Transition {
  Vector state;
  Action action;
  double reward = 0.0;
  Vector next_state;
  bool done = false;
  std::optional<Vector> goal;

  bool operator==(const Transition&) const = default;
};

/// Throws ShapeError / DomainError when the transition breaks its invariants.
void validate(const Transition& t);

}  // namespace replaykit
