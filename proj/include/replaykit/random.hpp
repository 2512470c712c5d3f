#pragma once

#include <cstdint>
#include <random>

namespace replaykit {

using Rng = std::mt19937_64;

/// Independent random streams derived from one run seed. Each consumer of
/// randomness draws from its own stream so toggling one component does not
/// shift the draws seen by the others.
enum class Stream : std::uint32_t {
  kEnv = 1,
  kInit = 2,
  kExplore = 3,
  kSample = 4,
  kEval = 5,
};

inline Rng make_stream(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return Rng(seq);
}

/// Uniform double in [0, 1) built from the top 53 bits of one draw.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace replaykit
