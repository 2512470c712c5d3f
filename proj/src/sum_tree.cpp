#include "replaykit/sum_tree.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "replaykit/errors.hpp"

namespace replaykit {

SumTree::SumTree(std::size_t capacity)
    : capacity_(capacity), leaves_(std::bit_ceil(std::max<std::size_t>(capacity, 1))) {
  if (capacity == 0) throw ConfigError("sum tree capacity must be at least 1");
  nodes_.assign(2 * leaves_ - 1, 0.0);
}

void SumTree::set(std::size_t index, double value) {
  if (index >= capacity_) {
    throw BoundsError("sum tree leaf " + std::to_string(index) + " out of range (capacity " +
                      std::to_string(capacity_) + ")");
  }
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw DomainError("sum tree values must be finite and non-negative");
  }
  std::size_t node = index + leaves_ - 1;
  nodes_[node] = value;
  while (node > 0) {
    node = (node - 1) / 2;
    nodes_[node] = nodes_[2 * node + 1] + nodes_[2 * node + 2];
  }
}

double SumTree::get(std::size_t index) const {
  if (index >= capacity_) throw BoundsError("sum tree leaf out of range");
  return nodes_[index + leaves_ - 1];
}

std::size_t SumTree::sample(double u) const {
  if (!(total() > 0.0)) throw NotReadyError("sum tree holds no priority mass");
  if (!(u >= 0.0) || !(u < total())) {
    throw DomainError("sum tree sample point must lie in [0, total)");
  }
  std::size_t node = 0;
  while (node < leaves_ - 1) {
    const std::size_t left = 2 * node + 1;
    if (u < nodes_[left]) {
      node = left;
    } else {
      u -= nodes_[left];
      node = left + 1;
    }
  }
  std::size_t leaf = node - (leaves_ - 1);
  // Rounding in the subtraction chain can push u past the last non-empty leaf.
  while (nodes_[leaf + leaves_ - 1] == 0.0 && leaf > 0) --leaf;
  return leaf;
}

double SumTree::max_relative_imbalance() const {
  double worst = 0.0;
  for (std::size_t node = 0; node + 1 < leaves_; ++node) {
    const double sum = nodes_[2 * node + 1] + nodes_[2 * node + 2];
    const double scale = std::max(std::abs(sum), 1e-300);
    worst = std::max(worst, std::abs(nodes_[node] - sum) / scale);
  }
  return worst;
}

}  // namespace replaykit
