#pragma once

#include <cstddef>
#include <vector>

namespace replaykit {

/// Array-backed complete binary tree over non-negative leaf values. Internal
/// nodes hold the sum of their children, so the root is the total mass and a
/// prefix-sum descent finds a leaf in O(log n).
///
/// The leaf level is padded to a power of two so that leaf order matches the
/// left-to-right order of the descent.
class SumTree {
 public:
  explicit SumTree(std::size_t capacity);

  std::size_t capacity() const { return capacity_; }

  /// Sets leaf `index` and refreshes every ancestor.
  void set(std::size_t index, double value);
  double get(std::size_t index) const;
  double total() const { return nodes_[0]; }

  /// Returns the leaf i with prefix(i) <= u < prefix(i + 1). Requires
  /// total() > 0 and u in [0, total()).
  std::size_t sample(double u) const;

  /// Largest relative deviation between an internal node and the sum of its
  /// children.
  double max_relative_imbalance() const;

  const std::vector<double>& nodes() const { return nodes_; }

 private:
  std::size_t capacity_;
  std::size_t leaves_;  // power of two >= capacity_
  std::vector<double> nodes_;
};

}  // namespace replaykit
