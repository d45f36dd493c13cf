#pragma once

#include <bit>
#include <cstdint>
#include <vector>

namespace dcm {

/// Binary indexed tree over nonnegative integer weights.
class Fenwick {
 public:
  Fenwick() = default;
  explicit Fenwick(std::size_t n) : tree_(n + 1, 0) {}

  /// O(n) construction from weights.
  explicit Fenwick(const std::vector<std::uint64_t>& w) : tree_(w.size() + 1, 0) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      tree_[i + 1] += w[i];
      const std::size_t parent = (i + 1) + ((i + 1) & (~(i + 1) + 1));
      if (parent < tree_.size()) tree_[parent] += tree_[i + 1];
    }
    for (auto x : w) total_ += x;
  }

  std::size_t size() const { return tree_.empty() ? 0 : tree_.size() - 1; }
  std::uint64_t total() const { return total_; }

  void add(std::size_t i, std::int64_t delta) {
    total_ += delta;
    for (++i; i < tree_.size(); i += i & (~i + 1)) tree_[i] += delta;
  }

  /// Sum of weights in [0, i).
  std::uint64_t prefix(std::size_t i) const {
    std::uint64_t s = 0;
    for (; i > 0; i -= i & (~i + 1)) s += tree_[i];
    return s;
  }

  /// Smallest i with prefix(i + 1) > target; target must be < total().
  /// Also returns target - prefix(i), the offset inside slot i.
  std::size_t find(std::uint64_t target, std::uint64_t* offset = nullptr) const {
    std::size_t pos = 0;
    for (std::size_t step = std::bit_floor(size()); step > 0; step >>= 1) {
      if (pos + step < tree_.size() && tree_[pos + step] <= target) {
        pos += step;
        target -= tree_[pos];
      }
    }
    if (offset) *offset = target;
    return pos;
  }

 private:
  std::vector<std::uint64_t> tree_;
  std::uint64_t total_ = 0;
};

}  // namespace dcm
