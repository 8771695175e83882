#pragma once

// Regular subintervals of [1,N] and their K-fold refinements.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpre {

/// Boundaries 0 = n_0 <= n_1 <= ... <= n_L = N with n_l = floor(l N / L).
/// Block l (1-based) covers the times [n_{l-1}+1, n_l].
class PartitionScheme {
 public:
  PartitionScheme() = default;

  PartitionScheme(int length, int blocks) : length_(length) {
    if (blocks < 1) throw std::invalid_argument("make_partition: L must be >= 1");
    if (blocks > length)
      throw std::invalid_argument("make_partition: L = " + std::to_string(blocks) +
                                  " exceeds N = " + std::to_string(length));
    bounds_.resize(static_cast<std::size_t>(blocks) + 1);
    for (int l = 0; l <= blocks; ++l)
      bounds_[static_cast<std::size_t>(l)] =
          static_cast<int>(static_cast<long long>(l) * length / blocks);
  }

  int length() const { return length_; }
  int blocks() const { return static_cast<int>(bounds_.size()) - 1; }
  const std::vector<int>& boundaries() const { return bounds_; }

  /// n_l for 0 <= l <= L.
  int boundary(int l) const { return bounds_.at(static_cast<std::size_t>(l)); }
  int first(int l) const { return boundary(l - 1) + 1; }
  int last(int l) const { return boundary(l); }
  int block_size(int l) const { return boundary(l) - boundary(l - 1); }

  /// Block containing time i in [1,N].
  int block_of(int i) const {
    for (int l = 1; l <= blocks(); ++l)
      if (i <= bounds_[static_cast<std::size_t>(l)]) return l;
    throw std::out_of_range("PartitionScheme::block_of: time outside [1,N]");
  }

 private:
  int length_ = 1;
  std::vector<int> bounds_{0, 1};
};

inline PartitionScheme make_partition(int length, int blocks) { return {length, blocks}; }

/// Split of block l into K nearly equal sub-blocks,
/// m_k = n_{l-1} + floor(k (n_l - n_{l-1}) / K).
class SubPartition {
 public:
  SubPartition(const PartitionScheme& parent, int block, int pieces) : block_(block) {
    if (block < 1 || block > parent.blocks())
      throw std::invalid_argument("make_subpartition: block index out of range");
    if (pieces < 1) throw std::invalid_argument("make_subpartition: K must be >= 1");
    const int lo = parent.boundary(block - 1);
    const int size = parent.block_size(block);
    bounds_.resize(static_cast<std::size_t>(pieces) + 1);
    for (int k = 0; k <= pieces; ++k)
      bounds_[static_cast<std::size_t>(k)] =
          lo + static_cast<int>(static_cast<long long>(k) * size / pieces);
    has_empty_ = pieces > size;
  }

  int block() const { return block_; }
  int pieces() const { return static_cast<int>(bounds_.size()) - 1; }
  const std::vector<int>& boundaries() const { return bounds_; }
  int boundary(int k) const { return bounds_.at(static_cast<std::size_t>(k)); }
  int piece_size(int k) const { return boundary(k) - boundary(k - 1); }

  /// Set when K exceeds the block size, in which case some sub-blocks are empty.
  bool has_empty_pieces() const { return has_empty_; }

 private:
  int block_;
  std::vector<int> bounds_;
  bool has_empty_ = false;
};

inline SubPartition make_subpartition(const PartitionScheme& p, int block, int pieces) {
  return {p, block, pieces};
}

/// K = ceil(12 / delta), the sub-block count used by the concatenation step.
inline int subblock_count(double delta) {
  if (!(delta > 0)) throw std::invalid_argument("subblock_count: delta must be positive");
  return static_cast<int>(std::ceil(12.0 / delta));
}

/// floor(N/L) >= K, the size condition under which every sub-block is non-empty.
inline bool fine_enough(const PartitionScheme& p, int pieces) {
  return p.length() / p.blocks() >= pieces;
}

}  // namespace dpre
