#pragma once

// Overlap functionals between two paths. Sums run over i >= 1; sigma_0 always coincides.

#include <stdexcept>

#include "dpre/lattice.hpp"
#include "dpre/partition.hpp"

namespace dpre {

/// Number of i in [lo, hi] with a_i == b_i.
inline int coincidences(const Path& a, const Path& b, int lo, int hi) {
  int c = 0;
  for (int i = lo; i <= hi; ++i) c += (a[static_cast<std::size_t>(i)] == b[static_cast<std::size_t>(i)]);
  return c;
}

/// R^{[lo,hi]}(a, b): fraction of coincidences on the window [lo, hi].
inline double restricted_overlap(const Path& a, const Path& b, int lo, int hi) {
  if (a.length() != b.length()) throw std::invalid_argument("restricted_overlap: length mismatch");
  if (lo < 1 || lo > hi || hi > a.length())
    throw std::invalid_argument("restricted_overlap: window must satisfy 1 <= lo <= hi <= N");
  return static_cast<double>(coincidences(a, b, lo, hi)) / (hi - lo + 1);
}

/// R(a, b) = (1/N) sum_{i=1..N} 1{a_i = b_i}.
inline double overlap(const Path& a, const Path& b) {
  if (a.length() != b.length()) throw std::invalid_argument("overlap: length mismatch");
  return restricted_overlap(a, b, 1, a.length());
}

/// R^{(l)}(a, b): restricted overlap on the l-th regular subinterval.
inline double block_overlap(const Path& a, const Path& b, const PartitionScheme& p, int block) {
  if (block < 1 || block > p.blocks()) throw std::invalid_argument("block_overlap: block index out of range");
  if (p.length() != a.length()) throw std::invalid_argument("block_overlap: partition length differs from N");
  if (p.block_size(block) == 0) throw std::invalid_argument("block_overlap: empty block");
  return restricted_overlap(a, b, p.first(block), p.last(block));
}

}  // namespace dpre
