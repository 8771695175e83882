#pragma once

// Lattice points, nearest-neighbor paths on Z^d and the reachable space-time cone.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace dpre {

inline constexpr int kMaxDim = 8;

/// A point of Z^d. Coordinates past the active dimension are kept at zero, so
/// equality and hashing can look at the whole array.
using Point = std::array<int, kMaxDim>;

inline constexpr Point origin() { return Point{}; }

inline int l1_norm(const Point& x) {
  int s = 0;
  for (int c : x) s += std::abs(c);
  return s;
}

inline int l1_distance(const Point& x, const Point& y) {
  int s = 0;
  for (int k = 0; k < kMaxDim; ++k) s += std::abs(x[k] - y[k]);
  return s;
}

inline Point axis_step(Point x, int axis, int sign) {
  x[static_cast<std::size_t>(axis)] += sign;
  return x;
}

struct PointHash {
  std::size_t operator()(const Point& x) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (int c : x) {
      h ^= static_cast<std::uint32_t>(c);
      h *= 0x100000001b3ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

class MemoryGuardError : public std::length_error {
 public:
  using std::length_error::length_error;
};

inline constexpr std::uint64_t kDefaultCellCap = 100'000'000ULL;

/// Number of points of Z^d at L1 distance exactly r from the origin.
inline std::uint64_t sphere_size(int dim, int r) {
  if (r == 0) return 1;
  // sum_k 2^k C(d,k) C(r-1,k-1); saturating double arithmetic is enough for a guard
  long double total = 0;
  long double binom_d = 1;  // C(d,k)
  long double binom_r = 1;  // C(r-1,k-1)
  for (int k = 1; k <= dim; ++k) {
    binom_d = binom_d * (dim - k + 1) / k;
    if (k > 1) binom_r = binom_r * (r - k + 1) / (k - 1);
    if (k - 1 > r - 1) break;
    total += std::ldexp(binom_d * binom_r, k);
  }
  if (total > static_cast<long double>(std::numeric_limits<std::uint64_t>::max() / 2))
    return std::numeric_limits<std::uint64_t>::max() / 2;
  return static_cast<std::uint64_t>(total + 0.5L);
}

/// |D_i| = #{x : |x|_1 <= i, |x|_1 = i mod 2}.
inline std::uint64_t reachable_set_size(int step, int dim) {
  if (step < 0) throw std::invalid_argument("reachable_set_size: negative step");
  std::uint64_t total = 0;
  for (int r = step % 2; r <= step; r += 2) {
    std::uint64_t s = sphere_size(dim, r);
    total = (total > std::numeric_limits<std::uint64_t>::max() / 2 - s)
                ? std::numeric_limits<std::uint64_t>::max() / 2
                : total + s;
  }
  return total;
}

/// Total number of cells sum_{i=0..N} |D_i| stored by a full transfer-matrix table.
inline std::uint64_t cone_cells(int dim, int length) {
  std::uint64_t total = 0;
  for (int i = 0; i <= length; ++i) {
    total += reachable_set_size(i, dim);
    if (total > std::numeric_limits<std::uint64_t>::max() / 4) break;
  }
  return total;
}

struct LatticeParams {
  int dim = 1;
  int length = 1;
  std::uint64_t cell_cap = kDefaultCellCap;

  void validate() const {
    if (dim < 1 || dim > kMaxDim)
      throw std::invalid_argument("LatticeParams: dimension must lie in [1," +
                                  std::to_string(kMaxDim) + "]");
    if (length < 1) throw std::invalid_argument("LatticeParams: N must be >= 1");
    const auto cells = cone_cells(dim, length);
    if (cells > cell_cap)
      throw MemoryGuardError("LatticeParams: reachable cone has " + std::to_string(cells) +
                             " cells, above the cap of " + std::to_string(cell_cap));
  }
};

/// Enumerates D_i in lexicographic order.
inline std::vector<Point> reachable_set(int step, int dim) {
  if (step < 0) throw std::invalid_argument("reachable_set: negative step");
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("reachable_set: bad dimension");
  std::vector<Point> out;
  Point x{};
  // Recursive fill of coordinates 0..dim-1 with a remaining L1 budget.
  std::function<void(int, int)> fill = [&](int axis, int budget) {
    if (axis == dim) {
      const int used = step - budget;
      if ((step - used) % 2 == 0) out.push_back(x);
      return;
    }
    for (int c = -budget; c <= budget; ++c) {
      x[static_cast<std::size_t>(axis)] = c;
      fill(axis + 1, budget - std::abs(c));
    }
    x[static_cast<std::size_t>(axis)] = 0;
  };
  fill(0, step);
  return out;
}

/// Dense indexing of D_i. Closed form for d = 1, 2, hashed otherwise.
class Cone {
 public:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  Cone(int dim, int step) : dim_(dim), step_(step) {
    if (dim_ >= 3) {
      points_ = reachable_set(step_, dim_);
      index_.reserve(points_.size());
      for (std::size_t k = 0; k < points_.size(); ++k) index_.emplace(points_[k], k);
    }
  }

  int dim() const { return dim_; }
  int step() const { return step_; }

  std::size_t size() const {
    switch (dim_) {
      case 1: return static_cast<std::size_t>(step_) + 1;
      case 2: return static_cast<std::size_t>(step_ + 1) * static_cast<std::size_t>(step_ + 1);
      default: return points_.size();
    }
  }

  /// Index of x in D_i, or npos when x is not in the cone.
  std::size_t index(const Point& x) const {
    switch (dim_) {
      case 1: {
        const int a = x[0] + step_;
        if (a < 0 || a > 2 * step_ || (a & 1)) return npos;
        return static_cast<std::size_t>(a / 2);
      }
      case 2: {
        const int s = x[0] + x[1] + step_;
        const int t = x[0] - x[1] + step_;
        if ((s & 1) || s < 0 || t < 0 || s > 2 * step_ || t > 2 * step_) return npos;
        return static_cast<std::size_t>(s / 2) * static_cast<std::size_t>(step_ + 1) +
               static_cast<std::size_t>(t / 2);
      }
      default: {
        auto it = index_.find(x);
        return it == index_.end() ? npos : it->second;
      }
    }
  }

  Point point(std::size_t k) const {
    Point x{};
    switch (dim_) {
      case 1:
        x[0] = 2 * static_cast<int>(k) - step_;
        return x;
      case 2: {
        const int u = static_cast<int>(k / static_cast<std::size_t>(step_ + 1));
        const int v = static_cast<int>(k % static_cast<std::size_t>(step_ + 1));
        x[0] = u + v - step_;
        x[1] = u - v;
        return x;
      }
      default:
        return points_[k];
    }
  }

 private:
  int dim_;
  int step_;
  std::vector<Point> points_;
  std::unordered_map<Point, std::size_t, PointHash> index_;
};

/// True iff the sequence starts at the origin, makes unit L1 steps, and uses
/// no coordinates beyond `dim`.
inline bool is_valid_path(int dim, std::span<const Point> points) {
  if (points.empty() || dim < 1 || dim > kMaxDim) return false;
  for (const auto& p : points)
    for (int k = dim; k < kMaxDim; ++k)
      if (p[static_cast<std::size_t>(k)] != 0) return false;
  if (points.front() != origin()) return false;
  for (std::size_t i = 1; i < points.size(); ++i)
    if (l1_distance(points[i], points[i - 1]) != 1) return false;
  return true;
}

/// A nearest-neighbor trajectory sigma_0 = 0, ..., sigma_N.
class Path {
 public:
  Path() = default;
  Path(int dim, std::vector<Point> points) : dim_(dim), points_(std::move(points)) {
    if (!is_valid_path(dim_, points_)) throw std::invalid_argument("Path: not a nearest-neighbor path from the origin");
  }

  int dim() const { return dim_; }
  int length() const { return static_cast<int>(points_.size()) - 1; }
  const Point& operator[](std::size_t i) const { return points_[i]; }
  std::span<const Point> points() const { return points_; }

  friend bool operator==(const Path& a, const Path& b) {
    return a.dim_ == b.dim_ && a.points_ == b.points_;
  }

 private:
  int dim_ = 1;
  std::vector<Point> points_{origin()};
};

struct PathHash {
  std::size_t operator()(const Path& p) const noexcept {
    std::size_t h = static_cast<std::size_t>(p.dim());
    PointHash ph;
    for (const auto& x : p.points()) h = h * 0x9e3779b97f4a7c15ULL + ph(x);
    return h;
  }
};

/// A nearest-neighbor path of exactly s steps joins x to y iff s >= |x-y|_1 and
/// the parities agree.
inline bool step_feasible(const Point& x, const Point& y, int steps) {
  if (steps < 0) return false;
  const int dist = l1_distance(x, y);
  return steps >= dist && (steps - dist) % 2 == 0;
}

/// Deterministic connector of exactly `steps` steps from x to y: close coordinate
/// gaps in axis order, then spend the remaining steps oscillating +e_1/-e_1.
/// Returns steps + 1 points, starting at x and ending at y.
inline std::vector<Point> connecting_path(const Point& x, const Point& y, int steps) {
  if (!step_feasible(x, y, steps))
    throw std::invalid_argument("connecting_path: endpoints are not joinable in the given number of steps");
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  Point cur = x;
  out.push_back(cur);
  for (int k = 0; k < kMaxDim; ++k) {
    const auto a = static_cast<std::size_t>(k);
    while (cur[a] != y[a]) {
      cur[a] += (y[a] > cur[a]) ? 1 : -1;
      out.push_back(cur);
    }
  }
  int remaining = steps - l1_distance(x, y);
  while (remaining > 0) {
    cur[0] += 1;
    out.push_back(cur);
    cur[0] -= 1;
    out.push_back(cur);
    remaining -= 2;
  }
  return out;
}

}  // namespace dpre
