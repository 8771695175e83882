#pragma once

// Random paths with prescribed coincidences, for property checks of the
// concatenation machinery. Generators take any 64-bit URBG.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "dpre/environment.hpp"
#include "dpre/lattice.hpp"
#include "dpre/partition.hpp"

namespace dpre {

template <class Rng>
std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(to_unit_open(static_cast<std::uint64_t>(rng())) * static_cast<double>(n)));
}

template <class Rng>
double uniform_real(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * to_unit_open(static_cast<std::uint64_t>(rng()));
}

template <class Rng>
Point random_neighbor(const Point& x, int dim, Rng& rng) {
  const auto c = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(2 * dim)));
  return axis_step(x, c / 2, (c % 2) ? 1 : -1);
}

/// Simple random walk of `length` steps.
template <class Rng>
Path random_walk(int dim, int length, Rng& rng) {
  std::vector<Point> pts{origin()};
  for (int i = 0; i < length; ++i) pts.push_back(random_neighbor(pts.back(), dim, rng));
  return Path(dim, std::move(pts));
}

/// Random walk from `from` to `to` in exactly `steps` steps: each step is uniform
/// among the moves that keep the endpoint reachable. Returns steps + 1 points.
template <class Rng>
std::vector<Point> random_bridge(const Point& from, const Point& to, int steps, int dim, Rng& rng) {
  std::vector<Point> out{from};
  for (int left = steps; left > 0; --left) {
    Point opts[2 * kMaxDim];
    int count = 0;
    for (int a = 0; a < dim; ++a)
      for (int sign : {-1, 1}) {
        const Point y = axis_step(out.back(), a, sign);
        if (step_feasible(y, to, left - 1)) opts[count++] = y;
      }
    out.push_back(opts[uniform_index(rng, static_cast<std::size_t>(count))]);
  }
  return out;
}

/// A path that equals `target` on the given sorted, disjoint time intervals,
/// random-bridges between them and random-walks after the last one.
template <class Rng>
Path plant_copy(const Path& target, const std::vector<std::pair<int, int>>& intervals, Rng& rng) {
  const int dim = target.dim();
  const int n = target.length();
  std::vector<Point> pts{origin()};
  int t = 0;
  for (const auto& [s, e] : intervals) {
    const auto bridge = random_bridge(pts.back(), target[static_cast<std::size_t>(s)], s - t, dim, rng);
    pts.insert(pts.end(), bridge.begin() + 1, bridge.end());
    for (int i = s + 1; i <= e; ++i) pts.push_back(target[static_cast<std::size_t>(i)]);
    t = e;
  }
  while (t < n) {
    pts.push_back(random_neighbor(pts.back(), dim, rng));
    ++t;
  }
  return Path(dim, std::move(pts));
}

/// Disjoint sorted intervals inside [lo, hi] covering at least `cover` times:
/// either scattered single times or a few runs.
template <class Rng>
std::vector<std::pair<int, int>> random_cover(int lo, int hi, int cover, Rng& rng) {
  const int size = hi - lo + 1;
  cover = std::clamp(cover, 0, size);
  std::vector<std::pair<int, int>> out;
  if (cover == 0) return out;
  if (uniform_index(rng, 2) == 0) {
    std::vector<int> times(static_cast<std::size_t>(size));
    for (int k = 0; k < size; ++k) times[static_cast<std::size_t>(k)] = lo + k;
    for (int k = 0; k < cover; ++k)
      std::swap(times[static_cast<std::size_t>(k)],
                times[static_cast<std::size_t>(k) + uniform_index(rng, static_cast<std::size_t>(size - k))]);
    times.resize(static_cast<std::size_t>(cover));
    std::sort(times.begin(), times.end());
    for (int x : times) out.emplace_back(x, x);
    return out;
  }
  const int runs = 1 + static_cast<int>(uniform_index(rng, 3));
  // Split `cover` into run lengths and the spare room into gaps.
  std::vector<int> lens(static_cast<std::size_t>(runs), cover / runs);
  lens.back() += cover % runs;
  int spare = size - cover;
  int pos = lo;
  for (int r = 0; r < runs; ++r) {
    const int len = lens[static_cast<std::size_t>(r)];
    if (len == 0) continue;
    const int gap = spare > 0 ? static_cast<int>(uniform_index(rng, static_cast<std::size_t>(spare) + 1)) / (runs - r) : 0;
    pos += gap;
    spare -= gap;
    out.emplace_back(pos, pos + len - 1);
    pos += len;
  }
  return out;
}

/// sigma plus sigma', sigma'' satisfying R^{(l)}(sigma', sigma) >= delta and
/// R^{(l+1)}(sigma'', sigma) >= delta by construction.
struct ClaimInstance {
  Path target;
  Path first;
  Path second;
  PartitionScheme partition;
  int block = 1;
  double delta = 0.5;
};

template <class Rng>
ClaimInstance planted_claim_instance(Rng& rng, int dim = 1) {
  ClaimInstance inst;
  inst.delta = uniform_real(rng, 0.2, 0.95);
  const int pieces = subblock_count(inst.delta);
  const int blocks = 2 + static_cast<int>(uniform_index(rng, 3));
  const int n = blocks * pieces * (1 + static_cast<int>(uniform_index(rng, 3))) + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(blocks)));
  inst.partition = make_partition(n, blocks);
  inst.block = 1 + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(blocks - 1)));
  inst.target = random_walk(dim, n, rng);
  const auto& p = inst.partition;
  const int l = inst.block;
  auto need = [&](int b) { return static_cast<int>(std::ceil(inst.delta * p.block_size(b) - 1e-9)); };

  auto cover_first = random_cover(p.first(l), p.last(l), need(l), rng);
  const bool same = uniform_index(rng, 10) == 0;
  if (same) {
    auto more = random_cover(p.first(l + 1), p.last(l + 1), need(l + 1), rng);
    cover_first.insert(cover_first.end(), more.begin(), more.end());
    inst.first = plant_copy(inst.target, cover_first, rng);
    inst.second = inst.first;
  } else {
    inst.first = plant_copy(inst.target, cover_first, rng);
    inst.second = plant_copy(inst.target, random_cover(p.first(l + 1), p.last(l + 1), need(l + 1), rng), rng);
  }
  return inst;
}

}  // namespace dpre
