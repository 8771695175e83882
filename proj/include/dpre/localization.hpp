#pragma once

// Path concatenation across regular subintervals, the distinguished-set
// induction, a checker for the inductive overlap reduction, and favorite-path
// extraction from Gibbs samples.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "dpre/lattice.hpp"
#include "dpre/overlap.hpp"
#include "dpre/parallel.hpp"
#include "dpre/partition.hpp"

namespace dpre {

// ---------------------------------------------------------------------------
// Meeting times and concatenation

/// Smallest t in [lo, hi] such that first[anchor] can reach second[t] in exactly
/// t - anchor steps; nullopt when no such t exists.
inline std::optional<int> meeting_time(const Path& first, const Path& second, int anchor, int lo, int hi) {
  if (anchor > lo - 1) throw std::invalid_argument("meeting_time: anchor must precede the window");
  if (hi > second.length() || anchor < 0) throw std::invalid_argument("meeting_time: window outside the path");
  const Point& from = first[static_cast<std::size_t>(anchor)];
  for (int t = lo; t <= hi; ++t)
    if (step_feasible(from, second[static_cast<std::size_t>(t)], t - anchor)) return t;
  return std::nullopt;
}

/// first up to time `anchor`, the connecting path to second[meet], then second.
inline Path concatenate_at(const Path& first, const Path& second, int anchor, int meet) {
  if (first.length() != second.length()) throw std::invalid_argument("concatenate: length mismatch");
  const auto a = static_cast<std::size_t>(anchor);
  const auto bridge = connecting_path(first[a], second[static_cast<std::size_t>(meet)], meet - anchor);
  std::vector<Point> pts(first.points().begin(), first.points().begin() + static_cast<std::ptrdiff_t>(a) + 1);
  pts.insert(pts.end(), bridge.begin() + 1, bridge.end());
  pts.insert(pts.end(), second.points().begin() + meet + 1, second.points().end());
  return Path(first.dim(), std::move(pts));
}

/// The concatenated path P_k^{(l)}(first, second): anchor m_k of block l's
/// sub-partition, meeting time taken in block l + 1.
inline Path concatenate(const Path& first, const Path& second, int k, const PartitionScheme& p,
                        const SubPartition& sub) {
  const int l = sub.block();
  if (l >= p.blocks()) throw std::invalid_argument("concatenate: block has no successor");
  const int anchor = sub.boundary(k);
  const auto t = meeting_time(first, second, anchor, p.first(l + 1), p.last(l + 1));
  if (!t) throw std::invalid_argument("concatenate: no feasible connection into the next block");
  return concatenate_at(first, second, anchor, *t);
}

// ---------------------------------------------------------------------------
// Distinguished sets

struct Provenance {
  std::size_t first = 0;   // index of sigma' in the previous level
  std::size_t second = 0;  // index of sigma''
  int k = 0;               // sub-block boundary used as anchor
  int meet = 0;            // meeting time
};

/// D_l as an ordered list. D_l is a prefix of D_{l+1}, so provenance indices
/// refer to positions in this same list.
struct DistinguishedSet {
  int level = 1;
  std::vector<Path> paths;
  std::vector<std::optional<Provenance>> provenance;

  bool contains(const Path& p) const { return std::find(paths.begin(), paths.end(), p) != paths.end(); }
};

struct DistinguishedOptions {
  std::optional<int> pieces;  // K; defaults to ceil(12 / delta)
  std::size_t max_paths = 200'000;
};

inline DistinguishedSet initial_distinguished_set(const std::vector<Path>& paths) {
  DistinguishedSet d;
  d.level = 1;
  std::unordered_set<Path, PathHash> seen;
  for (const auto& p : paths)
    if (seen.insert(p).second) {
      d.paths.push_back(p);
      d.provenance.emplace_back();
    }
  return d;
}

/// D_{l+1} = D_l plus P_k^{(l)}(s', s'') for every ordered pair s' != s'' and
/// k in [1, K-1] with a finite meeting time.
inline DistinguishedSet extend_distinguished_set(const DistinguishedSet& cur, const PartitionScheme& p, int pieces,
                                                 std::size_t max_paths = 200'000) {
  const int l = cur.level;
  if (l >= p.blocks()) throw std::invalid_argument("extend_distinguished_set: already at the last block");
  const auto sub = make_subpartition(p, l, pieces);
  DistinguishedSet next = cur;
  next.level = l + 1;
  std::unordered_set<Path, PathHash> seen(cur.paths.begin(), cur.paths.end());
  const std::size_t m = cur.paths.size();
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) {
      if (a == b) continue;
      const Path& first = cur.paths[a];
      const Path& second = cur.paths[b];
      for (int k = 1; k <= pieces - 1; ++k) {
        const int anchor = sub.boundary(k);
        const auto t = meeting_time(first, second, anchor, p.first(l + 1), p.last(l + 1));
        if (!t) continue;
        Path q = concatenate_at(first, second, anchor, *t);
        if (!seen.insert(q).second) continue;
        if (next.paths.size() >= max_paths)
          throw std::length_error("extend_distinguished_set: more than " + std::to_string(max_paths) + " paths");
        next.paths.push_back(std::move(q));
        next.provenance.push_back(Provenance{a, b, k, *t});
      }
    }
  return next;
}

/// K^{2^{L-1}-1} J^{2^{L-1}}, the cardinality bound on D_L (saturates at +inf).
inline double distinguished_size_bound(int pieces, std::size_t initial, int blocks) {
  const double e = std::pow(2.0, blocks - 1);
  return std::pow(static_cast<double>(pieces), e - 1) * std::pow(static_cast<double>(initial), e);
}

/// All levels D_1, ..., D_L.
inline std::vector<DistinguishedSet> build_distinguished_sets(const std::vector<Path>& initial,
                                                              const PartitionScheme& p, double delta,
                                                              const DistinguishedOptions& opt = {}) {
  const int pieces = opt.pieces.value_or(subblock_count(delta));
  if (!fine_enough(p, pieces))
    throw std::invalid_argument("build_distinguished_sets: floor(N/L) = " + std::to_string(p.length() / p.blocks()) +
                                " is smaller than K = " + std::to_string(pieces));
  for (const auto& q : initial)
    if (q.length() != p.length()) throw std::invalid_argument("build_distinguished_sets: path length differs from N");
  std::vector<DistinguishedSet> levels{initial_distinguished_set(initial)};
  while (levels.back().level < p.blocks())
    levels.push_back(extend_distinguished_set(levels.back(), p, pieces, opt.max_paths));
  return levels;
}

// ---------------------------------------------------------------------------
// Inductive overlap reduction

struct ClaimRecord {
  int block = 0;
  int pieces = 0;
  double delta = 0;
  bool hypotheses = false;  // R^{(l)}(s', s) >= delta and R^{(l+1)}(s'', s) >= delta
  bool size_condition = false;  // floor(N/L) >= K
  std::vector<int> rich_pieces;  // k whose sub-block holds >= delta N / (4 L K) coincidences
  int k1 = 0;
  int k2 = 0;
  std::optional<int> meet;
  Path witness;
  bool earlier_blocks_preserved = false;  // R^{(l')} unchanged for l' < l
  double block_overlap = 0;               // R^{(l)}(witness, s)
  double next_block_overlap = 0;          // R^{(l+1)}(witness, s)
  bool block_bound = false;               // >= delta^2 / 104
  bool next_block_bound = false;          // >= delta
  std::optional<bool> in_next_level;      // witness in D_{l+1}, when a set was supplied
  std::string note;

  /// True when the hypotheses hold and every conclusion was verified.
  bool conclusions_hold() const {
    return hypotheses && size_condition && rich_pieces.size() >= 2 && earlier_blocks_preserved && block_bound &&
           next_block_bound && in_next_level.value_or(true);
  }
  /// True unless the hypotheses held and some conclusion failed.
  bool consistent() const { return !(hypotheses && size_condition) || conclusions_hold(); }
};

/// Follows the constructive argument: find two rich sub-blocks k1 < k2 of block
/// l, concatenate at m_{k1}, and check the three conclusions against `target`.
inline ClaimRecord verify_claim_reduction(const Path& target, const Path& first, const Path& second, double delta,
                                          const PartitionScheme& p, int block, std::optional<int> pieces_override = {},
                                          const DistinguishedSet* next_level = nullptr) {
  ClaimRecord rec;
  rec.block = block;
  rec.delta = delta;
  rec.pieces = pieces_override.value_or(subblock_count(delta));
  if (block < 1 || block >= p.blocks()) throw std::invalid_argument("verify_claim_reduction: need 1 <= l <= L-1");
  rec.size_condition = fine_enough(p, rec.pieces);
  rec.hypotheses = block_overlap(first, target, p, block) >= delta && block_overlap(second, target, p, block + 1) >= delta;
  if (!rec.hypotheses || !rec.size_condition) {
    rec.note = !rec.hypotheses ? "hypotheses not satisfied" : "floor(N/L) < K";
    return rec;
  }

  const int n = p.length();
  const int blocks = p.blocks();
  const auto sub = make_subpartition(p, block, rec.pieces);
  for (int k = 1; k <= rec.pieces; ++k) {
    const int c = coincidences(first, target, sub.boundary(k - 1) + 1, sub.boundary(k));
    if (4.0 * blocks * rec.pieces * c >= delta * n) rec.rich_pieces.push_back(k);
  }
  if (rec.rich_pieces.size() < 2) {
    rec.note = "fewer than two rich sub-blocks";
    return rec;
  }
  rec.k1 = rec.rich_pieces[0];
  rec.k2 = rec.rich_pieces[1];

  if (first == second) {
    rec.witness = first;
    rec.note = "first == second";
  } else {
    const int anchor = sub.boundary(rec.k1);
    rec.meet = meeting_time(first, second, anchor, p.first(block + 1), p.last(block + 1));
    if (!rec.meet) {
      rec.note = "meeting time infinite";
      return rec;
    }
    rec.witness = concatenate_at(first, second, anchor, *rec.meet);
  }

  rec.earlier_blocks_preserved = true;
  for (int lp = 1; lp < block; ++lp)
    if (coincidences(rec.witness, target, p.first(lp), p.last(lp)) != coincidences(first, target, p.first(lp), p.last(lp)))
      rec.earlier_blocks_preserved = false;
  rec.block_overlap = block_overlap(rec.witness, target, p, block);
  rec.next_block_overlap = block_overlap(rec.witness, target, p, block + 1);
  rec.block_bound = rec.block_overlap >= delta * delta / 104.0;
  rec.next_block_bound = rec.next_block_overlap >= delta;
  if (next_level) rec.in_next_level = next_level->contains(rec.witness);
  return rec;
}

// ---------------------------------------------------------------------------
// Window reduction

/// The L with 2/L <= eps < 2/(L-1), L >= 2, for eps in (0, 1].
inline int blocks_for_window(double eps) {
  if (!(eps > 0) || eps > 1) throw std::invalid_argument("blocks_for_window: eps must lie in (0, 1]");
  int l = static_cast<int>(std::ceil(2.0 / eps - 1e-12));
  l = std::max(l, 2);
  while (2.0 / l > eps) ++l;
  while (l > 2 && !(eps < 2.0 / (l - 1))) --l;
  return l;
}

/// A regular block contained in [a, b], if any.
inline std::optional<int> block_inside(const PartitionScheme& p, int a, int b) {
  for (int l = 1; l <= p.blocks(); ++l)
    if (p.block_size(l) > 0 && p.first(l) >= a && p.last(l) <= b) return l;
  return std::nullopt;
}

/// min over windows [a, b] with b - a + 1 >= width of R^{[a,b]}(x, y). Windows of
/// length in [width, 2 width - 1] suffice: longer windows split into two valid ones.
inline double min_window_overlap(const Path& x, const Path& y, int width) {
  const int n = x.length();
  if (width < 1 || width > n) throw std::invalid_argument("min_window_overlap: bad width");
  std::vector<int> pre(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i)
    pre[static_cast<std::size_t>(i)] =
        pre[static_cast<std::size_t>(i - 1)] + (x[static_cast<std::size_t>(i)] == y[static_cast<std::size_t>(i)]);
  double best = 1.0;
  for (int a = 1; a <= n; ++a)
    for (int len = width; len <= std::min(2 * width - 1, n - a + 1); ++len) {
      const double r = static_cast<double>(pre[static_cast<std::size_t>(a + len - 1)] - pre[static_cast<std::size_t>(a - 1)]) / len;
      best = std::min(best, r);
    }
  return best;
}

// ---------------------------------------------------------------------------
// Favorite paths and coverage

enum class CoverMode { global, per_block_any, per_block_uniform };

inline std::string to_string(CoverMode m) {
  switch (m) {
    case CoverMode::global: return "global";
    case CoverMode::per_block_any: return "per-block-any";
    default: return "per-block-uniform";
  }
}

inline CoverMode parse_cover_mode(const std::string& s) {
  if (s == "global") return CoverMode::global;
  if (s == "per-block-any") return CoverMode::per_block_any;
  if (s == "per-block-uniform") return CoverMode::per_block_uniform;
  throw std::invalid_argument("unknown cover mode '" + s + "'");
}

/// Coincidence counts per block for every (candidate, sample) pair.
class OverlapTable {
 public:
  OverlapTable(const std::vector<Path>& candidates, const std::vector<Path>& samples, const PartitionScheme& p)
      : n_cand_(candidates.size()), n_samp_(samples.size()), blocks_(p.blocks()), partition_(p) {
    for (const auto& s : samples)
      if (s.length() != p.length()) throw std::invalid_argument("OverlapTable: sample length differs from N");
    for (const auto& c : candidates)
      if (c.length() != p.length()) throw std::invalid_argument("OverlapTable: candidate length differs from N");
    counts_.resize(n_cand_ * n_samp_ * static_cast<std::size_t>(blocks_));
    const auto rows = map_replicas(n_cand_, [&](std::size_t c) {
      std::vector<int> row(n_samp_ * static_cast<std::size_t>(blocks_));
      for (std::size_t s = 0; s < n_samp_; ++s)
        for (int l = 1; l <= blocks_; ++l)
          row[s * static_cast<std::size_t>(blocks_) + static_cast<std::size_t>(l - 1)] =
              coincidences(candidates[c], samples[s], p.first(l), p.last(l));
      return row;
    });
    for (std::size_t c = 0; c < n_cand_; ++c)
      std::copy(rows[c].begin(), rows[c].end(), counts_.begin() + static_cast<std::ptrdiff_t>(c * rows[c].size()));
  }

  std::size_t candidates() const { return n_cand_; }
  std::size_t samples() const { return n_samp_; }
  int blocks() const { return blocks_; }
  const PartitionScheme& partition() const { return partition_; }

  int count(std::size_t c, std::size_t s, int block) const {
    return counts_[(c * n_samp_ + s) * static_cast<std::size_t>(blocks_) + static_cast<std::size_t>(block - 1)];
  }

  bool block_covers(std::size_t c, std::size_t s, int block, double delta) const {
    return count(c, s, block) >= delta * partition_.block_size(block);
  }

  bool globally_covers(std::size_t c, std::size_t s, double delta) const {
    int total = 0;
    for (int l = 1; l <= blocks_; ++l) total += count(c, s, l);
    return total >= delta * partition_.length();
  }

  bool uniformly_covers(std::size_t c, std::size_t s, double delta) const {
    for (int l = 1; l <= blocks_; ++l)
      if (!block_covers(c, s, l, delta)) return false;
    return true;
  }

 private:
  std::size_t n_cand_, n_samp_;
  int blocks_;
  PartitionScheme partition_;
  std::vector<int> counts_;
};

struct LocalizationReport {
  CoverMode mode = CoverMode::global;
  double delta = 0;
  double epsilon = 0;
  std::vector<std::size_t> chosen;     // indices into the candidate list
  std::vector<Path> paths;             // the chosen paths
  std::vector<double> coverage_trace;  // coverage after each selection
  double coverage = 0;
  bool localized = false;              // coverage >= 1 - epsilon
  std::vector<std::vector<double>> block_profiles;  // [j][l]: fraction of samples with R^{(l)} >= delta

  std::size_t size() const { return chosen.size(); }
};

struct GreedyOptions {
  std::size_t max_paths = std::numeric_limits<std::size_t>::max();
};

namespace detail {

/// Fraction of samples covered in `mode` by the candidate subset `chosen`.
inline double mode_coverage(const OverlapTable& t, const std::vector<std::size_t>& chosen, CoverMode mode,
                            double delta) {
  if (t.samples() == 0) return 0.0;
  std::size_t hit = 0;
  for (std::size_t s = 0; s < t.samples(); ++s) {
    bool ok = false;
    if (mode == CoverMode::per_block_any) {
      ok = true;
      for (int l = 1; l <= t.blocks() && ok; ++l) {
        bool any = false;
        for (auto c : chosen)
          if (t.block_covers(c, s, l, delta)) {
            any = true;
            break;
          }
        ok = any;
      }
    } else {
      for (auto c : chosen)
        if (mode == CoverMode::global ? t.globally_covers(c, s, delta) : t.uniformly_covers(c, s, delta)) {
          ok = true;
          break;
        }
    }
    hit += ok;
  }
  return static_cast<double>(hit) / static_cast<double>(t.samples());
}

inline std::vector<std::vector<double>> block_profiles(const OverlapTable& t, const std::vector<std::size_t>& chosen,
                                                       double delta) {
  std::vector<std::vector<double>> out;
  for (auto c : chosen) {
    std::vector<double> row;
    for (int l = 1; l <= t.blocks(); ++l) {
      std::size_t hit = 0;
      for (std::size_t s = 0; s < t.samples(); ++s) hit += t.block_covers(c, s, l, delta);
      row.push_back(t.samples() ? static_cast<double>(hit) / static_cast<double>(t.samples()) : 0.0);
    }
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace detail

/// Greedy set cover with candidate centers drawn from the samples themselves.
/// Each round adds the candidate that covers the most still-uncovered units
/// (samples in global / per-block-uniform mode, (sample, block) pairs in
/// per-block-any mode; ties go to the lowest index). Stops at coverage >= 1 - eps,
/// when no candidate makes progress, or at the path budget.
inline LocalizationReport greedy_favorite_paths(const std::vector<Path>& samples, double delta, double eps,
                                                CoverMode mode, const PartitionScheme& p,
                                                const GreedyOptions& opt = {}) {
  if (!(eps > 0 && eps < 1)) throw std::invalid_argument("greedy_favorite_paths: eps must lie in (0, 1)");
  if (!(delta > 0)) throw std::invalid_argument("greedy_favorite_paths: delta must be positive");
  const OverlapTable table(samples, samples, p);
  const std::size_t ns = samples.size();
  const int blocks = mode == CoverMode::per_block_any ? p.blocks() : 1;

  auto covers_unit = [&](std::size_t c, std::size_t s, int l) {
    switch (mode) {
      case CoverMode::global: return table.globally_covers(c, s, delta);
      case CoverMode::per_block_uniform: return table.uniformly_covers(c, s, delta);
      default: return table.block_covers(c, s, l, delta);
    }
  };

  std::vector<char> covered(ns * static_cast<std::size_t>(blocks), 0);
  LocalizationReport rep;
  rep.mode = mode;
  rep.delta = delta;
  rep.epsilon = eps;
  while (rep.chosen.size() < opt.max_paths) {
    if (ns > 0 && rep.coverage >= 1.0 - eps) break;
    std::size_t best = ns;
    std::size_t best_gain = 0;
    for (std::size_t c = 0; c < ns; ++c) {
      std::size_t gain = 0;
      for (std::size_t s = 0; s < ns; ++s)
        for (int l = 1; l <= blocks; ++l)
          if (!covered[s * static_cast<std::size_t>(blocks) + static_cast<std::size_t>(l - 1)] && covers_unit(c, s, l))
            ++gain;
      if (gain > best_gain) {
        best_gain = gain;
        best = c;
      }
    }
    if (best == ns) break;
    for (std::size_t s = 0; s < ns; ++s)
      for (int l = 1; l <= blocks; ++l)
        if (covers_unit(best, s, l)) covered[s * static_cast<std::size_t>(blocks) + static_cast<std::size_t>(l - 1)] = 1;
    rep.chosen.push_back(best);
    rep.coverage = detail::mode_coverage(table, rep.chosen, mode, delta);
    rep.coverage_trace.push_back(rep.coverage);
  }
  for (auto c : rep.chosen) rep.paths.push_back(samples[c]);
  rep.localized = ns > 0 && rep.coverage >= 1.0 - eps;
  rep.block_profiles = detail::block_profiles(table, rep.chosen, delta);
  return rep;
}

struct CoverageSummary {
  double global = 0;
  double per_block_any = 0;
  double per_block_uniform = 0;
  double windowed = 0;                 // samples with best min-window overlap >= delta
  int window_width = 0;                // ceil(eps N)
  std::vector<double> window_minima;   // per sample: max_j min_{windows} R^{[a,b]}(path_j, sample)

  double of(CoverMode m) const {
    switch (m) {
      case CoverMode::global: return global;
      case CoverMode::per_block_any: return per_block_any;
      default: return per_block_uniform;
    }
  }
};

/// Coverage of `samples` by fixed `paths` under every event, plus the sliding-window
/// statistic over windows of length >= eps N.
inline CoverageSummary coverage_report(const std::vector<Path>& paths, const std::vector<Path>& samples, double delta,
                                       const PartitionScheme& p, double eps) {
  if (!(eps > 0) || eps > 1) throw std::invalid_argument("coverage_report: eps must lie in (0, 1]");
  const OverlapTable table(paths, samples, p);
  std::vector<std::size_t> all(paths.size());
  for (std::size_t c = 0; c < all.size(); ++c) all[c] = c;
  CoverageSummary out;
  out.global = detail::mode_coverage(table, all, CoverMode::global, delta);
  out.per_block_any = detail::mode_coverage(table, all, CoverMode::per_block_any, delta);
  out.per_block_uniform = detail::mode_coverage(table, all, CoverMode::per_block_uniform, delta);
  out.window_width = std::max(1, static_cast<int>(std::ceil(eps * p.length() - 1e-9)));
  out.window_minima = map_replicas(samples.size(), [&](std::size_t s) {
    double best = 0;
    for (const auto& q : paths) best = std::max(best, min_window_overlap(q, samples[s], out.window_width));
    return best;
  });
  std::size_t hit = 0;
  for (double w : out.window_minima) hit += w >= delta;
  out.windowed = samples.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(samples.size());
  return out;
}

}  // namespace dpre
