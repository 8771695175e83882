#pragma once

// Brute-force reference computations by enumerating all (2d)^N paths. Every
// quantity here is computed directly from path weights, independently of the
// transfer-matrix recursion, and serves as the oracle for it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dpre/environment.hpp"
#include "dpre/lattice.hpp"
#include "dpre/overlap.hpp"
#include "dpre/profile.hpp"

namespace dpre {

inline constexpr double kEnumerationCap = 1e7;

inline void check_enumerable(const LatticeParams& params) {
  if (std::pow(2.0 * params.dim, params.length) > kEnumerationCap)
    throw std::invalid_argument("enumeration: (2d)^N exceeds 10^7 paths");
}

/// Calls visit(points, energy) for every path, where energy = sum_i beta_i g(i, sigma_i).
template <DisorderField Env, class Visit>
void enumerate_paths(const Env& env, const BetaProfile& profile, Visit&& visit) {
  const auto& params = env.params();
  check_enumerable(params);
  if (profile.length() != params.length) throw std::invalid_argument("enumeration: profile length differs from N");
  const int n = params.length;
  std::vector<Point> pts(static_cast<std::size_t>(n) + 1, origin());
  std::vector<double> energy(static_cast<std::size_t>(n) + 1, 0.0);
  // Iterative depth-first walk over step choices 0..2d-1.
  std::vector<int> choice(static_cast<std::size_t>(n) + 1, -1);
  int depth = 1;
  const int fanout = 2 * params.dim;
  while (depth >= 1) {
    auto& c = choice[static_cast<std::size_t>(depth)];
    if (++c == fanout) {
      c = -1;
      --depth;
      continue;
    }
    const auto d = static_cast<std::size_t>(depth);
    pts[d] = axis_step(pts[d - 1], c / 2, (c % 2) ? 1 : -1);
    energy[d] = energy[d - 1] + profile.at(depth) * env(depth, pts[d]);
    if (depth == n) {
      visit(static_cast<const std::vector<Point>&>(pts), energy[d]);
    } else {
      ++depth;
    }
  }
}

/// log E[exp(sum_i beta_i g(i, sigma_i))] by direct summation over paths.
template <DisorderField Env>
double brute_force_log_partition(const Env& env, const BetaProfile& profile) {
  std::vector<double> energies;
  enumerate_paths(env, profile, [&](const std::vector<Point>&, double e) { energies.push_back(e); });
  double m = energies.front();
  for (double e : energies) m = std::max(m, e);
  double s = 0;
  for (double e : energies) s += std::exp(e - m);
  return m + std::log(s / static_cast<double>(energies.size()));
}

/// Every path with its Gibbs probability.
template <DisorderField Env>
std::vector<std::pair<Path, double>> gibbs_law(const Env& env, const BetaProfile& profile) {
  std::vector<std::pair<Path, double>> law;
  const int dim = env.params().dim;
  enumerate_paths(env, profile, [&](const std::vector<Point>& pts, double e) { law.emplace_back(Path(dim, pts), e); });
  double m = law.front().second;
  for (const auto& [p, e] : law) m = std::max(m, e);
  double s = 0;
  for (auto& [p, e] : law) s += (e = std::exp(e - m));
  for (auto& [p, e] : law) e /= s;
  return law;
}

/// <R> = sum_{a,b} mu(a) mu(b) R(a, b) by the double sum over path pairs.
template <DisorderField Env>
double brute_force_two_replica_overlap(const Env& env, const BetaProfile& profile) {
  const auto law = gibbs_law(env, profile);
  double total = 0;
  for (const auto& [a, pa] : law)
    for (const auto& [b, pb] : law) total += pa * pb * overlap(a, b);
  return total;
}

/// mu(sigma_i = x) for i = 0..N, keyed by point.
template <DisorderField Env>
std::vector<std::unordered_map<Point, double, PointHash>> brute_force_marginals(const Env& env,
                                                                                const BetaProfile& profile) {
  const auto law = gibbs_law(env, profile);
  std::vector<std::unordered_map<Point, double, PointHash>> out(static_cast<std::size_t>(env.params().length) + 1);
  for (const auto& [path, prob] : law)
    for (int i = 0; i <= path.length(); ++i) out[static_cast<std::size_t>(i)][path[static_cast<std::size_t>(i)]] += prob;
  return out;
}

}  // namespace dpre
