#pragma once

// Quenched free energy (1/N) E log Z_N(beta) over independent environments,
// its concentration, the annealed gap, and the multi-temperature consistency check.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpre/environment.hpp"
#include "dpre/parallel.hpp"
#include "dpre/partition.hpp"
#include "dpre/stats.hpp"
#include "dpre/transfer_matrix.hpp"

namespace dpre {

struct FreeEnergyEstimate {
  double beta = 0;
  int length = 0;
  int dim = 1;
  double mean = 0;  // (1/N) average log Z
  double std_error = 0;
  std::size_t n_disorder = 0;
  std::uint64_t master_seed = 0;
};

/// beta^2 / 2 = (1/N) log E Z_N(beta), the annealed free energy.
inline double annealed_free_energy(double beta) { return 0.5 * beta * beta; }

/// Jensen: E log Z <= log E Z, tested with a 3 stderr allowance.
inline bool satisfies_annealed_bound(const FreeEnergyEstimate& e) {
  return e.mean <= annealed_free_energy(e.beta) + 3.0 * e.std_error;
}

/// (1/N) log Z_N(beta) for replicas 0..n-1 of `master_seed`.
inline std::vector<double> free_energy_samples(double beta, const LatticeParams& params, std::size_t n_disorder,
                                               std::uint64_t master_seed) {
  const auto cones = make_cones(params);
  const auto profile = BetaProfile::constant(params.length, beta);
  return map_replicas(n_disorder, [&](std::size_t k) {
    GaussianEnvironment env(replica_seed(master_seed, k), params);
    return stream_log_partition(env, profile, cones) / params.length;
  });
}

inline FreeEnergyEstimate estimate_free_energy(double beta, const LatticeParams& params, std::size_t n_disorder,
                                               std::uint64_t master_seed) {
  if (n_disorder < 2) throw std::invalid_argument("estimate_free_energy: need at least two environments");
  const auto xs = free_energy_samples(beta, params, n_disorder, master_seed);
  const auto s = summarize(xs);
  return {beta, params.length, params.dim, s.mean, s.std_error, n_disorder, master_seed};
}

struct DerivativeEstimate {
  double beta = 0;
  double h = 0;
  double value = 0;
  double std_error = 0;
};

/// Finite difference of the per-step free energy with common random numbers:
/// central when beta >= h, forward at beta = 0.
inline DerivativeEstimate estimate_derivative(double beta, double h, const LatticeParams& params,
                                              std::size_t n_disorder, std::uint64_t master_seed) {
  if (!(h > 0)) throw std::invalid_argument("estimate_derivative: h must be positive");
  if (beta != 0.0 && beta - h < 0) throw std::invalid_argument("estimate_derivative: need beta - h >= 0");
  if (n_disorder < 2) throw std::invalid_argument("estimate_derivative: need at least two environments");
  const auto cones = make_cones(params);
  const int n = params.length;
  const double hi = beta + h;
  const double lo = beta == 0.0 ? 0.0 : beta - h;
  const auto diffs = map_replicas(n_disorder, [&](std::size_t k) {
    GaussianEnvironment env(replica_seed(master_seed, k), params);
    const double up = stream_log_partition(env, BetaProfile::constant(n, hi), cones);
    const double down = stream_log_partition(env, BetaProfile::constant(n, lo), cones);
    return (up - down) / ((hi - lo) * n);
  });
  const auto s = summarize(diffs);
  return {beta, h, s.mean, s.std_error};
}

struct TailPoint {
  double u = 0;
  double empirical = 0;  // fraction of replicas with |log Z/N - mean| > u
  double bound = 0;      // exp(-N u^2 / (2 beta^2))
  double slack = 0;      // 3 binomial standard deviations at the bound
  bool within_bound() const { return empirical <= bound + slack; }
};

struct ConcentrationProfile {
  double beta = 0;
  int length = 0;
  std::size_t n_disorder = 0;
  double mean = 0;
  std::vector<TailPoint> tail;

  bool within_bound() const {
    for (const auto& t : tail)
      if (!t.within_bound()) return false;
    return true;
  }
};

/// Gaussian concentration bound exp(-N u^2 / 2 beta^2); zero at beta = 0.
inline double concentration_bound(double beta, int length, double u) {
  if (beta == 0.0) return 0.0;
  return std::exp(-length * u * u / (2.0 * beta * beta));
}

inline ConcentrationProfile concentration_profile(double beta, const LatticeParams& params, std::size_t n_disorder,
                                                  const std::vector<double>& u_grid, std::uint64_t master_seed) {
  if (n_disorder < 100) throw std::invalid_argument("concentration_profile: need at least 100 environments");
  for (std::size_t k = 0; k < u_grid.size(); ++k)
    if (!(u_grid[k] > 0) || (k > 0 && !(u_grid[k] > u_grid[k - 1])))
      throw std::invalid_argument("concentration_profile: u grid must be positive and increasing");
  const auto xs = free_energy_samples(beta, params, n_disorder, master_seed);
  ConcentrationProfile prof;
  prof.beta = beta;
  prof.length = params.length;
  prof.n_disorder = n_disorder;
  prof.mean = summarize(xs).mean;
  for (double u : u_grid) {
    std::size_t exceed = 0;
    for (double x : xs) exceed += std::abs(x - prof.mean) > u;
    TailPoint t;
    t.u = u;
    t.empirical = static_cast<double>(exceed) / static_cast<double>(n_disorder);
    t.bound = concentration_bound(beta, params.length, u);
    t.slack = 3.0 * std::sqrt(t.bound * (1.0 - t.bound) / static_cast<double>(n_disorder));
    prof.tail.push_back(t);
  }
  return prof;
}

struct LowTempGap {
  double beta = 0;
  double gap = 0;  // beta^2/2 - estimate
  double std_error = 0;
};

inline LowTempGap low_temp_gap(double beta, const LatticeParams& params, std::size_t n_disorder,
                               std::uint64_t master_seed) {
  const auto e = estimate_free_energy(beta, params, n_disorder, master_seed);
  return {beta, annealed_free_energy(beta) - e.mean, e.std_error};
}

struct MultiTempRow {
  int length = 0;
  double multi = 0;       // (1/N) avg log Z_{P_{N,L}}(betas)
  double blockwise = 0;   // sum_l (1/N) avg log Z_{n_l - n_{l-1}}(beta_l)
  double gap = 0;         // |multi - blockwise|
  double std_error = 0;
};

struct MultiTempReport {
  int blocks = 0;
  std::vector<double> betas;
  std::vector<MultiTempRow> rows;

  bool decreasing() const {
    for (std::size_t k = 1; k < rows.size(); ++k)
      if (!(rows[k].gap < rows[k - 1].gap)) return false;
    return true;
  }
};

/// Seed of the independent environment used for block `block` of replica `k`.
/// Block 1 reuses the replica seed: its environment has length n_1, so it shares
/// no cells with the full-length one unless L = 1.
inline std::uint64_t block_environment_seed(std::uint64_t master_seed, int block, std::size_t k) {
  return block == 1 ? replica_seed(master_seed, k)
                    : replica_seed(mix_seed(master_seed, static_cast<std::uint64_t>(block)), k);
}

inline MultiTempRow multi_temp_gap(int length, int dim, const std::vector<double>& betas, std::size_t n_disorder,
                                   std::uint64_t master_seed) {
  const int blocks = static_cast<int>(betas.size());
  if (blocks < 1) throw std::invalid_argument("multi_temp_consistency: need at least one block temperature");
  if (static_cast<long long>(length) < static_cast<long long>(blocks) * blocks)
    throw std::invalid_argument("multi_temp_consistency: N = " + std::to_string(length) + " violates N >= L^2 (L = " +
                                std::to_string(blocks) + "), the hypothesis of the multi-temperature theorem");
  if (n_disorder < 2) throw std::invalid_argument("multi_temp_consistency: need at least two environments");
  const auto p = make_partition(length, blocks);
  LatticeParams params{dim, length};
  const auto cones = make_cones(params);
  const auto profile = BetaProfile::blocks(p, betas);
  const auto multi = map_replicas(n_disorder, [&](std::size_t k) {
    GaussianEnvironment env(replica_seed(master_seed, k), params);
    return stream_log_partition(env, profile, cones);
  });
  const auto ms = summarize(multi);
  MultiTempRow row;
  row.length = length;
  row.multi = ms.mean / length;
  double var = ms.std_error * ms.std_error;
  double blockwise = 0;
  for (int l = 1; l <= blocks; ++l) {
    LatticeParams bp{dim, p.block_size(l)};
    const auto bcones = make_cones(bp);
    const double beta = betas[static_cast<std::size_t>(l - 1)];
    const auto zs = map_replicas(n_disorder, [&](std::size_t k) {
      GaussianEnvironment env(block_environment_seed(master_seed, l, k), bp);
      return stream_log_partition(env, BetaProfile::constant(bp.length, beta), bcones);
    });
    const auto s = summarize(zs);
    blockwise += s.mean;
    var += s.std_error * s.std_error;
  }
  row.blockwise = blockwise / length;
  row.gap = std::abs(row.multi - row.blockwise);
  row.std_error = std::sqrt(var) / length;
  return row;
}

inline MultiTempReport multi_temp_consistency(const std::vector<int>& ladder, int dim, const std::vector<double>& betas,
                                              std::size_t n_disorder, std::uint64_t master_seed) {
  MultiTempReport rep;
  rep.blocks = static_cast<int>(betas.size());
  rep.betas = betas;
  for (int n : ladder) rep.rows.push_back(multi_temp_gap(n, dim, betas, n_disorder, master_seed));
  return rep;
}

}  // namespace dpre
