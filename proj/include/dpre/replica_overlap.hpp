#pragma once

// Replica overlap under the Gibbs measure and the finite-N Gaussian
// integration-by-parts identity
//
//   (1/N) d/dbeta E log Z_N(beta) = beta (1 - E<R>_beta),
//
// where <R> is the mean overlap of two independent Gibbs paths.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dpre/enumeration.hpp"
#include "dpre/environment.hpp"
#include "dpre/overlap.hpp"
#include "dpre/parallel.hpp"
#include "dpre/stats.hpp"
#include "dpre/transfer_matrix.hpp"

namespace dpre {

struct OverlapEstimate {
  double mean = 0;
  double std_error = 0;
  std::size_t n_pairs = 0;
  std::size_t n_disorder = 0;
};

/// Average overlap over given replica pairs; stderr from the pair-to-pair spread.
inline OverlapEstimate overlap_from_pairs(std::span<const std::pair<Path, Path>> pairs) {
  std::vector<double> r;
  r.reserve(pairs.size());
  for (const auto& [a, b] : pairs) r.push_back(overlap(a, b));
  const auto s = summarize(r);
  return {s.mean, s.std_error, pairs.size(), 1};
}

/// Quenched <R> for one environment by Monte Carlo: 2 n_pairs exact Gibbs draws,
/// consecutive draws paired.
template <DisorderField Env, class Rng>
OverlapEstimate mean_replica_overlap(const Env& env, const BetaProfile& profile, std::size_t n_pairs, Rng& rng) {
  if (n_pairs < 2) throw std::invalid_argument("mean_replica_overlap: need at least two pairs");
  const auto table = forward_layers(env, profile);
  std::vector<std::pair<Path, Path>> pairs;
  pairs.reserve(n_pairs);
  for (std::size_t k = 0; k < n_pairs; ++k) {
    Path a = sample_path(table, rng);
    Path b = sample_path(table, rng);
    pairs.emplace_back(std::move(a), std::move(b));
  }
  return overlap_from_pairs(pairs);
}

/// Exact quenched <R> = (1/N) sum_{i=1..N} sum_x mu(sigma_i = x)^2 from one
/// forward and one backward pass.
template <DisorderField Env>
double exact_two_replica_overlap(const Env& env, const BetaProfile& profile,
                                 std::shared_ptr<const ConeStack> cones = nullptr) {
  if (!cones) cones = make_cones(env.params());
  const auto fwd = forward_layers(env, profile, cones);
  const auto bwd = backward_layers(env, profile, cones);
  const auto marg = site_marginals(fwd, bwd);
  double total = 0;
  for (std::size_t i = 1; i < marg.size(); ++i)
    for (double m : marg[i]) total += m * m;
  return total / static_cast<double>(env.params().length);
}

/// Disorder average of the exact <R> over n_disorder environments.
inline OverlapEstimate quenched_replica_overlap(const LatticeParams& params, double beta, std::size_t n_disorder,
                                                std::uint64_t master_seed) {
  const auto cones = make_cones(params);
  const auto profile = BetaProfile::constant(params.length, beta);
  const auto r = map_replicas(n_disorder, [&](std::size_t k) {
    GaussianEnvironment env(replica_seed(master_seed, k), params);
    return exact_two_replica_overlap(env, profile, cones);
  });
  const auto s = summarize(r);
  return {s.mean, s.std_error, 0, n_disorder};
}

enum class IbpMode { monte_carlo, enumeration };

inline std::string to_string(IbpMode m) { return m == IbpMode::monte_carlo ? "monte_carlo" : "enumeration"; }

struct IbpReport {
  IbpMode mode = IbpMode::monte_carlo;
  double beta = 0;
  double h = 0;
  int length = 0;
  std::size_t n_disorder = 0;
  double derivative = 0;    // left side: (1/N) d/dbeta E log Z
  double mean_overlap = 0;  // E<R>
  double identity = 0;      // right side: beta (1 - E<R>)
  double residual = 0;      // |left - right|
  double std_error = 0;     // Monte Carlo error of the residual
};

/// Default finite-difference step: 1e-3 max(beta, 1) for Monte Carlo, 1e-4 for enumeration.
inline double default_ibp_step(IbpMode mode, double beta) {
  return mode == IbpMode::monte_carlo ? 1e-3 * std::max(beta, 1.0) : 1e-4;
}

namespace detail {

inline void check_ibp_args(double beta, double h) {
  if (!(h > 0)) throw std::invalid_argument("ibp_residual: h must be positive");
  if (beta - h < 0) throw std::invalid_argument("ibp_residual: need beta - h >= 0");
}

inline double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

inline double logistic(double z) { return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

inline double gaussian_density(double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi); }

template <class F>
double gaussian_expectation(F&& f) {
  using boost::math::quadrature::gauss_kronrod;
  auto integrand = [&](double t) { return f(t) * gaussian_density(t); };
  return gauss_kronrod<double, 31>::integrate(integrand, -12.0, 12.0, 12, 1e-13);
}

}  // namespace detail

/// Monte Carlo form: per environment, the common-random-number central difference
/// (log Z(beta+h) - log Z(beta-h)) / (2hN) against beta (1 - <R>) with <R> exact.
/// The residual is the absolute mean of the per-environment differences.
inline IbpReport ibp_residual_monte_carlo(std::uint64_t master_seed, double beta, double h, const LatticeParams& params,
                                          std::size_t n_disorder) {
  detail::check_ibp_args(beta, h);
  if (n_disorder < 2) throw std::invalid_argument("ibp_residual: need at least two environments");
  const auto cones = make_cones(params);
  const int n = params.length;
  struct Row {
    double lhs, overlap;
  };
  const auto rows = map_replicas(n_disorder, [&](std::size_t k) {
    GaussianEnvironment env(replica_seed(master_seed, k), params);
    const double up = stream_log_partition(env, BetaProfile::constant(n, beta + h), cones);
    const double down = stream_log_partition(env, BetaProfile::constant(n, beta - h), cones);
    const double r = exact_two_replica_overlap(env, BetaProfile::constant(n, beta), cones);
    return Row{(up - down) / (2.0 * h * n), r};
  });
  std::vector<double> lhs, ovl, diff;
  for (const auto& row : rows) {
    lhs.push_back(row.lhs);
    ovl.push_back(row.overlap);
    diff.push_back(row.lhs - beta * (1.0 - row.overlap));
  }
  IbpReport rep;
  rep.mode = IbpMode::monte_carlo;
  rep.beta = beta;
  rep.h = h;
  rep.length = n;
  rep.n_disorder = n_disorder;
  rep.derivative = summarize(lhs).mean;
  rep.mean_overlap = summarize(ovl).mean;
  rep.identity = beta * (1.0 - rep.mean_overlap);
  const auto d = summarize(diff);
  rep.residual = std::abs(d.mean);
  rep.std_error = d.std_error;
  return rep;
}

/// Enumeration form. Path sums come from full enumeration, and the Gaussian
/// expectation over each site variable g_c is done by quadrature with the rest
/// of the environment held fixed. As a function of g_c = t the site marginal is
/// logistic(kappa + beta t), so per cell
///
///   left  = E_t[(softplus(kappa + (beta+h) t) - softplus(kappa + (beta-h) t)) / 2h]
///   right = beta E_t[mu_c(t) (1 - mu_c(t))]
///
/// (left is the central difference of log Z in the cell's own inverse
/// temperature). Summed over cells and divided by N, the two sides agree up to
/// O(h^2) and quadrature error for every environment, with no sampling noise.
inline IbpReport ibp_residual_enumeration(std::uint64_t master_seed, double beta, double h,
                                          const LatticeParams& params, std::size_t n_disorder) {
  detail::check_ibp_args(beta, h);
  if (n_disorder < 1) throw std::invalid_argument("ibp_residual: need at least one environment");
  const int n = params.length;
  struct Row {
    double lhs, rhs, overlap;
  };
  const auto rows = map_replicas(n_disorder, [&](std::size_t k) {
    GaussianEnvironment env(replica_seed(master_seed, k), params);
    const auto profile = BetaProfile::constant(n, beta);
    const auto marg = brute_force_marginals(env, profile);
    Row row{0, 0, 0};
    for (int i = 1; i <= n; ++i) {
      for (const auto& [x, mu] : marg[static_cast<std::size_t>(i)]) {
        row.overlap += mu * mu;
        const double g = env(i, x);
        const double kappa = std::log(mu) - std::log1p(-mu) - beta * g;
        row.lhs += detail::gaussian_expectation([&](double t) {
          return (detail::softplus(kappa + (beta + h) * t) - detail::softplus(kappa + (beta - h) * t)) / (2.0 * h);
        });
        row.rhs += beta * detail::gaussian_expectation([&](double t) {
          const double m = detail::logistic(kappa + beta * t);
          return m * (1.0 - m);
        });
      }
    }
    row.lhs /= n;
    row.rhs /= n;
    row.overlap /= n;
    return row;
  });
  std::vector<double> lhs, rhs, ovl, diff;
  for (const auto& row : rows) {
    lhs.push_back(row.lhs);
    rhs.push_back(row.rhs);
    ovl.push_back(row.overlap);
    diff.push_back(row.lhs - row.rhs);
  }
  IbpReport rep;
  rep.mode = IbpMode::enumeration;
  rep.beta = beta;
  rep.h = h;
  rep.length = n;
  rep.n_disorder = n_disorder;
  rep.derivative = summarize(lhs).mean;
  rep.identity = summarize(rhs).mean;
  rep.mean_overlap = summarize(ovl).mean;
  const auto d = summarize(diff);
  rep.residual = std::abs(d.mean);
  rep.std_error = d.std_error;
  return rep;
}

inline IbpReport ibp_residual(IbpMode mode, std::uint64_t master_seed, double beta, double h,
                              const LatticeParams& params, std::size_t n_disorder) {
  return mode == IbpMode::monte_carlo ? ibp_residual_monte_carlo(master_seed, beta, h, params, n_disorder)
                                      : ibp_residual_enumeration(master_seed, beta, h, params, n_disorder);
}

}  // namespace dpre
