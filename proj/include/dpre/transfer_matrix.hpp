#pragma once

// Exact partition functions and exact Gibbs sampling through a log-space
// forward recursion over the reachable cone:
//
//   W(0, 0) = 1,   W(i, x) = exp(beta_i g(i, x)) * (1/2d) * sum_{y ~ x} W(i-1, y).
//
// Z = sum_x W(N, x). The backward recursion
//
//   B(N, x) = 1,   B(i, x) = (1/2d) * sum_{y ~ x} exp(beta_{i+1} g(i+1, y)) B(i+1, y)
//
// gives the conditional partition function from (i, x) onward, so that
// mu(sigma_i = x) = W(i, x) B(i, x) / Z.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dpre/environment.hpp"
#include "dpre/lattice.hpp"
#include "dpre/profile.hpp"

namespace dpre {

/// The cones D_0, ..., D_N. Shareable between tables of the same (d, N).
class ConeStack {
 public:
  ConeStack(int dim, int length) {
    cones_.reserve(static_cast<std::size_t>(length) + 1);
    for (int i = 0; i <= length; ++i) cones_.emplace_back(dim, i);
  }
  const Cone& operator[](int step) const { return cones_[static_cast<std::size_t>(step)]; }
  int length() const { return static_cast<int>(cones_.size()) - 1; }
  int dim() const { return cones_.front().dim(); }

 private:
  std::vector<Cone> cones_;
};

inline std::shared_ptr<const ConeStack> make_cones(const LatticeParams& params) {
  params.validate();
  return std::make_shared<const ConeStack>(params.dim, params.length);
}

namespace detail {

template <class Real>
Real neg_inf() {
  return -std::numeric_limits<Real>::infinity();
}

/// log sum exp over a short list of values.
template <class Real, std::size_t Cap>
Real log_sum_exp_small(const Real (&vals)[Cap], int count) {
  using std::exp;
  using std::log;
  if (count == 0) return neg_inf<Real>();
  Real m = vals[0];
  for (int k = 1; k < count; ++k)
    if (vals[k] > m) m = vals[k];
  Real s = 0;
  for (int k = 0; k < count; ++k) s += exp(vals[k] - m);
  return m + log(s);
}

/// One forward step: fills `next` (over D_step) from `prev` (over D_{step-1}).
template <class Real, DisorderField Env>
void forward_step(const Env& env, double beta, const Cone& prev_cone, const std::vector<Real>& prev,
                  const Cone& cone, std::vector<Real>& next) {
  using std::log;
  const int dim = cone.dim();
  const Real log_2d = log(Real(2 * dim));
  next.assign(cone.size(), Real(0));
  const auto n = static_cast<long long>(cone.size());
#pragma omp parallel for schedule(static) if (n > 16384)
  for (long long k = 0; k < n; ++k) {
    const Point x = cone.point(static_cast<std::size_t>(k));
    Real vals[2 * kMaxDim];
    int count = 0;
    for (int a = 0; a < dim; ++a)
      for (int sign : {-1, 1}) {
        const auto j = prev_cone.index(axis_step(x, a, sign));
        if (j != Cone::npos) vals[count++] = prev[j];
      }
    Real v = log_sum_exp_small(vals, count) - log_2d;
    if (beta != 0.0) v += Real(beta) * Real(env(cone.step(), x));
    next[static_cast<std::size_t>(k)] = v;
  }
}

template <class Real>
Real log_sum_exp(const std::vector<Real>& v) {
  using std::exp;
  using std::log;
  if (v.empty()) return neg_inf<Real>();
  Real m = *std::max_element(v.begin(), v.end());
  if (m == neg_inf<Real>()) return m;
  Real s = 0;
  for (const auto& x : v) s += exp(x - m);
  return m + log(s);
}

inline void check_profile(const LatticeParams& params, const BetaProfile& profile) {
  if (profile.length() != params.length)
    throw std::invalid_argument("transfer matrix: profile length differs from N");
}

}  // namespace detail

/// log W(i, x) for every i in [0, N] and x in D_i, for one environment and profile.
template <class Real = double>
class LayerTable {
 public:
  LayerTable(LatticeParams params, BetaProfile profile, std::shared_ptr<const ConeStack> cones,
             std::vector<std::vector<Real>> layers)
      : params_(params), profile_(std::move(profile)), cones_(std::move(cones)), layers_(std::move(layers)) {
    log_z_ = detail::log_sum_exp(layers_.back());
  }

  const LatticeParams& params() const { return params_; }
  const BetaProfile& profile() const { return profile_; }
  const ConeStack& cones() const { return *cones_; }
  std::shared_ptr<const ConeStack> shared_cones() const { return cones_; }
  const Cone& cone(int step) const { return (*cones_)[step]; }

  /// log W(i, .) aligned with cone(i).
  const std::vector<Real>& layer(int step) const { return layers_[static_cast<std::size_t>(step)]; }

  /// log W(i, x); -inf outside D_i.
  Real log_weight(int step, const Point& x) const {
    const auto k = cone(step).index(x);
    return k == Cone::npos ? detail::neg_inf<Real>() : layer(step)[k];
  }

  Real log_partition() const { return log_z_; }

 private:
  LatticeParams params_;
  BetaProfile profile_;
  std::shared_ptr<const ConeStack> cones_;
  std::vector<std::vector<Real>> layers_;
  Real log_z_;
};

template <class Real = double, DisorderField Env>
LayerTable<Real> forward_layers(const Env& env, const BetaProfile& profile,
                                std::shared_ptr<const ConeStack> cones = nullptr) {
  const auto& params = env.params();
  detail::check_profile(params, profile);
  if (!cones) cones = make_cones(params);
  std::vector<std::vector<Real>> layers(static_cast<std::size_t>(params.length) + 1);
  layers[0].assign(1, Real(0));
  for (int i = 1; i <= params.length; ++i)
    detail::forward_step(env, profile.at(i), (*cones)[i - 1], layers[static_cast<std::size_t>(i - 1)],
                         (*cones)[i], layers[static_cast<std::size_t>(i)]);
  return LayerTable<Real>(params, profile, std::move(cones), std::move(layers));
}

/// log Z without keeping the layers; two rolling buffers.
template <class Real = double, DisorderField Env>
Real stream_log_partition(const Env& env, const BetaProfile& profile,
                          std::shared_ptr<const ConeStack> cones = nullptr) {
  const auto& params = env.params();
  detail::check_profile(params, profile);
  if (profile.is_zero()) return Real(0);
  if (!cones) cones = make_cones(params);
  std::vector<Real> prev(1, Real(0)), next;
  for (int i = 1; i <= params.length; ++i) {
    detail::forward_step(env, profile.at(i), (*cones)[i - 1], prev, (*cones)[i], next);
    std::swap(prev, next);
  }
  return detail::log_sum_exp(prev);
}

template <class Real>
Real log_partition(const LayerTable<Real>& table) {
  return table.log_partition();
}

/// log Z_{P_{N,L}}(beta_1, ..., beta_L): block l carries inverse temperature beta_l.
template <DisorderField Env>
double log_partition_multi(const Env& env, const PartitionScheme& p, const std::vector<double>& betas) {
  if (p.length() != env.params().length)
    throw std::invalid_argument("log_partition_multi: partition length differs from N");
  return stream_log_partition(env, BetaProfile::blocks(p, betas));
}

/// log of the partition function with the Hamiltonian switched off on block l.
template <DisorderField Env>
double log_partition_excluding_block(const Env& env, const PartitionScheme& p, int block, double beta) {
  if (p.length() != env.params().length)
    throw std::invalid_argument("log_partition_excluding_block: partition length differs from N");
  return stream_log_partition(env, BetaProfile::excluding_block(p, block, beta));
}

/// log B(i, x): conditional partition function of steps i+1..N given sigma_i = x.
template <class Real = double>
class BackwardTable {
 public:
  BackwardTable(std::shared_ptr<const ConeStack> cones, std::vector<std::vector<Real>> layers)
      : cones_(std::move(cones)), layers_(std::move(layers)) {}

  const Cone& cone(int step) const { return (*cones_)[step]; }
  const std::vector<Real>& layer(int step) const { return layers_[static_cast<std::size_t>(step)]; }
  Real log_weight(int step, const Point& x) const {
    const auto k = cone(step).index(x);
    return k == Cone::npos ? detail::neg_inf<Real>() : layer(step)[k];
  }

 private:
  std::shared_ptr<const ConeStack> cones_;
  std::vector<std::vector<Real>> layers_;
};

template <class Real = double, DisorderField Env>
BackwardTable<Real> backward_layers(const Env& env, const BetaProfile& profile,
                                    std::shared_ptr<const ConeStack> cones = nullptr) {
  using std::log;
  const auto& params = env.params();
  detail::check_profile(params, profile);
  if (!cones) cones = make_cones(params);
  const int n = params.length;
  const int dim = params.dim;
  const Real log_2d = log(Real(2 * dim));
  std::vector<std::vector<Real>> layers(static_cast<std::size_t>(n) + 1);
  layers[static_cast<std::size_t>(n)].assign((*cones)[n].size(), Real(0));
  for (int i = n - 1; i >= 0; --i) {
    const Cone& cone = (*cones)[i];
    const Cone& next_cone = (*cones)[i + 1];
    const auto& next = layers[static_cast<std::size_t>(i + 1)];
    // Site weights of layer i+1, evaluated once.
    std::vector<Real> tilted(next.size());
    const double beta = profile.at(i + 1);
    for (std::size_t k = 0; k < next.size(); ++k)
      tilted[k] = next[k] + (beta != 0.0 ? Real(beta) * Real(env(i + 1, next_cone.point(k))) : Real(0));
    auto& cur = layers[static_cast<std::size_t>(i)];
    cur.assign(cone.size(), Real(0));
    for (std::size_t k = 0; k < cone.size(); ++k) {
      const Point x = cone.point(k);
      Real vals[2 * kMaxDim];
      int count = 0;
      for (int a = 0; a < dim; ++a)
        for (int sign : {-1, 1}) vals[count++] = tilted[next_cone.index(axis_step(x, a, sign))];
      cur[k] = detail::log_sum_exp_small(vals, count) - log_2d;
    }
  }
  return BackwardTable<Real>(std::move(cones), std::move(layers));
}

/// mu(sigma_i = x) for every i and x in D_i, aligned with the cones.
template <class Real>
std::vector<std::vector<double>> site_marginals(const LayerTable<Real>& fwd, const BackwardTable<Real>& bwd) {
  using std::exp;
  const Real log_z = fwd.log_partition();
  std::vector<std::vector<double>> out(static_cast<std::size_t>(fwd.params().length) + 1);
  for (int i = 0; i <= fwd.params().length; ++i) {
    const auto& f = fwd.layer(i);
    const auto& b = bwd.layer(i);
    auto& m = out[static_cast<std::size_t>(i)];
    m.resize(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) m[k] = static_cast<double>(exp(f[k] + b[k] - log_z));
  }
  return out;
}

/// log sum_x W(n, x) B(n, x); equals log Z for every split time n.
template <class Real>
Real split_log_partition(const LayerTable<Real>& fwd, const BackwardTable<Real>& bwd, int split) {
  const auto& f = fwd.layer(split);
  const auto& b = bwd.layer(split);
  std::vector<Real> v(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) v[k] = f[k] + b[k];
  return detail::log_sum_exp(v);
}

/// x -> mu(sigma_N = x) over D_N.
template <class Real>
std::vector<std::pair<Point, double>> endpoint_distribution(const LayerTable<Real>& t) {
  using std::exp;
  const int n = t.params().length;
  const auto& last = t.layer(n);
  std::vector<std::pair<Point, double>> out;
  out.reserve(last.size());
  for (std::size_t k = 0; k < last.size(); ++k)
    out.emplace_back(t.cone(n).point(k), static_cast<double>(exp(last[k] - t.log_partition())));
  return out;
}

/// Exact draw from the Gibbs measure of the table: endpoint from W(N, .), then
/// sigma_{i-1} among the neighbors of sigma_i with probability proportional to W(i-1, .).
/// `rng` must produce 64-bit words.
template <class Real, class Rng>
Path sample_path(const LayerTable<Real>& t, Rng& rng) {
  using std::exp;
  const int n = t.params().length;
  const int dim = t.params().dim;
  std::vector<Point> pts(static_cast<std::size_t>(n) + 1);

  {
    const auto& last = t.layer(n);
    const Real log_z = t.log_partition();
    const double u = to_unit_open(static_cast<std::uint64_t>(rng()));
    double acc = 0;
    std::size_t pick = last.size() - 1;
    for (std::size_t k = 0; k < last.size(); ++k) {
      acc += static_cast<double>(exp(last[k] - log_z));
      if (u < acc) {
        pick = k;
        break;
      }
    }
    pts[static_cast<std::size_t>(n)] = t.cone(n).point(pick);
  }

  for (int i = n; i >= 1; --i) {
    const Point x = pts[static_cast<std::size_t>(i)];
    const Cone& prev_cone = t.cone(i - 1);
    const auto& prev = t.layer(i - 1);
    Point cand[2 * kMaxDim];
    Real logw[2 * kMaxDim];
    int count = 0;
    for (int a = 0; a < dim; ++a)
      for (int sign : {-1, 1}) {
        const Point y = axis_step(x, a, sign);
        const auto j = prev_cone.index(y);
        if (j == Cone::npos) continue;
        cand[count] = y;
        logw[count] = prev[j];
        ++count;
      }
    Real m = logw[0];
    for (int c = 1; c < count; ++c)
      if (logw[c] > m) m = logw[c];
    double w[2 * kMaxDim];
    double total = 0;
    for (int c = 0; c < count; ++c) total += (w[c] = static_cast<double>(exp(logw[c] - m)));
    const double u = to_unit_open(static_cast<std::uint64_t>(rng())) * total;
    int pick = count - 1;
    double acc = 0;
    for (int c = 0; c < count; ++c) {
      acc += w[c];
      if (u < acc) {
        pick = c;
        break;
      }
    }
    pts[static_cast<std::size_t>(i - 1)] = cand[pick];
  }
  return Path(dim, std::move(pts));
}

}  // namespace dpre
