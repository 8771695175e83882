#pragma once

// Seeded Gaussian disorder g_N(i,x), generated on demand from a counter-based hash.

#include <cmath>
#include <concepts>
#include <cstdint>
#include <numbers>

#include "dpre/lattice.hpp"

namespace dpre {

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Published seed mixing: combines a running key with one more word.
constexpr std::uint64_t mix_seed(std::uint64_t key, std::uint64_t word) {
  return splitmix64(key ^ splitmix64(word ^ 0x6a09e667f3bcc909ULL));
}

/// Seed of replica `index` under `master`. Every parallel consumer derives its
/// stream through this function, so results do not depend on scheduling.
constexpr std::uint64_t replica_seed(std::uint64_t master, std::uint64_t index) {
  return mix_seed(master, index);
}

/// Uniform in (0,1) from the top 53 bits.
constexpr double to_unit_open(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Anything usable as a disorder field: g(i, x) for 1 <= i <= N, x in D_i.
template <class E>
concept DisorderField = requires(const E& env, int step, const Point& x) {
  { env.params() } -> std::convertible_to<const LatticeParams&>;
  { env(step, x) } -> std::convertible_to<double>;
};

/// The i.i.d. standard normal field g_N(i,x), a pure function of (seed, N, i, x).
class GaussianEnvironment {
 public:
  GaussianEnvironment(std::uint64_t seed, LatticeParams params) : seed_(seed), params_(params) {
    params_.validate();
    base_key_ = mix_seed(mix_seed(seed_, 0x44505245ULL), static_cast<std::uint64_t>(params_.length));
  }

  std::uint64_t seed() const { return seed_; }
  const LatticeParams& params() const { return params_; }

  double operator()(int step, const Point& x) const {
    std::uint64_t key = mix_seed(base_key_, static_cast<std::uint64_t>(step));
    for (int k = 0; k < params_.dim; ++k)
      key = mix_seed(key, static_cast<std::uint64_t>(static_cast<std::uint32_t>(x[static_cast<std::size_t>(k)])));
    // Box-Muller, one output per cell.
    const double u1 = to_unit_open(splitmix64(key));
    const double u2 = to_unit_open(splitmix64(key ^ 0xbb67ae8584caa73bULL));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t seed_;
  LatticeParams params_;
  std::uint64_t base_key_ = 0;
};

/// g == 0 everywhere; every partition function equals one.
class ZeroEnvironment {
 public:
  explicit ZeroEnvironment(LatticeParams params) : params_(params) { params_.validate(); }
  const LatticeParams& params() const { return params_; }
  double operator()(int, const Point&) const { return 0.0; }

 private:
  LatticeParams params_;
};

/// Wraps a field and negates its value at one cell. Used as a fault-injection
/// hook by the determinism checks.
template <DisorderField Env>
class FlippedEnvironment {
 public:
  FlippedEnvironment(const Env& base, int step, Point cell) : base_(&base), step_(step), cell_(cell) {}
  const LatticeParams& params() const { return base_->params(); }
  double operator()(int step, const Point& x) const {
    const double g = (*base_)(step, x);
    return (step == step_ && x == cell_) ? -g : g;
  }

 private:
  const Env* base_;
  int step_;
  Point cell_;
};

}  // namespace dpre
