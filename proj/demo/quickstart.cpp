// Exact partition function, Gibbs sampling and overlap for one environment.

#include <cstdio>
#include <random>
#include <vector>

#include "dpre/dpre.hpp"

int main() {
  using namespace dpre;

  const LatticeParams params{1, 256};
  const GaussianEnvironment env(42, params);

  for (double beta : {0.0, 0.5, 1.0, 2.0}) {
    const auto profile = BetaProfile::constant(params.length, beta);
    const auto table = forward_layers(env, profile);

    std::mt19937_64 rng(7);
    const Path a = sample_path(table, rng);
    const Path b = sample_path(table, rng);

    std::printf("beta=%.2f  logZ/N=%+.6f  annealed=%.6f  <R>=%.4f  R(two draws)=%.4f\n", beta,
                log_partition(table) / params.length, annealed_free_energy(beta),
                exact_two_replica_overlap(env, profile), overlap(a, b));
  }

  // Favorite paths at low temperature: a handful of paths carry most Gibbs samples.
  const auto table = forward_layers(env, BetaProfile::constant(params.length, 2.0));
  std::mt19937_64 rng(11);
  std::vector<Path> samples;
  for (int k = 0; k < 200; ++k) samples.push_back(sample_path(table, rng));
  const auto report =
      greedy_favorite_paths(samples, 0.3, 0.1, CoverMode::global, make_partition(params.length, blocks_for_window(0.1)));
  std::printf("beta=2.00  delta=0.3: %zu favorite path(s) cover %.1f%% of samples\n", report.size(),
              100.0 * report.coverage);
}
