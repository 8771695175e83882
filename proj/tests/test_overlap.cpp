#include <gtest/gtest.h>

#include <random>

#include "dpre/enumeration.hpp"
#include "dpre/overlap.hpp"
#include "dpre/planting.hpp"
#include "dpre/replica_overlap.hpp"

using namespace dpre;

namespace {

Path path1(std::initializer_list<int> xs) {
  std::vector<Point> pts;
  for (int x : xs) {
    Point p{};
    p[0] = x;
    pts.push_back(p);
  }
  return Path(1, std::move(pts));
}

}  // namespace

TEST(Overlap, Examples) {
  const Path a = path1({0, 1, 0, 1, 0});
  EXPECT_EQ(overlap(a, a), 1.0);
  EXPECT_EQ(overlap(path1({0, 1, 2}), path1({0, -1, 0})), 0.0);
  EXPECT_DOUBLE_EQ(overlap(a, path1({0, -1, 0, 1, 2})), 2.0 / 4.0);
}

TEST(Overlap, RejectsLengthMismatchAndBadWindows) {
  const Path a = path1({0, 1, 0});
  const Path b = path1({0, 1});
  EXPECT_THROW(overlap(a, b), std::invalid_argument);
  EXPECT_THROW(restricted_overlap(a, a, 0, 1), std::invalid_argument);
  EXPECT_THROW(restricted_overlap(a, a, 2, 1), std::invalid_argument);
  EXPECT_THROW(restricted_overlap(a, a, 1, 3), std::invalid_argument);
  EXPECT_THROW(block_overlap(a, a, make_partition(2, 2), 3), std::invalid_argument);
}

TEST(Overlap, SymmetryRangeAndAggregation) {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 1000; ++t) {
    const int dim = 1 + static_cast<int>(rng() % 2);
    const int n = 1 + static_cast<int>(rng() % 60);
    const Path a = random_walk(dim, n, rng);
    const Path b = random_walk(dim, n, rng);
    const double r = overlap(a, b);
    EXPECT_EQ(r, overlap(b, a));
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, 1.0);
    EXPECT_EQ(restricted_overlap(a, b, 1, n), r);

    const int blocks = 1 + static_cast<int>(rng() % n);
    const auto p = make_partition(n, blocks);
    long weighted = 0;
    for (int l = 1; l <= blocks; ++l) {
      const double rb = block_overlap(a, b, p, l);
      EXPECT_EQ(rb, block_overlap(b, a, p, l));
      EXPECT_EQ(block_overlap(a, a, p, l), 1.0);
      weighted += coincidences(a, b, p.first(l), p.last(l));
      EXPECT_NEAR(rb * p.block_size(l), coincidences(a, b, p.first(l), p.last(l)), 1e-12);
    }
    EXPECT_EQ(static_cast<double>(weighted) / n, r);
  }
}

TEST(BlockOverlap, SingleBlockAndExplicitBounds) {
  std::mt19937_64 rng(3);
  const Path a = random_walk(1, 10, rng);
  const Path b = random_walk(1, 10, rng);
  EXPECT_EQ(block_overlap(a, b, make_partition(10, 1), 1), overlap(a, b));
  const auto p = make_partition(10, 3);
  EXPECT_EQ(block_overlap(a, b, p, 1), restricted_overlap(a, b, 1, 3));
  EXPECT_EQ(block_overlap(a, b, p, 2), restricted_overlap(a, b, 4, 6));
  EXPECT_EQ(block_overlap(a, b, p, 3), restricted_overlap(a, b, 7, 10));
}

TEST(ExactTwoReplicaOverlap, BinomialExample) {
  const GaussianEnvironment env(1, LatticeParams{1, 2});
  EXPECT_NEAR(exact_two_replica_overlap(env, BetaProfile::constant(2, 0.0)), 7.0 / 16.0, 1e-15);
}

TEST(ExactTwoReplicaOverlap, MatchesEnumeration) {
  std::mt19937_64 rng(8);
  for (int c = 0; c < 40; ++c) {
    const int dim = 1 + c % 2;
    const int n = 1 + static_cast<int>(rng() % 6);
    const GaussianEnvironment env(rng(), LatticeParams{dim, n});
    const auto prof = BetaProfile::constant(n, 0.25 * static_cast<double>(rng() % 12));
    EXPECT_NEAR(exact_two_replica_overlap(env, prof), brute_force_two_replica_overlap(env, prof), 1e-10);
  }
}

TEST(MeanReplicaOverlap, DuplicatedPairIsOne) {
  std::mt19937_64 rng(4);
  const Path a = random_walk(2, 30, rng);
  const std::vector<std::pair<Path, Path>> pairs{{a, a}};
  const auto e = overlap_from_pairs(pairs);
  EXPECT_EQ(e.mean, 1.0);
  EXPECT_EQ(e.n_pairs, 1u);
}

TEST(MeanReplicaOverlap, FreeWalkOverlapIsSmall) {
  const GaussianEnvironment env(1, LatticeParams{1, 400});
  std::mt19937_64 rng(10);
  const auto e = mean_replica_overlap(env, BetaProfile::constant(400, 0.0), 500, rng);
  EXPECT_LT(e.mean, 0.1);
}

TEST(MeanReplicaOverlap, AgreesWithExactValue) {
  for (double beta : {1.0, 2.0}) {
    const GaussianEnvironment env(5, LatticeParams{1, 64});
    const auto prof = BetaProfile::constant(64, beta);
    std::mt19937_64 rng(12);
    const auto e = mean_replica_overlap(env, prof, 4000, rng);
    EXPECT_NEAR(e.mean, exact_two_replica_overlap(env, prof), 3 * e.std_error + 1e-12) << "beta=" << beta;
    EXPECT_GE(e.mean, 0.0);
    EXPECT_LE(e.mean, 1.0);
  }
  EXPECT_THROW(
      {
        std::mt19937_64 rng(1);
        mean_replica_overlap(GaussianEnvironment(1, LatticeParams{1, 4}), BetaProfile::constant(4, 1.0), 1, rng);
      },
      std::invalid_argument);
}

TEST(QuenchedReplicaOverlap, IncreasesWithBeta) {
  const LatticeParams params{1, 64};
  const auto r0 = quenched_replica_overlap(params, 0.0, 20, 3);
  const auto r2 = quenched_replica_overlap(params, 2.0, 20, 3);
  EXPECT_LT(r0.std_error, 1e-15);
  EXPECT_GT(r2.mean, r0.mean + 10 * r2.std_error);
}

TEST(IbpResidual, EnumerationIsExactUpToDiscretization) {
  for (double beta : {0.5, 1.0, 2.0}) {
    const auto r = ibp_residual(IbpMode::enumeration, 17, beta, 1e-4, LatticeParams{1, 6}, 4);
    EXPECT_LT(r.residual, 1e-6) << "beta=" << beta;
  }
  const auto r2 = ibp_residual(IbpMode::enumeration, 18, 1.0, 1e-4, LatticeParams{2, 4}, 2);
  EXPECT_LT(r2.residual, 1e-6);
}

TEST(IbpResidual, MonteCarloWithinBudget) {
  const auto r = ibp_residual(IbpMode::monte_carlo, 21, 0.8, 1e-3, LatticeParams{1, 32}, 200);
  EXPECT_LT(r.residual, 5e-3 + 3 * r.std_error);
}

TEST(IbpResidual, BothSidesVanishNearZero) {
  const auto r = ibp_residual(IbpMode::monte_carlo, 2, 1e-3, 1e-3, LatticeParams{1, 32}, 50);
  EXPECT_NEAR(r.identity, 0.0, 1e-3);
  EXPECT_LT(r.residual, 5e-3 + 3 * r.std_error);
  const auto e = ibp_residual(IbpMode::enumeration, 2, 1e-3, 1e-4, LatticeParams{1, 6}, 2);
  EXPECT_NEAR(e.derivative, 0.0, 2e-3);
  EXPECT_NEAR(e.identity, 0.0, 1e-3);
}

TEST(IbpResidual, RejectsBadArguments) {
  EXPECT_THROW(ibp_residual(IbpMode::monte_carlo, 1, 0.5, 0.0, LatticeParams{1, 8}, 10), std::invalid_argument);
  EXPECT_THROW(ibp_residual(IbpMode::enumeration, 1, 0.5, 1.0, LatticeParams{1, 4}, 1), std::invalid_argument);
}
