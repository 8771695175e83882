#include <gtest/gtest.h>

#include <cmath>

#include "dpre/free_energy.hpp"
#include "dpre/parallel.hpp"
#include "dpre/replica_overlap.hpp"

using namespace dpre;

namespace {

// Regression values from the reference runs (seeded, thread-count independent).
constexpr double kLowTempGap = 0.85633775036852677;
constexpr double kLowTempStderr = 0.0020605300996974622;
constexpr double kMultiGap64 = 0.040909878539571287;
constexpr double kMultiGap512 = 0.015257901029317122;

}  // namespace

TEST(FreeEnergy, ZeroBetaIsExactlyZero) {
  const auto e = estimate_free_energy(0.0, LatticeParams{2, 20}, 10, 1);
  EXPECT_EQ(e.mean, 0.0);
  EXPECT_EQ(e.std_error, 0.0);
  const auto g = low_temp_gap(0.0, LatticeParams{1, 50}, 5, 1);
  EXPECT_EQ(g.gap, 0.0);
}

TEST(FreeEnergy, AnnealedBoundHoldsOnGrid) {
  for (int dim : {1, 2})
    for (double beta : {0.25, 0.5, 1.0, 2.0, 3.0}) {
      const auto e = estimate_free_energy(beta, LatticeParams{dim, 64}, 100, 9);
      EXPECT_TRUE(satisfies_annealed_bound(e)) << "d=" << dim << " beta=" << beta << " mean=" << e.mean;
    }
  EXPECT_EQ(annealed_free_energy(2.0), 2.0);
  EXPECT_THROW(estimate_free_energy(1.0, LatticeParams{1, 8}, 1, 1), std::invalid_argument);
}

TEST(FreeEnergy, LowTemperatureGapIsLarge) {
  const auto g = low_temp_gap(2.0, LatticeParams{1, 1024}, 100, 2024);
  EXPECT_GT(g.gap, 10 * g.std_error);
  EXPECT_NEAR(g.gap, kLowTempGap, 1e-9);
  EXPECT_NEAR(g.std_error, kLowTempStderr, 1e-9);
}

TEST(FreeEnergy, GapIsNeverSignificantlyNegative) {
  for (int n : {16, 64, 256}) {
    const auto g = low_temp_gap(1.0, LatticeParams{1, n}, 100, 4);
    EXPECT_GE(g.gap, -3 * g.std_error) << "N=" << n;
  }
}

TEST(FreeEnergy, ThreadCountDoesNotChangeEstimates) {
  set_thread_count(1);
  const auto a = estimate_free_energy(1.5, LatticeParams{1, 128}, 40, 5);
  set_thread_count(4);
  const auto b = estimate_free_energy(1.5, LatticeParams{1, 128}, 40, 5);
  set_thread_count(0);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.std_error, b.std_error);
}

TEST(Derivative, VanishesAtZero) {
  const auto d = estimate_derivative(0.0, 1e-3, LatticeParams{1, 128}, 200, 6);
  EXPECT_NEAR(d.value, 0.0, 3 * d.std_error + 2e-3);
}

TEST(Derivative, TracksBetaAtSmallBeta) {
  // The finite-N slope is beta (1 - E<R>); at small beta the overlap stays near its
  // free-walk value r0, so the slope sits between beta (1 - 2 r0) and beta.
  const LatticeParams params{1, 256};
  const double r0 = exact_two_replica_overlap(GaussianEnvironment(1, params), BetaProfile::constant(256, 0.0));
  for (double beta : {0.05, 0.1, 0.2}) {
    const auto d = estimate_derivative(beta, 1e-3, params, 200, 6);
    EXPECT_LE(d.value, beta + 3 * d.std_error) << "beta=" << beta;
    EXPECT_GE(d.value, beta * (1 - 2 * r0) - 3 * d.std_error) << "beta=" << beta;
  }
  EXPECT_THROW(estimate_derivative(0.5, 1.0, LatticeParams{1, 8}, 4, 1), std::invalid_argument);
}

TEST(FreeEnergy, ConvexInBeta) {
  const LatticeParams params{1, 128};
  std::vector<FreeEnergyEstimate> es;
  const std::vector<double> grid{0.0, 0.5, 1.0, 1.5, 2.0};
  for (double b : grid) es.push_back(estimate_free_energy(b, params, 100, 13));
  for (std::size_t k = 1; k < es.size(); ++k)
    EXPECT_GE(es[k].mean, es[k - 1].mean - 3 * (es[k].std_error + es[k - 1].std_error));
  for (std::size_t k = 2; k < es.size(); ++k) {
    const double s1 = (es[k - 1].mean - es[k - 2].mean) / 0.5;
    const double s2 = (es[k].mean - es[k - 1].mean) / 0.5;
    // Common random numbers make every replica curve convex, so the pooled slopes are ordered exactly.
    EXPECT_GE(s2, s1 - 1e-12);
  }
}

TEST(Concentration, BoundValueAndEmpiricalTail) {
  EXPECT_NEAR(concentration_bound(1.0, 256, 0.2), std::exp(-256 * 0.04 / 2), 1e-15);
  EXPECT_NEAR(concentration_bound(1.0, 256, 0.2), 5.9e-3, 1e-4);
  const auto prof = concentration_profile(1.0, LatticeParams{1, 256}, 2000, {0.05, 0.1, 0.2, 0.4}, 8);
  EXPECT_TRUE(prof.within_bound());
  for (std::size_t k = 1; k < prof.tail.size(); ++k) EXPECT_LE(prof.tail[k].empirical, prof.tail[k - 1].empirical);
}

TEST(Concentration, ZeroBetaAndLargeU) {
  const auto prof = concentration_profile(0.0, LatticeParams{1, 32}, 100, {0.01, 0.1}, 8);
  for (const auto& t : prof.tail) EXPECT_EQ(t.empirical, 0.0);
  const auto big = concentration_profile(1.0, LatticeParams{1, 32}, 100, {50.0}, 8);
  EXPECT_EQ(big.tail[0].empirical, 0.0);
  EXPECT_LT(big.tail[0].bound, 1e-300);
  EXPECT_THROW(concentration_profile(1.0, LatticeParams{1, 32}, 99, {0.1}, 8), std::invalid_argument);
  EXPECT_THROW(concentration_profile(1.0, LatticeParams{1, 32}, 100, {0.2, 0.1}, 8), std::invalid_argument);
}

TEST(MultiTemp, DegenerateCasesAreExactlyZero) {
  EXPECT_EQ(multi_temp_gap(64, 1, {1.3}, 10, 2).gap, 0.0);
  EXPECT_EQ(multi_temp_gap(64, 1, {0.0, 0.0}, 10, 2).gap, 0.0);
  EXPECT_EQ(multi_temp_gap(64, 2, {0.0, 0.0, 0.0}, 4, 2).gap, 0.0);
}

TEST(MultiTemp, RejectsShortLength) {
  EXPECT_THROW(multi_temp_gap(3, 1, {1.0, 1.0}, 10, 2), std::invalid_argument);
  EXPECT_NO_THROW(multi_temp_gap(4, 1, {1.0, 1.0}, 10, 2));
}

TEST(MultiTemp, GapShrinksAlongLadder) {
  const auto rep = multi_temp_consistency({64, 128, 256, 512}, 1, {0.5, 1.5}, 200, 7);
  ASSERT_EQ(rep.rows.size(), 4u);
  EXPECT_TRUE(rep.decreasing());
  EXPECT_LT(rep.rows[3].gap, rep.rows[0].gap / 2);
  EXPECT_NEAR(rep.rows[0].gap, kMultiGap64, 1e-9);
  EXPECT_NEAR(rep.rows[3].gap, kMultiGap512, 1e-9);
}
