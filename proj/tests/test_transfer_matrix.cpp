#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/multiprecision/float128.hpp>

#include <cmath>
#include <map>
#include <random>
#include <unordered_map>

#include "dpre/enumeration.hpp"
#include "dpre/environment.hpp"
#include "dpre/transfer_matrix.hpp"
#include "dpre/verify.hpp"

using namespace dpre;

namespace {

Point at1(int x) {
  Point p{};
  p[0] = x;
  return p;
}

}  // namespace

TEST(ForwardLayers, ZeroBetaGivesZero) {
  for (int dim : {1, 2, 3}) {
    const GaussianEnvironment env(4, LatticeParams{dim, 9});
    const auto t = forward_layers(env, BetaProfile::constant(9, 0.0));
    EXPECT_NEAR(log_partition(t), 0.0, 1e-13);
    EXPECT_EQ(stream_log_partition(env, BetaProfile::constant(9, 0.0)), 0.0);
  }
}

TEST(ForwardLayers, ZeroProfileGivesWalkProbabilities) {
  const GaussianEnvironment env(4, LatticeParams{1, 6});
  const auto t = forward_layers(env, BetaProfile::constant(6, 0.0));
  // log W(i, x) = log P(S_i = x) = log(C(i, (i+x)/2) / 2^i)
  for (int i = 0; i <= 6; ++i)
    for (int x = -i; x <= i; x += 2) {
      const double p = std::tgamma(i + 1.0) / (std::tgamma((i + x) / 2 + 1.0) * std::tgamma((i - x) / 2 + 1.0)) /
                       std::pow(2.0, i);
      EXPECT_NEAR(t.log_weight(i, at1(x)), std::log(p), 1e-12);
    }
}

TEST(ForwardLayers, OneStepClosedForm) {
  const GaussianEnvironment env(17, LatticeParams{1, 1});
  const double beta = 1.7;
  const double want = std::log((std::exp(beta * env(1, at1(1))) + std::exp(beta * env(1, at1(-1)))) / 2);
  EXPECT_NEAR(log_partition(forward_layers(env, BetaProfile::constant(1, beta))), want, 1e-14);
  EXPECT_NEAR(brute_force_log_partition(env, BetaProfile::constant(1, beta)), want, 1e-14);
}

TEST(ForwardLayers, MatchesEnumerationExamples) {
  {
    const GaussianEnvironment env(42, LatticeParams{1, 6});
    const auto prof = BetaProfile::constant(6, 1.3);
    EXPECT_NEAR(log_partition(forward_layers(env, prof)), brute_force_log_partition(env, prof), 1e-10);
  }
  {
    const GaussianEnvironment env(7, LatticeParams{2, 8});
    const auto prof = BetaProfile::constant(8, 0.7);
    EXPECT_NEAR(log_partition(forward_layers(env, prof)), brute_force_log_partition(env, prof), 1e-10);
  }
}

TEST(ForwardLayers, RandomOracleEquivalence) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> beta(0.0, 3.0);
  for (int c = 0; c < 100; ++c) {
    const int dim = 1 + static_cast<int>(rng() % 2);
    const int n = 1 + static_cast<int>(rng() % 8);
    const GaussianEnvironment env(rng(), LatticeParams{dim, n});
    std::vector<double> steps(static_cast<std::size_t>(n));
    for (auto& b : steps) b = beta(rng);
    const BetaProfile prof(steps);
    EXPECT_NEAR(log_partition(forward_layers(env, prof)), brute_force_log_partition(env, prof), 1e-10)
        << "case " << c << " d=" << dim << " N=" << n;
  }
}

TEST(ForwardLayers, ZeroEnvironmentGivesZeroForEveryProfile) {
  const ZeroEnvironment env(LatticeParams{2, 7});
  std::mt19937_64 rng(1);
  for (int c = 0; c < 10; ++c) {
    std::vector<double> steps(7);
    for (auto& b : steps) b = static_cast<double>(rng() % 500) / 100.0;
    EXPECT_NEAR(stream_log_partition(env, BetaProfile(steps)), 0.0, 1e-13);
  }
}

TEST(ForwardLayers, RejectsMismatchedProfile) {
  const GaussianEnvironment env(1, LatticeParams{1, 5});
  EXPECT_THROW(forward_layers(env, BetaProfile::constant(4, 1.0)), std::invalid_argument);
}

TEST(LogPartitionMulti, Examples) {
  const GaussianEnvironment env(3, LatticeParams{1, 8});
  const auto p = make_partition(8, 2);
  EXPECT_NEAR(log_partition_multi(env, p, {1.1, 1.1}), stream_log_partition(env, BetaProfile::constant(8, 1.1)), 1e-13);
  EXPECT_EQ(log_partition_multi(env, p, {0.0, 0.0}), 0.0);
  EXPECT_NEAR(log_partition_multi(env, p, {0.5, 1.5}), brute_force_log_partition(env, BetaProfile::blocks(p, {0.5, 1.5})),
              1e-10);
}

TEST(LogPartitionExcludingBlock, Examples) {
  const GaussianEnvironment env(5, LatticeParams{1, 8});
  EXPECT_EQ(log_partition_excluding_block(env, make_partition(8, 1), 1, 2.0), 0.0);
  EXPECT_EQ(log_partition_excluding_block(env, make_partition(8, 4), 2, 0.0), 0.0);
}

TEST(LogPartitionExcludingBlock, DecompositionAgainstEnumeration) {
  // log Z_N - log Zhat^(l) = log of the Zhat-Gibbs average of exp(beta * block energy),
  // both sides evaluated directly from path sums.
  const GaussianEnvironment env(8, LatticeParams{1, 8});
  const auto p = make_partition(8, 3);
  const double beta = 1.2;
  for (int l = 1; l <= 3; ++l) {
    const auto hat = BetaProfile::excluding_block(p, l, beta);
    double num = 0, den = 0;
    enumerate_paths(env, hat, [&](const std::vector<Point>& pts, double e) {
      double block = 0;
      for (int i = p.first(l); i <= p.last(l); ++i) block += env(i, pts[static_cast<std::size_t>(i)]);
      den += std::exp(e);
      num += std::exp(e + beta * block);
    });
    const double lhs = stream_log_partition(env, BetaProfile::constant(8, beta)) -
                       log_partition_excluding_block(env, p, l, beta);
    EXPECT_NEAR(lhs, std::log(num / den), 1e-10) << "block " << l;
  }
}

TEST(MarkovSplit, EverySplitTimeRecoversLogZ) {
  for (int dim : {1, 2}) {
    const GaussianEnvironment env(12, LatticeParams{dim, 8});
    const auto prof = BetaProfile::constant(8, 1.4);
    const auto fwd = forward_layers(env, prof);
    const auto bwd = backward_layers(env, prof);
    const double bf = brute_force_log_partition(env, prof);
    for (int s = 0; s <= 8; ++s) EXPECT_NEAR(split_log_partition(fwd, bwd, s), bf, 1e-10);
  }
  // Large N: consistency between the two recursions only.
  const GaussianEnvironment env(12, LatticeParams{1, 600});
  const auto prof = BetaProfile::constant(600, 2.0);
  const auto fwd = forward_layers(env, prof);
  const auto bwd = backward_layers(env, prof);
  for (int s : {0, 1, 300, 599, 600}) EXPECT_NEAR(split_log_partition(fwd, bwd, s), log_partition(fwd), 1e-9);
}

TEST(EndpointDistribution, BinomialAtZeroBeta) {
  const GaussianEnvironment env(1, LatticeParams{1, 2});
  const auto d = endpoint_distribution(forward_layers(env, BetaProfile::constant(2, 0.0)));
  std::map<int, double> got;
  for (const auto& [x, p] : d) got[x[0]] = p;
  EXPECT_NEAR(got[-2], 0.25, 1e-15);
  EXPECT_NEAR(got[0], 0.5, 1e-15);
  EXPECT_NEAR(got[2], 0.25, 1e-15);
}

TEST(EndpointDistribution, NormalizedAndMatchesEnumeration) {
  const GaussianEnvironment env(11, LatticeParams{1, 6});
  const auto prof = BetaProfile::constant(6, 2.0);
  const auto d = endpoint_distribution(forward_layers(env, prof));
  const auto ref = brute_force_marginals(env, prof);
  double total = 0;
  for (const auto& [x, p] : d) {
    total += p;
    EXPECT_NEAR(p, ref[6].at(x), 1e-10);
  }
  EXPECT_NEAR(total, 1.0, 1e-12);

  const GaussianEnvironment big(11, LatticeParams{2, 60});
  double s = 0;
  for (const auto& [x, p] : endpoint_distribution(forward_layers(big, BetaProfile::constant(60, 3.0)))) s += p;
  EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(SiteMarginals, MatchEnumeration) {
  const GaussianEnvironment env(21, LatticeParams{2, 5});
  const auto prof = BetaProfile::constant(5, 1.0);
  const auto fwd = forward_layers(env, prof);
  const auto marg = site_marginals(fwd, backward_layers(env, prof));
  const auto ref = brute_force_marginals(env, prof);
  for (int i = 0; i <= 5; ++i)
    for (std::size_t k = 0; k < marg[static_cast<std::size_t>(i)].size(); ++k)
      EXPECT_NEAR(marg[static_cast<std::size_t>(i)][k], ref[static_cast<std::size_t>(i)].at(fwd.cone(i).point(k)), 1e-12);
}

TEST(SamplePath, ZeroBetaStepsAreUniform) {
  const GaussianEnvironment env(2, LatticeParams{2, 10});
  const auto t = forward_layers(env, BetaProfile::constant(10, 0.0));
  std::mt19937_64 rng(99);
  std::array<long, 4> counts{};
  const int draws = 10000;  // 10 steps each: 10^5 steps
  for (int d = 0; d < draws; ++d) {
    const auto p = sample_path(t, rng);
    for (int i = 1; i <= 10; ++i) {
      const auto& a = p[static_cast<std::size_t>(i - 1)];
      const auto& b = p[static_cast<std::size_t>(i)];
      const int c = b[0] != a[0] ? (b[0] > a[0] ? 0 : 1) : (b[1] > a[1] ? 2 : 3);
      ++counts[static_cast<std::size_t>(c)];
    }
  }
  const double expect = draws * 10 / 4.0;
  double chi2 = 0;
  for (long c : counts) chi2 += (c - expect) * (c - expect) / expect;
  const double p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(3), chi2));
  EXPECT_GT(p_value, 0.001);
}

TEST(SamplePath, ExactAgainstEnumeratedLaw) {
  for (int n : {4, 5, 6}) {
    const auto c = check_sampler(100 + static_cast<std::uint64_t>(n), 200 + static_cast<std::uint64_t>(n), n, 1.0, 1'000'000);
    EXPECT_LT(c.tv, 5e-3) << "N=" << n;
    EXPECT_GT(c.p_value, 1e-4) << "N=" << n;
  }
}

TEST(SamplePath, SameStreamSamePath) {
  const GaussianEnvironment env(6, LatticeParams{2, 40});
  const auto t = forward_layers(env, BetaProfile::constant(40, 1.0));
  std::mt19937_64 a(5), b(5);
  for (int k = 0; k < 20; ++k) EXPECT_EQ(sample_path(t, a), sample_path(t, b));
}

TEST(LogSpace, AgreesWithQuadPrecisionReference) {
  using boost::multiprecision::float128;
  const GaussianEnvironment env(31, LatticeParams{1, 2000});
  const auto prof = BetaProfile::constant(2000, 5.0);
  const double d = stream_log_partition(env, prof);
  const float128 q = stream_log_partition<float128>(env, prof);
  ASSERT_TRUE(std::isfinite(d));
  EXPECT_LT(std::abs(d - static_cast<double>(q)) / std::abs(static_cast<double>(q)), 1e-6);
}

TEST(ConeStack, SharedCachesGiveIdenticalResults) {
  const LatticeParams params{2, 30};
  const auto cones = make_cones(params);
  const GaussianEnvironment env(9, params);
  const auto prof = BetaProfile::constant(30, 1.5);
  EXPECT_EQ(stream_log_partition(env, prof, cones), stream_log_partition(env, prof));
  EXPECT_EQ(log_partition(forward_layers(env, prof, cones)), stream_log_partition(env, prof));
}
