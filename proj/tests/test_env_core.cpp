#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>
#include <unordered_set>
#include <vector>

#include "dpre/environment.hpp"
#include "dpre/lattice.hpp"
#include "dpre/parallel.hpp"
#include "dpre/partition.hpp"
#include "dpre/profile.hpp"

using namespace dpre;

namespace {

Point pt(std::initializer_list<int> xs) {
  Point p{};
  std::size_t k = 0;
  for (int x : xs) p[k++] = x;
  return p;
}

// Endpoints of all (2d)^i walks, by explicit enumeration.
std::set<Point> walk_endpoints(int step, int dim) {
  std::set<Point> cur{origin()};
  for (int s = 0; s < step; ++s) {
    std::set<Point> next;
    for (const auto& x : cur)
      for (int a = 0; a < dim; ++a)
        for (int sign : {-1, 1}) next.insert(axis_step(x, a, sign));
    cur = std::move(next);
  }
  return cur;
}

}  // namespace

TEST(ReachableSet, OriginOnlyAtStepZero) {
  const auto d0 = reachable_set(0, 1);
  ASSERT_EQ(d0.size(), 1u);
  EXPECT_EQ(d0[0], origin());
}

TEST(ReachableSet, OneStepInTwoDimensions) {
  const auto d1 = reachable_set(1, 2);
  const std::set<Point> got(d1.begin(), d1.end());
  const std::set<Point> want{pt({1, 0}), pt({-1, 0}), pt({0, 1}), pt({0, -1})};
  EXPECT_EQ(got, want);
}

TEST(ReachableSet, FourStepsInOneDimension) {
  const auto d4 = reachable_set(4, 1);
  const std::set<Point> got(d4.begin(), d4.end());
  EXPECT_EQ(got, walk_endpoints(4, 1));
  EXPECT_EQ(got.size(), 5u);
}

TEST(ReachableSet, MatchesWalkEnumeration) {
  for (int dim = 1; dim <= 3; ++dim)
    for (int i = 0; i <= (dim == 3 ? 5 : 8); ++i) {
      const auto d = reachable_set(i, dim);
      const std::set<Point> got(d.begin(), d.end());
      EXPECT_EQ(got, walk_endpoints(i, dim)) << "d=" << dim << " i=" << i;
      EXPECT_EQ(d.size(), reachable_set_size(i, dim));
      if (dim == 1) EXPECT_EQ(d.size(), static_cast<std::size_t>(i + 1));
      if (dim == 2) EXPECT_EQ(d.size(), static_cast<std::size_t>((i + 1) * (i + 1)));
    }
}

TEST(Cone, IndexIsABijectionOntoTheReachableSet) {
  for (int dim = 1; dim <= 3; ++dim)
    for (int i = 0; i <= 7; ++i) {
      const Cone c(dim, i);
      ASSERT_EQ(c.size(), reachable_set_size(i, dim));
      for (std::size_t k = 0; k < c.size(); ++k) EXPECT_EQ(c.index(c.point(k)), k);
      EXPECT_EQ(c.index(axis_step(c.point(0), 0, 1)), Cone::npos);  // wrong parity
    }
}

TEST(LatticeParams, MemoryGuardRejectsHugeCones) {
  LatticeParams ok{1, 1000};
  EXPECT_NO_THROW(ok.validate());
  LatticeParams big{2, 1024};
  EXPECT_THROW(big.validate(), MemoryGuardError);
  LatticeParams bad{0, 4};
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  LatticeParams wide{kMaxDim + 1, 2};
  EXPECT_THROW(wide.validate(), std::invalid_argument);
}

TEST(Path, Validity) {
  const std::vector<Point> good{pt({0}), pt({1}), pt({2})};
  const std::vector<Point> jump{pt({0}), pt({2})};
  const std::vector<Point> offset{pt({1}), pt({2})};
  EXPECT_TRUE(is_valid_path(1, good));
  EXPECT_FALSE(is_valid_path(1, jump));
  EXPECT_FALSE(is_valid_path(1, offset));
  EXPECT_THROW(Path(1, jump), std::invalid_argument);
  EXPECT_EQ(Path(1, good).length(), 2);
}

TEST(StepFeasible, DistanceAndParity) {
  EXPECT_TRUE(step_feasible(origin(), origin(), 0));
  EXPECT_FALSE(step_feasible(origin(), origin(), 1));
  EXPECT_TRUE(step_feasible(pt({0}), pt({3}), 3));
  EXPECT_FALSE(step_feasible(pt({0}), pt({3}), 4));
  EXPECT_TRUE(step_feasible(pt({0}), pt({3}), 5));
}

TEST(StepFeasible, AgreesWithBreadthFirstSearch) {
  for (int dim = 1; dim <= 2; ++dim) {
    std::vector<Point> ball;
    for (int r = 0; r <= 4; ++r)
      for (const auto& x : reachable_set(r, dim)) ball.push_back(x);
    for (const auto& x : ball) {
      // layer[s] = points reachable from x in exactly s steps
      std::set<Point> layer{x};
      for (int s = 0; s <= 8; ++s) {
        for (const auto& y : ball) EXPECT_EQ(step_feasible(x, y, s), layer.count(y) == 1);
        std::set<Point> next;
        for (const auto& z : layer)
          for (int a = 0; a < dim; ++a)
            for (int sign : {-1, 1}) next.insert(axis_step(z, a, sign));
        layer = std::move(next);
      }
    }
  }
}

TEST(ConnectingPath, RuleExamples) {
  EXPECT_EQ(connecting_path(pt({0}), pt({0}), 2), (std::vector<Point>{pt({0}), pt({1}), pt({0})}));
  EXPECT_EQ(connecting_path(pt({0}), pt({2}), 2), (std::vector<Point>{pt({0}), pt({1}), pt({2})}));
  EXPECT_EQ(connecting_path(pt({0, 0}), pt({1, 1}), 4),
            (std::vector<Point>{pt({0, 0}), pt({1, 0}), pt({1, 1}), pt({2, 1}), pt({1, 1})}));
  EXPECT_THROW(connecting_path(pt({0}), pt({3}), 4), std::invalid_argument);
}

TEST(ConnectingPath, AlwaysValidAndEndpointExact) {
  for (int dim = 1; dim <= 3; ++dim)
    for (int r = 0; r <= 3; ++r)
      for (const auto& y : reachable_set(r, dim))
        for (int extra = 0; extra <= 4; extra += 2) {
          const auto path = connecting_path(origin(), y, r + extra);
          ASSERT_EQ(path.size(), static_cast<std::size_t>(r + extra + 1));
          EXPECT_TRUE(is_valid_path(dim, path));
          EXPECT_EQ(path.back(), y);
          EXPECT_EQ(path, connecting_path(origin(), y, r + extra));
        }
}

TEST(Partition, Examples) {
  EXPECT_EQ(make_partition(10, 3).boundaries(), (std::vector<int>{0, 3, 6, 10}));
  EXPECT_EQ(make_partition(12, 4).boundaries(), (std::vector<int>{0, 3, 6, 9, 12}));
  EXPECT_EQ(make_partition(7, 7).boundaries(), (std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7}));
  EXPECT_THROW(make_partition(3, 4), std::invalid_argument);
  EXPECT_THROW(make_partition(3, 0), std::invalid_argument);
}

TEST(Partition, BlockOfInvertsBoundaries) {
  const auto p = make_partition(10, 3);
  for (int i = 1; i <= 10; ++i) {
    const int l = p.block_of(i);
    EXPECT_GE(i, p.first(l));
    EXPECT_LE(i, p.last(l));
  }
}

TEST(SubPartition, Examples) {
  const auto p10 = make_partition(10, 1);
  const auto s = make_subpartition(p10, 1, 3);
  EXPECT_EQ(s.piece_size(1), 3);
  EXPECT_EQ(s.piece_size(2), 3);
  EXPECT_EQ(s.piece_size(3), 4);
  const auto s9 = make_subpartition(make_partition(9, 1), 1, 9);
  for (int k = 1; k <= 9; ++k) EXPECT_EQ(s9.piece_size(k), 1);
  EXPECT_EQ(subblock_count(0.5), 24);
  const auto p100 = make_partition(100, 4);
  EXPECT_TRUE(fine_enough(p100, subblock_count(0.5)));
  EXPECT_EQ(make_subpartition(p100, 2, 24).pieces(), 24);
  EXPECT_TRUE(make_subpartition(make_partition(5, 1), 1, 8).has_empty_pieces());
}

TEST(Partition, ExhaustiveArithmeticSweep) {
  for (int n = 1; n <= 10000; n += (n < 600 ? 1 : 37))
    for (int l = 1; l <= std::min(n, 32); ++l) {
      const auto p = make_partition(n, l);
      for (int b = 1; b <= l; ++b) {
        const int s = p.block_size(b);
        ASSERT_TRUE(s == n / l || s == (n + l - 1) / l);
        ASSERT_LE(n, 2 * l * s);
        ASSERT_LE(s * l, 2 * n);
      }
      for (int k = 1; k <= 64; ++k) {
        if (n / l < k) break;
        for (int b = 1; b <= l; ++b) {
          const auto sub = make_subpartition(p, b, k);
          for (int q = 1; q <= k; ++q) {
            const long s = sub.piece_size(q);
            ASSERT_LE(n, 4L * l * k * s) << n << " " << l << " " << k;
            ASSERT_LE(s * l * k, 4L * n);
          }
        }
      }
    }
}

TEST(GaussianEnvironment, Deterministic) {
  const LatticeParams p{2, 10};
  const GaussianEnvironment a(9, p), b(9, p);
  for (int i = 1; i <= 10; ++i)
    for (const auto& x : reachable_set(i, 2)) EXPECT_EQ(a(i, x), b(i, x));
}

TEST(GaussianEnvironment, SeedsAreUncorrelated) {
  const LatticeParams p{1, 1000};
  const GaussianEnvironment a(1, p), b(2, p);
  double sxy = 0, sxx = 0, syy = 0;
  int count = 0;
  for (int i = 1; i <= 1000 && count < 100000; ++i)
    for (std::size_t k = 0; k < Cone(1, i).size(); ++k) {
      const Point x = Cone(1, i).point(k);
      const double u = a(i, x), v = b(i, x);
      sxy += u * v;
      sxx += u * u;
      syy += v * v;
      if (++count == 100000) break;
    }
  const double corr = sxy / std::sqrt(sxx * syy);
  EXPECT_LT(std::abs(corr), 3.0 / std::sqrt(100000.0));
}

TEST(GaussianEnvironment, StandardNormalMoments) {
  const LatticeParams p{1, 1414};
  const GaussianEnvironment env(123, p);
  double s = 0, ss = 0;
  long n = 0;
  for (int i = 1; i <= p.length; ++i)
    for (std::size_t k = 0; k < Cone(1, i).size(); ++k) {
      const double g = env(i, Cone(1, i).point(k));
      s += g;
      ss += g * g;
      ++n;
    }
  ASSERT_GE(n, 1000000);
  const double mean = s / n;
  EXPECT_NEAR(mean, 0.0, 0.01);
  EXPECT_NEAR(ss / n - mean * mean, 1.0, 0.01);
}

TEST(GaussianEnvironment, FieldsDifferAcrossLengths) {
  const GaussianEnvironment a(5, LatticeParams{1, 10}), b(5, LatticeParams{1, 11});
  EXPECT_NE(a(1, axis_step(origin(), 0, 1)), b(1, axis_step(origin(), 0, 1)));
}

TEST(GaussianEnvironment, HashIndependentOfThreadCount) {
  const LatticeParams p{2, 30};
  const GaussianEnvironment env(77, p);
  auto run = [&](int threads) {
    set_thread_count(threads);
    const auto vals = map_replicas(10000, [&](std::size_t k) {
      const int step = 1 + static_cast<int>(k % 30);
      const Cone c(2, step);
      return env(step, c.point(k % c.size()));
    });
    std::uint64_t h = 1469598103934665603ULL;
    for (double v : vals) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      h = (h ^ bits) * 1099511628211ULL;
    }
    return h;
  };
  const int saved = thread_count();
  const auto h1 = run(1);
  const auto h8 = run(8);
  set_thread_count(saved);
  EXPECT_EQ(h1, h8);
}

TEST(FlippedEnvironment, NegatesExactlyOneCell) {
  const LatticeParams p{1, 4};
  const GaussianEnvironment env(3, p);
  const Point cell = axis_step(origin(), 0, 1);
  const FlippedEnvironment<GaussianEnvironment> f(env, 1, cell);
  EXPECT_EQ(f(1, cell), -env(1, cell));
  EXPECT_EQ(f(1, axis_step(origin(), 0, -1)), env(1, axis_step(origin(), 0, -1)));
  EXPECT_EQ(f(3, cell), env(3, cell));
}

TEST(BetaProfile, Constructions) {
  EXPECT_THROW(BetaProfile({1.0, -0.5}), std::invalid_argument);
  EXPECT_THROW(BetaProfile({1.0, std::nan("")}), std::invalid_argument);
  const auto p = make_partition(10, 3);
  const auto blocks = BetaProfile::blocks(p, {0.5, 1.0, 1.5});
  EXPECT_EQ(blocks.at(3), 0.5);
  EXPECT_EQ(blocks.at(4), 1.0);
  EXPECT_EQ(blocks.at(10), 1.5);
  EXPECT_EQ(BetaProfile::blocks(p, {2.0, 2.0, 2.0}).values(), BetaProfile::constant(10, 2.0).values());
  const auto hat = BetaProfile::excluding_block(p, 2, 1.0);
  for (int i = 1; i <= 10; ++i) EXPECT_EQ(hat.at(i), (i >= 4 && i <= 6) ? 0.0 : 1.0);
  EXPECT_TRUE(BetaProfile::constant(5, 0.0).is_zero());
  EXPECT_THROW(BetaProfile::blocks(p, {1.0}), std::invalid_argument);
}
