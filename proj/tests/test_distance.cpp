#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "softpool/assignment.hpp"
#include "softpool/distance.hpp"
#include "softpool/errors.hpp"
#include "test_util.hpp"

using namespace softpool;

namespace {

double brute_chamfer(const PointCloud& a, const PointCloud& b) {
  auto one_side = [](const PointCloud& x, const PointCloud& y) {
    double s = 0.0;
    for (const auto& p : x) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : y) {
        const double dx = p[0] - q[0], dy = p[1] - q[1], dz = p[2] - q[2];
        best = std::min(best, std::sqrt(dx * dx + dy * dy + dz * dz));
      }
      s += best;
    }
    return s / static_cast<double>(x.size());
  };
  return 0.5 * (one_side(a, b) + one_side(b, a));
}

double row_distance(const std::vector<double>& a, const std::vector<double>& b, std::size_t i, std::size_t j,
                    std::size_t d) {
  double s = 0.0;
  for (std::size_t k = 0; k < d; ++k) s += (a[i * d + k] - b[j * d + k]) * (a[i * d + k] - b[j * d + k]);
  return std::sqrt(s);
}

// Exhaustive minimum over all bijections by enumerating permutations.
double factorial_emd(const std::vector<double>& a, const std::vector<double>& b, std::size_t d) {
  const std::size_t n = a.size() / d;
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += row_distance(a, b, i, perm[i], d);
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(n);
}

// Exhaustive search over bijections by dynamic programming on the set of
// used columns (exact, but fast enough for n = 12).
double subset_dp_emd(const std::vector<double>& a, const std::vector<double>& b, std::size_t d) {
  const std::size_t n = a.size() / d;
  std::vector<double> best(std::size_t{1} << n, std::numeric_limits<double>::infinity());
  best[0] = 0.0;
  for (std::size_t mask = 0; mask < best.size(); ++mask) {
    const std::size_t row = static_cast<std::size_t>(__builtin_popcountll(mask));
    if (row >= n) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (mask & (std::size_t{1} << j)) continue;
      const std::size_t next = mask | (std::size_t{1} << j);
      best[next] = std::min(best[next], best[mask] + row_distance(a, b, row, j, d));
    }
  }
  return best.back() / static_cast<double>(n);
}

}  // namespace

TEST(Chamfer, IdenticalCloudsGiveZero) {
  const auto a = test::random_cloud(40, 1);
  EXPECT_EQ(chamfer(a, a), 0.0);
  EXPECT_EQ(chamfer_accelerated(a, a), 0.0);
}

TEST(Chamfer, SinglePointPair) {
  const PointCloud a({{0, 0, 0}}), b({{1, 0, 0}});
  EXPECT_DOUBLE_EQ(chamfer(a, b), 1.0);
  EXPECT_DOUBLE_EQ(chamfer_accelerated(a, b), 1.0);
}

TEST(Chamfer, MatchesBruteForceOracle) {
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto a = test::random_cloud(50, 2 * s), b = test::random_cloud(50, 2 * s + 1);
    const double oracle = brute_chamfer(a, b);
    EXPECT_NEAR(chamfer(a, b), oracle, 1e-12);
    EXPECT_NEAR(chamfer_accelerated(a, b), oracle, 1e-12);
  }
}

TEST(Chamfer, SymmetricAndPermutationInvariant) {
  const auto a = test::random_cloud(80, 3), b = test::random_cloud(60, 4);
  EXPECT_EQ(chamfer(a, b), chamfer(b, a));
  Rng rng(5);
  const auto ap = a.permuted(test::random_permutation(a.size(), rng));
  EXPECT_NEAR(chamfer(ap, b), chamfer(a, b), 1e-15);
  EXPECT_EQ(chamfer_accelerated(a, ap), 0.0);
}

TEST(Chamfer, AcceleratedMatchesOnLargeClouds) {
  const auto a = test::random_cloud(2048, 6), b = test::random_cloud(2048, 7);
  const double ref = brute_chamfer(a, b);
  EXPECT_LE(std::abs(chamfer_accelerated(a, b) - ref), 1e-9 * ref);
}

TEST(Chamfer, EmptyCloudIsAnError) {
  EXPECT_THROW(chamfer(PointCloud{}, test::random_cloud(3, 1)), InvalidInput);
  EXPECT_THROW(chamfer_accelerated(test::random_cloud(3, 1), PointCloud{}), InvalidInput);
}

TEST(NearestIndices, MatchBruteForce) {
  const auto q = test::random_cloud(100, 8), t = test::random_cloud(70, 9);
  const auto nn = nearest_indices(q.points(), t.points());
  for (std::size_t i = 0; i < q.size(); ++i) {
    for (std::size_t j = 0; j < t.size(); ++j) EXPECT_LE(squared_distance(q[i], t[nn[i]]), squared_distance(q[i], t[j]));
  }
}

TEST(EarthMover, IdenticalSetsGiveZero) {
  const auto a = test::random_cloud(30, 10);
  EXPECT_EQ(earth_mover(a, a), 0.0);
}

TEST(EarthMover, OneDimensionalSwap) {
  const std::vector<double> a{0.0, 1.0}, b{1.0, 0.0};
  EXPECT_EQ(earth_mover(RowsView{a, 1}, RowsView{b, 1}), 0.0);
}

TEST(EarthMover, MatchesFactorialOracleUpToEight) {
  for (std::uint64_t s = 0; s < 60; ++s) {
    const std::size_t n = 1 + s % 8, d = 1 + s % 4;
    const auto a = test::random_tensor({n, d}, 100 + s), b = test::random_tensor({n, d}, 200 + s);
    const std::vector<double> av(a.data().begin(), a.data().end()), bv(b.data().begin(), b.data().end());
    EXPECT_NEAR(earth_mover(RowsView{av, d}, RowsView{bv, d}), factorial_emd(av, bv, d), 1e-14) << "n=" << n;
  }
}

TEST(EarthMover, MatchesExhaustiveSearchAtTwelve) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto a = test::random_tensor({12, 3}, 300 + s), b = test::random_tensor({12, 3}, 400 + s);
    const std::vector<double> av(a.data().begin(), a.data().end()), bv(b.data().begin(), b.data().end());
    EXPECT_NEAR(earth_mover(RowsView{av, 3}, RowsView{bv, 3}), subset_dp_emd(av, bv, 3), 1e-13);
  }
}

TEST(EarthMover, ZeroOnlyForEqualMultisets) {
  const auto a = test::random_cloud(20, 11);
  Rng rng(12);
  EXPECT_EQ(earth_mover(a, a.permuted(test::random_permutation(20, rng))), 0.0);
  auto pts = std::vector<Point3>(a.begin(), a.end());
  pts[3][1] += 1e-6;
  EXPECT_GT(earth_mover(a, PointCloud(pts)), 0.0);
}

TEST(EarthMover, RejectsBadInputs) {
  EXPECT_THROW(earth_mover(test::random_cloud(3, 1), test::random_cloud(4, 2)), InvalidInput);
  const auto big = test::random_cloud(kMaxExactTransport + 1, 3);
  EXPECT_THROW(earth_mover(big, big), InvalidInput);
}

TEST(Assignment, MatchingIsABijection) {
  const auto a = test::random_cloud(40, 13), b = test::random_cloud(40, 14);
  const auto av = a.flat(), bv = b.flat();
  auto match = earth_mover_matching(RowsView{av, 3}, RowsView{bv, 3});
  std::sort(match.begin(), match.end());
  for (std::size_t i = 0; i < match.size(); ++i) EXPECT_EQ(match[i], i);
}

TEST(DistanceReport, ScaledEqualsValueTimesScale) {
  const auto c = DistanceReport::chamfer(0.00123);
  EXPECT_EQ(c.scale, 1e3);
  EXPECT_EQ(c.scaled(), 0.00123 * 1e3);
  EXPECT_EQ(DistanceReport::earth_mover(0.5).scaled(), 50.0);
}
