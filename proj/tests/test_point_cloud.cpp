#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "softpool/errors.hpp"
#include "softpool/kdtree.hpp"
#include "softpool/point_cloud.hpp"
#include "test_util.hpp"

using namespace softpool;

TEST(PointCloud, RejectsNonFiniteCoordinates) {
  EXPECT_THROW(PointCloud({{0.0, std::nan(""), 0.0}}), InvalidInput);
  PointCloud p;
  EXPECT_THROW(p.push_back({std::numeric_limits<double>::infinity(), 0, 0}), InvalidInput);
  EXPECT_TRUE(p.empty());
}

TEST(PointCloud, FlatRoundTrip) {
  const auto p = test::random_cloud(17, 1);
  EXPECT_EQ(PointCloud::from_flat(p.flat()), p);
  EXPECT_THROW(PointCloud::from_flat(std::vector<double>{1.0, 2.0}), InvalidInput);
}

TEST(PointCloud, PermutationPreservesCount) {
  const auto p = test::random_cloud(50, 2);
  Rng rng(3);
  const auto perm = test::random_permutation(p.size(), rng);
  const auto q = p.permuted(perm);
  ASSERT_EQ(q.size(), p.size());
  for (std::size_t i = 0; i < perm.size(); ++i) EXPECT_EQ(q[i], p[perm[i]]);
  EXPECT_THROW(p.permuted(std::vector<std::size_t>{0, 1}), InvalidInput);
}

TEST(Resample, SameSizeIsAPermutation) {
  const auto p = test::random_cloud(64, 4);
  auto q = resample(p, 64, 9);
  auto a = p.flat(), b = q.flat();
  auto sorted = [](const PointCloud& c) {
    std::vector<Point3> v(c.begin(), c.end());
    std::sort(v.begin(), v.end());
    return v;
  };
  EXPECT_EQ(sorted(p), sorted(q));
}

TEST(Resample, SinglePointIsDuplicated) {
  const PointCloud p({{1.0, 2.0, 3.0}});
  const auto q = resample(p, 4, 0);
  ASSERT_EQ(q.size(), 4u);
  for (const auto& x : q) EXPECT_EQ(x, (Point3{1.0, 2.0, 3.0}));
}

TEST(Resample, SubsampleIsReproducibleAndWithoutReplacement) {
  const auto p = test::random_cloud(2000, 5);
  const auto a = resample(p, 1024, 77);
  const auto b = resample(p, 1024, 77);
  EXPECT_EQ(a, b);
  std::vector<Point3> v(a.begin(), a.end());
  std::sort(v.begin(), v.end());
  EXPECT_EQ(std::adjacent_find(v.begin(), v.end()), v.end());
  for (const auto& x : a) EXPECT_NE(std::find(p.begin(), p.end(), x), p.end());
  EXPECT_NE(resample(p, 1024, 78), a);
}

TEST(Resample, ShortfallKeepsEveryPoint) {
  const auto p = test::random_cloud(300, 6);
  const auto q = resample(p, 1024, 1);
  ASSERT_EQ(q.size(), 1024u);
  for (const auto& x : p) EXPECT_NE(std::find(q.begin(), q.end(), x), q.end());
}

TEST(Resample, IndependentOfInputOrder) {
  const auto p = test::random_cloud(500, 7);
  Rng rng(8);
  for (std::size_t n : {100u, 500u, 1024u}) {
    const auto q = p.permuted(test::random_permutation(p.size(), rng));
    EXPECT_EQ(resample(p, n, 3), resample(q, n, 3));
  }
}

TEST(Resample, ZeroCountOrEmptyInputIsAnError) {
  EXPECT_THROW(resample(test::random_cloud(3, 1), 0, 0), InvalidInput);
  EXPECT_THROW(resample(PointCloud{}, 4, 0), InvalidInput);
}

TEST(LexicographicOrder, MatchesStdSortOfRows) {
  const auto t = test::random_tensor({40, 3}, 9);
  // Duplicate a few rows so that ties occur.
  Tensor u = t;
  for (std::size_t c = 0; c < 3; ++c) {
    u(5, c) = u(2, c);
    u(30, c) = u(2, c);
  }
  const auto order = lexicographic_order(u.data(), 3);
  for (std::size_t i = 1; i < order.size(); ++i) {
    const auto a = u.row(order[i - 1]), b = u.row(order[i]);
    EXPECT_FALSE(std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end()));
  }
  // Equal rows keep their relative order.
  const auto pos = [&](std::size_t r) { return std::find(order.begin(), order.end(), r) - order.begin(); };
  EXPECT_LT(pos(2), pos(5));
  EXPECT_LT(pos(5), pos(30));
}

TEST(KdTree, NearestMatchesBruteForce) {
  const auto target = test::random_cloud(500, 10);
  const auto queries = test::random_cloud(200, 11, 1.5);
  const KdTree tree(target.points());
  for (const auto& q : queries) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < target.size(); ++i) {
      const double d = squared_distance(q, target[i]);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    const auto hit = tree.nearest(q);
    EXPECT_EQ(hit.index, best);
    EXPECT_EQ(hit.squared_distance, best_d);
  }
}

TEST(KdTree, TiesResolveToLowestIndex) {
  const PointCloud target({{1, 0, 0}, {-1, 0, 0}, {1, 0, 0}});
  const KdTree tree(target.points(), 1);
  EXPECT_EQ(tree.nearest({0, 0, 0}).index, 0u);
  EXPECT_EQ(tree.nearest({1, 0, 0}).index, 0u);
}
