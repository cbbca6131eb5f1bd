#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "softpool/encoder.hpp"
#include "softpool/errors.hpp"
#include "test_util.hpp"

using namespace softpool;

namespace {

// Reference order for F'_k: comparison sort on (k-th entry desc, row desc).
std::vector<std::size_t> oracle_order(const Tensor& f, std::size_t k) {
  std::vector<std::size_t> idx(f.rows());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (f(a, k) != f(b, k)) return f(a, k) > f(b, k);
    const auto ra = f.row(a), rb = f.row(b);
    return std::lexicographical_compare(rb.begin(), rb.end(), ra.begin(), ra.end());
  });
  return idx;
}

EncoderParams small_encoder(std::size_t n_f, std::uint64_t seed) {
  const std::vector<std::size_t> hidden{16, 16};
  return init_encoder(hidden, n_f, seed);
}

}  // namespace

TEST(Encode, RowsSumToOne) {
  const auto p = test::random_cloud(5, 1);
  const Tensor f = encode(p, small_encoder(8, 2));
  ASSERT_EQ(f.shape(), (Shape{5, 8}));
  for (std::size_t r = 0; r < 5; ++r) {
    double s = 0.0;
    for (double v : f.row(r)) {
      EXPECT_GT(v, 0.0);
      s += v;
    }
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
}

TEST(Encode, ZeroFinalLayerGivesUniformRows) {
  auto params = small_encoder(8, 3);
  params.weights.back() = Tensor(params.weights.back().shape(), 0.0);
  const Tensor f = encode(test::random_cloud(20, 4), params);
  for (double v : f.data()) EXPECT_DOUBLE_EQ(v, 0.125);
}

TEST(Encode, IsPointwiseEquivariant) {
  const auto p = test::random_cloud(64, 5);
  const auto params = small_encoder(8, 6);
  Rng rng(7);
  const auto perm = test::random_permutation(p.size(), rng);
  const Tensor f = encode(p, params), g = encode(p.permuted(perm), params);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    for (std::size_t k = 0; k < 8; ++k) EXPECT_EQ(g(i, k), f(perm[i], k));
  }
}

TEST(SortFeatures, FigureExampleOrder) {
  // k-th elements ordered so that rows {3, 5, 1, 2, 4} (1-based) come first.
  const Tensor f = Tensor::matrix(5, 2, {0.5, 0.5, 0.4, 0.6, 0.9, 0.1, 0.2, 0.8, 0.7, 0.3});
  const auto order = sorted_rows(f, 0);
  EXPECT_EQ(order, (std::vector<std::size_t>{2, 4, 0, 1, 3}));
}

TEST(SortFeatures, AlreadyDescendingIsIdentity) {
  const Tensor f = Tensor::matrix(4, 2, {0.9, 0.1, 0.7, 0.3, 0.4, 0.6, 0.2, 0.8});
  EXPECT_EQ(sorted_rows(f, 0), (std::vector<std::size_t>{0, 1, 2, 3}));
}

TEST(SortFeatures, MatchesComparisonSortOracle) {
  Tensor f = test::random_distribution_rows(64, 8, 8);
  // Force ties in column 0 between distinct rows.
  f(10, 0) = f(20, 0);
  const auto sorted = sort_features(f);
  for (std::size_t k = 0; k < 8; ++k) {
    EXPECT_EQ(sorted.order[k], oracle_order(f, k));
    for (std::size_t r = 1; r < 64; ++r) EXPECT_GE(sorted.slices[k](r - 1, k), sorted.slices[k](r, k));
    std::vector<std::vector<double>> a, b;
    for (std::size_t r = 0; r < 64; ++r) {
      a.emplace_back(f.row(r).begin(), f.row(r).end());
      b.emplace_back(sorted.slices[k].row(r).begin(), sorted.slices[k].row(r).end());
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    EXPECT_EQ(a, b);
  }
}

TEST(Softpool, ShapeAndBlocks) {
  const Tensor f = test::random_distribution_rows(1024, 8, 9);
  const auto sorted = sort_features(f);
  const Tensor fstar = softpool::softpool(sorted, 32);
  ASSERT_EQ(fstar.shape(), (Shape{256, 8}));
  for (std::size_t k = 0; k < 8; ++k) {
    for (std::size_t r = 0; r < 32; ++r) {
      for (std::size_t c = 0; c < 8; ++c) EXPECT_EQ(fstar(k * 32 + r, c), sorted.slices[k](r, c));
    }
  }
  EXPECT_EQ(softpool_range(sorted, 1, 32), fstar);
}

TEST(Softpool, FullRangeAndOffsetRanges) {
  const Tensor f = test::random_distribution_rows(100, 4, 10);
  const auto sorted = sort_features(f);
  const Tensor all = softpool::softpool(sorted, 100);
  for (std::size_t k = 0; k < 4; ++k) {
    for (std::size_t r = 0; r < 100; ++r) EXPECT_EQ(all(k * 100 + r, 1), sorted.slices[k](r, 1));
  }
  const Tensor mid = softpool_range(sorted, 33, 64);
  ASSERT_EQ(mid.shape(), (Shape{4 * 32, 4}));
  EXPECT_EQ(mid(0, 2), sorted.slices[0](32, 2));
  EXPECT_THROW(softpool::softpool(sorted, 101), InvalidInput);
  EXPECT_THROW(softpool_range(sorted, 0, 3), InvalidInput);
  EXPECT_THROW(softpool_range(sorted, 5, 4), InvalidInput);
}

TEST(Softpool, InvariantUnderPointPermutation) {
  const auto p = test::random_cloud(256, 11);
  const auto params = small_encoder(8, 12);
  const Tensor ref = softpool::softpool(sort_features(encode(p, params)), 16);
  Rng rng(13);
  for (int t = 0; t < 100; ++t) {
    const auto q = p.permuted(test::random_permutation(p.size(), rng));
    EXPECT_EQ(softpool::softpool(sort_features(encode(q, params)), 16), ref);
  }
}

TEST(Softpool, DuplicateRowsDoNotBreakInvariance) {
  std::vector<Point3> pts;
  for (int i = 0; i < 20; ++i) pts.push_back({0.1 * i, 0.0, 0.0});
  for (int i = 0; i < 20; ++i) pts.push_back({0.1 * (i % 3), 0.0, 0.0});
  const PointCloud p(pts);
  const auto params = small_encoder(4, 14);
  const Tensor ref = softpool::softpool(sort_features(encode(p, params)), 10);
  Rng rng(15);
  for (int t = 0; t < 10; ++t) {
    EXPECT_EQ(softpool::softpool(sort_features(encode(p.permuted(test::random_permutation(p.size(), rng)), params)), 10), ref);
  }
}

TEST(PointNetFeature, IsColumnMaxAndInsideFstar) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Tensor f = test::random_distribution_rows(50, 6, 100 + s);
    const auto sorted = sort_features(f);
    const auto pn = pointnet_feature(sorted);
    const Tensor fstar = softpool::softpool(sorted, 1);
    for (std::size_t k = 0; k < 6; ++k) {
      double mx = f(0, k);
      for (std::size_t r = 1; r < 50; ++r) mx = std::max(mx, f(r, k));
      EXPECT_EQ(pn[k], mx);
      bool found = false;
      for (double v : fstar.data()) found = found || v == pn[k];
      EXPECT_TRUE(found);
    }
  }
}

TEST(RegionAssign, ArgmaxWithLowestIndexTies) {
  const Tensor one_hot = Tensor::matrix(3, 3, {0, 1, 0, 0, 0, 1, 1, 0, 0});
  EXPECT_EQ(region_assign(one_hot), (std::vector<std::size_t>{1, 2, 0}));
  EXPECT_EQ(region_assign(Tensor({1, 8}, 0.125)), (std::vector<std::size_t>{0}));
  const Tensor f = test::random_distribution_rows(100, 8, 16);
  const auto r = region_assign(f);
  for (std::size_t i = 0; i < 100; ++i) {
    const auto row = f.row(i);
    EXPECT_EQ(r[i], static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin()));
  }
}

TEST(RegionProbability, Normalises) {
  const std::vector<double> unit{0.2, 0.3, 0.5};
  EXPECT_DOUBLE_EQ(region_probability(unit, 1), 0.3);
  const std::vector<double> twos(8, 2.0);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_DOUBLE_EQ(region_probability(twos, i), 0.125);
  const Tensor f = test::random_tensor({20, 5}, 17, 0.1, 3.0);
  for (std::size_t r = 0; r < 20; ++r) {
    double total = 0.0;
    for (double v : f.row(r)) total += v;
    double s = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
      EXPECT_NEAR(region_probability(f.row(r), i), f(r, i) / total, 1e-15);
      s += region_probability(f.row(r), i);
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
  const std::vector<double> zeros(3, 0.0);
  EXPECT_THROW(region_probability(zeros, 0), NumericError);
}

TEST(Softpool, GradientFlowsThroughSelectedRowsOnly) {
  ad::Tape tape;
  const Tensor f = test::random_distribution_rows(12, 3, 18);
  const ad::Var fv = tape.variable(f);
  const ad::Var fstar = softpool::softpool(fv, 1, 2);
  tape.backward(ad::sum(fstar));
  const Tensor g = tape.grad(fv);
  const auto rows = softpool_rows(f, 1, 2);
  for (std::size_t r = 0; r < 12; ++r) {
    const double expected = static_cast<double>(std::count(rows.begin(), rows.end(), r));
    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(g(r, c), expected);
  }
}
