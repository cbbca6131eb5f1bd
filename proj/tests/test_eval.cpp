#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "softpool/dataset.hpp"
#include "softpool/distance.hpp"
#include "softpool/errors.hpp"
#include "softpool/eval.hpp"
#include "softpool/model.hpp"
#include "test_util.hpp"

using namespace softpool;

namespace {

double fidelity_oracle(const PointCloud& in, const PointCloud& out) {
  double total = 0.0;
  for (const auto& p : in) {
    double best = INFINITY;
    for (const auto& q : out) best = std::min(best, distance(p, q));
    total += best;
  }
  return total / static_cast<double>(in.size());
}

PointCloud concat(const PointCloud& a, const PointCloud& b) {
  std::vector<Point3> pts(a.begin(), a.end());
  pts.insert(pts.end(), b.begin(), b.end());
  return PointCloud(std::move(pts));
}

struct Blobs {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
};

// Gaussian blobs around class-specific centres in `dim` dimensions.
Blobs blobs(std::size_t per_class, std::size_t classes, std::size_t dim, double spread, std::uint64_t seed) {
  Rng centre_rng(1000);
  std::vector<std::vector<double>> centres(classes, std::vector<double>(dim));
  for (auto& c : centres) {
    for (double& v : c) v = uniform(centre_rng, -1.0, 1.0);
  }
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, spread);
  Blobs out;
  for (std::size_t i = 0; i < per_class * classes; ++i) {
    const std::size_t c = i % classes;
    std::vector<double> v = centres[c];
    for (double& e : v) e += noise(rng);
    out.x.push_back(std::move(v));
    out.y.push_back(static_cast<int>(c) + 10);
  }
  return out;
}

}  // namespace

TEST(Fidelity, Examples) {
  const auto a = test::random_cloud(30, 1), b = test::random_cloud(40, 2);
  EXPECT_EQ(eval::fidelity(a, concat(a, b)), 0.0);
  EXPECT_EQ(eval::fidelity(PointCloud({{0, 0, 0}}), PointCloud({{0, 0, 1}})), 1.0);
  EXPECT_NEAR(eval::fidelity(a, b), fidelity_oracle(a, b), 1e-12);
  EXPECT_THROW(eval::fidelity(PointCloud{}, b), InvalidInput);
}

TEST(Mmd, Examples) {
  std::vector<PointCloud> refs;
  for (std::uint64_t s = 0; s < 5; ++s) refs.push_back(test::random_cloud(25, 10 + s));
  const auto out = test::random_cloud(25, 20);
  EXPECT_EQ(eval::mmd(refs[3], refs), 0.0);
  EXPECT_NEAR(eval::mmd(out, std::span(refs).first(1)), chamfer(out, refs[0]), 1e-12);
  double best = INFINITY;
  for (const auto& r : refs) best = std::min(best, chamfer(out, r));
  EXPECT_NEAR(eval::mmd(out, refs), best, 1e-12);
  for (const auto& r : refs) EXPECT_LE(eval::mmd(out, refs), chamfer(out, r) + 1e-12);
  EXPECT_THROW(eval::mmd(out, std::span<const PointCloud>{}), InvalidInput);
}

TEST(Consistency, Examples) {
  const auto a = test::random_cloud(20, 30);
  const std::vector<PointCloud> same(4, a);
  EXPECT_EQ(eval::consistency(same), 0.0);
  std::vector<PointCloud> seq;
  for (std::uint64_t s = 0; s < 5; ++s) seq.push_back(test::random_cloud(20, 40 + s));
  EXPECT_NEAR(eval::consistency(std::span(seq).first(2)), chamfer(seq[0], seq[1]), 1e-12);
  double want = 0.0;
  for (std::size_t i = 0; i + 1 < 5; ++i) want += chamfer(seq[i], seq[i + 1]);
  EXPECT_NEAR(eval::consistency(seq), want / 4.0, 1e-12);
  EXPECT_THROW(eval::consistency(std::span(seq).first(1)), InvalidInput);
}

TEST(LinearSvm, SeparableTwoClassTrainAccuracy) {
  const auto data = blobs(40, 2, 6, 0.05, 1);
  const auto svm = eval::LinearSvm::fit(data.x, data.y);
  EXPECT_EQ(svm.predict(data.x), data.y);
}

TEST(LinearSvm, MultiClassBlobs) {
  const auto train = blobs(30, 4, 10, 0.15, 2), test = blobs(30, 4, 10, 0.15, 3);
  const auto result = eval::classify_descriptor(train.x, train.y, test.x, test.y);
  EXPECT_GE(result.accuracy, 0.95);
}

TEST(LinearSvm, ShuffledLabelsGiveChance) {
  // Labels are permuted over train and test together, so they carry no
  // information about the descriptors and test hits are independent draws.
  auto train = blobs(50, 4, 10, 0.15, 4);
  auto test = blobs(50, 4, 10, 0.15, 5);
  std::vector<int> labels = train.y;
  labels.insert(labels.end(), test.y.begin(), test.y.end());
  Rng rng(6);
  shuffle(labels, rng);
  std::copy(labels.begin(), labels.begin() + 200, train.y.begin());
  std::copy(labels.begin() + 200, labels.end(), test.y.begin());
  const auto result = eval::classify_descriptor(train.x, train.y, test.x, test.y);
  const double n = static_cast<double>(test.y.size());
  EXPECT_NEAR(result.accuracy, 0.25, 3 * std::sqrt(0.25 * 0.75 / n));
}

TEST(LinearSvm, DeterministicAndValidated) {
  const auto data = blobs(10, 3, 4, 0.3, 7);
  const auto a = eval::LinearSvm::fit(data.x, data.y), b = eval::LinearSvm::fit(data.x, data.y);
  EXPECT_EQ(a.predict(data.x), b.predict(data.x));
  EXPECT_THROW(eval::LinearSvm::fit(data.x, std::vector<int>(data.y.size(), 1)), InvalidInput);
  EXPECT_THROW(eval::LinearSvm::fit(data.x, std::vector<int>{1, 2}), InvalidInput);
}

TEST(EvalReport, AveragesAndScaledTables) {
  eval::EvalReport r;
  r.method = "M";
  r.classes = {"a", "b", "c"};
  r.chamfer = {0.001, 0.002, 0.006};
  r.emd = {0.01, 0.02, 0.03};
  EXPECT_NEAR(r.chamfer_avg(), 0.003, 1e-12);
  EXPECT_NEAR(r.emd_avg(), 0.02, 1e-12);
  const auto table = r.completion_table();
  EXPECT_EQ(table.header, (std::vector<std::string>{"Method", "a", "b", "c", "Avg"}));
  ASSERT_EQ(table.rows.size(), 2u);
  EXPECT_EQ(std::stod(table.rows[0][4]), 3.0);
  EXPECT_EQ(std::stod(table.rows[1][2]), 2.0);
  EXPECT_NE(r.to_csv().find("Method,a,b,c,Avg"), std::string::npos);
}

TEST(Evaluate, SmallModelEndToEnd) {
  Architecture arch;
  arch.n_in = 64;
  arch.hidden = {8};
  arch.n_f = 4;
  arch.n_r = 4;
  arch.n_p = 4;
  arch.upsample = 2;
  const auto model = SoftPoolNet::initialize(arch, 1);
  synth::DatasetOptions opts;
  opts.count = 4;
  opts.fine_count = 128;
  opts.partial_count = 64;
  opts.classes = {synth::ShapeClass::Box, synth::ShapeClass::Sphere};
  const auto pairs = synth::generate_pairs(opts);
  eval::EvalOptions eo;
  eo.emd_points = 16;
  eo.frames = 3;
  const auto report = eval::evaluate(model, pairs, pairs, eo);
  EXPECT_EQ(report.classes, (std::vector<std::string>{"box", "sphere"}));
  for (double v : report.chamfer) EXPECT_GT(v, 0.0);
  ASSERT_TRUE(report.fidelity && report.mmd && report.consistency);
  EXPECT_GE(*report.consistency, 0.0);
  EXPECT_EQ(eval::descriptor(model, pairs[0].partial).size(), 4u * 4u * 4u);
}
