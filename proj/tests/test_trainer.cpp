#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "softpool/checkpoint.hpp"
#include "softpool/config.hpp"
#include "softpool/dataset.hpp"
#include "softpool/errors.hpp"
#include "softpool/io.hpp"
#include "softpool/trainer.hpp"
#include "test_util.hpp"

using namespace softpool;
namespace fs = std::filesystem;

namespace {

RunConfig small_config() {
  RunConfig c = profile_config("desk");
  c.n_in = 128;
  c.hidden = {16};
  c.n_f = 4;
  c.n_r = 8;
  c.n_p = 4;
  c.upsample = 4;
  c.preserve_samples = 32;
  c.epochs = 1;
  sync_counts(c);
  return c;
}

std::vector<Sample> small_samples(std::size_t count, std::uint64_t seed) {
  synth::DatasetOptions opts;
  opts.count = count;
  opts.fine_count = 256;
  opts.partial_count = 128;
  opts.seed = seed;
  return make_samples(synth::generate_pairs(opts), 128, seed);
}

}  // namespace

TEST(PrepareInput, ExactAndResampled) {
  const auto p = test::random_cloud(50, 1);
  EXPECT_EQ(prepare_input(p, 50), p);
  const auto up = prepare_input(p, 64, 3);
  EXPECT_EQ(up.size(), 64u);
  Rng rng(2);
  EXPECT_EQ(prepare_input(p.permuted(test::random_permutation(50, rng)), 64, 3), up);
  EXPECT_EQ(prepare_input(test::random_cloud(300, 4), 64).size(), 64u);
}

TEST(LossCsv, HeaderAndRow) {
  EXPECT_EQ(loss_csv_header(), "step,complete,inter,intra,boundary,preserve,total\n");
  StepRecord r;
  r.step = 3;
  r.values = {0.5, 0.25, 1.0, 0.0, 0.125};
  r.total = 1.875;
  EXPECT_EQ(loss_csv_row(r), "3,0.5,0.25,1,0,0.125,1.875\n");
}

TEST(Train, OneEpochWritesOneRow) {
  const fs::path dir = fs::temp_directory_path() / "softpool_test_train";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto items = small_samples(8, 5);
  TrainOptions opts;
  opts.checkpoint = dir / "model.ckpt";
  opts.loss_csv = dir / "losses.csv";
  const auto result = train(small_config(), items, {}, opts);
  ASSERT_EQ(result.steps.size(), 1u);
  const std::string csv = io::read_file(opts.loss_csv);
  EXPECT_EQ(csv, loss_csv_header() + loss_csv_row(result.steps[0]));
  EXPECT_EQ(read_checkpoint(opts.checkpoint), result.model.parameters());
  fs::remove_all(dir);
}

TEST(Train, DeterministicAndThreadIndependent) {
  const auto items = small_samples(10, 6);
  const auto holdout = small_samples(2, 7);
  RunConfig c = small_config();
  c.epochs = 2;
  c.batch_size = 4;
  const auto a = train(c, items, holdout);
  const auto b = train(c, items, holdout);
  c.threads = 3;
  const auto t = train(c, items, holdout);
  EXPECT_EQ(a.steps.size(), 6u);
  EXPECT_EQ(a.model.parameters(), b.model.parameters());
  EXPECT_EQ(a.model.parameters(), t.model.parameters());
  ASSERT_EQ(a.holdout.size(), t.holdout.size());
  for (std::size_t i = 0; i < a.holdout.size(); ++i) EXPECT_EQ(a.holdout[i].second, t.holdout[i].second);
}

TEST(Train, LossDecreasesOnATinySet) {
  const auto items = small_samples(8, 8);
  RunConfig c = small_config();
  c.epochs = 15;
  const auto result = train(c, items, items);
  ASSERT_GE(result.holdout.size(), 2u);
  EXPECT_LT(result.holdout.back().second, result.holdout.front().second);
}

TEST(EvaluateItems, GradientsOnlyWhenAsked) {
  const auto items = small_samples(3, 9);
  const RunConfig c = small_config();
  const auto model = SoftPoolNet::initialize(c.architecture(), 1);
  const auto without = evaluate_items(model, c.loss_config(), items, false);
  const auto with = evaluate_items(model, c.loss_config(), items, true, 2);
  ASSERT_EQ(with.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_TRUE(without[i].grads.empty());
    EXPECT_EQ(with[i].grads.size(), model.parameters().size());
    EXPECT_EQ(with[i].total, without[i].total);
    EXPECT_NEAR(with[i].total, total_loss(with[i].values, c.weights).total, 1e-12);
  }
}
