#include <gtest/gtest.h>

#include <filesystem>

#include "softpool/checkpoint.hpp"
#include "softpool/config.hpp"
#include "softpool/errors.hpp"
#include "softpool/model.hpp"
#include "test_util.hpp"

using namespace softpool;

namespace {

Architecture tiny() {
  Architecture a;
  a.n_in = 128;
  a.hidden = {16, 16};
  a.n_f = 8;
  a.n_r = 8;
  a.n_p = 4;
  a.upsample = 4;
  return a;
}

}  // namespace

TEST(Model, PaperResolution) {
  Architecture a = RunConfig{}.architecture();
  a.hidden = {16, 16};  // width does not change the output counts
  const auto model = SoftPoolNet::initialize(a, 1);
  const auto out = model.complete(test::random_cloud(1024, 2));
  EXPECT_EQ(out.fstar.shape(), (Shape{256, 8}));
  EXPECT_EQ(out.coarse.size(), 256u);
  EXPECT_EQ(out.fine.size(), 16384u);
}

TEST(Model, DeskResolution) {
  Architecture a = profile_config("desk").architecture();
  const auto out = SoftPoolNet::initialize(a, 3).complete(test::random_cloud(1024, 4));
  EXPECT_EQ(out.coarse.size(), 256u);
  EXPECT_EQ(out.fine.size(), 2048u);
}

TEST(Model, PermutedInputGivesIdenticalOutput) {
  const auto model = SoftPoolNet::initialize(tiny(), 5);
  const auto p = test::random_cloud(128, 6);
  const auto ref = model.complete(p);
  Rng rng(7);
  for (int t = 0; t < 10; ++t) {
    const auto out = model.complete(p.permuted(test::random_permutation(128, rng)));
    EXPECT_EQ(out.fstar, ref.fstar);
    EXPECT_EQ(out.coarse, ref.coarse);
    EXPECT_EQ(out.fine, ref.fine);
  }
}

TEST(Model, RowRangesOutsideTheTop) {
  const auto model = SoftPoolNet::initialize(tiny(), 8);
  const auto out = model.complete(test::random_cloud(128, 9), RowRange{9, 16});
  EXPECT_EQ(out.coarse.size(), 64u);
  EXPECT_THROW(model.complete(test::random_cloud(128, 9), RowRange{100, 200}), InvalidInput);
}

TEST(Model, RejectsWrongInputSize) {
  const auto model = SoftPoolNet::initialize(tiny(), 10);
  EXPECT_THROW(model.complete(test::random_cloud(100, 11)), InvalidInput);
}

TEST(Model, ParameterLayoutAndCount) {
  const auto layout = parameter_layout(tiny());
  ASSERT_EQ(layout.size(), 10u);
  EXPECT_EQ(layout[0].first, "encoder.layer0.weight");
  EXPECT_EQ(layout[0].second, (Shape{3, 16}));
  EXPECT_EQ(layout[6].first, "decoder.coarse.weight");
  EXPECT_EQ(layout[6].second, (Shape{4, 8, 3}));
  const auto model = SoftPoolNet::initialize(tiny(), 12);
  const std::size_t expected = 3 * 16 + 16 + 16 * 16 + 16 + 16 * 8 + 8 + 4 * 8 * 3 + 3 + 4 * 3 * 3 + 3;
  EXPECT_EQ(model.parameter_count(), expected);
}

TEST(Model, CheckpointRoundTripAndMismatch) {
  const auto model = SoftPoolNet::initialize(tiny(), 13);
  const auto path = std::filesystem::temp_directory_path() / "softpool_test_model.ckpt";
  write_checkpoint(path, model.parameters());
  const auto loaded = SoftPoolNet::from_parameters(tiny(), read_checkpoint(path));
  const auto p = test::random_cloud(128, 14);
  EXPECT_EQ(loaded.complete(p).fine, model.complete(p).fine);

  Architecture other = tiny();
  other.n_p = 8;
  EXPECT_THROW(SoftPoolNet::from_parameters(other, read_checkpoint(path)), ConfigError);
  other = tiny();
  other.hidden = {16};
  EXPECT_THROW(SoftPoolNet::from_parameters(other, read_checkpoint(path)), ConfigError);
  std::filesystem::remove(path);
}

TEST(Model, InitialisationIsSeeded) {
  EXPECT_EQ(SoftPoolNet::initialize(tiny(), 15).parameters(), SoftPoolNet::initialize(tiny(), 15).parameters());
  EXPECT_NE(SoftPoolNet::initialize(tiny(), 15).parameters(), SoftPoolNet::initialize(tiny(), 16).parameters());
}
