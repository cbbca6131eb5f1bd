#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "softpool/checkpoint.hpp"
#include "softpool/config.hpp"
#include "softpool/io.hpp"
#include "softpool/model.hpp"
#include "test_util.hpp"

using namespace softpool;
namespace fs = std::filesystem;

namespace {

const fs::path& work_dir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "softpool_test_cli";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args) {
  const fs::path log = work_dir() / "last_run.log";
  const std::string cmd = std::string(SOFTPOOL_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string last_output() { return io::read_file(work_dir() / "last_run.log"); }

// A small network so the CLI round trips stay fast.
const std::string kTiny =
    "--set n_in=64 --set hidden=8 --set n_f=4 --set n_r=4 --set n_p=4 --set coarse_count=16 "
    "--set upsample=4 --set fine_count=64 --set preserve_samples=16 --set batch_size=8 ";

std::string data_args() { return "--set dataset=" + (work_dir() / "data" / "manifest.jsonl").string() + " "; }

void ensure_dataset() {
  if (fs::exists(work_dir() / "data" / "manifest.jsonl")) return;
  ASSERT_EQ(run("synth --count 10 --seed 3 --out " + (work_dir() / "data").string() + " " + kTiny), 0)
      << last_output();
}

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("complete"), 2);
  EXPECT_EQ(run("ablate --sweep colours"), 2);
  EXPECT_EQ(run("check-grad --set tau=7"), 2);
  EXPECT_EQ(run("train --set nonsense=1"), 2);
  EXPECT_EQ(run("--help"), 0);
}

TEST(Cli, CheckGradPassesAndCatchesInjectedSignError) {
  EXPECT_EQ(run("check-grad"), 0) << last_output();
  EXPECT_NE(last_output().find("all checks passed"), std::string::npos);
  EXPECT_EQ(run("check --inject-intra-sign-error"), 1);
  EXPECT_NE(last_output().find("FAIL grad/intra"), std::string::npos) << last_output();
}

TEST(Cli, IoErrorsExitThree) {
  EXPECT_EQ(run("train --set dataset=" + (work_dir() / "absent.jsonl").string()), 3);
  EXPECT_EQ(run("train"), 3);  // no dataset configured
  io::write_file_atomic(work_dir() / "broken.xyz", "1 2 3\n4 5\n");
  const fs::path ckpt = work_dir() / "desk.ckpt";
  write_checkpoint(ckpt, SoftPoolNet::initialize(profile_config("desk").architecture(), 1).parameters());
  EXPECT_EQ(run("complete " + (work_dir() / "broken.xyz").string() + " --checkpoint " + ckpt.string()), 3);
  EXPECT_NE(last_output().find("line 2"), std::string::npos) << last_output();
  EXPECT_EQ(run("complete " + (work_dir() / "nothing.xyz").string() + " --checkpoint " + ckpt.string()), 3);
}

TEST(Cli, TrainOneEpochAndRepeatBitIdentical) {
  ensure_dataset();
  const fs::path a = work_dir() / "run_a", b = work_dir() / "run_b";
  const std::string args = "train --set epochs=1 --set holdout=2 --seed 5 " + kTiny + data_args();
  ASSERT_EQ(run(args + "--out " + a.string()), 0) << last_output();
  ASSERT_EQ(run(args + "--out " + b.string()), 0) << last_output();
  const std::string csv = io::read_file(a / "losses.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);  // header plus ceil(8 / 8) rows
  EXPECT_EQ(csv.rfind("step,complete,inter,intra,boundary,preserve,total\n", 0), 0u);
  EXPECT_EQ(io::read_file(a / "model.ckpt"), io::read_file(b / "model.ckpt"));
  EXPECT_TRUE(fs::exists(a / "config.txt"));

  // The written config reproduces the run without any flags.
  ASSERT_EQ(run("complete " + (work_dir() / "data" / "partial").string() + "/pair-00000.ply --config " +
                (a / "config.txt").string() + " --out " + (work_dir() / "from_config").string()),
            0)
      << last_output();
}

TEST(Cli, CompleteIsInvariantToInputOrder) {
  const fs::path ckpt = work_dir() / "desk_order.ckpt";
  write_checkpoint(ckpt, SoftPoolNet::initialize(profile_config("desk").architecture(), 2).parameters());
  const auto cloud = test::random_cloud(1024, 7);
  Rng rng(8);
  io::write_point_cloud(work_dir() / "in.xyz", cloud);
  io::write_point_cloud(work_dir() / "in_perm.xyz", cloud.permuted(test::random_permutation(1024, rng)));
  ASSERT_EQ(run("complete " + (work_dir() / "in.xyz").string() + " --checkpoint " + ckpt.string() + " --out " +
                (work_dir() / "o1").string()),
            0)
      << last_output();
  ASSERT_EQ(run("complete " + (work_dir() / "in_perm.xyz").string() + " --checkpoint " + ckpt.string() + " --out " +
                (work_dir() / "o2").string()),
            0);
  for (const char* suffix : {".coarse.ply", ".fine.ply", ".regions.txt"}) {
    EXPECT_EQ(io::read_file(work_dir() / (std::string("o1") + suffix)),
              io::read_file(work_dir() / (std::string("o2") + suffix)))
        << suffix;
  }
  EXPECT_EQ(io::read_point_cloud(work_dir() / "o1.fine.ply").size(), 2048u);
  EXPECT_EQ(io::read_point_cloud(work_dir() / "o1.coarse.ply").size(), 256u);
}

TEST(Cli, CompleteResamplesShortInputs) {
  const fs::path ckpt = work_dir() / "desk_short.ckpt";
  write_checkpoint(ckpt, SoftPoolNet::initialize(profile_config("desk").architecture(), 3).parameters());
  io::write_point_cloud(work_dir() / "short.xyz", test::random_cloud(300, 9));
  ASSERT_EQ(run("complete " + (work_dir() / "short.xyz").string() + " --checkpoint " + ckpt.string() +
                " --format xyz --out " + (work_dir() / "short_out").string()),
            0)
      << last_output();
  EXPECT_EQ(io::read_point_cloud(work_dir() / "short_out.fine.xyz").size(), 2048u);
}

TEST(Cli, CheckpointMismatchIsAConfigError) {
  const fs::path ckpt = work_dir() / "desk_mismatch.ckpt";
  write_checkpoint(ckpt, SoftPoolNet::initialize(profile_config("desk").architecture(), 4).parameters());
  io::write_point_cloud(work_dir() / "m.xyz", test::random_cloud(1024, 10));
  EXPECT_EQ(run("complete " + (work_dir() / "m.xyz").string() + " --checkpoint " + ckpt.string() + " --set n_p=16"),
            2);
  EXPECT_NE(last_output().find("config error"), std::string::npos);
}

TEST(Cli, MetricsClassifyAndAblateRun) {
  ensure_dataset();
  const fs::path run_dir = work_dir() / "run_eval";
  const std::string base = kTiny + data_args() + "--set holdout=4 --set emd_points=16 ";
  ASSERT_EQ(run("train --set epochs=1 " + base + "--out " + run_dir.string()), 0) << last_output();
  const std::string ckpt = " --checkpoint " + (run_dir / "model.ckpt").string() + " ";
  ASSERT_EQ(run("metrics" + ckpt + base + "--out " + (work_dir() / "metrics.csv").string()), 0) << last_output();
  EXPECT_NE(io::read_file(work_dir() / "metrics.csv").find("Method"), std::string::npos);
  ASSERT_EQ(run("classify" + ckpt + base), 0) << last_output();
  EXPECT_NE(last_output().find("Accuracy"), std::string::npos);
  ASSERT_EQ(run("ablate --sweep tau --set epochs=1 " + base + "--out " +
                (work_dir() / "ablate.csv").string()),
            0)
      << last_output();
  const std::string table = io::read_file(work_dir() / "ablate.csv");
  EXPECT_EQ(table.substr(0, table.find('\n')), "tau,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9");
}
