#include <benchmark/benchmark.h>

#include "softpool/distance.hpp"
#include "softpool/losses.hpp"
#include "softpool/model.hpp"
#include "softpool/random.hpp"
#include "softpool/regional_conv.hpp"
#include "softpool/trainer.hpp"

namespace {

using namespace softpool;

PointCloud random_cloud(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Point3> pts(n);
  for (auto& p : pts) p = {uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1)};
  return PointCloud(std::move(pts));
}

void BM_ChamferBrute(benchmark::State& state) {
  const auto a = random_cloud(state.range(0), 1), b = random_cloud(state.range(0), 2);
  for (auto _ : state) benchmark::DoNotOptimize(chamfer(a, b));
}
BENCHMARK(BM_ChamferBrute)->Arg(256)->Arg(2048);

void BM_ChamferKdTree(benchmark::State& state) {
  const auto a = random_cloud(state.range(0), 1), b = random_cloud(state.range(0), 2);
  for (auto _ : state) benchmark::DoNotOptimize(chamfer_accelerated(a, b));
}
BENCHMARK(BM_ChamferKdTree)->Arg(256)->Arg(2048)->Arg(16384);

void BM_EarthMover(benchmark::State& state) {
  const auto a = random_cloud(state.range(0), 3), b = random_cloud(state.range(0), 4);
  for (auto _ : state) benchmark::DoNotOptimize(earth_mover(a, b));
}
BENCHMARK(BM_EarthMover)->Arg(64)->Arg(256);

void BM_RegionalConv(benchmark::State& state) {
  Rng rng(5);
  Tensor x({256, 8});
  for (double& v : x.data()) v = uniform01(rng);
  const RegionalKernel k = init_regional_kernel(32, 8, 3, 6);
  for (auto _ : state) benchmark::DoNotOptimize(regional_conv(x, 8, k));
}
BENCHMARK(BM_RegionalConv);

Architecture desk_architecture(std::size_t width) {
  Architecture a;
  a.hidden = {width, width};
  a.upsample = 8;
  return a;
}

void BM_CompleteForward(benchmark::State& state) {
  const SoftPoolNet net = SoftPoolNet::initialize(desk_architecture(state.range(0)), 7);
  const auto cloud = random_cloud(1024, 8);
  for (auto _ : state) benchmark::DoNotOptimize(net.complete(cloud));
}
BENCHMARK(BM_CompleteForward)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_TrainingItem(benchmark::State& state) {
  const SoftPoolNet net = SoftPoolNet::initialize(desk_architecture(state.range(0)), 7);
  const Sample item{random_cloud(1024, 9), random_cloud(2048, 10), 11};
  const LossConfig loss;
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_items(net, loss, {&item, 1}, true));
}
BENCHMARK(BM_TrainingItem)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_PreserveLoss(benchmark::State& state) {
  Rng rng(12);
  Tensor f({1024, 8}), fs({256, 8});
  for (double& v : f.data()) v = uniform01(rng);
  for (double& v : fs.data()) v = uniform01(rng);
  for (auto _ : state) {
    ad::Tape tape;
    benchmark::DoNotOptimize(loss_preserve(tape.variable(fs), tape.variable(f), 1).value().item());
  }
}
BENCHMARK(BM_PreserveLoss)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
