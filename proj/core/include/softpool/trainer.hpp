#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "softpool/config.hpp"
#include "softpool/dataset.hpp"
#include "softpool/losses.hpp"
#include "softpool/model.hpp"

namespace softpool {

/// Network input of exactly `n` points: the cloud itself when it already
/// has `n`, otherwise a content-ordered resample (so any permutation of the
/// same file gives the same input).
PointCloud prepare_input(const PointCloud& cloud, std::size_t n, std::uint64_t seed = 0);

/// One training or evaluation item.
struct Sample {
  PointCloud input;   // exactly n_in points
  PointCloud target;  // complete surface
  std::uint64_t seed = 0;
};

struct ItemResult {
  LossValues values;
  double total = 0.0;
  std::vector<Tensor> grads;  // empty unless requested
};

/// Losses (and optionally parameter gradients) of every item, computed on
/// `threads` worker threads. Each item runs on its own tape, so the result
/// does not depend on the thread count.
std::vector<ItemResult> evaluate_items(const SoftPoolNet& model, const LossConfig& loss, std::span<const Sample> items,
                                       bool with_grad, std::size_t threads = 1);

/// Mean Chamfer distance between completed fine outputs and targets.
double mean_completion_chamfer(const SoftPoolNet& model, std::span<const Sample> items, std::size_t threads = 1);

struct StepRecord {
  std::size_t step = 0;
  std::size_t epoch = 0;
  LossValues values;  // batch means
  double total = 0.0;
};

/// "step,complete,inter,intra,boundary,preserve,total" and one row per step.
std::string loss_csv_header();
std::string loss_csv_row(const StepRecord& r);

struct TrainOptions {
  /// Per-epoch checkpoint; empty disables writing.
  std::filesystem::path checkpoint;
  /// Loss log, rewritten after every epoch; empty disables it.
  std::filesystem::path loss_csv;
  /// Evaluate the holdout Chamfer after every epoch (it is always evaluated
  /// before the first step and after the last).
  bool holdout_every_epoch = false;
  std::function<void(const StepRecord&)> on_step;
  std::function<void(std::size_t epoch, double holdout_chamfer)> on_epoch;
};

struct TrainResult {
  SoftPoolNet model;
  std::vector<StepRecord> steps;
  /// (epoch, mean holdout Chamfer); epoch 0 is the untrained model.
  std::vector<std::pair<std::size_t, double>> holdout;
};

/// Samples for a list of pairs: partial scans prepared to n_in points and
/// per-item seeds derived from `seed`.
std::vector<Sample> make_samples(std::span<const synth::ScanPair> pairs, std::size_t n_in, std::uint64_t seed);

/// Adam on the weighted objective, ceil(|train| / batch_size) steps per
/// epoch, with the item order reshuffled every epoch from the seed. A
/// non-finite loss or gradient throws NumericError before any parameter is
/// touched, so the last written checkpoint stays valid.
TrainResult train(const RunConfig& config, std::span<const Sample> train_items, std::span<const Sample> holdout_items,
                  const TrainOptions& options = {});

}  // namespace softpool
