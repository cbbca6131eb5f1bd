#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "softpool/dataset.hpp"
#include "softpool/model.hpp"
#include "softpool/point_cloud.hpp"
#include "softpool/table.hpp"

namespace softpool::eval {

/// Mean distance from each input point to its nearest output point.
double fidelity(const PointCloud& input, const PointCloud& output);

/// Smallest Chamfer distance from `output` to any reference.
double mmd(const PointCloud& output, std::span<const PointCloud> references);

/// Mean Chamfer distance between consecutive outputs (at least two).
double consistency(std::span<const PointCloud> outputs);

/// One-vs-rest linear classifier trained with Pegasos-style subgradient
/// steps on the L2-regularised hinge loss. Features are standardised with
/// the training mean and deviation.
class LinearSvm {
 public:
  struct Options {
    double lambda = 1e-3;
    std::size_t epochs = 200;
    std::uint64_t seed = 0;
  };

  /// Throws InvalidInput with fewer than two distinct labels, mismatched
  /// lengths or ragged descriptors.
  static LinearSvm fit(const std::vector<std::vector<double>>& x, const std::vector<int>& labels,
                       const Options& options);
  static LinearSvm fit(const std::vector<std::vector<double>>& x, const std::vector<int>& labels) {
    return fit(x, labels, Options{});
  }

  int predict(std::span<const double> x) const;
  std::vector<int> predict(const std::vector<std::vector<double>>& x) const;
  const std::vector<int>& classes() const noexcept { return classes_; }

 private:
  std::vector<int> classes_;
  std::vector<std::vector<double>> w_;
  std::vector<double> b_;
  std::vector<double> mean_, inv_std_;
};

struct Classification {
  std::vector<int> predicted;
  double accuracy = 0.0;
};

Classification classify_descriptor(const std::vector<std::vector<double>>& train_x, const std::vector<int>& train_y,
                                   const std::vector<std::vector<double>>& test_x, const std::vector<int>& test_y,
                                   const LinearSvm::Options& options = {});

/// Flattened F* of a cloud (resampled to n_in first when needed).
std::vector<double> descriptor(const SoftPoolNet& model, const PointCloud& cloud);

/// Per-class completion results of one method.
struct EvalReport {
  std::string method;
  std::vector<std::string> classes;
  std::vector<double> chamfer;  // raw, per class
  std::vector<double> emd;      // raw, per class
  std::optional<double> fidelity;
  std::optional<double> mmd;
  std::optional<double> consistency;
  std::optional<double> accuracy;

  double chamfer_avg() const;
  double emd_avg() const;

  /// Method column, one column per class and Avg, with Chamfer x 10^3 and
  /// EMD x 10^2 as separate rows.
  TextTable completion_table() const;
  /// Fidelity, MMD, Consistency and Accuracy, one row each.
  TextTable summary_table() const;
  std::string to_csv() const;
  std::string to_text() const;
};

struct EvalOptions {
  /// Points per cloud in the transport-based metric.
  std::size_t emd_points = 256;
  /// Frames per instance for the consistency metric.
  std::size_t frames = 5;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

/// Completes every test pair and fills Chamfer/EMD per class, fidelity
/// against the partial input, MMD against the reference completes of the
/// same class, and consistency over partial scans from views rotated in
/// 5-degree steps about +z.
EvalReport evaluate(const SoftPoolNet& model, std::span<const synth::ScanPair> test,
                    std::span<const synth::ScanPair> references, const EvalOptions& options,
                    const std::string& method = "SoftPoolNet");

}  // namespace softpool::eval
