#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "softpool/ops.hpp"
#include "softpool/point_cloud.hpp"
#include "softpool/tensor.hpp"

namespace softpool {

/// Per-point MLP weights: layer l maps widths[l] -> widths[l + 1], with
/// widths[0] == 3 and widths.back() == N_f.
struct EncoderParams {
  std::vector<Tensor> weights;  // [in, out]
  std::vector<Tensor> biases;   // [out]

  std::size_t feature_count() const { return biases.empty() ? 0 : biases.back().size(); }
};

/// Uniform fan-in initialisation, bound sqrt(6 / fan_in); zero biases.
EncoderParams init_encoder(std::span<const std::size_t> hidden, std::size_t n_f, std::uint64_t seed);

struct EncoderOptions {
  double slope = 0.2;
  bool output_softmax = true;
};

struct MlpLayer {
  ad::Var weight;
  ad::Var bias;
};

/// Point-wise MLP: Leaky ReLU between layers, softmax over each output row.
/// Row i of the result depends on row i of `points` only.
ad::Var encode(const ad::Var& points, std::span<const MlpLayer> layers, const EncoderOptions& options = {});

/// Value-only convenience over encode().
Tensor encode(const PointCloud& points, const EncoderParams& params, const EncoderOptions& options = {});

/// F' : for every feature k, the rows of F ordered by descending k-th entry.
struct SortedFeatureTensor {
  std::vector<std::vector<std::size_t>> order;  // order[k][r] = source row of F'_k row r
  std::vector<Tensor> slices;                   // slices[k] = F'_k, same shape as F

  std::size_t feature_count() const noexcept { return order.size(); }
  std::size_t point_count() const noexcept { return order.empty() ? 0 : order[0].size(); }
};

/// Row order of F'_k. Rows tie-break on their full contents (descending
/// lexicographic), so the result depends only on the multiset of rows;
/// identical rows keep their input order.
std::vector<std::size_t> sorted_rows(const Tensor& f, std::size_t k);

SortedFeatureTensor sort_features(const Tensor& f);

/// Rows [lo, hi] (1-based, inclusive) of every slice, concatenated slice by
/// slice into a region-blocked (N_f * (hi - lo + 1)) x N_f matrix.
Tensor softpool_range(const SortedFeatureTensor& sorted, std::size_t lo, std::size_t hi);

/// The first n_r rows of every slice: F*.
Tensor softpool(const SortedFeatureTensor& sorted, std::size_t n_r);

/// Source rows of F that make up softpool_range(sort_features(f), lo, hi).
std::vector<std::size_t> softpool_rows(const Tensor& f, std::size_t lo, std::size_t hi);

/// Differentiable soft pooling: gathers the selected rows of `f`, so the
/// gradient flows straight through the sort permutation.
ad::Var softpool(const ad::Var& f, std::size_t lo, std::size_t hi, ad::DecisionLog* decisions = nullptr);

/// Max-pooled feature: entry k is the k-th element of the first row of F'_k.
std::vector<double> pointnet_feature(const SortedFeatureTensor& sorted);

/// Region of each point: 0-based argmax of its row, lowest index on ties.
std::vector<std::size_t> region_assign(const Tensor& f);

/// f_k[i] / sum_j f_k[i]; entries must be positive (NumericError on a
/// zero-sum row).
double region_probability(std::span<const double> feature, std::size_t region);

}  // namespace softpool
