#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "softpool/ops.hpp"
#include "softpool/point_cloud.hpp"

namespace softpool {

/// Floor applied inside every log of the entropy terms.
inline constexpr double kLogFloor = 1e-12;

/// Differentiable symmetric Chamfer distance between two N x 3 point
/// matrices. Nearest-neighbour matches are computed on the current values
/// and held fixed for the gradient.
ad::Var chamfer(const ad::Var& a, const ad::Var& b, ad::DecisionLog* decisions = nullptr);

struct CompletionOptions {
  /// Adds 0.5 * chamfer(coarse, gt resampled to |coarse|) to the fine-stage
  /// term. Off in paper-fidelity runs.
  bool coarse_supervision = true;
  std::uint64_t seed = 0;
};

ad::Var loss_complete(const ad::Var& fine, const ad::Var& coarse, const PointCloud& gt,
                      const CompletionOptions& options, ad::DecisionLog* decisions = nullptr);

/// Batch mean of the entropy of each item's mean region distribution
/// (rows normalised with normalize_rows). Each item is N x R.
ad::Var regional_entropy(std::span<const ad::Var> batch);

/// log(R) - regional_entropy: zero when regions are equally populated.
ad::Var loss_inter(std::span<const ad::Var> batch);

/// Mean per-point entropy of the region probabilities over the batch: zero
/// when every row is one-hot.
ad::Var loss_intra(std::span<const ad::Var> batch);

/// B_i^j for every ordered pair of distinct regions: rows assigned to region
/// i (argmax) whose activation for region j exceeds tau.
struct BoundarySets {
  std::size_t regions = 0;
  std::vector<std::vector<std::size_t>> members;  // members[i * regions + j]

  const std::vector<std::size_t>& at(std::size_t i, std::size_t j) const { return members[i * regions + j]; }
  bool adjacent(std::size_t i, std::size_t j) const { return !at(i, j).empty() && !at(j, i).empty(); }
  bool all_empty() const;
};

BoundarySets boundary_sets(const Tensor& features, double tau);

/// Sum over unordered region pairs {i, j} of chamfer(points[B_i^j],
/// points[B_j^i]); pairs with an empty side contribute nothing. `points`
/// and `features` must have the same number of rows.
ad::Var loss_boundary(const ad::Var& points, const ad::Var& features, double tau,
                      ad::DecisionLog* decisions = nullptr);

/// Earth mover's distance between seeded row subsamples of F* and F. Both
/// sides use min(samples, |F|, |F*|) rows, drawn over content-sorted rows
/// with the same seed, so equal matrices give zero.
ad::Var loss_preserve(const ad::Var& fstar, const ad::Var& features, std::uint64_t seed,
                      std::size_t samples = 256, ad::DecisionLog* decisions = nullptr);

struct LossWeights {
  double complete = 1.0;
  double inter = 1.0;
  double intra = 1.0;
  double boundary = 2.0;
  double preserve = 1.0;

  /// Throws InvalidInput for a negative or non-finite weight.
  void validate() const;

  friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

struct LossValues {
  double complete = 0.0;
  double inter = 0.0;
  double intra = 0.0;
  double boundary = 0.0;
  double preserve = 0.0;
};

struct LossBreakdown {
  LossValues terms;
  LossWeights weights;
  double total = 0.0;
};

LossBreakdown total_loss(const LossValues& terms, const LossWeights& weights);

struct LossConfig {
  LossWeights weights;
  double tau = 0.3;
  bool coarse_supervision = true;
  std::size_t preserve_samples = 256;
  /// Verification hook: multiplies the gradient of the intra term by -1.
  bool flip_intra_gradient = false;
};

struct ItemLoss {
  ad::Var complete, inter, intra, boundary, preserve;
  ad::Var total;

  LossValues values() const;
};

/// Weighted objective for one training item. The batch objective is the
/// mean of the item totals, which matches the batch-level entropy terms.
ItemLoss item_objective(const ad::Var& features, const ad::Var& fstar, const ad::Var& coarse,
                        const ad::Var& fine, const PointCloud& gt, const LossConfig& config,
                        std::uint64_t seed, ad::DecisionLog* decisions = nullptr);

}  // namespace softpool
