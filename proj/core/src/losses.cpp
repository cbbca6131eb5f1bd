#include "softpool/losses.hpp"

#include <cmath>
#include <string>

#include "softpool/distance.hpp"
#include "softpool/encoder.hpp"
#include "softpool/errors.hpp"
#include "softpool/random.hpp"

namespace softpool {

namespace {

std::vector<Point3> as_points(const Tensor& t) {
  if (t.rank() != 2 || t.dim(1) != 3) throw ShapeError("expected an N x 3 point matrix, got " + shape_string(t.shape()));
  std::vector<Point3> pts(t.dim(0));
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = {t(i, 0), t(i, 1), t(i, 2)};
  return pts;
}

ad::Var mean_matched_distance(const ad::Var& a, const ad::Var& b, std::span<const std::size_t> match) {
  return ad::mean(ad::row_norms(ad::sub(a, ad::gather_rows(b, match))));
}

ad::Var zero_like_scalar(const ad::Var& anchor) { return anchor.tape().constant(Tensor::scalar(0.0)); }

void require_batch(std::span<const ad::Var> batch, const char* op) {
  if (batch.empty()) throw InvalidInput(std::string(op) + ": empty batch");
  for (const auto& f : batch) {
    if (f.value().rank() != 2 || f.shape()[0] == 0 || f.shape()[1] == 0) {
      throw ShapeError(std::string(op) + ": each item must be a non-empty N x R matrix");
    }
  }
}

}  // namespace

ad::Var chamfer(const ad::Var& a, const ad::Var& b, ad::DecisionLog* decisions) {
  const auto pa = as_points(a.value());
  const auto pb = as_points(b.value());
  if (pa.empty() || pb.empty()) throw InvalidInput("chamfer: empty point cloud");
  const auto a_to_b = ad::decide(decisions, [&] { return nearest_indices(pa, pb); });
  const auto b_to_a = ad::decide(decisions, [&] { return nearest_indices(pb, pa); });
  return ad::scale(ad::add(mean_matched_distance(a, b, a_to_b), mean_matched_distance(b, a, b_to_a)), 0.5);
}

ad::Var loss_complete(const ad::Var& fine, const ad::Var& coarse, const PointCloud& gt,
                      const CompletionOptions& options, ad::DecisionLog* decisions) {
  if (gt.empty()) throw InvalidInput("loss_complete: empty ground truth");
  ad::Tape& tape = fine.tape();
  const ad::Var target = tape.constant(Tensor({gt.size(), 3}, gt.flat()));
  ad::Var loss = chamfer(fine, target, decisions);
  if (options.coarse_supervision) {
    const PointCloud sparse = resample(gt, coarse.shape().at(0), options.seed);
    const ad::Var sparse_target = tape.constant(Tensor({sparse.size(), 3}, sparse.flat()));
    loss = ad::add(loss, ad::scale(chamfer(coarse, sparse_target, decisions), 0.5));
  }
  return loss;
}

namespace {

// Entropy of the mean region distribution of one item.
ad::Var item_regional_entropy(const ad::Var& f) {
  const ad::Var p = ad::normalize_rows(f);
  const ad::Var mean_p = ad::mean(p, 0);
  return ad::scale(ad::sum(ad::mul(mean_p, ad::log(mean_p, kLogFloor))), -1.0);
}

// Mean per-row entropy of one item.
ad::Var item_feature_entropy(const ad::Var& f) {
  const ad::Var p = ad::normalize_rows(f);
  return ad::scale(ad::sum(ad::mul(p, ad::log(p, kLogFloor))), -1.0 / static_cast<double>(f.shape()[0]));
}

ad::Var batch_mean(std::span<const ad::Var> items) {
  ad::Var total = items[0];
  for (std::size_t b = 1; b < items.size(); ++b) total = ad::add(total, items[b]);
  return ad::scale(total, 1.0 / static_cast<double>(items.size()));
}

}  // namespace

ad::Var regional_entropy(std::span<const ad::Var> batch) {
  require_batch(batch, "regional_entropy");
  std::vector<ad::Var> per_item;
  for (const auto& f : batch) per_item.push_back(item_regional_entropy(f));
  return batch_mean(per_item);
}

ad::Var loss_inter(std::span<const ad::Var> batch) {
  require_batch(batch, "loss_inter");
  const double log_r = std::log(static_cast<double>(batch[0].shape()[1]));
  return ad::add_scalar(ad::scale(regional_entropy(batch), -1.0), log_r);
}

ad::Var loss_intra(std::span<const ad::Var> batch) {
  require_batch(batch, "loss_intra");
  std::vector<ad::Var> per_item;
  for (const auto& f : batch) per_item.push_back(item_feature_entropy(f));
  return batch_mean(per_item);
}

bool BoundarySets::all_empty() const {
  for (const auto& m : members) {
    if (!m.empty()) return false;
  }
  return true;
}

BoundarySets boundary_sets(const Tensor& features, double tau) {
  const auto region = region_assign(features);
  BoundarySets sets;
  sets.regions = features.dim(1);
  sets.members.resize(sets.regions * sets.regions);
  for (std::size_t k = 0; k < region.size(); ++k) {
    const std::size_t i = region[k];
    for (std::size_t j = 0; j < sets.regions; ++j) {
      if (j != i && features(k, j) > tau) sets.members[i * sets.regions + j].push_back(k);
    }
  }
  return sets;
}

ad::Var loss_boundary(const ad::Var& points, const ad::Var& features, double tau, ad::DecisionLog* decisions) {
  if (points.value().rank() != 2 || features.value().rank() != 2 || points.shape()[0] != features.shape()[0]) {
    throw ShapeError("loss_boundary: points and features must have one row per point");
  }
  const std::size_t regions = features.shape()[1];
  BoundarySets sets;
  const bool recording = !decisions || decisions->mode() == ad::DecisionLog::Mode::Record;
  if (recording) sets = boundary_sets(features.value(), tau);

  ad::Var total = zero_like_scalar(points);
  for (std::size_t i = 0; i < regions; ++i) {
    for (std::size_t j = i + 1; j < regions; ++j) {
      const auto bij = ad::decide(decisions, [&] { return sets.at(i, j); });
      const auto bji = ad::decide(decisions, [&] { return sets.at(j, i); });
      if (bij.empty() || bji.empty()) continue;
      total = ad::add(total, chamfer(ad::gather_rows(points, bij), ad::gather_rows(points, bji), decisions));
    }
  }
  return total;
}

ad::Var loss_preserve(const ad::Var& fstar, const ad::Var& features, std::uint64_t seed, std::size_t samples,
                      ad::DecisionLog* decisions) {
  const Tensor& fs = fstar.value();
  const Tensor& f = features.value();
  if (fs.rank() != 2 || f.rank() != 2 || fs.dim(1) != f.dim(1)) {
    throw ShapeError("loss_preserve: F* and F must have the same row width");
  }
  if (fs.dim(0) == 0 || f.dim(0) == 0 || samples == 0) throw InvalidInput("loss_preserve: empty input");
  const std::size_t n = std::min({samples, fs.dim(0), f.dim(0)});
  const auto pick_s = ad::decide(decisions, [&] {
    return draw_rows(lexicographic_order(fs.data(), fs.dim(1)), n, seed);
  });
  const auto pick_f = ad::decide(decisions, [&] {
    return draw_rows(lexicographic_order(f.data(), f.dim(1)), n, seed);
  });
  const ad::Var a = ad::gather_rows(fstar, pick_s);
  const ad::Var b = ad::gather_rows(features, pick_f);
  const auto match = ad::decide(decisions, [&] {
    return earth_mover_matching(RowsView{a.value().data(), a.shape()[1]}, RowsView{b.value().data(), b.shape()[1]});
  });
  return mean_matched_distance(a, b, match);
}

void LossWeights::validate() const {
  for (double w : {complete, inter, intra, boundary, preserve}) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidInput("loss weights must be finite and non-negative");
  }
}

LossBreakdown total_loss(const LossValues& terms, const LossWeights& weights) {
  weights.validate();
  LossBreakdown out{terms, weights, 0.0};
  out.total = weights.complete * terms.complete + weights.inter * terms.inter + weights.intra * terms.intra +
              weights.boundary * terms.boundary + weights.preserve * terms.preserve;
  return out;
}

LossValues ItemLoss::values() const {
  return {complete.value().item(), inter.value().item(), intra.value().item(), boundary.value().item(),
          preserve.value().item()};
}

ItemLoss item_objective(const ad::Var& features, const ad::Var& fstar, const ad::Var& coarse, const ad::Var& fine,
                        const PointCloud& gt, const LossConfig& config, std::uint64_t seed,
                        ad::DecisionLog* decisions) {
  config.weights.validate();
  ItemLoss out;
  out.complete = loss_complete(fine, coarse, gt, CompletionOptions{config.coarse_supervision, derive_seed(seed, 10)},
                               decisions);
  const ad::Var batch[] = {features};
  out.inter = loss_inter(batch);
  out.intra = loss_intra(batch);
  if (config.flip_intra_gradient) out.intra = ad::testing::scale_gradient(out.intra, -1.0);
  out.boundary = loss_boundary(coarse, fstar, config.tau, decisions);
  out.preserve = loss_preserve(fstar, features, derive_seed(seed, 11), config.preserve_samples, decisions);

  const LossWeights& w = config.weights;
  ad::Var total = ad::scale(out.complete, w.complete);
  total = ad::add(total, ad::scale(out.inter, w.inter));
  total = ad::add(total, ad::scale(out.intra, w.intra));
  total = ad::add(total, ad::scale(out.boundary, w.boundary));
  total = ad::add(total, ad::scale(out.preserve, w.preserve));
  out.total = total;
  return out;
}

}  // namespace softpool
