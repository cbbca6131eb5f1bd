#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "softpool/point_cloud.hpp"

namespace softpool {

/// A distance with the multiplier used when tabulating it.
struct DistanceReport {
  double value = 0.0;
  double scale = 1.0;

  double scaled() const noexcept { return value * scale; }

  static DistanceReport chamfer(double v) { return {v, 1e3}; }
  static DistanceReport earth_mover(double v) { return {v, 1e2}; }
};

/// Row-major set of `width`-dimensional vectors.
struct RowsView {
  std::span<const double> values;
  std::size_t width = 0;

  std::size_t rows() const noexcept { return width ? values.size() / width : 0; }
  std::span<const double> row(std::size_t i) const { return values.subspan(i * width, width); }
};

/// Mean Euclidean distance from each point of `from` to its nearest point in
/// `to` (brute force).
double mean_nearest_distance(const PointCloud& from, const PointCloud& to);

/// Symmetric Chamfer distance: half the sum of the two one-sided mean
/// nearest-neighbour distances (Euclidean, not squared). O(|a||b|).
double chamfer(const PointCloud& a, const PointCloud& b);

/// Same value as chamfer() using a k-d tree per side.
double chamfer_accelerated(const PointCloud& a, const PointCloud& b);

/// For each point of `query`, the index of its nearest point in `target`
/// (k-d tree; lowest index among ties).
std::vector<std::size_t> nearest_indices(std::span<const Point3> query,
                                         std::span<const Point3> target);

/// Largest cardinality accepted by earth_mover().
inline constexpr std::size_t kMaxExactTransport = 1024;

/// Optimal bijection between two equal-size row sets under Euclidean cost.
/// Returns the column matched to each row of `a`.
std::vector<std::size_t> earth_mover_matching(RowsView a, RowsView b);

/// Earth mover's distance: minimum over bijections of the mean Euclidean
/// distance between matched rows. Requires |a| == |b| <= kMaxExactTransport
/// and equal widths.
double earth_mover(RowsView a, RowsView b);
double earth_mover(const PointCloud& a, const PointCloud& b);

}  // namespace softpool
