#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace softpool {

using Point3 = std::array<double, 3>;

inline double squared_distance(const Point3& a, const Point3& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

inline double distance(const Point3& a, const Point3& b) {
  return std::sqrt(squared_distance(a, b));
}

/// Ordered list of 3-D points with finite coordinates.
class PointCloud {
 public:
  PointCloud() = default;
  /// Throws InvalidInput if any coordinate is NaN or infinite.
  explicit PointCloud(std::vector<Point3> points);

  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }

  const Point3& operator[](std::size_t i) const { return points_[i]; }
  std::span<const Point3> points() const noexcept { return points_; }
  auto begin() const noexcept { return points_.begin(); }
  auto end() const noexcept { return points_.end(); }

  /// Throws InvalidInput for non-finite coordinates.
  void push_back(const Point3& p);

  /// Row-major N x 3 copy of the coordinates.
  std::vector<double> flat() const;
  static PointCloud from_flat(std::span<const double> xyz);

  PointCloud permuted(std::span<const std::size_t> order) const;
  PointCloud subset(std::span<const std::size_t> indices) const;

  friend bool operator==(const PointCloud&, const PointCloud&) = default;

 private:
  std::vector<Point3> points_;
};

/// Indices of `rows` (each `width` wide, row-major) in lexicographic order of
/// their contents. Equal rows keep their relative order.
std::vector<std::size_t> lexicographic_order(std::span<const double> rows, std::size_t width);

/// Picks `n` row indices out of `total`: without replacement when total >= n,
/// otherwise every row once plus uniformly drawn duplicates, then shuffled.
/// `order` maps the draw onto actual rows, so passing a content-sorted order
/// makes the selected multiset independent of how the rows were stored.
std::vector<std::size_t> draw_rows(std::span<const std::size_t> order, std::size_t n,
                                   std::uint64_t seed);

/// Resamples to exactly `n` points (subsample without replacement, or keep
/// everything and duplicate random points to fill the shortfall). The draw
/// runs over the points in content order, so resample(shuffled p) equals
/// resample(p) for every shuffle.
PointCloud resample(const PointCloud& p, std::size_t n, std::uint64_t seed);

}  // namespace softpool
