#include "softpool/point_cloud.hpp"

#include <algorithm>
#include <numeric>

#include "softpool/errors.hpp"
#include "softpool/random.hpp"

namespace softpool {

namespace {

void require_finite(const Point3& p) {
  if (!std::isfinite(p[0]) || !std::isfinite(p[1]) || !std::isfinite(p[2])) {
    throw InvalidInput("point cloud coordinates must be finite");
  }
}

}  // namespace

PointCloud::PointCloud(std::vector<Point3> points) : points_(std::move(points)) {
  for (const auto& p : points_) require_finite(p);
}

void PointCloud::push_back(const Point3& p) {
  require_finite(p);
  points_.push_back(p);
}

std::vector<double> PointCloud::flat() const {
  std::vector<double> out;
  out.reserve(points_.size() * 3);
  for (const auto& p : points_) out.insert(out.end(), p.begin(), p.end());
  return out;
}

PointCloud PointCloud::from_flat(std::span<const double> xyz) {
  if (xyz.size() % 3 != 0) throw InvalidInput("flat coordinate buffer is not a multiple of 3");
  std::vector<Point3> pts(xyz.size() / 3);
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = {xyz[3 * i], xyz[3 * i + 1], xyz[3 * i + 2]};
  return PointCloud(std::move(pts));
}

PointCloud PointCloud::permuted(std::span<const std::size_t> order) const {
  if (order.size() != points_.size()) throw InvalidInput("permutation length does not match cloud");
  return subset(order);
}

PointCloud PointCloud::subset(std::span<const std::size_t> indices) const {
  PointCloud out;
  out.points_.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= points_.size()) throw InvalidInput("point index out of range");
    out.points_.push_back(points_[i]);
  }
  return out;
}

std::vector<std::size_t> lexicographic_order(std::span<const double> rows, std::size_t width) {
  const std::size_t n = width ? rows.size() / width : 0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(rows.begin() + a * width, rows.begin() + (a + 1) * width,
                                        rows.begin() + b * width, rows.begin() + (b + 1) * width);
  });
  return order;
}

std::vector<std::size_t> draw_rows(std::span<const std::size_t> order, std::size_t n,
                                   std::uint64_t seed) {
  if (n == 0) throw InvalidInput("sample count must be positive");
  if (order.empty()) throw InvalidInput("cannot draw from an empty set");
  Rng rng(seed);
  std::vector<std::size_t> picked(order.begin(), order.end());
  if (picked.size() >= n) {
    // Partial Fisher-Yates: the first n slots are a uniform draw without replacement.
    for (std::size_t i = 0; i < n; ++i) {
      std::swap(picked[i], picked[i + uniform_index(rng, picked.size() - i)]);
    }
    picked.resize(n);
  } else {
    const std::size_t have = picked.size();
    while (picked.size() < n) picked.push_back(order[uniform_index(rng, have)]);
    shuffle(picked, rng);
  }
  return picked;
}

PointCloud resample(const PointCloud& p, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InvalidInput("resample: n must be positive");
  if (p.empty()) throw InvalidInput("resample: empty cloud");
  const auto flat = p.flat();
  const auto order = lexicographic_order(flat, 3);
  return p.subset(draw_rows(order, n, seed));
}

}  // namespace softpool
