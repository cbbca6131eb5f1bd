#include "softpool/distance.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "softpool/assignment.hpp"
#include "softpool/errors.hpp"
#include "softpool/kdtree.hpp"

namespace softpool {

namespace {

void require_nonempty(const PointCloud& a, const PointCloud& b, const char* op) {
  if (a.empty() || b.empty()) throw InvalidInput(std::string(op) + ": empty point cloud");
}

double row_distance(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - y[k];
    s += d * d;
  }
  return std::sqrt(s);
}

void check_transport_shapes(RowsView a, RowsView b) {
  if (a.width != b.width || a.width == 0) throw InvalidInput("earth_mover: row widths differ");
  if (a.values.size() % a.width || b.values.size() % b.width) {
    throw InvalidInput("earth_mover: buffer is not a whole number of rows");
  }
  if (a.rows() != b.rows()) throw InvalidInput("earth_mover: sets differ in cardinality");
  if (a.rows() == 0) throw InvalidInput("earth_mover: empty sets");
  if (a.rows() > kMaxExactTransport) {
    throw InvalidInput("earth_mover: more than " + std::to_string(kMaxExactTransport) + " rows");
  }
}

}  // namespace

double mean_nearest_distance(const PointCloud& from, const PointCloud& to) {
  require_nonempty(from, to, "mean_nearest_distance");
  double sum = 0.0;
  for (const auto& p : from) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : to) best = std::min(best, squared_distance(p, q));
    sum += std::sqrt(best);
  }
  return sum / static_cast<double>(from.size());
}

double chamfer(const PointCloud& a, const PointCloud& b) {
  require_nonempty(a, b, "chamfer");
  return 0.5 * (mean_nearest_distance(a, b) + mean_nearest_distance(b, a));
}

double chamfer_accelerated(const PointCloud& a, const PointCloud& b) {
  require_nonempty(a, b, "chamfer_accelerated");
  auto one_side = [](const PointCloud& from, const PointCloud& to) {
    const KdTree tree(to.points());
    double sum = 0.0;
    for (const auto& p : from) sum += std::sqrt(tree.nearest(p).squared_distance);
    return sum / static_cast<double>(from.size());
  };
  return 0.5 * (one_side(a, b) + one_side(b, a));
}

std::vector<std::size_t> nearest_indices(std::span<const Point3> query,
                                         std::span<const Point3> target) {
  if (query.empty() || target.empty()) throw InvalidInput("nearest_indices: empty point set");
  const KdTree tree(target);
  std::vector<std::size_t> out(query.size());
  for (std::size_t i = 0; i < query.size(); ++i) out[i] = tree.nearest(query[i]).index;
  return out;
}

std::vector<std::size_t> earth_mover_matching(RowsView a, RowsView b) {
  check_transport_shapes(a, b);
  const std::size_t n = a.rows();
  std::vector<double> cost(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = row_distance(a.row(i), b.row(j));
  }
  return solve_assignment(cost, n);
}

double earth_mover(RowsView a, RowsView b) {
  const auto match = earth_mover_matching(a, b);
  double sum = 0.0;
  for (std::size_t i = 0; i < match.size(); ++i) sum += row_distance(a.row(i), b.row(match[i]));
  return sum / static_cast<double>(match.size());
}

double earth_mover(const PointCloud& a, const PointCloud& b) {
  const auto fa = a.flat();
  const auto fb = b.flat();
  return earth_mover(RowsView{fa, 3}, RowsView{fb, 3});
}

}  // namespace softpool
