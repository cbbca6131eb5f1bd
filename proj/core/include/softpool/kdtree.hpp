#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "softpool/point_cloud.hpp"

namespace softpool {

/// Static 3-D k-d tree over a borrowed point array.
///
/// The tree stores indices only; the referenced points must outlive it.
/// Nearest-neighbour queries return the exact minimum squared distance
/// computed with squared_distance(), so results agree bit-for-bit with a
/// brute-force scan. Among equidistant candidates the lowest index wins.
class KdTree {
 public:
  struct Hit {
    std::size_t index;
    double squared_distance;
  };

  explicit KdTree(std::span<const Point3> points, std::size_t leaf_size = 8);

  Hit nearest(const Point3& query) const;
  std::size_t size() const noexcept { return points_.size(); }

 private:
  struct Node {
    // Leaf when axis < 0: [begin, end) into order_.
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t axis = -1;
    double split = 0.0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::uint32_t node, const Point3& q, Hit& best) const;

  std::span<const Point3> points_;
  std::size_t leaf_size_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace softpool
