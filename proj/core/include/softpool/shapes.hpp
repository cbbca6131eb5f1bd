#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "softpool/point_cloud.hpp"
#include "softpool/random.hpp"

namespace softpool::synth {

enum class ShapeClass { PlaneSlab, Box, Sphere, Cylinder, TwoLegTable, FourLegTable };

std::string_view class_name(ShapeClass c);
/// Throws InvalidInput for an unknown name.
ShapeClass parse_class(std::string_view name);

/// Rotation about +z (radians) followed by a translation.
struct Pose {
  double yaw = 0.0;
  Point3 translation{0.0, 0.0, 0.0};

  Point3 apply(const Point3& p) const;
  Point3 rotate(const Point3& v) const;
};

/// Size parameters per class, all lengths in model units:
///   PlaneSlab: size = {width, depth, -}; a two-sided rectangle in z = 0
///   Box:       size = {x, y, z} extents
///   Sphere:    size = {radius, -, -}
///   Cylinder:  size = {radius, height, -}, closed, axis +z
///   Tables:    size = {top width, top depth, height}; leg radius and top
///              thickness are fixed fractions of the size
struct ShapeSpec {
  ShapeClass kind = ShapeClass::Sphere;
  Point3 size{1.0, 1.0, 1.0};
  Pose pose;
};

/// Points on the surface with their outward normals and the index of the
/// surface patch each was drawn from.
struct SurfaceSample {
  PointCloud points;
  std::vector<Point3> normals;
  std::vector<std::size_t> patch;
};

/// One flat or curved piece of a shape's surface, already posed.
struct Patch {
  enum class Kind { Rectangle, Disk, Sphere, CylinderSide };
  Kind kind = Kind::Rectangle;
  Point3 origin{};   // rectangle corner, disk/sphere centre, cylinder base centre
  Point3 u{}, v{};   // rectangle edges
  Point3 normal{};   // rectangle/disk outward normal
  double radius = 0.0;
  double height = 0.0;  // cylinder, along +z
  bool two_sided = false;

  double area() const;
};

/// The posed patches of `spec`. Throws InvalidInput for non-positive or
/// non-finite sizes.
std::vector<Patch> build_patches(const ShapeSpec& spec);

/// `n` points uniformly distributed by surface area; deterministic per seed.
SurfaceSample sample_surface(const ShapeSpec& spec, std::size_t n, std::uint64_t seed);
PointCloud sample_shape(const ShapeSpec& spec, std::size_t n, std::uint64_t seed);

/// Indices of the samples seen by a camera looking along `view_dir`: the
/// normal faces the camera (n . view_dir < 0; two-sided patches always do
/// unless edge-on) and no patch blocks the ray back toward the camera.
std::vector<std::size_t> visible_points(const ShapeSpec& spec, const SurfaceSample& surface, const Point3& view_dir);

/// Visible subset resampled to `count` points (content-ordered draw).
/// Throws DegenerateView when nothing is visible, InvalidInput for a
/// non-unit view direction.
PointCloud partial_scan(const ShapeSpec& spec, const SurfaceSample& surface, const Point3& view_dir,
                        std::uint64_t seed, std::size_t count = 1024);

/// Random sizes and yaw for one class, drawn from `rng`.
ShapeSpec random_spec(ShapeClass kind, Rng& rng);

/// Uniformly distributed unit vector.
Point3 random_direction(Rng& rng);

}  // namespace softpool::synth
