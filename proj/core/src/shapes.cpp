#include "softpool/shapes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>

#include "softpool/errors.hpp"

namespace softpool::synth {

namespace {

constexpr std::array<std::pair<ShapeClass, std::string_view>, 6> kNames{{
    {ShapeClass::PlaneSlab, "plane-slab"},
    {ShapeClass::Box, "box"},
    {ShapeClass::Sphere, "sphere"},
    {ShapeClass::Cylinder, "cylinder"},
    {ShapeClass::TwoLegTable, "two-leg-table"},
    {ShapeClass::FourLegTable, "four-leg-table"},
}};

Point3 add(const Point3& a, const Point3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
Point3 sub(const Point3& a, const Point3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
Point3 mul(const Point3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }
double dot(const Point3& a, const Point3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
Point3 cross(const Point3& a, const Point3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
double norm(const Point3& a) { return std::sqrt(dot(a, a)); }

// Box [lo, lo + ext] as six outward-facing rectangles.
void push_box(std::vector<Patch>& out, const Point3& lo, const Point3& ext) {
  const Point3 ex{ext[0], 0, 0}, ey{0, ext[1], 0}, ez{0, 0, ext[2]};
  const Point3 hi = add(lo, ext);
  auto rect = [&](Point3 origin, Point3 u, Point3 v, Point3 n) {
    Patch p;
    p.kind = Patch::Kind::Rectangle;
    p.origin = origin;
    p.u = u;
    p.v = v;
    p.normal = n;
    out.push_back(p);
  };
  rect(lo, ey, ez, {-1, 0, 0});
  rect({hi[0], lo[1], lo[2]}, ey, ez, {1, 0, 0});
  rect(lo, ex, ez, {0, -1, 0});
  rect({lo[0], hi[1], lo[2]}, ex, ez, {0, 1, 0});
  rect(lo, ex, ey, {0, 0, -1});
  rect({lo[0], lo[1], hi[2]}, ex, ey, {0, 0, 1});
}

void push_cylinder(std::vector<Patch>& out, const Point3& base, double radius, double height, bool top_cap) {
  Patch side;
  side.kind = Patch::Kind::CylinderSide;
  side.origin = base;
  side.radius = radius;
  side.height = height;
  out.push_back(side);
  Patch bottom;
  bottom.kind = Patch::Kind::Disk;
  bottom.origin = base;
  bottom.radius = radius;
  bottom.normal = {0, 0, -1};
  out.push_back(bottom);
  if (top_cap) {
    Patch top = bottom;
    top.origin = add(base, {0, 0, height});
    top.normal = {0, 0, 1};
    out.push_back(top);
  }
}

void pose_patch(Patch& p, const Pose& pose) {
  p.origin = pose.apply(p.origin);
  p.u = pose.rotate(p.u);
  p.v = pose.rotate(p.v);
  p.normal = pose.rotate(p.normal);
}

// Smallest ray parameter t > t_min where origin + t * dir meets the patch.
std::optional<double> intersect(const Patch& p, const Point3& o, const Point3& d, double t_min) {
  switch (p.kind) {
    case Patch::Kind::Rectangle:
    case Patch::Kind::Disk: {
      const Point3 n = p.kind == Patch::Kind::Rectangle ? cross(p.u, p.v) : p.normal;
      const double denom = dot(n, d);
      if (std::abs(denom) < 1e-15) return std::nullopt;
      const double t = dot(n, sub(p.origin, o)) / denom;
      if (!(t > t_min)) return std::nullopt;
      const Point3 rel = sub(add(o, mul(d, t)), p.origin);
      if (p.kind == Patch::Kind::Disk) {
        return dot(rel, rel) <= p.radius * p.radius ? std::optional(t) : std::nullopt;
      }
      const double s = dot(rel, p.u) / dot(p.u, p.u);
      const double r = dot(rel, p.v) / dot(p.v, p.v);
      return (s >= 0 && s <= 1 && r >= 0 && r <= 1) ? std::optional(t) : std::nullopt;
    }
    case Patch::Kind::Sphere: {
      const Point3 oc = sub(o, p.origin);
      const double b = dot(oc, d);
      const double c = dot(oc, oc) - p.radius * p.radius;
      const double disc = b * b - c;
      if (disc < 0) return std::nullopt;
      const double sq = std::sqrt(disc);
      for (double t : {-b - sq, -b + sq}) {
        if (t > t_min) return t;
      }
      return std::nullopt;
    }
    case Patch::Kind::CylinderSide: {
      const double ox = o[0] - p.origin[0], oy = o[1] - p.origin[1];
      const double a = d[0] * d[0] + d[1] * d[1];
      if (a < 1e-15) return std::nullopt;
      const double b = ox * d[0] + oy * d[1];
      const double c = ox * ox + oy * oy - p.radius * p.radius;
      const double disc = b * b - a * c;
      if (disc < 0) return std::nullopt;
      const double sq = std::sqrt(disc);
      for (double t : {(-b - sq) / a, (-b + sq) / a}) {
        if (!(t > t_min)) continue;
        const double z = o[2] + t * d[2] - p.origin[2];
        if (z >= 0 && z <= p.height) return t;
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

}  // namespace

std::string_view class_name(ShapeClass c) {
  for (const auto& [k, name] : kNames) {
    if (k == c) return name;
  }
  return "unknown";
}

ShapeClass parse_class(std::string_view name) {
  for (const auto& [k, n] : kNames) {
    if (n == name) return k;
  }
  throw InvalidInput("unknown shape class '" + std::string(name) + "'");
}

Point3 Pose::rotate(const Point3& v) const {
  const double c = std::cos(yaw), s = std::sin(yaw);
  return {c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]};
}

Point3 Pose::apply(const Point3& p) const { return add(rotate(p), translation); }

double Patch::area() const {
  switch (kind) {
    case Kind::Rectangle: return norm(cross(u, v));
    case Kind::Disk: return std::numbers::pi * radius * radius;
    case Kind::Sphere: return 4.0 * std::numbers::pi * radius * radius;
    case Kind::CylinderSide: return 2.0 * std::numbers::pi * radius * height;
  }
  return 0.0;
}

std::vector<Patch> build_patches(const ShapeSpec& spec) {
  const auto& s = spec.size;
  auto require_positive = [](std::initializer_list<double> values) {
    for (double v : values) {
      if (!(v > 0.0) || !std::isfinite(v)) throw InvalidInput("shape sizes must be positive and finite");
    }
  };
  std::vector<Patch> out;
  switch (spec.kind) {
    case ShapeClass::PlaneSlab: {
      require_positive({s[0], s[1]});
      Patch p;
      p.kind = Patch::Kind::Rectangle;
      p.origin = {-s[0] / 2, -s[1] / 2, 0};
      p.u = {s[0], 0, 0};
      p.v = {0, s[1], 0};
      p.normal = {0, 0, 1};
      p.two_sided = true;
      out.push_back(p);
      break;
    }
    case ShapeClass::Box:
      require_positive({s[0], s[1], s[2]});
      push_box(out, {-s[0] / 2, -s[1] / 2, -s[2] / 2}, s);
      break;
    case ShapeClass::Sphere: {
      require_positive({s[0]});
      Patch p;
      p.kind = Patch::Kind::Sphere;
      p.radius = s[0];
      out.push_back(p);
      break;
    }
    case ShapeClass::Cylinder:
      require_positive({s[0], s[1]});
      push_cylinder(out, {0, 0, -s[1] / 2}, s[0], s[1], true);
      break;
    case ShapeClass::TwoLegTable:
    case ShapeClass::FourLegTable: {
      require_positive({s[0], s[1], s[2]});
      const double thickness = 0.08 * s[2];
      const double leg_radius = 0.05 * std::min(s[0], s[1]);
      const double leg_height = s[2] - thickness;
      const double z0 = -s[2] / 2;
      push_box(out, {-s[0] / 2, -s[1] / 2, z0 + leg_height}, {s[0], s[1], thickness});
      const double inset_x = s[0] / 2 - 2 * leg_radius;
      const double inset_y = s[1] / 2 - 2 * leg_radius;
      std::vector<std::array<double, 2>> feet;
      if (spec.kind == ShapeClass::TwoLegTable) {
        feet = {{-inset_x, 0}, {inset_x, 0}};
      } else {
        feet = {{-inset_x, -inset_y}, {inset_x, -inset_y}, {-inset_x, inset_y}, {inset_x, inset_y}};
      }
      // Legs end under the top, so they have no top cap.
      for (const auto& f : feet) push_cylinder(out, {f[0], f[1], z0}, leg_radius, leg_height, false);
      break;
    }
  }
  for (auto& p : out) pose_patch(p, spec.pose);
  return out;
}

SurfaceSample sample_surface(const ShapeSpec& spec, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InvalidInput("sample count must be positive");
  const auto patches = build_patches(spec);
  std::vector<double> cumulative;
  double total = 0.0;
  for (const auto& p : patches) {
    total += p.area();
    cumulative.push_back(total);
  }
  if (!(total > 0.0)) throw InvalidInput("shape has zero surface area");

  Rng rng(seed);
  SurfaceSample out;
  std::vector<Point3> pts;
  pts.reserve(n);
  out.normals.reserve(n);
  out.patch.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double pick = uniform(rng, 0.0, total);
    const std::size_t k = std::min<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin(), patches.size() - 1);
    const Patch& p = patches[k];
    const double a = uniform01(rng), b = uniform01(rng);
    Point3 x{}, normal{};
    switch (p.kind) {
      case Patch::Kind::Rectangle:
        x = add(p.origin, add(mul(p.u, a), mul(p.v, b)));
        normal = p.normal;
        break;
      case Patch::Kind::Disk: {
        // Disk normals are always +-z, so the in-plane axes are x and y.
        const double r = p.radius * std::sqrt(a), phi = 2.0 * std::numbers::pi * b;
        x = add(p.origin, {r * std::cos(phi), r * std::sin(phi), 0.0});
        normal = p.normal;
        break;
      }
      case Patch::Kind::Sphere: {
        const double z = 1.0 - 2.0 * a, phi = 2.0 * std::numbers::pi * b;
        const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        normal = {rho * std::cos(phi), rho * std::sin(phi), z};
        x = add(p.origin, mul(normal, p.radius));
        break;
      }
      case Patch::Kind::CylinderSide: {
        const double phi = 2.0 * std::numbers::pi * a;
        normal = {std::cos(phi), std::sin(phi), 0.0};
        x = add(p.origin, {p.radius * normal[0], p.radius * normal[1], p.height * b});
        break;
      }
    }
    pts.push_back(x);
    out.normals.push_back(normal);
    out.patch.push_back(k);
  }
  out.points = PointCloud(std::move(pts));
  return out;
}

PointCloud sample_shape(const ShapeSpec& spec, std::size_t n, std::uint64_t seed) {
  return sample_surface(spec, n, seed).points;
}

std::vector<std::size_t> visible_points(const ShapeSpec& spec, const SurfaceSample& surface, const Point3& view_dir) {
  const auto patches = build_patches(spec);
  const Point3 to_camera = mul(view_dir, -1.0);
  double extent = 0.0;
  for (double v : spec.size) extent = std::max(extent, std::abs(v));
  const double t_min = 1e-9 * std::max(1.0, extent);

  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < surface.points.size(); ++i) {
    const double facing = dot(surface.normals[i], view_dir);
    const bool two_sided = patches[surface.patch[i]].two_sided;
    if (two_sided ? std::abs(facing) < 1e-12 : !(facing < 0.0)) continue;
    bool blocked = false;
    for (std::size_t k = 0; k < patches.size() && !blocked; ++k) {
      if (auto t = intersect(patches[k], surface.points[i], to_camera, t_min)) {
        // A patch can only block from the far side of the sample itself.
        blocked = !(k == surface.patch[i] && *t < 1e3 * t_min);
      }
    }
    if (!blocked) kept.push_back(i);
  }
  return kept;
}

PointCloud partial_scan(const ShapeSpec& spec, const SurfaceSample& surface, const Point3& view_dir,
                        std::uint64_t seed, std::size_t count) {
  if (surface.points.empty()) throw InvalidInput("partial_scan: empty cloud");
  if (std::abs(norm(view_dir) - 1.0) > 1e-9) throw InvalidInput("partial_scan: view direction must be a unit vector");
  const auto kept = visible_points(spec, surface, view_dir);
  if (kept.empty()) throw DegenerateView("no surface point is visible from this view");
  return resample(surface.points.subset(kept), count, seed);
}

ShapeSpec random_spec(ShapeClass kind, Rng& rng) {
  ShapeSpec s;
  s.kind = kind;
  switch (kind) {
    case ShapeClass::PlaneSlab: s.size = {uniform(rng, 0.8, 1.2), uniform(rng, 0.4, 0.8), 0.0}; break;
    case ShapeClass::Box: s.size = {uniform(rng, 0.4, 0.9), uniform(rng, 0.4, 0.9), uniform(rng, 0.4, 0.9)}; break;
    case ShapeClass::Sphere: s.size = {uniform(rng, 0.3, 0.5), 0.0, 0.0}; break;
    case ShapeClass::Cylinder: s.size = {uniform(rng, 0.2, 0.35), uniform(rng, 0.6, 1.0), 0.0}; break;
    case ShapeClass::TwoLegTable:
    case ShapeClass::FourLegTable:
      s.size = {uniform(rng, 0.8, 1.1), uniform(rng, 0.5, 0.8), uniform(rng, 0.5, 0.8)};
      break;
  }
  s.pose.yaw = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  return s;
}

Point3 random_direction(Rng& rng) {
  const double z = uniform(rng, -1.0, 1.0), phi = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {rho * std::cos(phi), rho * std::sin(phi), z};
}

}  // namespace softpool::synth
