#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "softpool/point_cloud.hpp"
#include "softpool/shapes.hpp"

namespace softpool::synth {

/// A partial scan and the complete surface it was taken from.
struct ScanPair {
  std::string id;
  ShapeSpec spec;
  Point3 view{0.0, 0.0, 1.0};
  PointCloud partial;   // partial_count points
  PointCloud complete;  // fine_count points
};

struct DatasetOptions {
  std::vector<ShapeClass> classes{ShapeClass::PlaneSlab, ShapeClass::Box, ShapeClass::Sphere, ShapeClass::Cylinder,
                                  ShapeClass::TwoLegTable};
  std::size_t count = 200;
  std::size_t fine_count = 2048;
  std::size_t partial_count = 1024;
  std::uint64_t seed = 0;
};

/// Pair `index` of a dataset: a pure function of (kind, index, options).
ScanPair make_pair(ShapeClass kind, std::size_t index, const DatasetOptions& options);

/// Classes are assigned round-robin in the order given.
std::vector<ScanPair> generate_pairs(const DatasetOptions& options);

/// Writes partial/<id>.ply, complete/<id>.ply and manifest.jsonl under
/// `dir`; returns the manifest path.
std::filesystem::path write_dataset(const std::filesystem::path& dir, const std::vector<ScanPair>& pairs);

/// Reads a manifest written by write_dataset. Paths in the manifest are
/// relative to its directory. Throws IoError / ParseError.
std::vector<ScanPair> load_dataset(const std::filesystem::path& manifest);

}  // namespace softpool::synth
