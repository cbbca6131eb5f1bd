#include "softpool/dataset.hpp"

#include <cstdio>
#include <nlohmann/json.hpp>

#include "softpool/errors.hpp"
#include "softpool/io.hpp"
#include "softpool/random.hpp"

namespace softpool::synth {

namespace {

// Views that see fewer samples than this are redrawn.
constexpr std::size_t kMinVisible = 64;

std::string pair_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "pair-%05zu", index);
  return buf;
}

}  // namespace

ScanPair make_pair(ShapeClass kind, std::size_t index, const DatasetOptions& options) {
  Rng rng(derive_seed(options.seed, index));
  ScanPair pair;
  pair.id = pair_id(index);
  pair.spec = random_spec(kind, rng);
  const std::uint64_t surface_seed = rng();
  pair.complete = sample_shape(pair.spec, options.fine_count, surface_seed);
  // The scan sees a denser sampling than the target so that its visible part
  // does not need many duplicates.
  const SurfaceSample dense = sample_surface(pair.spec, 4 * options.partial_count, derive_seed(surface_seed, 1));
  for (int attempt = 0;; ++attempt) {
    pair.view = random_direction(rng);
    if (visible_points(pair.spec, dense, pair.view).size() >= kMinVisible) break;
    if (attempt == 64) throw DegenerateView("no usable view found for " + pair.id);
  }
  pair.partial = partial_scan(pair.spec, dense, pair.view, rng(), options.partial_count);
  return pair;
}

std::vector<ScanPair> generate_pairs(const DatasetOptions& options) {
  if (options.classes.empty()) throw InvalidInput("dataset needs at least one class");
  std::vector<ScanPair> pairs;
  pairs.reserve(options.count);
  for (std::size_t i = 0; i < options.count; ++i) {
    pairs.push_back(make_pair(options.classes[i % options.classes.size()], i, options));
  }
  return pairs;
}

std::filesystem::path write_dataset(const std::filesystem::path& dir, const std::vector<ScanPair>& pairs) {
  std::string manifest;
  for (const auto& p : pairs) {
    const std::string partial = "partial/" + p.id + ".ply";
    const std::string complete = "complete/" + p.id + ".ply";
    io::write_point_cloud(dir / partial, p.partial);
    io::write_point_cloud(dir / complete, p.complete);
    const nlohmann::ordered_json record = {
        {"id", p.id},
        {"class", std::string(class_name(p.spec.kind))},
        {"partial_path", partial},
        {"complete_path", complete},
        {"pose", {{"yaw", p.spec.pose.yaw}, {"translation", p.spec.pose.translation}}},
        {"size", p.spec.size},
        {"view", p.view},
    };
    manifest += record.dump();
    manifest.push_back('\n');
  }
  const auto path = dir / "manifest.jsonl";
  io::write_file_atomic(path, manifest);
  return path;
}

std::vector<ScanPair> load_dataset(const std::filesystem::path& manifest) {
  const std::string text = io::read_file(manifest);
  const auto base = manifest.parent_path();
  std::vector<ScanPair> pairs;
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      ScanPair p;
      p.id = j.at("id").get<std::string>();
      p.spec.kind = parse_class(j.at("class").get<std::string>());
      p.spec.pose.yaw = j.at("pose").at("yaw").get<double>();
      p.spec.pose.translation = j.at("pose").at("translation").get<Point3>();
      if (j.contains("size")) p.spec.size = j.at("size").get<Point3>();
      if (j.contains("view")) p.view = j.at("view").get<Point3>();
      p.partial = io::read_point_cloud(base / j.at("partial_path").get<std::string>());
      p.complete = io::read_point_cloud(base / j.at("complete_path").get<std::string>());
      pairs.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("manifest: ") + e.what(), line_no);
    } catch (const InvalidInput& e) {
      throw ParseError(std::string("manifest: ") + e.what(), line_no);
    }
  }
  return pairs;
}

}  // namespace softpool::synth
