#include "softpool/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "softpool/errors.hpp"

namespace softpool::io {

namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

bool parse_double(std::string_view s, double& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

// Splits into lines, dropping one trailing '\r' from each.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    fn(line, ++line_no);
    pos = end + 1;
  }
}

void put_le(std::string& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
}

double get_le(const char* p) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[b])) << (8 * b);
  return std::bit_cast<double>(bits);
}

}  // namespace

std::string format_xyz(const PointCloud& cloud) {
  std::string out;
  out.reserve(cloud.size() * 60);
  for (const auto& p : cloud) {
    append_double(out, p[0]);
    out.push_back(' ');
    append_double(out, p[1]);
    out.push_back(' ');
    append_double(out, p[2]);
    out.push_back('\n');
  }
  return out;
}

PointCloud parse_xyz(std::string_view text) {
  std::vector<Point3> pts;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    const auto fields = split_fields(line);
    if (fields.empty()) return;
    if (fields.size() != 3) throw ParseError("expected 3 coordinates, found " + std::to_string(fields.size()), line_no);
    Point3 p{};
    for (int k = 0; k < 3; ++k) {
      if (!parse_double(fields[k], p[k]) || !std::isfinite(p[k])) {
        throw ParseError("invalid coordinate '" + std::string(fields[k]) + "'", line_no);
      }
    }
    pts.push_back(p);
  });
  return PointCloud(std::move(pts));
}

std::string format_ply(const PointCloud& cloud) {
  std::string out = "ply\nformat binary_little_endian 1.0\nelement vertex " + std::to_string(cloud.size()) +
                    "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
  out.reserve(out.size() + cloud.size() * 24);
  for (const auto& p : cloud) {
    for (double v : p) put_le(out, v);
  }
  return out;
}

PointCloud parse_ply(std::string_view bytes) {
  std::size_t pos = 0, line_no = 0;
  auto next_line = [&]() -> std::string_view {
    const std::size_t end = bytes.find('\n', pos);
    if (end == std::string_view::npos) throw ParseError("PLY header is not terminated", line_no + 1);
    std::string_view line = bytes.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = end + 1;
    ++line_no;
    return line;
  };

  if (next_line() != "ply") throw ParseError("missing 'ply' magic", 1);
  bool have_format = false;
  std::size_t count = 0;
  bool have_vertex = false;
  std::vector<std::string> props;
  while (true) {
    const std::string_view line = next_line();
    const auto f = split_fields(line);
    if (f.empty()) continue;
    if (f[0] == "comment" || f[0] == "obj_info") continue;
    if (f[0] == "end_header") break;
    if (f[0] == "format") {
      if (f.size() != 3 || f[1] != "binary_little_endian" || f[2] != "1.0") {
        throw ParseError("only binary_little_endian 1.0 is supported", line_no);
      }
      have_format = true;
    } else if (f[0] == "element") {
      if (have_vertex || f.size() != 3 || f[1] != "vertex") throw ParseError("expected a single vertex element", line_no);
      const auto res = std::from_chars(f[2].data(), f[2].data() + f[2].size(), count);
      if (res.ec != std::errc() || res.ptr != f[2].data() + f[2].size()) {
        throw ParseError("invalid vertex count", line_no);
      }
      have_vertex = true;
    } else if (f[0] == "property") {
      if (!have_vertex || f.size() != 3 || (f[1] != "double" && f[1] != "float64")) {
        throw ParseError("expected 'property double <name>'", line_no);
      }
      props.emplace_back(f[2]);
    } else {
      throw ParseError("unexpected header line '" + std::string(line) + "'", line_no);
    }
  }
  if (!have_format) throw ParseError("missing format line", line_no);
  if (!have_vertex) throw ParseError("missing vertex element", line_no);
  if (props != std::vector<std::string>{"x", "y", "z"}) throw ParseError("vertex properties must be x y z", line_no);

  const std::size_t body = bytes.size() - pos;
  if (body != count * 24) {
    throw ParseError("PLY body holds " + std::to_string(body) + " bytes, expected " + std::to_string(count * 24), 0);
  }
  std::vector<Point3> pts(count);
  const char* p = bytes.data() + pos;
  for (std::size_t i = 0; i < count; ++i) {
    for (int k = 0; k < 3; ++k, p += 8) pts[i][k] = get_le(p);
    for (double v : pts[i]) {
      if (!std::isfinite(v)) throw ParseError("non-finite vertex " + std::to_string(i), 0);
    }
  }
  return PointCloud(std::move(pts));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + path.string());
  return std::move(ss).str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

PointCloud read_point_cloud(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext != ".xyz" && ext != ".ply") throw InvalidInput("unsupported point cloud extension '" + ext + "'");
  const std::string data = read_file(path);
  return ext == ".xyz" ? parse_xyz(data) : parse_ply(data);
}

void write_point_cloud(const std::filesystem::path& path, const PointCloud& cloud) {
  const auto ext = path.extension().string();
  if (ext == ".xyz") {
    write_file_atomic(path, format_xyz(cloud));
  } else if (ext == ".ply") {
    write_file_atomic(path, format_ply(cloud));
  } else {
    throw InvalidInput("unsupported point cloud extension '" + ext + "'");
  }
}

void write_indices(const std::filesystem::path& path, const std::vector<std::size_t>& values) {
  std::string out;
  for (std::size_t v : values) {
    out += std::to_string(v);
    out.push_back('\n');
  }
  write_file_atomic(path, out);
}

}  // namespace softpool::io
