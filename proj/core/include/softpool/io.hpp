#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "softpool/point_cloud.hpp"

namespace softpool::io {

/// "x y z" per line, shortest round-trip decimal form, LF endings.
std::string format_xyz(const PointCloud& cloud);
/// Accepts LF or CRLF endings, blank lines, and spaces or tabs between
/// fields. Throws ParseError with the 1-based line of a malformed row.
PointCloud parse_xyz(std::string_view text);

/// Binary little-endian PLY with one vertex element of double x, y, z.
std::string format_ply(const PointCloud& cloud);
/// Throws ParseError for a malformed header or a body shorter or longer
/// than the declared vertex count.
PointCloud parse_ply(std::string_view bytes);

/// Dispatch on extension (.xyz or .ply). Throws IoError when the file cannot
/// be opened or written, InvalidInput for an unknown extension.
PointCloud read_point_cloud(const std::filesystem::path& path);
void write_point_cloud(const std::filesystem::path& path, const PointCloud& cloud);

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// One non-negative integer per line.
void write_indices(const std::filesystem::path& path, const std::vector<std::size_t>& values);

}  // namespace softpool::io
