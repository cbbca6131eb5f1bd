#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "softpool/tensor.hpp"

namespace softpool {

struct NamedTensor {
  std::string name;
  Tensor value;

  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

/// Binary parameter checkpoint:
///
///   "SPNCKPT1"
///   repeated per parameter:
///     u64 name length, name bytes, u64 rank, rank x u64 extents,
///     product(extents) x f64 values
///
/// All integers and floats are little-endian.
inline constexpr char kCheckpointMagic[] = "SPNCKPT1";

std::string encode_checkpoint(std::span<const NamedTensor> params);
/// Throws ParseError on a bad magic, truncated record or trailing garbage.
std::vector<NamedTensor> decode_checkpoint(std::string_view bytes);

/// Writes through a temporary file and renames it into place, so an
/// interrupted write leaves the previous checkpoint intact.
void write_checkpoint(const std::filesystem::path& path, std::span<const NamedTensor> params);
std::vector<NamedTensor> read_checkpoint(const std::filesystem::path& path);

}  // namespace softpool
