#include "softpool/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "softpool/errors.hpp"

namespace softpool {

namespace {

constexpr std::size_t kMagicLength = 8;

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  bool done() const { return pos_ == bytes_.size(); }

  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += 8;
    return v;
  }

  std::string_view take(std::size_t n, const char* what) {
    need(n, what);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) throw ParseError(std::string("checkpoint truncated in ") + what, 0);
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_checkpoint(std::span<const NamedTensor> params) {
  std::string out(kCheckpointMagic, kMagicLength);
  for (const auto& p : params) {
    put_u64(out, p.name.size());
    out += p.name;
    put_u64(out, p.value.rank());
    for (std::size_t e : p.value.shape()) put_u64(out, e);
    for (double v : p.value.data()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

std::vector<NamedTensor> decode_checkpoint(std::string_view bytes) {
  if (bytes.size() < kMagicLength || bytes.substr(0, kMagicLength) != std::string_view(kCheckpointMagic, kMagicLength)) {
    throw ParseError("not a checkpoint: bad magic", 0);
  }
  Reader in(bytes.substr(kMagicLength));
  std::vector<NamedTensor> out;
  while (!in.done()) {
    NamedTensor p;
    const auto name_len = in.u64("name length");
    p.name = std::string(in.take(name_len, "name"));
    const auto rank = in.u64("rank");
    if (rank > 8) throw ParseError("checkpoint rank " + std::to_string(rank) + " is implausible", 0);
    Shape shape(rank);
    for (auto& e : shape) e = in.u64("extents");
    const std::size_t count = shape_size(shape);
    std::vector<double> data(count);
    for (auto& v : data) v = std::bit_cast<double>(in.u64("values"));
    p.value = Tensor(std::move(shape), std::move(data));
    out.push_back(std::move(p));
  }
  return out;
}

void write_checkpoint(const std::filesystem::path& path, std::span<const NamedTensor> params) {
  const std::string bytes = encode_checkpoint(params);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into place at " + path.string() + ": " + ec.message());
}

std::vector<NamedTensor> read_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return decode_checkpoint(ss.str());
}

}  // namespace softpool
