#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "softpool/checkpoint.hpp"
#include "softpool/decoder.hpp"
#include "softpool/encoder.hpp"
#include "softpool/point_cloud.hpp"

namespace softpool {

/// Network shape. coarse = N_f * N_r points, fine = coarse * upsample.
struct Architecture {
  std::size_t n_in = 1024;
  std::vector<std::size_t> hidden{512, 512};
  std::size_t n_f = 8;
  std::size_t n_r = 32;
  std::size_t n_p = 32;
  std::size_t upsample = 64;
  double slope = 0.2;
  bool final_linear = false;

  std::size_t coarse_count() const noexcept { return n_f * n_r; }
  std::size_t fine_count() const noexcept { return coarse_count() * upsample; }

  /// Throws ConfigError for a shape that cannot be built.
  void validate() const;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

/// Output of one forward pass on a tape.
struct Forward {
  ad::Var features;  // F, N_in x N_f
  ad::Var fstar;     // F*, region-blocked
  ad::Var coarse;
  ad::Var fine;
};

/// Value-level result of inference.
struct Completion {
  Tensor features;
  Tensor fstar;
  PointCloud coarse;
  PointCloud fine;
};

/// 1-based inclusive range of sorted rows to pool; defaults to [1 : N_r].
struct RowRange {
  std::size_t lo = 1;
  std::size_t hi = 0;
};

/// Soft-pool encoder plus regional-convolution decoder with named
/// parameters:
///   encoder.layer<l>.weight [in, out], encoder.layer<l>.bias [out]
///   decoder.coarse.weight [N_p, N_f, 3], decoder.coarse.bias [3]
///   decoder.fine.weight [N_p, 3, 3], decoder.fine.bias [3]
class SoftPoolNet {
 public:
  static SoftPoolNet initialize(const Architecture& arch, std::uint64_t seed);
  /// Throws ConfigError when names or shapes differ from what `arch` needs.
  static SoftPoolNet from_parameters(const Architecture& arch, std::vector<NamedTensor> params);

  const Architecture& architecture() const noexcept { return arch_; }
  const std::vector<NamedTensor>& parameters() const noexcept { return params_; }
  std::vector<NamedTensor>& parameters() noexcept { return params_; }
  std::size_t parameter_count() const;

  /// Puts every parameter on `tape`, as variables when `trainable`.
  std::vector<ad::Var> bind(ad::Tape& tape, bool trainable) const;

  /// Forward pass over an N_in x 3 point matrix with parameters bound by
  /// bind(). Discrete choices go through `decisions` when given.
  Forward forward(std::span<const ad::Var> params, const ad::Var& points,
                  std::optional<RowRange> rows = std::nullopt,
                  ad::DecisionLog* decisions = nullptr) const;

  /// Inference on a cloud of exactly N_in points.
  Completion complete(const PointCloud& points, std::optional<RowRange> rows = std::nullopt) const;

 private:
  SoftPoolNet(Architecture arch, std::vector<NamedTensor> params)
      : arch_(std::move(arch)), params_(std::move(params)) {}

  Architecture arch_;
  std::vector<NamedTensor> params_;
};

/// Parameter names and shapes that `arch` expects, in checkpoint order.
std::vector<std::pair<std::string, Shape>> parameter_layout(const Architecture& arch);

}  // namespace softpool
