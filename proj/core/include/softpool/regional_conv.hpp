#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "softpool/ops.hpp"
#include "softpool/tensor.hpp"

namespace softpool {

/// Convolution stride S = step / upsample. upsample > 1 first inserts
/// interpolated rows (S < 1); step > 1 skips rows (S > 1).
struct Stride {
  std::size_t step = 1;
  std::size_t upsample = 1;
};

/// Kernel of a regional convolution.
struct RegionalKernel {
  Tensor weights;  // [N_p, C_in, C_out]
  Tensor bias;     // [C_out]
  Stride stride;

  std::size_t extent() const { return weights.dim(0); }
  std::size_t in_channels() const { return weights.dim(1); }
  std::size_t out_channels() const { return weights.dim(2); }
};

/// Uniform fan-in initialisation (bound sqrt(6 / (N_p * C_in))), zero bias.
RegionalKernel init_regional_kernel(std::size_t extent, std::size_t in_channels,
                                    std::size_t out_channels, std::uint64_t seed);

/// Window rows for every output row of a region-blocked input: for output
/// row r of a region the window is rows r*step .. r*step + extent - 1 of
/// that region, where positions past the end repeat the region's last row.
/// Returns `extent` source-row indices per output row.
std::vector<std::size_t> regional_windows(std::size_t rows, std::size_t regions, std::size_t extent,
                                          std::size_t step);

/// Rows per region after inserting (m - 1) interpolants between consecutive
/// rows and padding with copies of the last row: rows_per_region * m.
std::vector<ad::Blend> upsample_plan(std::size_t rows, std::size_t regions, std::size_t factor);

ad::Var upsample_interpolate(const ad::Var& points, std::size_t regions, std::size_t factor);
Tensor upsample_interpolate(const Tensor& points, std::size_t regions, std::size_t factor);

/// Regional convolution of an input split into `regions` equal contiguous
/// blocks. The kernel slides inside each block only:
///   out(i, j) = bias(j) + sum_k sum_l in(i + k, l) * W(k, l, j)
/// with each block padded by extent - 1 copies of its last row. weights is
/// [N_p, C_in, C_out], bias is [C_out].
ad::Var regional_conv(const ad::Var& features, std::size_t regions, const ad::Var& weights,
                      const ad::Var& bias, Stride stride = {});
Tensor regional_conv(const Tensor& features, std::size_t regions, const RegionalKernel& kernel);

}  // namespace softpool
