#pragma once

#include <cstddef>
#include <cstdint>

#include "softpool/ops.hpp"
#include "softpool/regional_conv.hpp"

namespace softpool {

/// Two regional convolutions: F* -> coarse points (C_in = N_f, C_out = 3),
/// then interpolated coarse points -> fine points (C_in = C_out = 3).
struct DecoderParams {
  RegionalKernel coarse;
  RegionalKernel fine;
};

DecoderParams init_decoder(std::size_t n_f, std::size_t extent, std::uint64_t seed);

struct DecoderOptions {
  std::size_t regions = 8;
  std::size_t upsample = 8;  // fine rows per coarse row
  double slope = 0.2;
  bool final_linear = false;  // drop the Leaky ReLU after the fine stage
};

struct DecoderVars {
  ad::Var coarse_weight;
  ad::Var coarse_bias;
  ad::Var fine_weight;
  ad::Var fine_bias;
};

struct Decoded {
  ad::Var coarse;  // [rows(F*), 3]
  ad::Var fine;    // [rows(F*) * upsample, 3]
};

Decoded decode(const ad::Var& fstar, const DecoderVars& params, const DecoderOptions& options);

}  // namespace softpool
