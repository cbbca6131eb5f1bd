#include "softpool/decoder.hpp"

#include "softpool/errors.hpp"
#include "softpool/random.hpp"

namespace softpool {

DecoderParams init_decoder(std::size_t n_f, std::size_t extent, std::uint64_t seed) {
  return {init_regional_kernel(extent, n_f, 3, derive_seed(seed, 0)),
          init_regional_kernel(extent, 3, 3, derive_seed(seed, 1))};
}

Decoded decode(const ad::Var& fstar, const DecoderVars& params, const DecoderOptions& options) {
  if (fstar.value().rank() != 2 || fstar.shape()[1] != params.coarse_weight.shape().at(1)) {
    throw ShapeError("decode: F* of shape " + shape_string(fstar.shape()) +
                     " does not match the coarse kernel");
  }
  Decoded out;
  out.coarse = ad::leaky_relu(
      regional_conv(fstar, options.regions, params.coarse_weight, params.coarse_bias), options.slope);
  const ad::Var fine = regional_conv(out.coarse, options.regions, params.fine_weight, params.fine_bias,
                                     Stride{1, options.upsample});
  out.fine = options.final_linear ? fine : ad::leaky_relu(fine, options.slope);
  return out;
}

}  // namespace softpool
