#include "softpool/regional_conv.hpp"

#include <cmath>
#include <string>

#include "softpool/errors.hpp"
#include "softpool/random.hpp"

namespace softpool {

namespace {

std::size_t rows_per_region(std::size_t rows, std::size_t regions, const char* op) {
  if (regions == 0) throw ShapeError(std::string(op) + ": region count must be positive");
  if (rows == 0 || rows % regions != 0) {
    throw ShapeError(std::string(op) + ": " + std::to_string(rows) + " rows do not split into " +
                     std::to_string(regions) + " equal regions");
  }
  return rows / regions;
}

}  // namespace

RegionalKernel init_regional_kernel(std::size_t extent, std::size_t in_channels, std::size_t out_channels,
                                    std::uint64_t seed) {
  if (extent == 0 || in_channels == 0 || out_channels == 0) {
    throw InvalidInput("regional kernel extents must be positive");
  }
  RegionalKernel k;
  k.weights = Tensor({extent, in_channels, out_channels});
  Rng rng(seed);
  const double bound = std::sqrt(6.0 / static_cast<double>(extent * in_channels));
  for (double& v : k.weights.data()) v = uniform(rng, -bound, bound);
  k.bias = Tensor(Shape{out_channels}, 0.0);
  return k;
}

std::vector<std::size_t> regional_windows(std::size_t rows, std::size_t regions, std::size_t extent,
                                          std::size_t step) {
  const std::size_t per = rows_per_region(rows, regions, "regional_conv");
  if (extent == 0) throw InvalidInput("regional_conv: kernel extent must be positive");
  if (step == 0) throw InvalidInput("regional_conv: stride step must be positive");
  const std::size_t out_per = (per + step - 1) / step;
  std::vector<std::size_t> idx;
  idx.reserve(regions * out_per * extent);
  for (std::size_t g = 0; g < regions; ++g) {
    const std::size_t base = g * per;
    for (std::size_t r = 0; r < out_per; ++r) {
      for (std::size_t k = 0; k < extent; ++k) {
        idx.push_back(base + std::min(r * step + k, per - 1));
      }
    }
  }
  return idx;
}

std::vector<ad::Blend> upsample_plan(std::size_t rows, std::size_t regions, std::size_t factor) {
  if (factor == 0) throw InvalidInput("upsample_interpolate: factor must be at least 1");
  const std::size_t per = rows_per_region(rows, regions, "upsample_interpolate");
  std::vector<ad::Blend> plan;
  plan.reserve(rows * factor);
  for (std::size_t g = 0; g < regions; ++g) {
    const std::size_t base = g * per;
    for (std::size_t r = 0; r + 1 < per; ++r) {
      for (std::size_t s = 0; s < factor; ++s) {
        plan.push_back({base + r, base + r + 1, static_cast<double>(s) / static_cast<double>(factor)});
      }
    }
    // Last original row, then duplicates up to per * factor rows.
    for (std::size_t s = 0; s < factor; ++s) plan.push_back({base + per - 1, base + per - 1, 0.0});
  }
  return plan;
}

ad::Var upsample_interpolate(const ad::Var& points, std::size_t regions, std::size_t factor) {
  if (points.value().rank() != 2) throw ShapeError("upsample_interpolate: input must be rank 2");
  if (factor == 1) return points;
  return ad::linear_interpolate(points, upsample_plan(points.shape()[0], regions, factor));
}

Tensor upsample_interpolate(const Tensor& points, std::size_t regions, std::size_t factor) {
  ad::Tape tape;
  return upsample_interpolate(tape.constant(points), regions, factor).value();
}

ad::Var regional_conv(const ad::Var& features, std::size_t regions, const ad::Var& weights,
                      const ad::Var& bias, Stride stride) {
  if (features.value().rank() != 2) throw ShapeError("regional_conv: features must be rank 2");
  if (weights.value().rank() != 3) throw ShapeError("regional_conv: weights must be [N_p, C_in, C_out]");
  const std::size_t extent = weights.shape()[0], c_in = weights.shape()[1], c_out = weights.shape()[2];
  if (features.shape()[1] != c_in) {
    throw ShapeError("regional_conv: input has " + std::to_string(features.shape()[1]) +
                     " channels, kernel expects " + std::to_string(c_in));
  }
  if (bias.value().rank() != 1 || bias.shape()[0] != c_out) {
    throw ShapeError("regional_conv: bias must have " + std::to_string(c_out) + " entries");
  }
  ad::Var input = features;
  if (stride.upsample > 1) input = upsample_interpolate(features, regions, stride.upsample);

  const auto windows = regional_windows(input.shape()[0], regions, extent, stride.step);
  const std::size_t out_rows = windows.size() / extent;
  const ad::Var patches = ad::reshape(ad::gather_rows(input, windows), {out_rows, extent * c_in});
  const ad::Var kernel = ad::reshape(weights, {extent * c_in, c_out});
  return ad::add_bias(ad::matmul(patches, kernel), bias);
}

Tensor regional_conv(const Tensor& features, std::size_t regions, const RegionalKernel& kernel) {
  ad::Tape tape;
  return regional_conv(tape.constant(features), regions, tape.constant(kernel.weights),
                       tape.constant(kernel.bias), kernel.stride)
      .value();
}

}  // namespace softpool
