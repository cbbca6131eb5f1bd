#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "softpool/tensor.hpp"

namespace softpool::ad {

struct AdamOptions {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias-corrected moments. Moment tensors mirror the parameter
/// shapes given at construction.
class Adam {
 public:
  Adam(AdamOptions options, std::span<const Tensor> params);

  /// Applies one update in place. Throws ShapeError when `grads` do not
  /// mirror the parameters.
  void step(std::span<Tensor> params, std::span<const Tensor> grads);

  std::int64_t steps() const noexcept { return steps_; }
  const AdamOptions& options() const noexcept { return options_; }
  const std::vector<Tensor>& first_moments() const noexcept { return m_; }
  const std::vector<Tensor>& second_moments() const noexcept { return v_; }

 private:
  AdamOptions options_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  std::int64_t steps_ = 0;
};

}  // namespace softpool::ad
