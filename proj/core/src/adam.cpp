#include "softpool/adam.hpp"

#include <cmath>

#include "softpool/errors.hpp"

namespace softpool::ad {

Adam::Adam(AdamOptions options, std::span<const Tensor> params) : options_(options) {
  for (const Tensor& p : params) {
    m_.emplace_back(p.shape(), 0.0);
    v_.emplace_back(p.shape(), 0.0);
  }
}

void Adam::step(std::span<Tensor> params, std::span<const Tensor> grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw ShapeError("adam: parameter/gradient count does not match optimizer state");
  }
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (params[p].shape() != m_[p].shape() || grads[p].shape() != m_[p].shape()) {
      throw ShapeError("adam: shape mismatch for parameter " + std::to_string(p));
    }
  }
  ++steps_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto w = params[p].data();
    auto g = grads[p].data();
    auto m = m_[p].data();
    auto v = v_[p].data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      w[i] -= options_.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + options_.eps);
    }
  }
}

}  // namespace softpool::ad
