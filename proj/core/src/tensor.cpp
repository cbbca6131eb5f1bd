#include "softpool/tensor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numeric>

#include "softpool/errors.hpp"

namespace softpool {

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_size(shape_)) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                     shape_string(shape_));
  }
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values) {
  return Tensor({rows, cols}, std::vector<double>(values));
}

Tensor Tensor::vector(std::initializer_list<double> values) {
  return Tensor({values.size()}, std::vector<double>(values));
}

std::size_t Tensor::rows() const {
  if (rank() == 2) return shape_[0];
  if (rank() == 1) return 1;
  throw ShapeError("rows() needs a rank-1 or rank-2 tensor, got " + shape_string(shape_));
}

std::size_t Tensor::cols() const {
  if (rank() == 2) return shape_[1];
  if (rank() == 1) return shape_[0];
  throw ShapeError("cols() needs a rank-1 or rank-2 tensor, got " + shape_string(shape_));
}

double Tensor::item() const {
  if (data_.size() != 1) throw ShapeError("item() on a tensor of shape " + shape_string(shape_));
  return data_[0];
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_size(shape) != data_.size()) {
    throw ShapeError("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  }
  return Tensor(std::move(shape), data_);
}

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

namespace kernels {

namespace {

constexpr std::size_t kRowBlock = 4;
constexpr std::size_t kDepthBlock = 64;

// Accumulates four rows of A (stride lda) against rows [k0, k1) of B.
inline void block4(const double* __restrict a, std::size_t lda, const double* __restrict b,
                   double* __restrict c, std::size_t k0, std::size_t k1, std::size_t n) {
  double* __restrict c0 = c;
  double* __restrict c1 = c + n;
  double* __restrict c2 = c + 2 * n;
  double* __restrict c3 = c + 3 * n;
  for (std::size_t kk = k0; kk < k1; ++kk) {
    const double a0 = a[kk];
    const double a1 = a[lda + kk];
    const double a2 = a[2 * lda + kk];
    const double a3 = a[3 * lda + kk];
    const double* __restrict br = b + kk * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double bj = br[j];
      c0[j] += a0 * bj;
      c1[j] += a1 * bj;
      c2[j] += a2 * bj;
      c3[j] += a3 * bj;
    }
  }
}

}  // namespace

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
            std::size_t k, std::size_t n) {
  std::fill(c.begin(), c.end(), 0.0);
  const std::size_t full = m - m % kRowBlock;
  const std::size_t tail = m - full;
  // Tail rows go through the same 4-row routine via zero-padded scratch.
  std::vector<double> pad_a(tail ? kRowBlock * k : 0, 0.0);
  std::vector<double> pad_c(tail ? kRowBlock * n : 0, 0.0);
  if (tail) std::copy(a.begin() + full * k, a.end(), pad_a.begin());

  for (std::size_t k0 = 0; k0 < k; k0 += kDepthBlock) {
    const std::size_t k1 = std::min(k, k0 + kDepthBlock);
    for (std::size_t i = 0; i < full; i += kRowBlock) {
      block4(a.data() + i * k, k, b.data(), c.data() + i * n, k0, k1, n);
    }
    if (tail) block4(pad_a.data(), k, b.data(), pad_c.data(), k0, k1, n);
  }
  if (tail) std::copy(pad_c.begin(), pad_c.begin() + tail * n, c.begin() + full * n);
}

void transpose(std::span<const double> a, std::span<double> out, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[c * rows + r] = a[r * cols + c];
  }
}

}  // namespace kernels
}  // namespace softpool
