#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "softpool/tape.hpp"

namespace softpool::ad {

// Differentiable operations. Each validates shapes (ShapeError), computes its
// value, checks it is finite (NumericError) and records itself on the tape of
// its operands.

Var matmul(const Var& a, const Var& b);  // [m,k] x [k,n]
Var add(const Var& a, const Var& b);     // same shape
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);     // elementwise
Var scale(const Var& a, double factor);
Var add_scalar(const Var& a, double offset);
Var add_bias(const Var& a, const Var& bias);  // [m,n] + [n] per row

Var leaky_relu(const Var& a, double slope);

/// Softmax along `axis` of a rank-1 or rank-2 tensor.
Var softmax(const Var& a, std::size_t axis);

/// Natural log of max(a, floor). With floor == 0 a non-positive entry is a
/// NumericError. Below the floor the local gradient is zero.
Var log(const Var& a, double floor = 0.0);

Var sum(const Var& a);                    // -> scalar
Var sum(const Var& a, std::size_t axis);  // rank-2 -> rank-1
Var mean(const Var& a);
Var mean(const Var& a, std::size_t axis);

/// Rows of a rank-2 tensor, in the given order (repeats allowed). The
/// gradient scatters back onto the selected rows.
Var gather_rows(const Var& a, std::span<const std::size_t> rows);

/// Concatenation of rank-2 tensors along axis 0 or 1.
Var concat(std::span<const Var> parts, std::size_t axis);

Var reshape(const Var& a, Shape shape);

/// One output row per blend: (1 - t) * a[from] + t * a[to].
struct Blend {
  std::size_t from;
  std::size_t to;
  double t;
};
Var linear_interpolate(const Var& a, std::span<const Blend> blends);

/// Euclidean norm of each row of a rank-2 tensor -> rank-1. The gradient of
/// a zero row is taken as zero.
Var row_norms(const Var& a);

/// Divides every row by its sum. A row summing to zero is a NumericError.
Var normalize_rows(const Var& a);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(const Var& a, const Var& b) { return mul(a, b); }
inline Var operator*(double s, const Var& a) { return scale(a, s); }

namespace testing {

/// Identity in the forward pass, multiplies the gradient by `factor` in the
/// backward pass. Used to inject gradient faults into verification runs.
Var scale_gradient(const Var& a, double factor);

}  // namespace testing
}  // namespace softpool::ad
