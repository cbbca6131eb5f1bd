#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "softpool/tape.hpp"

namespace softpool::ad {

struct GradCheckReport {
  double max_relative_error = 0.0;
  // Location and values of the worst coordinate.
  std::size_t parameter = 0;
  std::size_t element = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t coordinates = 0;
};

/// Relative error used by the checker: |a - n| / max(1e-8, |a| + |n|).
double relative_error(double analytic, double numeric);

using ScalarFunction = std::function<double(std::span<const Tensor> params)>;

/// Compares `analytic` against central differences of `f` with step `h`,
/// coordinate by coordinate, and reports the worst relative error.
GradCheckReport finite_diff_check(const ScalarFunction& f, std::span<const Tensor> params,
                                  std::span<const Tensor> analytic, double h = 1e-5);

/// Builds the scalar graph from parameter Vars. The DecisionLog must be
/// threaded to every discrete choice the graph makes.
using GraphFunction = std::function<Var(Tape&, std::span<const Var> params, DecisionLog* decisions)>;

/// Differentiates `build` on a tape (recording its discrete choices), then
/// re-evaluates it at perturbed parameters with those choices replayed and
/// runs finite_diff_check.
GradCheckReport check_gradients(const GraphFunction& build, std::span<const Tensor> params,
                                double h = 1e-5);

}  // namespace softpool::ad
