#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace softpool::verify {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Options {
  std::uint64_t seed = 0;
  /// Thread count compared against the single-threaded evaluation.
  std::size_t threads = 4;
  /// Random cases per oracle comparison.
  std::size_t cases = 50;
  /// Reverses the gradient of the intra-region entropy term; every gradient
  /// check involving it must then fail.
  bool inject_intra_sign_error = false;
};

/// Gradient checks of every loss and of the end-to-end objective,
/// permutation fuzzing of the network, oracle comparisons for the distances
/// and the regional convolution, and the thread-count determinism check.
std::vector<CheckResult> run_checks(const Options& options = {});

/// Relative-error bound the gradient checks must stay under.
inline constexpr double kGradientTolerance = 1e-4;

}  // namespace softpool::verify
