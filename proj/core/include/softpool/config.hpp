#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "softpool/losses.hpp"
#include "softpool/model.hpp"

namespace softpool {

/// Everything a run depends on. Stored as a flat `key = value` text file;
/// `#` starts a comment. A `profile` key (paper or desk) selects the base
/// values before any other key is applied, wherever it appears.
struct RunConfig {
  std::string profile = "paper";

  // network
  std::size_t n_in = 1024;
  std::vector<std::size_t> hidden{512, 512};
  std::size_t n_f = 8;
  std::size_t n_r = 32;
  std::size_t n_p = 32;
  std::size_t coarse_count = 256;
  std::size_t fine_count = 16384;
  std::size_t upsample = 64;
  double slope = 0.2;
  bool final_linear = false;

  // objective
  double tau = 0.3;
  LossWeights weights;
  bool paper_loss = false;
  std::size_t preserve_samples = 256;

  // optimisation
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t batch_size = 8;
  std::size_t epochs = 50;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  // data and outputs
  std::string dataset;
  std::size_t holdout = 0;
  std::string checkpoint = "softpool.ckpt";
  std::size_t emd_points = 256;

  /// Throws ConfigError unless n_f * n_r = coarse_count,
  /// fine_count = coarse_count * upsample, batch_size >= 1, and the network
  /// and weights are otherwise buildable.
  void validate() const;

  Architecture architecture() const;
  LossConfig loss_config() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Base values of a named profile: "paper" (fine 16,384, m = 64) or "desk"
/// (fine 2,048, m = 8, narrower hidden layers and a larger step size).
RunConfig profile_config(std::string_view name);

/// Applies one key; `profile` resets every value to that profile. Throws
/// ConfigError for an unknown key or bad value.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

/// Parses a config file body on top of `base` (or on top of the file's own
/// profile when it names one). Does not validate.
RunConfig parse_config(std::string_view text, const RunConfig& base = RunConfig{});
std::string serialize_config(const RunConfig& config);

/// Derived counts follow the region layout: coarse_count = n_f * n_r and
/// fine_count = coarse_count * upsample.
void sync_counts(RunConfig& config);

}  // namespace softpool
