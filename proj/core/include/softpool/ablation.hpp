#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "softpool/config.hpp"
#include "softpool/table.hpp"
#include "softpool/trainer.hpp"

namespace softpool::ablation {

enum class Sweep { Tau, Regions, BoundaryWeight, RowRange };

/// "tau", "regions", "boundary-weight" or "row-range"; InvalidInput otherwise.
Sweep parse_sweep(std::string_view name);
std::string_view sweep_name(Sweep s);

/// (N_f, N_r) cells of the regions sweep, all with N_f * N_r = 256.
const std::vector<std::pair<std::size_t, std::size_t>>& region_grid();
const std::vector<double>& tau_grid();
const std::vector<double>& boundary_weight_grid();
/// Upper ends k of the pooled row ranges [1 : k].
const std::vector<std::size_t>& row_range_grid();

struct Cell {
  std::string row;     // row label in the output table
  std::string column;  // column label
  RunConfig config;
};

/// Configurations the sweep trains, derived from `base`.
std::vector<Cell> plan(Sweep sweep, const RunConfig& base);

struct CellResult {
  Cell cell;
  double chamfer = 0.0;  // mean holdout Chamfer of the fine output
  double inter = 0.0;    // loss_inter over the holdout features
};

struct Result {
  Sweep sweep;
  std::vector<CellResult> cells;

  /// Rows and columns follow the plan order; Chamfer is reported x 10^3 and
  /// the regions sweep adds an L_inter row.
  TextTable table() const;
};

/// Trains one model per cell on `train_items` and scores it on `test_items`.
Result run(Sweep sweep, const RunConfig& base, std::span<const Sample> train_items,
           std::span<const Sample> test_items, const std::function<void(const CellResult&)>& on_cell = {});

}  // namespace softpool::ablation
