#include "softpool/ablation.hpp"

#include <algorithm>

#include "softpool/errors.hpp"

namespace softpool::ablation {

Sweep parse_sweep(std::string_view name) {
  if (name == "tau") return Sweep::Tau;
  if (name == "regions") return Sweep::Regions;
  if (name == "boundary-weight") return Sweep::BoundaryWeight;
  if (name == "row-range") return Sweep::RowRange;
  throw InvalidInput("unknown sweep '" + std::string(name) + "' (tau, regions, boundary-weight, row-range)");
}

std::string_view sweep_name(Sweep s) {
  switch (s) {
    case Sweep::Tau: return "tau";
    case Sweep::Regions: return "regions";
    case Sweep::BoundaryWeight: return "boundary-weight";
    case Sweep::RowRange: return "row-range";
  }
  return "";
}

const std::vector<std::pair<std::size_t, std::size_t>>& region_grid() {
  static const std::vector<std::pair<std::size_t, std::size_t>> g{{2, 128}, {4, 64}, {8, 32}, {16, 16}, {32, 8}};
  return g;
}

const std::vector<double>& tau_grid() {
  static const std::vector<double> g{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  return g;
}

const std::vector<double>& boundary_weight_grid() {
  static const std::vector<double> g{1.0, 2.0, 10.0};
  return g;
}

const std::vector<std::size_t>& row_range_grid() {
  static const std::vector<std::size_t> g{2, 4, 8, 16, 32};
  return g;
}

namespace {

std::string region_label(std::size_t n_f, std::size_t n_r) {
  return "(" + std::to_string(n_f) + ", " + std::to_string(n_r) + ")";
}

std::string weight_label(double w) {
  std::string s = fixed(w, 0);
  return s + "x";
}

RunConfig with_regions(RunConfig c, std::size_t n_f, std::size_t n_r) {
  c.n_f = n_f;
  c.n_r = n_r;
  sync_counts(c);
  return c;
}

}  // namespace

std::vector<Cell> plan(Sweep sweep, const RunConfig& base) {
  std::vector<Cell> cells;
  switch (sweep) {
    case Sweep::Tau:
      for (double t : tau_grid()) {
        RunConfig c = base;
        c.tau = t;
        cells.push_back({"Chamfer x1e3", fixed(t, 1), c});
      }
      break;
    case Sweep::Regions:
      for (const auto& [n_f, n_r] : region_grid()) {
        cells.push_back({"Chamfer x1e3", region_label(n_f, n_r), with_regions(base, n_f, n_r)});
      }
      break;
    case Sweep::BoundaryWeight:
      for (double w : boundary_weight_grid()) {
        for (const auto& [n_f, n_r] : region_grid()) {
          RunConfig c = with_regions(base, n_f, n_r);
          c.weights.boundary = w;
          cells.push_back({weight_label(w), region_label(n_f, n_r), c});
        }
      }
      break;
    case Sweep::RowRange:
      for (std::size_t k : row_range_grid()) {
        // Pooling rows [1 : k] gives k rows per region to the decoder.
        cells.push_back({"Chamfer x1e3", "[1:" + std::to_string(k) + "]", with_regions(base, base.n_f, k)});
      }
      break;
  }
  return cells;
}

TextTable Result::table() const {
  TextTable t;
  const char* corner = sweep == Sweep::Tau              ? "tau"
                       : sweep == Sweep::RowRange       ? "Rows"
                       : sweep == Sweep::BoundaryWeight ? "L_boundary weight \\ (N_f, N_r)"
                                                        : "(N_f, N_r)";
  t.header.push_back(corner);
  std::vector<std::string> row_labels;
  for (const auto& c : cells) {
    if (std::find(t.header.begin() + 1, t.header.end(), c.cell.column) == t.header.end()) {
      t.header.push_back(c.cell.column);
    }
    if (std::find(row_labels.begin(), row_labels.end(), c.cell.row) == row_labels.end()) {
      row_labels.push_back(c.cell.row);
    }
  }
  for (const auto& label : row_labels) {
    std::vector<std::string> row{label};
    for (const auto& c : cells) {
      if (c.cell.row == label) row.push_back(fixed(c.chamfer * 1e3, 3));
    }
    t.rows.push_back(std::move(row));
  }
  if (sweep == Sweep::Regions) {
    std::vector<std::string> row{"L_inter"};
    for (const auto& c : cells) row.push_back(fixed(c.inter, 3));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Result run(Sweep sweep, const RunConfig& base, std::span<const Sample> train_items,
           std::span<const Sample> test_items, const std::function<void(const CellResult&)>& on_cell) {
  if (test_items.empty()) throw InvalidInput("ablation needs held-out items");
  Result result{sweep, {}};
  for (auto& cell : plan(sweep, base)) {
    cell.config.validate();
    const TrainResult trained = train(cell.config, train_items, {});
    CellResult r{cell, mean_completion_chamfer(trained.model, test_items, cell.config.threads), 0.0};

    ad::Tape tape;
    std::vector<ad::Var> features;
    for (const auto& item : test_items) {
      features.push_back(tape.constant(trained.model.complete(item.input).features));
    }
    r.inter = loss_inter(features).value().item();

    if (on_cell) on_cell(r);
    result.cells.push_back(std::move(r));
  }
  return result;
}

}  // namespace softpool::ablation
