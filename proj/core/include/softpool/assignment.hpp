#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace softpool {

/// Exact minimum-cost perfect matching on a dense n x n cost matrix
/// (row-major), Hungarian method with potentials, O(n^3).
///
/// Returns `col_of_row`: row i is matched to column col_of_row[i].
/// Costs must be finite.
std::vector<std::size_t> solve_assignment(std::span<const double> cost, std::size_t n);

}  // namespace softpool
