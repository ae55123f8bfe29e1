#pragma once

#include <vector>

namespace mvskel {

/// Minimum-cost assignment (Kuhn-Munkres with potentials, O(n^3)).
/// `cost` is row-major rows x cols; rectangular inputs are padded internally.
/// Returns, per row, the assigned column or -1; at most min(rows, cols)
/// assignments are made.
std::vector<int> hungarian_assignment(const std::vector<std::vector<double>>& cost);

}  // namespace mvskel
