#pragma once

#include <limits>
#include <vector>

namespace rnode::track {

inline constexpr double kInadmissible = std::numeric_limits<double>::infinity();

// Minimum-cost assignment over a rows x cols cost matrix (row-major).
// Infinite entries are inadmissible; rows/cols that cannot be matched
// admissibly stay unassigned. Returns col index per row, -1 if unassigned.
std::vector<int> solve_assignment(const std::vector<double>& cost, int rows, int cols);

}  // namespace rnode::track
