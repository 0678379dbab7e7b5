#include "assignment.hpp"

#include <algorithm>
#include <cmath>

namespace rnode::track {

namespace {
// Finite stand-ins on the padded square matrix: dummy cells cost kDummy so the
// solver prefers any admissible real pair, and inadmissible real cells cost
// kForbidden so a dummy beats them.
constexpr double kDummy = 1e6;
constexpr double kForbidden = 1e9;
}  // namespace

std::vector<int> solve_assignment(const std::vector<double>& cost, int rows, int cols) {
  if (rows == 0 || cols == 0) return std::vector<int>(rows, -1);
  const int n = std::max(rows, cols);

  auto at = [&](int r, int c) -> double {
    if (r >= rows || c >= cols) return kDummy;
    double v = cost[static_cast<size_t>(r) * cols + c];
    return std::isinf(v) ? kForbidden : v;
  };

  // Hungarian algorithm with potentials, 1-based scratch arrays.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, std::numeric_limits<double>::max());
    std::vector<char> used(n + 1, false);
    do {
      used[j0] = true;
      int i0 = p[j0], j1 = -1;
      double delta = std::numeric_limits<double>::max();
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = at(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }

  std::vector<int> match(rows, -1);
  for (int j = 1; j <= n; ++j) {
    int r = p[j] - 1, c = j - 1;
    if (r < rows && c < cols && at(r, c) < kDummy) match[r] = c;
  }
  return match;
}

}  // namespace rnode::track
