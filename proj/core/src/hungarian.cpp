#include "mvskel/hungarian.hpp"

#include <algorithm>
#include <limits>

namespace mvskel {

std::vector<int> hungarian_assignment(const std::vector<std::vector<double>>& cost) {
  const int rows = static_cast<int>(cost.size());
  const int cols = rows == 0 ? 0 : static_cast<int>(cost[0].size());
  if (rows == 0 || cols == 0) return std::vector<int>(rows, -1);

  // Pad to square with zeros; padded pairings are discarded afterwards.
  const int n = std::max(rows, cols);
  const auto at = [&](int r, int c) -> double {
    if (r < rows && c < cols) return cost[r][c];
    return 0.0;
  };

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = at(i0 - 1, j - 1) - u[i0] - v[j];
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
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }

  std::vector<int> match(rows, -1);
  for (int j = 1; j <= n; ++j) {
    const int i = p[j];
    if (i >= 1 && i <= rows && j <= cols) match[i - 1] = j - 1;
  }
  return match;
}

}  // namespace mvskel
