#include "doclayout/matching/hungarian.hpp"

#include <cmath>
#include <limits>

#include "doclayout/error.hpp"

namespace doclayout::matching {

Assignment hungarian(const Eigen::MatrixXd& cost) {
  const int rows = static_cast<int>(cost.rows());
  const int cols = static_cast<int>(cost.cols());
  Assignment out;
  if (rows == 0 || cols == 0) return out;
  for (Eigen::Index i = 0; i < cost.size(); ++i) {
    if (!std::isfinite(cost.data()[i])) {
      throw ValidationError("hungarian: cost matrix has a NaN or infinite entry");
    }
  }

  const int n = std::max(rows, cols);
  const double max_abs = cost.cwiseAbs().maxCoeff();
  const double sentinel = 10.0 * (max_abs > 0.0 ? max_abs : 1.0);
  auto c = [&](int i, int j) { return i < rows && j < cols ? cost(i, j) : sentinel; };

  // 1-based potentials formulation; p[j] is the row matched to column j.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = c(i0 - 1, j - 1) - u[i0] - v[j];
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
    } while (j0 != 0);
  }

  std::vector<int> col_of_row(n, -1);
  for (int j = 1; j <= n; ++j) col_of_row[p[j] - 1] = j - 1;
  for (int i = 0; i < rows; ++i) {
    const int j = col_of_row[i];
    if (j < cols) {
      out.pairs.emplace_back(i, j);
      out.total_cost += cost(i, j);
    }
  }
  return out;
}

}  // namespace doclayout::matching
