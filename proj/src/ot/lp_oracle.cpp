#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "doclayout/error.hpp"
#include "doclayout/ot/emd.hpp"

namespace doclayout::ot {

namespace {

constexpr double kPivotTol = 1e-11;

// Dense tableau for min c^T x, A x = b, x >= 0 with b >= 0. Column layout:
// [structural | artificial | rhs]; the last row holds reduced costs.
class DenseTableau {
 public:
  DenseTableau(int rows, int structural)
      : rows_(rows), structural_(structural), cols_(structural + rows + 1),
        data_(static_cast<std::size_t>(rows + 1) * cols_, 0.0), basis_(rows) {
    for (int r = 0; r < rows_; ++r) {
      at(r, structural_ + r) = 1.0;
      basis_[r] = structural_ + r;
    }
  }

  double& at(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  double at(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  double& rhs(int r) { return at(r, cols_ - 1); }

  // Phase 1 minimises the artificial sum; phase 2 the given costs on
  // structural columns with artificials barred from entering.
  void phase_one() {
    for (int c = 0; c < cols_; ++c) at(rows_, c) = 0.0;
    for (int r = 0; r < rows_; ++r) {
      for (int c = 0; c < cols_; ++c) {
        if (c < structural_ || c == cols_ - 1) at(rows_, c) -= at(r, c);
      }
    }
    iterate(structural_ + rows_);
    if (-at(rows_, cols_ - 1) > 1e-8) throw NumericalError("LP oracle: problem infeasible");
    drive_out_artificials();
  }

  double phase_two(const std::vector<double>& cost) {
    for (int c = 0; c < cols_; ++c) at(rows_, c) = c < structural_ ? cost[c] : 0.0;
    for (int r = 0; r < rows_; ++r) {
      const int bcol = basis_[r];
      const double cb = bcol < structural_ ? cost[bcol] : 0.0;
      if (cb == 0.0) continue;
      for (int c = 0; c < cols_; ++c) at(rows_, c) -= cb * at(r, c);
    }
    iterate(structural_);
    return -at(rows_, cols_ - 1);
  }

 private:
  void iterate(int enterable) {
    // Dantzig pricing; Bland's rule once the pivot count suggests cycling.
    const long bland_after = 50L * (rows_ + cols_);
    for (long it = 0;; ++it) {
      const bool bland = it > bland_after;
      int enter = -1;
      double best = -kPivotTol;
      for (int c = 0; c < enterable; ++c) {
        const double rc = at(rows_, c);
        if (rc < best) {
          enter = c;
          if (bland) break;
          best = rc;
        }
      }
      if (enter < 0) return;
      int leave = -1;
      double ratio = std::numeric_limits<double>::infinity();
      for (int r = 0; r < rows_; ++r) {
        const double a = at(r, enter);
        if (a <= kPivotTol) continue;
        const double q = rhs(r) / a;
        if (leave < 0 || q < ratio - 1e-14 ||
            (std::abs(q - ratio) <= 1e-14 && basis_[r] < basis_[leave])) {
          ratio = q;
          leave = r;
        }
      }
      if (leave < 0) throw NumericalError("LP oracle: problem unbounded");
      pivot(leave, enter);
    }
  }

  void pivot(int pr, int pc) {
    const double inv = 1.0 / at(pr, pc);
    for (int c = 0; c < cols_; ++c) at(pr, c) *= inv;
    for (int r = 0; r <= rows_; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (f == 0.0) continue;
      for (int c = 0; c < cols_; ++c) at(r, c) -= f * at(pr, c);
    }
    basis_[pr] = pc;
  }

  void drive_out_artificials() {
    for (int r = 0; r < rows_; ++r) {
      if (basis_[r] < structural_) continue;
      for (int c = 0; c < structural_; ++c) {
        if (std::abs(at(r, c)) > 1e-9) {
          pivot(r, c);
          break;
        }
      }
      // A row with no structural entry is redundant; its artificial stays
      // basic at zero and can never re-enter in phase two.
    }
  }

  int rows_;
  int structural_;
  int cols_;
  std::vector<double> data_;
  std::vector<int> basis_;
};

}  // namespace

double lp_transport_oracle(std::span<const double> supply, std::span<const double> demand,
                           const CostMatrix& cost) {
  const int n = static_cast<int>(supply.size());
  const int m = static_cast<int>(demand.size());
  if (n == 0 || m == 0) throw EmptySideError("LP oracle: empty side");
  if (static_cast<long>(n) * m > kLpOracleMaxVariables) {
    throw ValidationError("LP oracle refuses " + std::to_string(static_cast<long>(n) * m) +
                          " flow variables (limit " + std::to_string(kLpOracleMaxVariables) +
                          ")");
  }
  // Rows: one per source, one per sink except the last (implied by balance).
  const int rows = n + m - 1;
  const int vars = n * m;
  DenseTableau tab(rows, vars);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      const int k = i * m + j;
      tab.at(i, k) = 1.0;
      if (j < m - 1) tab.at(n + j, k) = 1.0;
    }
  }
  for (int i = 0; i < n; ++i) tab.rhs(i) = supply[i];
  for (int j = 0; j < m - 1; ++j) tab.rhs(n + j) = demand[j];

  tab.phase_one();
  return tab.phase_two(cost.values);
}

double emd_lp_oracle(const PointMass& a, const PointMass& b) {
  if (a.empty() || b.empty()) throw EmptySideError("LP oracle: empty point mass");
  if (static_cast<long>(a.size()) * static_cast<long>(b.size()) > kLpOracleMaxVariables) {
    throw ValidationError("LP oracle refuses problems above 10^4 flow variables");
  }
  return lp_transport_oracle(a.weights(), b.weights(), euclidean_cost(a.points(), b.points()));
}

}  // namespace doclayout::ot
