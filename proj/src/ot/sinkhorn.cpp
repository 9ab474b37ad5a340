#include <algorithm>
#include <cmath>
#include <limits>

#include "doclayout/error.hpp"
#include "doclayout/ot/transport.hpp"

namespace doclayout::ot {

namespace {

double log_sum_exp(const std::vector<double>& v) {
  const double mx = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

}  // namespace

double sinkhorn_cost(std::span<const double> supply, std::span<const double> demand,
                     const CostMatrix& cost, double epsilon, int max_iters, double tol) {
  const int n = static_cast<int>(supply.size());
  const int m = static_cast<int>(demand.size());
  if (n == 0 || m == 0) throw NumericalError("transport side is empty");
  if (epsilon <= 0.0) throw NumericalError("sinkhorn epsilon must be positive");
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();

  std::vector<double> log_a(n), log_b(m);
  for (int i = 0; i < n; ++i) log_a[i] = supply[i] > 0 ? std::log(supply[i]) : kNegInf;
  for (int j = 0; j < m; ++j) log_b[j] = demand[j] > 0 ? std::log(demand[j]) : kNegInf;

  std::vector<double> f(n, 0.0), g(m, 0.0), buf;
  for (int it = 0; it < max_iters; ++it) {
    buf.resize(m);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) buf[j] = (g[j] - cost(i, j)) / epsilon + log_b[j];
      f[i] = -epsilon * log_sum_exp(buf);
    }
    buf.resize(n);
    double err = 0.0;
    for (int j = 0; j < m; ++j) {
      for (int i = 0; i < n; ++i) buf[i] = (f[i] - cost(i, j)) / epsilon + log_a[i];
      const double g_new = -epsilon * log_sum_exp(buf);
      err = std::max(err, std::abs(g_new - g[j]));
      g[j] = g_new;
    }
    if (err < tol) break;
  }

  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    if (supply[i] <= 0) continue;
    for (int j = 0; j < m; ++j) {
      if (demand[j] <= 0) continue;
      const double log_p = (f[i] + g[j] - cost(i, j)) / epsilon + log_a[i] + log_b[j];
      total += std::exp(log_p) * cost(i, j);
    }
  }
  if (!std::isfinite(total)) throw NumericalError("sinkhorn diverged");
  return total;
}

}  // namespace doclayout::ot
