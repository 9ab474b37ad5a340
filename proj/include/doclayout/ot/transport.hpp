#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace doclayout::ot {

struct FlowEntry {
  int source = 0;
  int target = 0;
  double flow = 0.0;
};

// Sparse optimal plan. Only arcs carrying positive flow are listed.
struct FlowPlan {
  std::vector<FlowEntry> entries;
  double objective = 0.0;
};

// Row-major n x m ground-cost matrix.
struct CostMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  double operator()(int i, int j) const { return values[static_cast<std::size_t>(i) * cols + j]; }
};

// Exact balanced transportation problem solved by a primal network simplex
// on the complete bipartite graph (block-search pricing, strongly feasible
// spanning trees). Supplies and demands must be nonnegative with equal
// totals; the demand side is rebalanced by at most `balance_tol` to absorb
// rounding. Integer-valued masses are transported exactly.
//
// Throws ValidationError on malformed or unbalanced input and NumericalError
// if the solver ends infeasible or unbounded.
FlowPlan solve_transport(std::span<const double> supply, std::span<const double> demand,
                         const CostMatrix& cost, double balance_tol = 1e-9);

// Entropic approximation (log-domain Sinkhorn). Returns the transport cost
// of the regularized plan; never exact.
double sinkhorn_cost(std::span<const double> supply, std::span<const double> demand,
                     const CostMatrix& cost, double epsilon = 1e-2, int max_iters = 2000,
                     double tol = 1e-9);

}  // namespace doclayout::ot
