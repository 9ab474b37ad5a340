#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <tuple>

#include "doclayout/error.hpp"
#include "doclayout/ot/transport.hpp"

namespace doclayout::ot {

namespace {

// Primal network simplex specialised to the complete bipartite graph.
//
// Nodes: sources [0, n), sinks [n, n+m), artificial root n+m.
// Arcs:  source i -> sink j has id i*m + j; node v's artificial arc to or
//        from the root has id n*m + v.
//
// Only spanning-tree arcs carry flow, so flow is stored per node (the flow
// on the arc linking it to its parent) and never per arc.
class BipartiteNetworkSimplex {
 public:
  BipartiteNetworkSimplex(std::span<const double> supply, std::span<const double> demand,
                          const CostMatrix& cost)
      : n_(static_cast<int>(supply.size())),
        m_(static_cast<int>(demand.size())),
        root_(n_ + m_),
        real_arcs_(static_cast<long>(n_) * m_),
        cost_(cost) {
    const int nodes = n_ + m_ + 1;
    parent_.assign(nodes, -1);
    pred_.assign(nodes, -1);
    up_.assign(nodes, 0);
    depth_.assign(nodes, 0);
    pi_.assign(nodes, 0.0);
    flow_.assign(nodes, 0.0);
    first_child_.assign(nodes, -1);
    next_sib_.assign(nodes, -1);
    prev_sib_.assign(nodes, -1);

    double max_cost = 0.0;
    for (double c : cost_.values) max_cost = std::max(max_cost, std::abs(c));
    art_cost_ = (max_cost + 1.0) * static_cast<double>(nodes);
    eps_ = std::numeric_limits<double>::epsilon() * 64.0 * art_cost_;

    for (int v = 0; v < root_; ++v) {
      parent_[v] = root_;
      pred_[v] = static_cast<long>(real_arcs_) + v;
      depth_[v] = 1;
      attach(v, root_);
      if (v < n_) {
        up_[v] = 1;
        flow_[v] = supply[v];
        pi_[v] = 0.0;
      } else {
        up_[v] = 0;
        flow_[v] = demand[v - n_];
        pi_[v] = art_cost_;
      }
    }
    const long total_arcs = real_arcs_ + root_;
    block_ = std::max<long>(10, static_cast<long>(std::sqrt(static_cast<double>(total_arcs))));
  }

  void run() {
    while (true) {
      const long in = find_entering();
      if (in < 0) break;
      pivot(in);
    }
    for (int v = 0; v < root_; ++v) {
      if (pred_[v] >= real_arcs_ && flow_[v] > 1e-9 * std::max(1.0, total_mass())) {
        throw NumericalError("transport problem infeasible: unbalanced masses");
      }
    }
  }

  FlowPlan plan() const {
    FlowPlan out;
    for (int v = 0; v < root_; ++v) {
      const long arc = pred_[v];
      if (arc >= real_arcs_ || flow_[v] <= 0.0) continue;
      const int i = static_cast<int>(arc / m_);
      const int j = static_cast<int>(arc % m_);
      out.entries.push_back({i, j, flow_[v]});
      out.objective += flow_[v] * cost_(i, j);
    }
    std::sort(out.entries.begin(), out.entries.end(), [](const auto& a, const auto& b) {
      return std::tie(a.source, a.target) < std::tie(b.source, b.target);
    });
    return out;
  }

 private:
  int arc_source(long arc) const {
    if (arc < real_arcs_) return static_cast<int>(arc / m_);
    const int v = static_cast<int>(arc - real_arcs_);
    return v < n_ ? v : root_;
  }
  int arc_target(long arc) const {
    if (arc < real_arcs_) return n_ + static_cast<int>(arc % m_);
    const int v = static_cast<int>(arc - real_arcs_);
    return v < n_ ? root_ : v;
  }
  double arc_cost(long arc) const {
    if (arc < real_arcs_) return cost_.values[arc];
    return arc - real_arcs_ < n_ ? 0.0 : art_cost_;
  }
  double reduced_cost(long arc) const {
    return arc_cost(arc) + pi_[arc_source(arc)] - pi_[arc_target(arc)];
  }
  double total_mass() const {
    double s = 0.0;
    for (int v = 0; v < n_; ++v) s += std::abs(flow_[v]);
    return s;
  }

  // Block search over all arcs, resuming where the last search stopped.
  long find_entering() {
    const long total = real_arcs_ + root_;
    double best_rc = -eps_;
    long best = -1;
    long in_block = block_;
    long arc = next_arc_;
    int i = arc < real_arcs_ ? static_cast<int>(arc / m_) : 0;
    int j = arc < real_arcs_ ? static_cast<int>(arc % m_) : 0;
    for (long scanned = 0; scanned < total; ++scanned) {
      double rc;
      if (arc < real_arcs_) {
        rc = cost_.values[arc] + pi_[i] - pi_[n_ + j];
        if (++j == m_) {
          j = 0;
          ++i;
        }
      } else {
        rc = reduced_cost(arc);
      }
      if (rc < best_rc) {
        best_rc = rc;
        best = arc;
      }
      if (++arc == total) {
        arc = 0;
        i = 0;
        j = 0;
      }
      if (--in_block == 0) {
        if (best >= 0) break;
        in_block = block_;
      }
    }
    next_arc_ = arc;
    return best;
  }

  void pivot(long in) {
    const int first = arc_source(in);
    const int second = arc_target(in);

    int a = first;
    int b = second;
    while (a != b) {
      if (depth_[a] > depth_[b]) {
        a = parent_[a];
      } else if (depth_[b] > depth_[a]) {
        b = parent_[b];
      } else {
        a = parent_[a];
        b = parent_[b];
      }
    }
    const int join = a;

    // Leaving arc: strict on the first path, non-strict on the second, which
    // keeps the spanning tree strongly feasible under degeneracy.
    double delta = std::numeric_limits<double>::infinity();
    int u_out = -1;
    int side = 0;
    for (int w = first; w != join; w = parent_[w]) {
      if (up_[w] && flow_[w] < delta) {
        delta = flow_[w];
        u_out = w;
        side = 1;
      }
    }
    for (int w = second; w != join; w = parent_[w]) {
      if (!up_[w] && flow_[w] <= delta) {
        delta = flow_[w];
        u_out = w;
        side = 2;
      }
    }
    if (u_out < 0) throw NumericalError("transport problem unbounded");

    if (delta > 0.0) {
      for (int w = first; w != join; w = parent_[w]) flow_[w] += up_[w] ? -delta : delta;
      for (int w = second; w != join; w = parent_[w]) flow_[w] += up_[w] ? delta : -delta;
    }

    const double rc_in = reduced_cost(in);
    const int moved = side == 1 ? first : second;
    const int new_root_parent = side == 1 ? second : first;
    const double sigma = side == 1 ? -rc_in : rc_in;

    // Reverse the parent chain from `moved` up to u_out and hang it below
    // the other endpoint of the entering arc.
    int cur = moved;
    int new_parent = new_root_parent;
    long new_arc = in;
    char new_up = side == 1 ? 1 : 0;
    double new_flow = delta;
    while (true) {
      const int old_parent = parent_[cur];
      const long old_arc = pred_[cur];
      const char old_up = up_[cur];
      const double old_flow = flow_[cur];
      detach(cur);
      attach(cur, new_parent);
      parent_[cur] = new_parent;
      pred_[cur] = new_arc;
      up_[cur] = new_up;
      flow_[cur] = new_flow;
      if (cur == u_out) break;
      new_parent = cur;
      new_arc = old_arc;
      new_up = old_up ? 0 : 1;
      new_flow = old_flow;
      cur = old_parent;
    }

    stack_.clear();
    stack_.push_back(moved);
    while (!stack_.empty()) {
      const int v = stack_.back();
      stack_.pop_back();
      depth_[v] = depth_[parent_[v]] + 1;
      pi_[v] += sigma;
      for (int c = first_child_[v]; c >= 0; c = next_sib_[c]) stack_.push_back(c);
    }
  }

  void detach(int v) {
    const int p = parent_[v];
    if (p < 0) return;
    if (prev_sib_[v] >= 0) {
      next_sib_[prev_sib_[v]] = next_sib_[v];
    } else {
      first_child_[p] = next_sib_[v];
    }
    if (next_sib_[v] >= 0) prev_sib_[next_sib_[v]] = prev_sib_[v];
    next_sib_[v] = prev_sib_[v] = -1;
  }

  void attach(int v, int p) {
    prev_sib_[v] = -1;
    next_sib_[v] = first_child_[p];
    if (first_child_[p] >= 0) prev_sib_[first_child_[p]] = v;
    first_child_[p] = v;
  }

  int n_;
  int m_;
  int root_;
  long real_arcs_;
  const CostMatrix& cost_;
  double art_cost_ = 0.0;
  double eps_ = 0.0;
  long block_ = 10;
  long next_arc_ = 0;

  std::vector<int> parent_;
  std::vector<long> pred_;
  std::vector<char> up_;  // pred arc points from the node to its parent
  std::vector<int> depth_;
  std::vector<double> pi_;
  std::vector<double> flow_;
  std::vector<int> first_child_;
  std::vector<int> next_sib_;
  std::vector<int> prev_sib_;
  std::vector<int> stack_;
};

}  // namespace

FlowPlan solve_transport(std::span<const double> supply, std::span<const double> demand,
                         const CostMatrix& cost, double balance_tol) {
  if (cost.rows != static_cast<int>(supply.size()) ||
      cost.cols != static_cast<int>(demand.size()) ||
      cost.values.size() != supply.size() * demand.size()) {
    throw ValidationError("transport cost matrix shape does not match the masses");
  }
  if (supply.empty() || demand.empty()) throw ValidationError("transport side is empty");
  for (double s : supply) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw ValidationError("negative or non-finite supply");
  }
  for (double d : demand) {
    if (!(d >= 0.0) || !std::isfinite(d)) throw ValidationError("negative or non-finite demand");
  }
  for (double c : cost.values) {
    if (!std::isfinite(c)) throw ValidationError("non-finite transport cost");
  }

  const double total_supply = std::accumulate(supply.begin(), supply.end(), 0.0);
  const double total_demand = std::accumulate(demand.begin(), demand.end(), 0.0);
  const double gap = total_supply - total_demand;
  if (std::abs(gap) > balance_tol * std::max(1.0, total_supply)) {
    throw ValidationError("transport masses are unbalanced: supply " +
                         std::to_string(total_supply) + " vs demand " +
                         std::to_string(total_demand));
  }
  std::vector<double> balanced(demand.begin(), demand.end());
  if (gap != 0.0) {
    // Put the residual on the largest demand so it stays nonnegative.
    auto it = std::max_element(balanced.begin(), balanced.end());
    *it = std::max(0.0, *it + gap);
  }

  BipartiteNetworkSimplex solver(supply, balanced, cost);
  solver.run();
  return solver.plan();
}

}  // namespace doclayout::ot
