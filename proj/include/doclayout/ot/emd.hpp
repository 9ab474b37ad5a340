#pragma once

#include <span>
#include <vector>

#include "doclayout/core/layout.hpp"
#include "doclayout/error.hpp"
#include "doclayout/ot/transport.hpp"

namespace doclayout::ot {

struct Point2 {
  double u = 0.0;
  double v = 0.0;

  bool operator==(const Point2&) const = default;
};

// Weighted 2-D point cloud in normalized page coordinates. Weights sum to
// one unless the cloud is empty.
class PointMass {
 public:
  PointMass() = default;
  // Throws ValidationError on size mismatch, non-finite coordinates,
  // negative weights, or weights that do not sum to 1 within 1e-9.
  PointMass(std::vector<Point2> points, std::vector<double> weights);
  static PointMass uniform(std::vector<Point2> points);

  const std::vector<Point2>& points() const noexcept { return points_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  bool is_uniform() const noexcept { return uniform_; }

 private:
  std::vector<Point2> points_;
  std::vector<double> weights_;
  bool uniform_ = false;
};

inline constexpr int kDefaultRasterGrid = 64;

// Samples the union of `boxes` on a grid x grid lattice of cell centres over
// the page. A lattice point counts when it lies strictly inside at least one
// box; every such point gets equal weight.
PointMass rasterize(std::span<const core::LayoutElement> boxes, core::PageSize page, int grid);

class EmptySideError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

struct EmdResult {
  double distance = 0.0;
  FlowPlan plan;  // indices refer to the input clouds
};

enum class EmdSolver { kExact, kSinkhorn };

struct EmdOptions {
  EmdSolver solver = EmdSolver::kExact;
  double sinkhorn_epsilon = 1e-2;
};

// Earth mover's distance under Euclidean ground cost. Mass shared by
// identical points of both clouds is matched in place before solving, which
// is exact for a metric cost. Throws EmptySideError if either cloud is empty.
EmdResult emd(const PointMass& a, const PointMass& b, const EmdOptions& options = {});


CostMatrix euclidean_cost(std::span<const Point2> a, std::span<const Point2> b);

// Dense two-phase simplex over all |a|*|b| flow variables. Independent of
// the network simplex; intended for validation only. Refuses problems with
// more than 10^4 variables.
double emd_lp_oracle(const PointMass& a, const PointMass& b);
double lp_transport_oracle(std::span<const double> supply, std::span<const double> demand,
                           const CostMatrix& cost);

inline constexpr long kLpOracleMaxVariables = 10000;

}  // namespace doclayout::ot
