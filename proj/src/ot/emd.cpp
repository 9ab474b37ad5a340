#include "doclayout/ot/emd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <numeric>
#include <unordered_map>

namespace doclayout::ot {

PointMass::PointMass(std::vector<Point2> points, std::vector<double> weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
  if (points_.size() != weights_.size()) {
    throw ValidationError("point mass: point and weight counts differ");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i].u) || !std::isfinite(points_[i].v)) {
      throw ValidationError("point mass: non-finite coordinate at " + std::to_string(i));
    }
    if (!(weights_[i] >= 0.0) || !std::isfinite(weights_[i])) {
      throw ValidationError("point mass: invalid weight at " + std::to_string(i));
    }
    total += weights_[i];
  }
  if (!points_.empty() && std::abs(total - 1.0) > 1e-9) {
    throw ValidationError("point mass: weights sum to " + std::to_string(total) + ", not 1");
  }
  uniform_ = !weights_.empty() &&
             std::all_of(weights_.begin(), weights_.end(),
                         [&](double w) { return w == weights_.front(); });
}

PointMass PointMass::uniform(std::vector<Point2> points) {
  const std::size_t n = points.size();
  std::vector<double> weights(n, n ? 1.0 / static_cast<double>(n) : 0.0);
  PointMass pm;
  pm.points_ = std::move(points);
  pm.weights_ = std::move(weights);
  pm.uniform_ = n > 0;
  return pm;
}

PointMass rasterize(std::span<const core::LayoutElement> boxes, core::PageSize page, int grid) {
  if (grid < 2) throw ValidationError("raster grid must be >= 2");
  const std::int64_t g = grid;
  std::vector<char> covered(static_cast<std::size_t>(grid) * grid, 0);
  // Cell centre k sits at (2k+1) * dim / (2g); compare in integers.
  auto inside = [g](std::int64_t k, std::int64_t lo, std::int64_t hi, std::int64_t dim) {
    const std::int64_t c = (2 * k + 1) * dim;
    return 2 * g * lo < c && c < 2 * g * hi;
  };
  for (const auto& b : boxes) {
    if (b.w <= 0 || b.h <= 0) continue;
    for (int r = 0; r < grid; ++r) {
      if (!inside(r, b.y, std::int64_t{b.y} + b.h, page.height)) continue;
      for (int c = 0; c < grid; ++c) {
        if (inside(c, b.x, std::int64_t{b.x} + b.w, page.width)) covered[r * grid + c] = 1;
      }
    }
  }
  std::vector<Point2> points;
  for (int r = 0; r < grid; ++r) {
    for (int c = 0; c < grid; ++c) {
      if (covered[r * grid + c]) {
        points.push_back({(c + 0.5) / grid, (r + 0.5) / grid});
      }
    }
  }
  return PointMass::uniform(std::move(points));
}

CostMatrix euclidean_cost(std::span<const Point2> a, std::span<const Point2> b) {
  CostMatrix cost{static_cast<int>(a.size()), static_cast<int>(b.size()), {}};
  cost.values.resize(a.size() * b.size());
  std::size_t k = 0;
  for (const auto& p : a) {
    for (const auto& q : b) cost.values[k++] = std::hypot(p.u - q.u, p.v - q.v);
  }
  return cost;
}

namespace {

struct PointHash {
  std::size_t operator()(const Point2& p) const noexcept {
    std::uint64_t a, b;
    std::memcpy(&a, &p.u, sizeof a);
    std::memcpy(&b, &p.v, sizeof b);
    return std::hash<std::uint64_t>{}(a * 0x9E3779B97F4A7C15ULL ^ b);
  }
};

}  // namespace

EmdResult emd(const PointMass& a, const PointMass& b, const EmdOptions& options) {
  if (a.empty() || b.empty()) throw EmptySideError("emd: empty point mass");

  // Uniform clouds are handled in integer units of 1/lcm(|a|, |b|) so the
  // network simplex works on exact masses.
  const bool integral = a.is_uniform() && b.is_uniform();
  const auto na = static_cast<std::int64_t>(a.size());
  const auto nb = static_cast<std::int64_t>(b.size());
  const double unit = integral ? static_cast<double>(std::lcm(na, nb)) : 1.0;
  auto mass_a = [&](std::size_t i) { return integral ? unit / na : a.weights()[i]; };
  auto mass_b = [&](std::size_t j) { return integral ? unit / nb : b.weights()[j]; };

  std::vector<double> ra(a.size()), rb(b.size());
  for (std::size_t i = 0; i < a.size(); ++i) ra[i] = mass_a(i);
  for (std::size_t j = 0; j < b.size(); ++j) rb[j] = mass_b(j);

  EmdResult result;
  std::unordered_map<Point2, std::size_t, PointHash> index_b;
  index_b.reserve(b.size());
  for (std::size_t j = 0; j < b.size(); ++j) index_b.emplace(b.points()[j], j);
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto it = index_b.find(a.points()[i]);
    if (it == index_b.end()) continue;
    const std::size_t j = it->second;
    const double shared = std::min(ra[i], rb[j]);
    if (shared <= 0.0) continue;
    ra[i] -= shared;
    rb[j] -= shared;
    result.plan.entries.push_back({static_cast<int>(i), static_cast<int>(j), shared / unit});
  }

  std::vector<int> rows, cols;
  std::vector<double> supply, demand;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    if (ra[i] > 0.0) {
      rows.push_back(static_cast<int>(i));
      supply.push_back(ra[i]);
    }
  }
  for (std::size_t j = 0; j < rb.size(); ++j) {
    if (rb[j] > 0.0) {
      cols.push_back(static_cast<int>(j));
      demand.push_back(rb[j]);
    }
  }
  const double remaining = std::accumulate(supply.begin(), supply.end(), 0.0) / unit;
  if (rows.empty() || cols.empty() || remaining <= 1e-15) return result;

  std::vector<Point2> pa, pb;
  for (int i : rows) pa.push_back(a.points()[i]);
  for (int j : cols) pb.push_back(b.points()[j]);
  const CostMatrix cost = euclidean_cost(pa, pb);

  if (options.solver == EmdSolver::kSinkhorn) {
    std::vector<double> sa(supply), sb(demand);
    for (auto& s : sa) s /= unit;
    for (auto& s : sb) s /= unit;
    result.distance = sinkhorn_cost(sa, sb, cost, options.sinkhorn_epsilon);
    return result;
  }

  FlowPlan solved = solve_transport(supply, demand, cost);
  for (const auto& e : solved.entries) {
    result.plan.entries.push_back({rows[e.source], cols[e.target], e.flow / unit});
  }
  result.distance = solved.objective / unit;
  result.plan.objective = result.distance;
  return result;
}

}  // namespace doclayout::ot
