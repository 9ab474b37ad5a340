#include "doclayout/metrics/similarity.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>

#include "doclayout/error.hpp"
#include "doclayout/matching/hungarian.hpp"
#include "doclayout/ot/transport.hpp"

namespace doclayout::metrics {

namespace {

struct NormBox {
  double x, y, w, h;
};

NormBox normalize(const core::LayoutElement& e, core::PageSize p) {
  return {static_cast<double>(e.x) / p.width, static_cast<double>(e.y) / p.height,
          static_cast<double>(e.w) / p.width, static_cast<double>(e.h) / p.height};
}

}  // namespace

double docsim_pair_weight(const core::LayoutElement& a, core::PageSize pa,
                          const core::LayoutElement& b, core::PageSize pb) {
  if (a.class_id != b.class_id) return 0.0;
  const NormBox p = normalize(a, pa);
  const NormBox q = normalize(b, pb);
  const double center_dist =
      std::hypot((p.x + p.w / 2) - (q.x + q.w / 2), (p.y + p.h / 2) - (q.y + q.h / 2));
  const double shape_diff = std::abs(p.w - q.w) + std::abs(p.h - q.h);
  return std::sqrt(std::min(p.w * p.h, q.w * q.h)) * std::exp2(-center_dist - 2.0 * shape_diff);
}

double docsim(const core::Layout& s, const core::Layout& t) {
  if (!core::same_schema(s, t)) throw ValidationError("DocSim: layouts use different schemas");
  if (s.empty() || t.empty()) return 0.0;
  const auto n = static_cast<Eigen::Index>(s.size());
  const auto m = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd neg(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      neg(i, j) = -docsim_pair_weight(s.elements()[i], s.page(), t.elements()[j], t.page());
    }
  }
  const auto match = matching::hungarian(neg);
  return -match.total_cost / static_cast<double>(std::max(n, m));
}

SequenceWasserstein wasserstein_seq(const std::vector<core::Layout>& a,
                                    const std::vector<core::Layout>& b, std::uint64_t seed,
                                    std::size_t exact_limit) {
  if (a.empty() || b.empty()) throw ValidationError("Wasserstein: empty corpus");
  const int k = a.front().schema().size();
  std::vector<std::array<double, 4>> pa, pb;
  std::vector<double> ha(k, 0.0), hb(k, 0.0);
  auto pool = [&](const std::vector<core::Layout>& corpus, std::vector<std::array<double, 4>>& pts,
                  std::vector<double>& hist) {
    for (const auto& l : corpus) {
      if (!core::same_schema(l, a.front())) {
        throw ValidationError("Wasserstein: layouts use different schemas");
      }
      for (const auto& e : l.elements()) {
        const NormBox nb = normalize(e, l.page());
        pts.push_back({nb.x, nb.y, nb.w, nb.h});
        hist[e.class_id] += 1.0;
      }
    }
  };
  pool(a, pa, ha);
  pool(b, pb, hb);
  if (pa.empty() || pb.empty()) throw ValidationError("Wasserstein: corpus has no boxes");

  SequenceWasserstein out;
  const double na = static_cast<double>(pa.size());
  const double nb = static_cast<double>(pb.size());
  for (int c = 0; c < k; ++c) out.class_w += std::abs(ha[c] / na - hb[c] / nb);
  out.class_w *= 0.5;

  std::mt19937_64 rng(seed);
  auto subsample = [&](std::vector<std::array<double, 4>>& pts) {
    if (pts.size() <= exact_limit) return;
    std::shuffle(pts.begin(), pts.end(), rng);
    pts.resize(exact_limit);
  };
  subsample(pa);
  subsample(pb);

  const auto sa = static_cast<std::int64_t>(pa.size());
  const auto sb = static_cast<std::int64_t>(pb.size());
  const double unit = static_cast<double>(std::lcm(sa, sb));
  std::vector<double> supply(pa.size(), unit / sa), demand(pb.size(), unit / sb);
  ot::CostMatrix cost{static_cast<int>(sa), static_cast<int>(sb), {}};
  cost.values.reserve(pa.size() * pb.size());
  for (const auto& p : pa) {
    for (const auto& q : pb) {
      double d2 = 0.0;
      for (int d = 0; d < 4; ++d) d2 += (p[d] - q[d]) * (p[d] - q[d]);
      cost.values.push_back(d2);
    }
  }
  const auto plan = ot::solve_transport(supply, demand, cost);
  out.bbox_w = std::sqrt(std::max(0.0, plan.objective / unit));
  return out;
}

}  // namespace doclayout::metrics
