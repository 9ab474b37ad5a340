#include "doclayout/metrics/doc_emd.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "doclayout/error.hpp"

namespace doclayout::metrics {

void DocEmdConfig::validate() const {
  if (!(lambda >= 0.0)) throw ValidationError("Doc-EMD lambda must be >= 0");
  if (grid < 2) throw ValidationError("Doc-EMD raster grid must be >= 2");
}

namespace {

struct RasterizedLayout {
  std::vector<ot::PointMass> classes;  // indexed by class id
  std::vector<char> has_boxes;
};

RasterizedLayout rasterize_by_class(const core::Layout& layout, int grid) {
  const int k = layout.schema().size();
  std::vector<std::vector<core::LayoutElement>> grouped(k);
  for (const auto& e : layout.elements()) grouped[e.class_id].push_back(e);
  RasterizedLayout out;
  out.classes.reserve(k);
  out.has_boxes.resize(k);
  for (int c = 0; c < k; ++c) {
    out.has_boxes[c] = !grouped[c].empty();
    out.classes.push_back(grouped[c].empty() ? ot::PointMass{}
                                             : ot::rasterize(grouped[c], layout.page(), grid));
  }
  return out;
}

MetricReport compare(const RasterizedLayout& s, const RasterizedLayout& t,
                     const DocEmdConfig& cfg) {
  MetricReport report;
  report.lambda = cfg.lambda;
  const int k = static_cast<int>(s.classes.size());
  double emd_sum = 0.0;
  for (int c = 0; c < k; ++c) {
    const bool in_s = !s.classes[c].empty();
    const bool in_t = !t.classes[c].empty();
    if ((s.has_boxes[c] && !in_s) || (t.has_boxes[c] && !in_t)) {
      report.degenerate_classes.push_back(c);
    }
    if (in_s && in_t) {
      const double d = ot::emd(s.classes[c], t.classes[c], cfg.emd).distance;
      report.per_class.push_back({c, d});
      emd_sum += d;
    } else if (in_s != in_t) {
      report.penalty_classes.push_back(c);
    }
  }
  report.total = emd_sum + cfg.lambda * static_cast<double>(report.penalty_classes.size());
  return report;
}

}  // namespace

MetricReport doc_emd(const core::Layout& s, const core::Layout& t, const DocEmdConfig& cfg) {
  cfg.validate();
  if (!core::same_schema(s, t)) throw ValidationError("Doc-EMD: layouts use different schemas");
  return compare(rasterize_by_class(s, cfg.grid), rasterize_by_class(t, cfg.grid), cfg);
}

Eigen::MatrixXd doc_emd_matrix(const std::vector<core::Layout>& a,
                               const std::vector<core::Layout>& b, const DocEmdConfig& cfg,
                               unsigned threads) {
  cfg.validate();
  const core::Layout* first = !a.empty() ? &a.front() : (!b.empty() ? &b.front() : nullptr);
  for (const auto* side : {&a, &b}) {
    for (const auto& l : *side) {
      if (!core::same_schema(*first, l)) {
        throw ValidationError("Doc-EMD matrix: layouts use different schemas");
      }
    }
  }
  std::vector<RasterizedLayout> ra, rb;
  ra.reserve(a.size());
  rb.reserve(b.size());
  for (const auto& l : a) ra.push_back(rasterize_by_class(l, cfg.grid));
  for (const auto& l : b) rb.push_back(rasterize_by_class(l, cfg.grid));

  const long rows = static_cast<long>(a.size());
  const long cols = static_cast<long>(b.size());
  Eigen::MatrixXd out(rows, cols);
  const long total = rows * cols;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<long>(threads, std::max<long>(total, 1)));

  std::atomic<long> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    try {
      for (long k = next++; k < total && !failed; k = next++) {
        out(k / cols, k % cols) = compare(ra[k / cols], rb[k % cols], cfg).total;
      }
    } catch (...) {
      if (!failed.exchange(true)) failure = std::current_exception();
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace doclayout::metrics
