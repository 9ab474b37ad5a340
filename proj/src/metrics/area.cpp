#include "doclayout/metrics/area.hpp"

#include <algorithm>
#include <cstdint>
#include <string>

#include "doclayout/error.hpp"

namespace doclayout::metrics {

OverlapMode parse_overlap_mode(std::string_view text) {
  if (text == "union") return OverlapMode::kUnion;
  if (text == "pairwise-sum") return OverlapMode::kPairwiseSum;
  throw ValidationError("unknown overlap mode '" + std::string(text) +
                        "' (expected union or pairwise-sum)");
}

namespace {

// Area (in px^2) of the cells covered by at least `min_depth` boxes.
std::int64_t covered_area(const std::vector<core::LayoutElement>& boxes, int min_depth) {
  std::vector<int> xs, ys;
  for (const auto& b : boxes) {
    xs.insert(xs.end(), {b.x, b.x + b.w});
    ys.insert(ys.end(), {b.y, b.y + b.h});
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

  std::int64_t area = 0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
      int depth = 0;
      for (const auto& b : boxes) {
        if (b.x <= xs[i] && xs[i + 1] <= b.x + b.w && b.y <= ys[j] && ys[j + 1] <= b.y + b.h) {
          if (++depth >= min_depth) break;
        }
      }
      if (depth >= min_depth) {
        area += std::int64_t{xs[i + 1] - xs[i]} * (ys[j + 1] - ys[j]);
      }
    }
  }
  return area;
}

double page_pct(std::int64_t area, core::PageSize page) {
  return 100.0 * static_cast<double>(area) /
         (static_cast<double>(page.width) * static_cast<double>(page.height));
}

}  // namespace

double coverage_pct(const core::Layout& layout) {
  if (layout.empty()) return 0.0;
  return page_pct(covered_area(layout.elements(), 1), layout.page());
}

double overlap_pct(const core::Layout& layout, OverlapMode mode) {
  if (layout.size() < 2) return 0.0;
  if (mode == OverlapMode::kUnion) return page_pct(covered_area(layout.elements(), 2), layout.page());
  std::int64_t sum = 0;
  const auto& e = layout.elements();
  for (std::size_t i = 0; i < e.size(); ++i) {
    for (std::size_t j = i + 1; j < e.size(); ++j) {
      const std::int64_t w = std::min(e[i].x + e[i].w, e[j].x + e[j].w) - std::max(e[i].x, e[j].x);
      const std::int64_t h = std::min(e[i].y + e[i].h, e[j].y + e[j].h) - std::max(e[i].y, e[j].y);
      if (w > 0 && h > 0) sum += w * h;
    }
  }
  return page_pct(sum, layout.page());
}

CorpusSummary corpus_summary(const std::vector<core::Layout>& corpus, OverlapMode mode) {
  CorpusSummary s;
  s.layouts = corpus.size();
  if (corpus.empty()) return s;
  core::require_shared_schema(corpus, "corpus summary");
  s.class_histogram.assign(corpus.front().schema().size(), 0);
  s.min_boxes = corpus.front().size();
  std::size_t total_boxes = 0;
  for (const auto& l : corpus) {
    s.mean_overlap_pct += overlap_pct(l, mode);
    s.mean_coverage_pct += coverage_pct(l);
    for (const auto& e : l.elements()) ++s.class_histogram[e.class_id];
    total_boxes += l.size();
    s.min_boxes = std::min(s.min_boxes, l.size());
    s.max_boxes = std::max(s.max_boxes, l.size());
  }
  const double n = static_cast<double>(corpus.size());
  s.mean_overlap_pct /= n;
  s.mean_coverage_pct /= n;
  s.mean_boxes = static_cast<double>(total_boxes) / n;
  return s;
}

}  // namespace doclayout::metrics
