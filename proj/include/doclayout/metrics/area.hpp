#pragma once

#include <string_view>
#include <vector>

#include "doclayout/core/layout.hpp"

namespace doclayout::metrics {

enum class OverlapMode {
  kUnion,        // area covered by two or more boxes
  kPairwiseSum,  // sum of pairwise intersection areas (can exceed 100%)
};

OverlapMode parse_overlap_mode(std::string_view text);

// Percent of the page covered by the union of boxes. Exact, via a
// coordinate-compressed sweep over box edges.
double coverage_pct(const core::Layout& layout);

// Percent of the page where boxes overlap, per `mode`.
double overlap_pct(const core::Layout& layout, OverlapMode mode = OverlapMode::kUnion);

struct CorpusSummary {
  std::size_t layouts = 0;
  double mean_overlap_pct = 0.0;
  double mean_coverage_pct = 0.0;
  std::vector<long> class_histogram;  // box count per class id
  double mean_boxes = 0.0;
  std::size_t min_boxes = 0;
  std::size_t max_boxes = 0;
};

CorpusSummary corpus_summary(const std::vector<core::Layout>& corpus,
                             OverlapMode mode = OverlapMode::kUnion);

}  // namespace doclayout::metrics
