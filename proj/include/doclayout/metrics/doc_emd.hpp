#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "doclayout/core/layout.hpp"
#include "doclayout/ot/emd.hpp"

namespace doclayout::metrics {

struct DocEmdConfig {
  double lambda = 1.0;                 // penalty per class present on one side only
  int grid = ot::kDefaultRasterGrid;   // raster lattice per page side
  ot::EmdOptions emd;

  void validate() const;
};

struct ClassTerm {
  int class_id = 0;
  double emd = 0.0;
};

// Breakdown of one Doc-EMD evaluation.
//
//   total = sum(per_class[i].emd) + lambda * penalty_classes.size()
//
// A class is "present" in a layout when its boxes rasterize to at least one
// lattice point. Classes present on both sides get an EMD term; classes
// present on exactly one side are penalised. Classes that have boxes but
// rasterize to nothing are listed in `degenerate_classes`.
struct MetricReport {
  double total = 0.0;
  double lambda = 1.0;
  std::vector<ClassTerm> per_class;
  std::vector<int> penalty_classes;
  std::vector<int> degenerate_classes;
};

MetricReport doc_emd(const core::Layout& s, const core::Layout& t, const DocEmdConfig& cfg = {});

// |A| x |B| matrix of Doc-EMD totals. Pairs are evaluated on `threads`
// workers (0 = hardware concurrency); output is independent of the count.
Eigen::MatrixXd doc_emd_matrix(const std::vector<core::Layout>& a,
                               const std::vector<core::Layout>& b, const DocEmdConfig& cfg = {},
                               unsigned threads = 0);

}  // namespace doclayout::metrics
