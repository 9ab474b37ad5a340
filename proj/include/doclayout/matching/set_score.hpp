#pragma once

#include <vector>

#include "doclayout/core/layout.hpp"
#include "doclayout/matching/hungarian.hpp"
#include "doclayout/metrics/doc_emd.hpp"

namespace doclayout::matching {

struct SetScore {
  double mean = 0.0;  // mean over matched pairs
  Assignment assignment;
};

// Corpus-vs-corpus Doc-EMD: Hungarian matching on the pairwise distance
// matrix, reported as the mean matched distance (lower is better). Unmatched
// items of the larger corpus do not contribute.
SetScore set_score_docemd(const std::vector<core::Layout>& a, const std::vector<core::Layout>& b,
                          const metrics::DocEmdConfig& cfg = {}, unsigned threads = 0);

// Same for a precomputed distance matrix.
SetScore set_score_from_distances(const Eigen::MatrixXd& distances);

// Corpus-vs-corpus DocSim: maximum-similarity matching, mean matched
// similarity (higher is better).
SetScore set_score_docsim(const std::vector<core::Layout>& a, const std::vector<core::Layout>& b);

}  // namespace doclayout::matching
