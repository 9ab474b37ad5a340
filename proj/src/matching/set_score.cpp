#include "doclayout/matching/set_score.hpp"

#include "doclayout/error.hpp"
#include "doclayout/metrics/similarity.hpp"

namespace doclayout::matching {

namespace {

void require_nonempty(const std::vector<core::Layout>& a, const std::vector<core::Layout>& b,
                      const char* what) {
  if (a.empty() || b.empty()) throw ValidationError(std::string(what) + ": empty corpus");
}

}  // namespace

SetScore set_score_from_distances(const Eigen::MatrixXd& distances) {
  SetScore out;
  out.assignment = hungarian(distances);
  if (!out.assignment.pairs.empty()) {
    out.mean = out.assignment.total_cost / static_cast<double>(out.assignment.pairs.size());
  }
  return out;
}

SetScore set_score_docemd(const std::vector<core::Layout>& a, const std::vector<core::Layout>& b,
                          const metrics::DocEmdConfig& cfg, unsigned threads) {
  require_nonempty(a, b, "Doc-EMD set score");
  return set_score_from_distances(metrics::doc_emd_matrix(a, b, cfg, threads));
}

SetScore set_score_docsim(const std::vector<core::Layout>& a, const std::vector<core::Layout>& b) {
  require_nonempty(a, b, "DocSim set score");
  Eigen::MatrixXd neg(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) neg(i, j) = -metrics::docsim(a[i], b[j]);
  }
  SetScore out;
  out.assignment = hungarian(neg);
  out.assignment.total_cost = 0.0 - out.assignment.total_cost;  // avoids -0
  out.mean = out.assignment.total_cost / static_cast<double>(out.assignment.pairs.size());
  return out;
}

}  // namespace doclayout::matching
