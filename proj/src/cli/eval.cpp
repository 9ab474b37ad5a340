#include "doclayout/cli/commands.hpp"

#include <limits>

#include "doclayout/matching/set_score.hpp"
#include "doclayout/metrics/report.hpp"
#include "doclayout/metrics/similarity.hpp"

namespace doclayout::cli {

using metrics::format_number;
using nlohmann::ordered_json;

EvalRow evaluate(const std::vector<core::Layout>& generated,
                 const std::vector<core::Layout>& reference, const EvalConfig& cfg) {
  if (generated.empty()) throw ValidationError("generated corpus is empty");
  if (reference.empty()) throw ValidationError("reference corpus is empty");
  cfg.doc_emd.validate();
  if (!core::same_schema(generated.front(), reference.front())) {
    throw ValidationError("generated and reference corpora use different class schemas");
  }

  EvalRow row;
  row.generated = generated.size();
  row.reference = reference.size();
  row.seed = cfg.seed;
  row.doc_emd = matching::set_score_docemd(generated, reference, cfg.doc_emd, cfg.threads).mean;
  row.docsim = matching::set_score_docsim(generated, reference).mean;
  row.generated_summary = metrics::corpus_summary(generated, cfg.overlap_mode);
  row.reference_summary = metrics::corpus_summary(reference, cfg.overlap_mode);
  if (row.generated_summary.mean_boxes > 0 && row.reference_summary.mean_boxes > 0) {
    const auto w = metrics::wasserstein_seq(generated, reference, cfg.seed);
    row.wasserstein_class = w.class_w;
    row.wasserstein_bbox = w.bbox_w;
  } else {
    row.wasserstein_class = row.wasserstein_bbox = std::numeric_limits<double>::quiet_NaN();
  }
  row.overlap = row.generated_summary.mean_overlap_pct;
  row.coverage = row.generated_summary.mean_coverage_pct;
  return row;
}

std::string eval_csv_header() {
  return "docsim,doc_emd,overlap,coverage,wasserstein_class,wasserstein_bbox,generated,"
         "reference,seed";
}

std::string eval_csv_row(const EvalRow& r) {
  return format_number(r.docsim) + ',' + format_number(r.doc_emd) + ',' +
         format_number(r.overlap) + ',' + format_number(r.coverage) + ',' +
         format_number(r.wasserstein_class) + ',' + format_number(r.wasserstein_bbox) + ',' +
         std::to_string(r.generated) + ',' + std::to_string(r.reference) + ',' +
         std::to_string(r.seed);
}

namespace {

ordered_json summary_json(const metrics::CorpusSummary& s, const core::ClassSchema& schema) {
  ordered_json hist = ordered_json::object();
  for (int c = 0; c < schema.size(); ++c) {
    hist[schema.name(c)] = c < static_cast<int>(s.class_histogram.size()) ? s.class_histogram[c] : 0;
  }
  return {{"layouts", s.layouts},
          {"mean_overlap_pct", s.mean_overlap_pct},
          {"mean_coverage_pct", s.mean_coverage_pct},
          {"mean_boxes", s.mean_boxes},
          {"min_boxes", s.min_boxes},
          {"max_boxes", s.max_boxes},
          {"class_histogram", hist}};
}

}  // namespace

ordered_json eval_json(const EvalRow& r, const core::ClassSchema& schema) {
  ordered_json j;
  j["docsim"] = r.docsim;
  j["doc_emd"] = r.doc_emd;
  j["overlap"] = r.overlap;
  j["coverage"] = r.coverage;
  j["wasserstein_class"] = r.wasserstein_class;
  j["wasserstein_bbox"] = r.wasserstein_bbox;
  j["generated"] = r.generated;
  j["reference"] = r.reference;
  j["seed"] = r.seed;
  j["generated_summary"] = summary_json(r.generated_summary, schema);
  j["reference_summary"] = summary_json(r.reference_summary, schema);
  return j;
}

}  // namespace doclayout::cli
