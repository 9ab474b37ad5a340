#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "doclayout/core/layout.hpp"
#include "doclayout/diffusion/trainer.hpp"
#include "doclayout/metrics/area.hpp"
#include "doclayout/metrics/doc_emd.hpp"

namespace doclayout::cli {

// --------------------------------------------------------------- eval

struct EvalConfig {
  metrics::DocEmdConfig doc_emd;
  metrics::OverlapMode overlap_mode = metrics::OverlapMode::kUnion;
  std::uint64_t seed = 0;  // Wasserstein subsampling
  unsigned threads = 0;
};

struct EvalRow {
  double docsim = 0.0;
  double doc_emd = 0.0;
  double overlap = 0.0;   // generated corpus, mean percent
  double coverage = 0.0;  // generated corpus, mean percent
  double wasserstein_class = 0.0;  // NaN when either corpus has no boxes
  double wasserstein_bbox = 0.0;
  std::size_t generated = 0;
  std::size_t reference = 0;
  std::uint64_t seed = 0;
  metrics::CorpusSummary generated_summary;
  metrics::CorpusSummary reference_summary;
};

// Throws ValidationError on an empty corpus or mismatched schemas.
EvalRow evaluate(const std::vector<core::Layout>& generated,
                 const std::vector<core::Layout>& reference, const EvalConfig& cfg);

std::string eval_csv_header();
std::string eval_csv_row(const EvalRow& row);
nlohmann::ordered_json eval_json(const EvalRow& row, const core::ClassSchema& schema);

// ------------------------------------------------------------- render

// One SVG per layout. Boxes are the only <rect> elements; the legend is text.
std::string render_svg(const core::Layout& layout);
// Writes layout_00000.svg, ... into `dir`; returns the paths written.
std::vector<std::filesystem::path> render_corpus(const std::vector<core::Layout>& corpus,
                                                 const std::filesystem::path& dir);
std::string class_color(int class_id);

// --------------------------------------------------------- mosaic plan

struct MosaicWeights {
  double aspect = 1.0;  // weight on |log(aspect_g / aspect_r)|
  double area = 1.0;    // weight on |log(area_g / area_r)|, areas as page fractions
};

double mosaic_cost(const core::LayoutElement& generated, core::PageSize generated_page,
                   const core::LayoutElement& real, core::PageSize real_page,
                   const MosaicWeights& w);

struct MosaicEntry {
  std::size_t layout = 0;   // index into the generated corpus
  std::size_t element = 0;  // index within that layout
  core::LayoutElement target;
  bool matched = false;
  std::string source_id;
  std::size_t source_layout = 0;
  std::size_t source_element = 0;
  core::LayoutElement source;
  double cost = std::numeric_limits<double>::infinity();
};

// For each generated box, the real box of the same class with minimum cost;
// ties go to the earliest real box. Boxes whose class never occurs in the
// real corpus are flagged unmatched.
std::vector<MosaicEntry> mosaic_plan(const std::vector<core::Layout>& generated,
                                     const std::vector<core::Layout>& real,
                                     const MosaicWeights& weights = {});
nlohmann::ordered_json mosaic_json(const std::vector<MosaicEntry>& plan,
                                   const core::ClassSchema& schema);

// -------------------------------------------------------------- ablate

struct AblationConfig {
  std::vector<double> learning_rates{1e-4};
  std::vector<int> diffusion_steps{2000};
  diffusion::TrainConfig base;  // lr and T are overridden per cell
  int samples = 100;
  EvalConfig eval;
};

struct AblationCell {
  double lr = 0.0;
  int steps = 0;  // diffusion steps T
  EvalRow eval;
  double validity_rate = 0.0;
  double final_loss = 0.0;  // mean of the last 50 logged losses
};

// Trains one model per (lr, T) cell, samples it and evaluates against
// `reference`. Rows come back sorted by (lr, steps).
std::vector<AblationCell> ablate(const std::vector<core::Layout>& train_corpus,
                                 const std::vector<core::Layout>& reference,
                                 const AblationConfig& cfg);
std::string ablation_csv_header();
void write_ablation_csv(std::ostream& out, const std::vector<AblationCell>& cells);

}  // namespace doclayout::cli
