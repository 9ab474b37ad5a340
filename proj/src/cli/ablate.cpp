#include <algorithm>

#include "doclayout/cli/commands.hpp"
#include "doclayout/metrics/report.hpp"

namespace doclayout::cli {

std::vector<AblationCell> ablate(const std::vector<core::Layout>& train_corpus,
                                 const std::vector<core::Layout>& reference,
                                 const AblationConfig& cfg) {
  if (cfg.learning_rates.empty() || cfg.diffusion_steps.empty()) {
    throw ValidationError("ablation grid is empty");
  }
  if (cfg.samples < 1) throw ValidationError("ablation needs at least one sample per cell");
  std::vector<double> lrs = cfg.learning_rates;
  std::vector<int> steps = cfg.diffusion_steps;
  std::sort(lrs.begin(), lrs.end());
  std::sort(steps.begin(), steps.end());
  lrs.erase(std::unique(lrs.begin(), lrs.end()), lrs.end());
  steps.erase(std::unique(steps.begin(), steps.end()), steps.end());

  std::vector<AblationCell> cells;
  for (double lr : lrs) {
    for (int t : steps) {
      diffusion::TrainConfig tc = cfg.base;
      tc.lr = lr;
      tc.model.steps = t;
      const auto trained = diffusion::train(train_corpus, tc);
      diffusion::SampleOptions so;
      so.count = cfg.samples;
      so.seed = cfg.base.seed + 1;
      const auto samples = diffusion::sample(trained.model, so);

      AblationCell cell;
      cell.lr = lr;
      cell.steps = t;
      cell.validity_rate = samples.validity_rate();
      const std::size_t tail = std::min<std::size_t>(50, trained.log.size());
      for (std::size_t i = trained.log.size() - tail; i < trained.log.size(); ++i) {
        cell.final_loss += trained.log[i].loss / static_cast<double>(tail);
      }
      cell.eval = evaluate(samples.layouts, reference, cfg.eval);
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

std::string ablation_csv_header() {
  return "lr,steps,docsim,doc_emd,overlap,coverage,validity_rate,final_loss,seed";
}

void write_ablation_csv(std::ostream& out, const std::vector<AblationCell>& cells) {
  using metrics::format_number;
  out << ablation_csv_header() << '\n';
  for (const auto& c : cells) {
    out << format_number(c.lr) << ',' << c.steps << ',' << format_number(c.eval.docsim) << ','
        << format_number(c.eval.doc_emd) << ',' << format_number(c.eval.overlap) << ','
        << format_number(c.eval.coverage) << ',' << format_number(c.validity_rate) << ','
        << format_number(c.final_loss) << ',' << c.eval.seed << '\n';
  }
}

}  // namespace doclayout::cli
