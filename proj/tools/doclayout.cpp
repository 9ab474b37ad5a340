// doclayout: ingest, train, generate, evaluate, render and mosaic-plan
// document layouts from the command line.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "doclayout/cli/commands.hpp"
#include "doclayout/core/io.hpp"
#include "doclayout/core/synthetic.hpp"
#include "doclayout/diffusion/trainer.hpp"
#include "doclayout/error.hpp"
#include "doclayout/metrics/report.hpp"

namespace fs = std::filesystem;
using namespace doclayout;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;

core::SchemaPtr parse_schema(const std::string& text) {
  if (text.empty()) return nullptr;
  if (text == "publaynet") return core::ClassSchema::publaynet();
  std::vector<std::string> names;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) names.push_back(item);
  return std::make_shared<const core::ClassSchema>(std::move(names));
}

void require_output_dir(const fs::path& out) {
  const auto parent = out.has_parent_path() ? out.parent_path() : fs::path(".");
  if (!fs::is_directory(parent)) {
    throw ValidationError("output directory '" + parent.string() + "' does not exist");
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << text;
}

// Every file-producing command leaves <out>.run.json with its full config.
void record_run(const CLI::App& sub, const fs::path& out, std::uint64_t seed) {
  ordered_json j;
  j["command"] = sub.get_name();
  j["seed"] = seed;
  j["config"] = sub.config_to_str(true, false);
  write_text(fs::path(out.string() + ".run.json"), j.dump(2) + "\n");
}

std::vector<core::Layout> load_corpus(const std::string& path, const core::SchemaPtr& schema) {
  return core::ingest_jsonl_file(path, schema);
}

struct TrainFlags {
  int steps = 2000;
  double lr = 1e-4;
  int diffusion_steps = 2000;
  int batch = 32;
  int grid = core::kDefaultGridSize;
  int max_boxes = 25;
  int dim = 32;
  int width = 128;
  int layers = 4;
  int heads = 4;
  std::string schedule = "sqrt";
  double clip = 1.0;

  void add(CLI::App* app, bool with_lr_and_t, bool with_grid) {
    app->add_option("--steps", steps, "Optimizer iterations")->capture_default_str();
    app->add_option("--batch", batch, "Sequences per batch")->capture_default_str();
    if (with_grid) app->add_option("--grid", grid, "Quantization grid size G")->capture_default_str();
    app->add_option("--max-boxes", max_boxes, "Boxes per padded sequence")->capture_default_str();
    app->add_option("--dim", dim, "Embedding dimension d")->capture_default_str();
    app->add_option("--width", width, "Transformer width")->capture_default_str();
    app->add_option("--layers", layers, "Transformer layers")->capture_default_str();
    app->add_option("--heads", heads, "Attention heads")->capture_default_str();
    app->add_option("--schedule", schedule, "Noise schedule: sqrt or linear")->capture_default_str();
    app->add_option("--clip", clip, "Gradient norm clip (<= 0 disables)")->capture_default_str();
    if (with_lr_and_t) {
      app->add_option("--lr", lr, "Learning rate")->capture_default_str();
      app->add_option("--T", diffusion_steps, "Diffusion steps T")->capture_default_str();
    }
  }

  diffusion::TrainConfig config(std::uint64_t seed) const {
    diffusion::TrainConfig tc;
    tc.model.grid = grid;
    tc.model.max_boxes = max_boxes;
    tc.model.dim = dim;
    tc.model.width = width;
    tc.model.layers = layers;
    tc.model.heads = heads;
    tc.model.steps = diffusion_steps;
    tc.model.schedule = diffusion::parse_schedule_kind(schedule);
    tc.lr = lr;
    tc.batch = batch;
    tc.max_steps = steps;
    tc.seed = seed;
    tc.grad_clip = clip;
    tc.validate();
    return tc;
  }
};

int run(int argc, char** argv) {
  CLI::App app{"Document layout metrics, generation and tooling"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::string schema_text;
  std::string out;

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Convert COCO annotations or emit the toy grammar as JSONL");
  std::string coco_path;
  int toy_count = 0;
  ingest->add_option("--coco", coco_path, "COCO annotation file")->check(CLI::ExistingFile);
  ingest->add_option("--toy", toy_count, "Generate this many toy two-column layouts");
  ingest->add_option("--out", out, "Output JSONL")->required();
  ingest->add_option("--seed", seed, "Seed for toy generation")->capture_default_str();

  // eval
  auto* eval = app.add_subcommand("eval", "Compare a generated corpus with a reference corpus");
  std::string gen_path, ref_path, overlap_mode = "union";
  double lambda = 1.0;
  int raster_grid = ot::kDefaultRasterGrid;
  unsigned threads = 0;
  eval->add_option("generated", gen_path, "Generated JSONL")->required()->check(CLI::ExistingFile);
  eval->add_option("reference", ref_path, "Reference JSONL")->required()->check(CLI::ExistingFile);
  eval->add_option("--schema", schema_text, "publaynet or comma-separated class names");
  eval->add_option("--grid", raster_grid, "Raster lattice per page side")->capture_default_str();
  eval->add_option("--lambda", lambda, "Penalty per exclusive class")->capture_default_str();
  eval->add_option("--overlap-mode", overlap_mode, "union or pairwise-sum")->capture_default_str();
  eval->add_option("--seed", seed, "Seed for Wasserstein subsampling")->capture_default_str();
  eval->add_option("--threads", threads, "Worker threads (0 = all cores)");
  eval->add_option("--out", out, "Output prefix for <out>.csv and <out>.json");

  // train
  auto* train = app.add_subcommand("train", "Train the layout denoiser");
  std::string corpus_path;
  TrainFlags tf;
  train->add_option("--corpus", corpus_path, "Training JSONL")->check(CLI::ExistingFile);
  train->add_option("--toy", toy_count, "Train on this many toy layouts instead");
  train->add_option("--schema", schema_text, "publaynet or comma-separated class names");
  train->add_option("--seed", seed, "Training seed")->capture_default_str();
  train->add_option("--out", out, "Checkpoint path (loss log goes to <out>.loss.csv)")->required();
  tf.add(train, true, true);

  // generate
  auto* generate = app.add_subcommand("generate", "Sample layouts from a checkpoint");
  std::string checkpoint;
  int count = 1;
  int ablate_count = 100;
  bool no_clamp = false;
  generate->add_option("--checkpoint", checkpoint, "Checkpoint JSON")->required()->check(CLI::ExistingFile);
  generate->add_option("--count", count, "Layouts to sample")->capture_default_str();
  generate->add_option("--seed", seed, "Sampling seed")->capture_default_str();
  generate->add_option("--threads", threads, "Worker threads (0 = all cores)");
  generate->add_flag("--no-clamp", no_clamp, "Do not snap predictions to embedding rows");
  generate->add_option("--out", out, "Output JSONL")->required();

  // render
  auto* render = app.add_subcommand("render", "Draw each layout as an SVG file");
  render->add_option("corpus", corpus_path, "Layouts JSONL")->required()->check(CLI::ExistingFile);
  render->add_option("--schema", schema_text, "publaynet or comma-separated class names");
  render->add_option("--out", out, "Output directory")->required();

  // mosaic-plan
  auto* mosaic = app.add_subcommand("mosaic-plan", "Match generated boxes to real annotated boxes");
  cli::MosaicWeights weights;
  mosaic->add_option("generated", gen_path, "Generated JSONL")->required()->check(CLI::ExistingFile);
  mosaic->add_option("real", ref_path, "Real JSONL with ids")->required()->check(CLI::ExistingFile);
  mosaic->add_option("--schema", schema_text, "publaynet or comma-separated class names");
  mosaic->add_option("--aspect-weight", weights.aspect, "Weight on the aspect-ratio term")->capture_default_str();
  mosaic->add_option("--area-weight", weights.area, "Weight on the area term")->capture_default_str();
  mosaic->add_option("--out", out, "Plan JSON")->required();

  // ablate
  auto* ablate = app.add_subcommand("ablate", "Train and evaluate a learning-rate x diffusion-steps grid");
  std::vector<double> lrs{1e-4};
  std::vector<int> ts{2000};
  int toy_reference = 200;
  TrainFlags af;
  ablate->add_option("--corpus", corpus_path, "Training JSONL")->check(CLI::ExistingFile);
  ablate->add_option("--reference", ref_path, "Held-out JSONL")->check(CLI::ExistingFile);
  ablate->add_option("--toy", toy_count, "Train on this many toy layouts instead");
  ablate->add_option("--toy-reference", toy_reference, "Held-out toy layouts")->capture_default_str();
  ablate->add_option("--schema", schema_text, "publaynet or comma-separated class names");
  ablate->add_option("--lr", lrs, "Learning rates")->capture_default_str();
  ablate->add_option("--T", ts, "Diffusion step counts")->capture_default_str();
  ablate->add_option("--count", ablate_count, "Samples per cell")->capture_default_str();
  ablate->add_option("--grid", raster_grid, "Doc-EMD raster lattice")->capture_default_str();
  ablate->add_option("--lambda", lambda, "Penalty per exclusive class")->capture_default_str();
  ablate->add_option("--overlap-mode", overlap_mode, "union or pairwise-sum")->capture_default_str();
  ablate->add_option("--seed", seed, "Seed")->capture_default_str();
  ablate->add_option("--out", out, "Ablation CSV")->required();
  af.add(ablate, false, false);
  ablate->add_option("--quant-grid", af.grid, "Quantization grid size G")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  const auto schema = parse_schema(schema_text);

  if (ingest->parsed()) {
    if (coco_path.empty() == (toy_count == 0)) {
      throw ValidationError("ingest needs exactly one of --coco or --toy");
    }
    require_output_dir(out);
    ordered_json stats;
    std::vector<core::Layout> layouts;
    if (!coco_path.empty()) {
      auto corpus = core::ingest_coco_file(coco_path);
      layouts = std::move(corpus.layouts);
      stats = {{"images", corpus.stats.images},
               {"annotations", corpus.stats.annotations},
               {"dropped_degenerate", corpus.stats.dropped_degenerate},
               {"dropped_unknown", corpus.stats.dropped_unknown},
               {"clipped", corpus.stats.clipped}};
    } else {
      if (toy_count < 0) throw ValidationError("--toy must be >= 0");
      layouts = core::ToyGrammar{}.generate(toy_count, seed);
      stats = {{"layouts", layouts.size()}};
    }
    core::emit_jsonl_file(out, layouts);
    record_run(*ingest, out, seed);
    std::cout << stats.dump() << '\n';
    return kExitOk;
  }

  if (eval->parsed()) {
    if (!out.empty()) require_output_dir(out);
    cli::EvalConfig cfg;
    cfg.doc_emd.lambda = lambda;
    cfg.doc_emd.grid = raster_grid;
    cfg.overlap_mode = metrics::parse_overlap_mode(overlap_mode);
    cfg.seed = seed;
    cfg.threads = threads;
    cfg.doc_emd.validate();
    const auto gen = load_corpus(gen_path, schema);
    const auto ref = load_corpus(ref_path, schema);
    const auto row = cli::evaluate(gen, ref, cfg);
    const std::string csv = cli::eval_csv_header() + "\n" + cli::eval_csv_row(row) + "\n";
    if (out.empty()) {
      std::cout << csv;
    } else {
      write_text(out + ".csv", csv);
      write_text(out + ".json", cli::eval_json(row, gen.front().schema()).dump(2) + "\n");
      record_run(*eval, out, seed);
      std::cout << csv;
    }
    return kExitOk;
  }

  if (train->parsed()) {
    if (corpus_path.empty() == (toy_count == 0)) {
      throw ValidationError("train needs exactly one of --corpus or --toy");
    }
    require_output_dir(out);
    const auto cfg = tf.config(seed);
    const auto corpus = corpus_path.empty() ? core::ToyGrammar{}.generate(toy_count, seed)
                                            : load_corpus(corpus_path, schema);
    const auto result = diffusion::train(corpus, cfg);
    diffusion::save_checkpoint_file(result.model, out);
    std::ofstream loss(out + ".loss.csv");
    if (!loss) throw ValidationError("cannot write '" + out + ".loss.csv'");
    diffusion::write_loss_csv(loss, result.log);
    record_run(*train, out, seed);
    ordered_json summary = {{"checkpoint", out},
                            {"steps", result.log.size()},
                            {"skipped_too_long", result.skipped_too_long},
                            {"final_loss", result.log.empty() ? 0.0 : result.log.back().loss}};
    std::cout << summary.dump() << '\n';
    return kExitOk;
  }

  if (generate->parsed()) {
    require_output_dir(out);
    if (count < 0) throw ValidationError("--count must be >= 0");
    const auto model = diffusion::load_checkpoint_file(checkpoint);
    diffusion::SampleOptions opts;
    opts.count = count;
    opts.seed = seed;
    opts.clamp = !no_clamp;
    opts.threads = static_cast<int>(threads);
    const auto result = diffusion::sample(model, opts);
    core::emit_jsonl_file(out, result.layouts);
    record_run(*generate, out, seed);
    ordered_json stats = {{"count", result.layouts.size()},
                          {"seed", seed},
                          {"valid", result.valid},
                          {"validity_rate", result.validity_rate()},
                          {"dropped_groups", result.dropped_groups}};
    write_text(out + ".stats.json", stats.dump(2) + "\n");
    std::cout << stats.dump() << '\n';
    return kExitOk;
  }

  if (render->parsed()) {
    const auto corpus = load_corpus(corpus_path, schema);
    const auto written = cli::render_corpus(corpus, out);
    std::cout << ordered_json{{"written", written.size()}, {"dir", out}}.dump() << '\n';
    return kExitOk;
  }

  if (mosaic->parsed()) {
    require_output_dir(out);
    const auto gen = load_corpus(gen_path, schema);
    const auto real = load_corpus(ref_path, schema);
    const auto plan = cli::mosaic_plan(gen, real, weights);
    const auto& names = gen.empty() ? (real.empty() ? *core::ClassSchema::publaynet() : real.front().schema())
                                    : gen.front().schema();
    ordered_json j;
    j["weights"] = {{"aspect", weights.aspect}, {"area", weights.area}};
    j["entries"] = cli::mosaic_json(plan, names);
    write_text(out, j.dump(2) + "\n");
    record_run(*mosaic, out, seed);
    std::size_t unmatched = 0;
    for (const auto& e : plan) unmatched += e.matched ? 0 : 1;
    std::cout << ordered_json{{"boxes", plan.size()}, {"unmatched", unmatched}}.dump() << '\n';
    return kExitOk;
  }

  if (ablate->parsed()) {
    if (corpus_path.empty() == (toy_count == 0)) {
      throw ValidationError("ablate needs exactly one of --corpus or --toy");
    }
    if (!corpus_path.empty() && ref_path.empty()) {
      throw ValidationError("ablate --corpus also needs --reference");
    }
    require_output_dir(out);
    cli::AblationConfig cfg;
    cfg.learning_rates = lrs;
    cfg.diffusion_steps = ts;
    cfg.base = af.config(seed);
    cfg.samples = ablate_count;
    cfg.eval.doc_emd.lambda = lambda;
    cfg.eval.doc_emd.grid = raster_grid;
    cfg.eval.overlap_mode = metrics::parse_overlap_mode(overlap_mode);
    cfg.eval.seed = seed;
    std::vector<core::Layout> train_corpus, reference;
    if (corpus_path.empty()) {
      core::ToyGrammar grammar;
      train_corpus = grammar.generate(toy_count, seed);
      reference = grammar.generate(toy_reference, seed + 1);
    } else {
      train_corpus = load_corpus(corpus_path, schema);
      reference = load_corpus(ref_path, schema);
    }
    const auto cells = cli::ablate(train_corpus, reference, cfg);
    std::ofstream csv(out);
    if (!csv) throw ValidationError("cannot write '" + out + "'");
    cli::write_ablation_csv(csv, cells);
    record_run(*ablate, out, seed);
    cli::write_ablation_csv(std::cout, cells);
    return kExitOk;
  }
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const doclayout::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ValidationError("").exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
