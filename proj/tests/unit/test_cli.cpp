#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <regex>
#include <sstream>

#include "doclayout/cli/commands.hpp"
#include "doclayout/core/synthetic.hpp"
#include "support/fixtures.hpp"

using namespace doclayout;
using namespace doclayout::cli;
using doclayout::test_support::random_layout;

namespace {

core::SchemaPtr schema3() {
  static const auto s =
      std::make_shared<const core::ClassSchema>(std::vector<std::string>{"text", "title", "figure"});
  return s;
}

EvalConfig coarse_eval() {
  EvalConfig c;
  c.doc_emd.grid = 8;
  return c;
}

struct SvgBox {
  std::string cls;
  double x, y, w, h;
};

std::vector<SvgBox> parse_rects(const std::string& svg) {
  static const std::regex rect(
      R"re(<rect x="([-0-9.e]+)" y="([-0-9.e]+)" width="([-0-9.e]+)" height="([-0-9.e]+)"[^>]*data-class="([^"]+)")re");
  std::vector<SvgBox> out;
  for (std::sregex_iterator it(svg.begin(), svg.end(), rect), end; it != end; ++it) {
    const auto& m = *it;
    out.push_back({m[5].str(), std::stod(m[1]), std::stod(m[2]), std::stod(m[3]),
                   std::stod(m[4])});
  }
  return out;
}

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

// ----------------------------------------------------------------- eval

TEST(Eval, CsvHeaderGolden) {
  EXPECT_EQ(eval_csv_header(),
            "docsim,doc_emd,overlap,coverage,wasserstein_class,wasserstein_bbox,generated,"
            "reference,seed");
}

TEST(Eval, SelfComparison) {
  std::mt19937_64 rng(31);
  std::vector<core::Layout> a;
  for (int i = 0; i < 6; ++i) a.push_back(random_layout(rng, {100, 120}, schema3(), 4, 3, 1));
  const auto row = evaluate(a, a, coarse_eval());
  EXPECT_NEAR(row.doc_emd, 0.0, 1e-12);
  EXPECT_NEAR(row.wasserstein_class, 0.0, 1e-12);
  EXPECT_EQ(row.generated, 6u);
  EXPECT_EQ(row.reference, 6u);
  EXPECT_GT(row.docsim, 0.0);
  const auto line = eval_csv_row(row);
  EXPECT_EQ(count(line, ","), count(eval_csv_header(), ","));
  const auto j = eval_json(row, *schema3());
  EXPECT_DOUBLE_EQ(j["doc_emd"].get<double>(), row.doc_emd);
}

TEST(Eval, RejectsEmptyAndMismatched) {
  const core::Layout l({10, 10}, schema3(), {{0, 0, 0, 5, 5}});
  EXPECT_THROW(evaluate({}, {l}, coarse_eval()), ValidationError);
  const auto other = std::make_shared<const core::ClassSchema>(std::vector<std::string>{"a"});
  const core::Layout m({10, 10}, other, {{0, 0, 0, 5, 5}});
  EXPECT_THROW(evaluate({l}, {m}, coarse_eval()), ValidationError);
}

TEST(Eval, BoxlessCorpusGivesNanWasserstein) {
  const core::Layout empty({10, 10}, schema3());
  const core::Layout l({10, 10}, schema3(), {{0, 0, 0, 5, 5}});
  const auto row = evaluate({empty}, {l}, coarse_eval());
  EXPECT_TRUE(std::isnan(row.wasserstein_bbox));
  EXPECT_TRUE(std::isnan(row.wasserstein_class));
  EXPECT_EQ(row.doc_emd, 1.0);
  EXPECT_EQ(row.coverage, 0.0);
}

// --------------------------------------------------------------- render

TEST(Render, EmptyLayoutHasNoRects) {
  const std::string svg = render_svg(core::Layout({612, 792}, schema3()));
  EXPECT_EQ(count(svg, "<rect"), 0u);
  EXPECT_NE(svg.find("viewBox=\"0 0 612 792\""), std::string::npos);
}

TEST(Render, FullPageBox) {
  const std::string svg = render_svg(core::Layout({300, 400}, schema3(), {{2, 0, 0, 300, 400}}));
  const auto boxes = parse_rects(svg);
  ASSERT_EQ(boxes.size(), 1u);
  EXPECT_EQ(boxes[0].cls, "figure");
  EXPECT_EQ(boxes[0].w, 300);
  EXPECT_EQ(boxes[0].h, 400);
}

TEST(Render, BoxesParseBack) {
  std::mt19937_64 rng(32);
  const auto l = random_layout(rng, {500, 700}, schema3(), 5, 3, 5);
  const auto boxes = parse_rects(render_svg(l));
  ASSERT_EQ(boxes.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    const auto& e = l.elements()[i];
    EXPECT_EQ(boxes[i].cls, schema3()->name(e.class_id));
    EXPECT_EQ(boxes[i].x, e.x);
    EXPECT_EQ(boxes[i].y, e.y);
    EXPECT_EQ(boxes[i].w, e.w);
    EXPECT_EQ(boxes[i].h, e.h);
  }
}

TEST(Render, CorpusWritesOneFilePerLayout) {
  const auto dir = std::filesystem::temp_directory_path() / "doclayout_render_test";
  std::filesystem::remove_all(dir);
  const auto corpus = core::ToyGrammar{}.generate(3, 2);
  const auto paths = render_corpus(corpus, dir);
  ASSERT_EQ(paths.size(), 3u);
  EXPECT_EQ(paths[1].filename(), "layout_00001.svg");
  for (const auto& p : paths) EXPECT_TRUE(std::filesystem::exists(p));
  std::filesystem::remove_all(dir);
}

// --------------------------------------------------------------- mosaic

TEST(Mosaic, SelfMatchIsFree) {
  std::mt19937_64 rng(33);
  std::vector<core::Layout> a;
  for (int i = 0; i < 4; ++i) a.push_back(random_layout(rng, {200, 200}, schema3(), 5, 3, 1));
  for (const auto& e : mosaic_plan(a, a)) {
    EXPECT_TRUE(e.matched);
    EXPECT_EQ(e.cost, 0.0);
  }
}

TEST(Mosaic, UnmatchedClassFlagged) {
  const core::Layout g({100, 100}, schema3(), {{1, 0, 0, 10, 10}, {0, 0, 0, 10, 20}});
  const core::Layout r({100, 100}, schema3(), {{0, 5, 5, 20, 40}});
  const auto plan = mosaic_plan({g}, {r});
  ASSERT_EQ(plan.size(), 2u);
  EXPECT_FALSE(plan[0].matched);
  EXPECT_TRUE(plan[1].matched);
  EXPECT_NEAR(plan[1].cost, std::log(4.0), 1e-12);  // same aspect, 4x area
  const auto j = mosaic_json(plan, *schema3());
  EXPECT_EQ(j.size(), 2u);
}

TEST(Mosaic, MatchesBruteForce) {
  std::mt19937_64 rng(34);
  std::vector<core::Layout> gen, real;
  for (int i = 0; i < 10; ++i) gen.push_back(random_layout(rng, {300, 400}, schema3(), 5, 3, 5));
  for (int i = 0; i < 6; ++i) real.push_back(random_layout(rng, {400, 300}, schema3(), 8, 3, 1));
  const MosaicWeights w{0.7, 1.3};
  const auto plan = mosaic_plan(gen, real, w);
  ASSERT_EQ(plan.size(), 50u);
  for (const auto& e : plan) {
    double best = INFINITY;
    for (const auto& r : real) {
      for (const auto& re : r.elements()) {
        best = std::min(best, mosaic_cost(e.target, gen[e.layout].page(), re, r.page(), w));
      }
    }
    EXPECT_EQ(e.matched, std::isfinite(best));
    if (e.matched) EXPECT_EQ(e.cost, best);
  }
}

// --------------------------------------------------------------- ablate

TEST(Ablate, SingleTinyCell) {
  const auto corpus = core::ToyGrammar{}.generate(16, 3);
  const auto reference = core::ToyGrammar{}.generate(8, 4);
  AblationConfig cfg;
  cfg.learning_rates = {1e-3, 1e-3};
  cfg.diffusion_steps = {20};
  cfg.base.model.grid = 16;
  cfg.base.model.max_boxes = 8;
  cfg.base.model.dim = 8;
  cfg.base.model.width = 16;
  cfg.base.model.layers = 1;
  cfg.base.model.heads = 2;
  cfg.base.max_steps = 3;
  cfg.base.batch = 4;
  cfg.samples = 4;
  cfg.eval = coarse_eval();
  const auto cells = ablate(corpus, reference, cfg);
  ASSERT_EQ(cells.size(), 1u);
  EXPECT_EQ(cells[0].steps, 20);
  EXPECT_EQ(cells[0].lr, 1e-3);
  EXPECT_TRUE(std::isfinite(cells[0].final_loss));
  std::ostringstream out;
  write_ablation_csv(out, cells);
  EXPECT_EQ(out.str().substr(0, ablation_csv_header().size()), ablation_csv_header());
  EXPECT_EQ(ablation_csv_header(),
            "lr,steps,docsim,doc_emd,overlap,coverage,validity_rate,final_loss,seed");
}
