#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "doclayout/core/io.hpp"
#include "doclayout/core/synthetic.hpp"
#include "doclayout/core/tokens.hpp"
#include "support/fixtures.hpp"

using namespace doclayout;
using namespace doclayout::core;

namespace {

SchemaPtr abc() { return std::make_shared<const ClassSchema>(std::vector<std::string>{"a", "b", "c"}); }

}  // namespace

TEST(ClassSchema, RejectsDuplicateNames) {
  EXPECT_THROW(ClassSchema({"text", "text"}), ValidationError);
  ClassSchema s({"x", "y"});
  EXPECT_EQ(s.size(), 2);
  EXPECT_EQ(*s.index_of("y"), 1);
  EXPECT_FALSE(s.index_of("z").has_value());
}

TEST(ClassSchema, PublaynetOrder) {
  const auto s = ClassSchema::publaynet();
  EXPECT_EQ(s->names(), (std::vector<std::string>{"text", "title", "list", "table", "figure"}));
}

TEST(Layout, EmptyIsLegal) {
  Layout l({100, 100}, abc());
  EXPECT_TRUE(l.empty());
}

TEST(Layout, OutOfBoundsNamesElement) {
  try {
    Layout l({100, 100}, abc(), {{0, 0, 0, 10, 10}, {1, 95, 0, 10, 10}});
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("element 1"), std::string::npos) << e.what();
  }
  EXPECT_THROW(Layout({100, 100}, abc(), {{3, 0, 0, 10, 10}}), ValidationError);
  EXPECT_THROW(Layout({100, 100}, abc(), {{0, 0, 0, 0, 10}}), ValidationError);
  EXPECT_THROW(Layout({100, 100}, abc(), {{0, -1, 0, 5, 10}}), ValidationError);
}

TEST(Layout, SortedReadingOrderIsOptional) {
  Layout l({100, 100}, abc(), {{0, 50, 50, 10, 10}, {1, 10, 10, 10, 10}, {2, 5, 50, 5, 5}});
  EXPECT_EQ(l.elements()[0].x, 50);  // source order preserved
  const auto s = l.sorted_reading_order();
  EXPECT_EQ(s.elements()[0].class_id, 1);
  EXPECT_EQ(s.elements()[1].class_id, 2);
  EXPECT_EQ(s.elements()[2].class_id, 0);
}

TEST(Vocabulary, RangesAreDisjoint) {
  Vocabulary v(128, 5);
  EXPECT_EQ(v.size(), 136);
  for (int t = 0; t < v.size(); ++t) {
    const int kinds = int(v.is_geometry(t)) + int(v.is_class(t)) +
                      int(t == v.bos() || t == v.eos() || t == v.pad());
    EXPECT_EQ(kinds, 1) << t;
  }
  EXPECT_EQ(v.class_token(2), 130);
  EXPECT_THROW(Vocabulary(1, 5), ValidationError);
}

TEST(Quantize, EmptyLayout) {
  Vocabulary v(128, 3);
  const auto seq = quantize(Layout({612, 792}, abc()), v);
  EXPECT_EQ(seq.tokens, (std::vector<int>{v.bos(), v.eos()}));
}

TEST(Quantize, FullPageBoxHitsGridExtremes) {
  Vocabulary v(128, 3);
  const Layout l({612, 792}, abc(), {{2, 0, 0, 612, 792}});
  const auto seq = quantize(l, v);
  EXPECT_EQ(seq.tokens, (std::vector<int>{v.bos(), 130, 0, 0, 127, 127, v.eos()}));
  const auto back = dequantize(seq, v, abc(), RepairMode::kStrict);
  EXPECT_EQ(back.layout.elements(), l.elements());
}

TEST(Quantize, CentreQuarterBox) {
  Vocabulary v(128, 3);
  const Layout l({400, 800}, abc(), {{0, 200, 400, 100, 200}});
  const auto seq = quantize(l, v);
  // round(0.5 * 127) = 64 (63.5 rounds half up), round(0.25 * 127) = 32.
  EXPECT_EQ(std::vector<int>(seq.tokens.begin() + 2, seq.tokens.begin() + 6),
            (std::vector<int>{64, 64, 32, 32}));
}

TEST(Quantize, RoundHalfUpOracle) {
  for (int g : {2, 3, 16, 128}) {
    for (int dim : {1, 7, 100, 612}) {
      for (int v = 0; v <= dim; ++v) {
        const long double exact = static_cast<long double>(v) * (g - 1) / dim;
        const int expect = static_cast<int>(std::floor(exact + 0.5L));
        ASSERT_EQ(quantize_value(v, dim, g), expect) << v << "/" << dim << " G=" << g;
      }
    }
  }
}

TEST(Quantize, PadTo) {
  Vocabulary v(16, 3);
  const auto seq = pad_to(quantize(Layout({10, 10}, abc()), v), 5, v);
  EXPECT_EQ(seq.tokens, (std::vector<int>{v.bos(), v.eos(), v.pad(), v.pad(), v.pad()}));
  EXPECT_THROW(pad_to(seq, 3, v), ValidationError);
}

// Integer pixel output adds up to half a pixel on top of half a grid cell.
TEST(Dequantize, RoundTripErrorBound) {
  std::mt19937_64 rng(11);
  for (int g : {2, 5, 64, 128}) {
    Vocabulary v(g, 3);
    for (int trial = 0; trial < 250; ++trial) {
      const PageSize page{std::uniform_int_distribution<int>(50, 1200)(rng),
                          std::uniform_int_distribution<int>(50, 1200)(rng)};
      const auto l = doclayout::test_support::random_layout(rng, page, abc(), 6, 3);
      const auto back = dequantize(quantize(l, v), v, abc(), RepairMode::kStrict);
      ASSERT_EQ(back.layout.size(), l.size());
      ASSERT_TRUE(back.structurally_valid());
      const double bx = page.width / (2.0 * (g - 1)) + 0.5;
      const double by = page.height / (2.0 * (g - 1)) + 0.5;
      for (std::size_t i = 0; i < l.size(); ++i) {
        const auto& a = l.elements()[i];
        const auto& b = back.layout.elements()[i];
        ASSERT_EQ(a.class_id, b.class_id);
        ASSERT_LE(std::abs(a.x - b.x), bx);
        ASSERT_LE(std::abs(a.w - b.w), bx);
        ASSERT_LE(std::abs(a.y - b.y), by);
        ASSERT_LE(std::abs(a.h - b.h), by);
      }
    }
  }
}

TEST(Dequantize, BosEosIsEmpty) {
  Vocabulary v(16, 3);
  const auto r = dequantize({{v.bos(), v.eos()}, {10, 10}}, v, abc(), RepairMode::kStrict);
  EXPECT_TRUE(r.layout.empty());
  EXPECT_TRUE(r.structurally_valid());
}

TEST(Dequantize, RepairDropsMalformedGroup) {
  Vocabulary v(16, 3);
  const int a = v.class_token(0);
  const int b = v.class_token(1);
  // Second group has a class token in a geometry slot.
  const std::vector<int> toks{v.bos(), a, 1, 1, 4, 4, b, 2, a, 3, 3, 3, 3, v.eos(), v.pad()};
  const TokenSequence seq{toks, {150, 150}};
  EXPECT_THROW(dequantize(seq, v, abc(), RepairMode::kStrict), FormatError);
  const auto r = dequantize(seq, v, abc(), RepairMode::kRepair);
  EXPECT_FALSE(r.structurally_valid());
  EXPECT_EQ(r.dropped_groups, 1);
  ASSERT_EQ(r.layout.size(), 2u);
  EXPECT_EQ(r.layout.elements()[0].class_id, 0);
  EXPECT_EQ(r.layout.elements()[1].class_id, 0);
}

TEST(Dequantize, MissingEosAndTrailingGarbage) {
  Vocabulary v(16, 3);
  const int a = v.class_token(0);
  const auto r1 = dequantize({{v.bos(), a, 1, 1, 4, 4}, {150, 150}}, v, abc());
  EXPECT_EQ(r1.layout.size(), 1u);
  EXPECT_FALSE(r1.structurally_valid());
  const auto r2 = dequantize({{v.bos(), v.eos(), a}, {150, 150}}, v, abc());
  EXPECT_TRUE(r2.layout.empty());
  EXPECT_FALSE(r2.structurally_valid());
  EXPECT_THROW(dequantize({{a, 1, 1, 4, 4, v.eos()}, {150, 150}}, v, abc(), RepairMode::kStrict),
               FormatError);
  const auto r3 = dequantize({{v.bos(), 999, v.eos()}, {150, 150}}, v, abc());
  EXPECT_FALSE(r3.structurally_valid());
}

TEST(Dequantize, ClampsIntoPage) {
  Vocabulary v(16, 3);
  const int a = v.class_token(0);
  // x at the far edge with zero width still yields a valid 1-pixel box.
  const auto r = dequantize({{v.bos(), a, 15, 15, 0, 0, v.eos()}, {150, 150}}, v, abc(),
                            RepairMode::kStrict);
  ASSERT_EQ(r.layout.size(), 1u);
  const auto& e = r.layout.elements()[0];
  EXPECT_GE(e.w, 1);
  EXPECT_LE(e.x + e.w, 150);
}

TEST(Coco, MinimalDocument) {
  std::istringstream in(R"({
    "images": [{"id": 7, "width": 100, "height": 200, "file_name": "p.png"}],
    "annotations": [{"image_id": 7, "category_id": 3, "bbox": [10, 20, 30, 40]}],
    "categories": [{"id": 3, "name": "text"}]
  })");
  const auto c = ingest_coco(in);
  ASSERT_EQ(c.layouts.size(), 1u);
  ASSERT_EQ(c.layouts[0].size(), 1u);
  EXPECT_EQ(c.layouts[0].elements()[0], (LayoutElement{0, 10, 20, 30, 40}));
  EXPECT_EQ(c.layouts[0].page(), (PageSize{100, 200}));
  EXPECT_EQ(c.schema->names(), std::vector<std::string>{"text"});
  EXPECT_EQ(c.layouts[0].source_id(), "7");
}

TEST(Coco, DegenerateDroppedClippedCountedOrderKept) {
  std::istringstream in(R"({
    "images": [{"id": 1, "width": 100, "height": 100}],
    "annotations": [
      {"image_id": 1, "category_id": 2, "bbox": [10, 10, 0, 5]},
      {"image_id": 1, "category_id": 2, "bbox": [90, 90, 20, 20]},
      {"image_id": 1, "category_id": 1, "bbox": [0, 0, 5, 5]},
      {"image_id": 9, "category_id": 1, "bbox": [0, 0, 5, 5]}
    ],
    "categories": [{"id": 1, "name": "text"}, {"id": 2, "name": "figure"}]
  })");
  const auto c = ingest_coco(in);
  EXPECT_EQ(c.stats.dropped_degenerate, 1);
  EXPECT_EQ(c.stats.clipped, 1);
  EXPECT_EQ(c.stats.dropped_unknown, 1);
  ASSERT_EQ(c.layouts[0].size(), 2u);
  EXPECT_EQ(c.layouts[0].elements()[0], (LayoutElement{1, 90, 90, 10, 10}));
  EXPECT_EQ(c.layouts[0].elements()[1].class_id, 0);
}

TEST(Coco, MissingArrayIsFormatError) {
  std::istringstream in(R"({"images": [], "categories": []})");
  EXPECT_THROW(ingest_coco(in), FormatError);
  std::istringstream bad("{not json");
  EXPECT_THROW(ingest_coco(bad), FormatError);
}

TEST(Jsonl, RoundTripIsByteIdentical) {
  std::mt19937_64 rng(5);
  std::vector<Layout> layouts;
  for (int i = 0; i < 100; ++i) {
    layouts.push_back(doclayout::test_support::random_layout(rng, {300, 400}, abc(), 8, 3));
  }
  std::ostringstream first;
  emit_jsonl(first, layouts);
  std::istringstream in(first.str());
  const auto back = ingest_jsonl(in);
  ASSERT_EQ(back.size(), layouts.size());
  std::ostringstream second;
  emit_jsonl(second, back);
  EXPECT_EQ(first.str(), second.str());
  for (std::size_t i = 0; i < back.size(); ++i) EXPECT_EQ(back[i].elements(), layouts[i].elements());
}

TEST(Jsonl, EmptyInput) {
  std::istringstream in("");
  EXPECT_TRUE(ingest_jsonl(in).empty());
}

TEST(Jsonl, UnknownClassNamed) {
  std::istringstream in(R"({"page":[10,10],"schema":["a","zebra"],"boxes":[[1,0,0,2,2]]})");
  try {
    ingest_jsonl(in, abc());
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("zebra"), std::string::npos);
  }
}

TEST(Jsonl, MalformedLineCarriesLineNumber) {
  std::istringstream in(
      "{\"page\":[10,10],\"schema\":[\"a\"],\"boxes\":[]}\n{\"page\":[10,10],\"schema\":[\"a\"],\"boxes\":[[0,0,0]]}\n");
  try {
    ingest_jsonl(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(ToyGrammar, DeterministicAndValid) {
  ToyGrammar g;
  const auto a = g.generate(200, 4);
  const auto b = g.generate(200, 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].elements(), b[i].elements());
    EXPECT_LE(a[i].size(), static_cast<std::size_t>(ToyGrammar::kMaxBoxes));
    EXPECT_EQ(a[i].elements()[0].class_id, 1);  // title first
  }
}

TEST(ToyGrammar, ClassFrequenciesMatchGenerator) {
  ToyGrammar g;
  const auto hist = class_histogram(g.generate(20000, 9), 5);
  const auto expect = g.class_frequencies();
  for (int c = 0; c < 5; ++c) EXPECT_NEAR(hist[c], expect[c], 0.005) << c;
}
