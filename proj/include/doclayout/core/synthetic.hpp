#pragma once

#include <cstdint>
#include <vector>

#include "doclayout/core/layout.hpp"

namespace doclayout::core {

// Toy "two-column article": a title across the top, two columns of stacked
// text blocks and an optional figure heading one column. Uses the PubLayNet
// schema on a US-letter page (612 x 792).
struct ToyGrammar {
  static constexpr PageSize kPage{612, 792};
  static constexpr int kMaxBoxes = 8;
  double figure_probability = 0.5;

  std::vector<Layout> generate(int count, std::uint64_t seed) const;
  // Expected share of each class among all class tokens, in schema order.
  std::vector<double> class_frequencies() const;
};

// Boxes with uniform positions and sizes; classes drawn uniformly from
// `classes`. Box count is uniform in [1, max_boxes].
std::vector<Layout> random_layouts(int count, PageSize page, SchemaPtr schema,
                                   const std::vector<int>& classes, int max_boxes,
                                   std::uint64_t seed);

// Share of each class among all elements of the corpus.
std::vector<double> class_histogram(const std::vector<Layout>& corpus, int num_classes);

}  // namespace doclayout::core
