#pragma once

#include <random>
#include <vector>

#include "doclayout/core/layout.hpp"
#include "doclayout/error.hpp"

namespace doclayout::test_support {

// Random valid layout: up to `max_boxes` boxes drawn from `classes` classes.
inline core::Layout random_layout(std::mt19937_64& rng, core::PageSize page,
                                  const core::SchemaPtr& schema, int max_boxes, int classes,
                                  int min_boxes = 0) {
  std::uniform_int_distribution<int> n_boxes(min_boxes, max_boxes);
  std::uniform_int_distribution<int> cls(0, classes - 1);
  std::vector<core::LayoutElement> el;
  const int n = n_boxes(rng);
  for (int i = 0; i < n; ++i) {
    const int x = std::uniform_int_distribution<int>(0, page.width - 1)(rng);
    const int y = std::uniform_int_distribution<int>(0, page.height - 1)(rng);
    const int w = std::uniform_int_distribution<int>(1, page.width - x)(rng);
    const int h = std::uniform_int_distribution<int>(1, page.height - y)(rng);
    el.push_back({cls(rng), x, y, w, h});
  }
  return core::Layout(page, schema, std::move(el));
}

}  // namespace doclayout::test_support
