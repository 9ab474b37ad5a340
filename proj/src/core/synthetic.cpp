#include "doclayout/core/synthetic.hpp"

#include "doclayout/error.hpp"

#include <algorithm>
#include <random>
#include <string>

namespace doclayout::core {

namespace {

constexpr int kText = 0;
constexpr int kTitle = 1;
constexpr int kFigure = 4;

constexpr int kMargin = 54;
constexpr int kGutter = 24;
constexpr int kGap = 12;
constexpr int kBottom = 750;

// Splits [top, kBottom) into `n` stacked blocks of random height.
void stack_column(std::vector<LayoutElement>& out, int x, int w, int top, int n, int cls,
                  std::mt19937_64& rng) {
  std::uniform_real_distribution<double> share(1.0, 2.0);
  std::vector<double> parts(n);
  for (auto& p : parts) p = share(rng);
  double total = 0.0;
  for (double p : parts) total += p;
  const int usable = kBottom - top - kGap * (n - 1);
  int y = top;
  for (int i = 0; i < n; ++i) {
    const int h = i + 1 == n ? kBottom - y : static_cast<int>(usable * parts[i] / total);
    out.push_back({cls, x, y, w, h});
    y += h + kGap;
  }
}

}  // namespace

std::vector<Layout> ToyGrammar::generate(int count, std::uint64_t seed) const {
  if (count < 0) throw ValidationError("count must be >= 0");
  const auto schema = ClassSchema::publaynet();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> title_top(36, 60);
  std::uniform_int_distribution<int> title_height(30, 60);
  std::uniform_int_distribution<int> blocks(2, 3);
  std::uniform_int_distribution<int> figure_height(150, 250);
  std::bernoulli_distribution has_figure(figure_probability);

  const int col_w = (kPage.width - 2 * kMargin - kGutter) / 2;
  const int left_x = kMargin;
  const int right_x = kMargin + col_w + kGutter;

  std::vector<Layout> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    std::vector<LayoutElement> el;
    const int ty = title_top(rng);
    const int th = title_height(rng);
    el.push_back({kTitle, kMargin, ty, kPage.width - 2 * kMargin, th});
    const int top = ty + th + 20;
    const int n_left = blocks(rng);
    const int n_right = blocks(rng);
    const bool figure = has_figure(rng);
    stack_column(el, left_x, col_w, top, n_left, kText, rng);
    int right_top = top;
    if (figure) {
      const int fh = figure_height(rng);
      el.push_back({kFigure, right_x, top, col_w, fh});
      right_top = top + fh + kGap;
    }
    stack_column(el, right_x, col_w, right_top, n_right, kText, rng);
    out.emplace_back(kPage, schema, std::move(el), "toy-" + std::to_string(i));
  }
  return out;
}

std::vector<double> ToyGrammar::class_frequencies() const {
  // Per page: one title, 2.5 + 2.5 text blocks on average, p figures.
  const double total = 6.0 + figure_probability;
  std::vector<double> f(ClassSchema::publaynet()->size(), 0.0);
  f[kText] = 5.0 / total;
  f[kTitle] = 1.0 / total;
  f[kFigure] = figure_probability / total;
  return f;
}

std::vector<Layout> random_layouts(int count, PageSize page, SchemaPtr schema,
                                   const std::vector<int>& classes, int max_boxes,
                                   std::uint64_t seed) {
  if (count < 0) throw ValidationError("count must be >= 0");
  if (classes.empty()) throw ValidationError("random layouts need at least one class");
  if (max_boxes < 1) throw ValidationError("max_boxes must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> n_boxes(1, max_boxes);
  std::uniform_int_distribution<std::size_t> pick(0, classes.size() - 1);
  std::vector<Layout> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    std::vector<LayoutElement> el;
    const int n = n_boxes(rng);
    for (int k = 0; k < n; ++k) {
      std::uniform_int_distribution<int> xs(0, page.width - 1);
      std::uniform_int_distribution<int> ys(0, page.height - 1);
      const int x = xs(rng);
      const int y = ys(rng);
      std::uniform_int_distribution<int> ws(1, page.width - x);
      std::uniform_int_distribution<int> hs(1, page.height - y);
      const int cls = classes[pick(rng)];
      el.push_back({cls, x, y, ws(rng), hs(rng)});
    }
    out.emplace_back(page, schema, std::move(el), "random-" + std::to_string(i));
  }
  return out;
}

std::vector<double> class_histogram(const std::vector<Layout>& corpus, int num_classes) {
  std::vector<double> h(num_classes, 0.0);
  double total = 0.0;
  for (const auto& l : corpus) {
    for (const auto& e : l.elements()) {
      if (e.class_id >= 0 && e.class_id < num_classes) h[e.class_id] += 1.0;
      total += 1.0;
    }
  }
  if (total > 0.0) {
    for (auto& v : h) v /= total;
  }
  return h;
}

}  // namespace doclayout::core
