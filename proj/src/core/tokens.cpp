#include "doclayout/core/tokens.hpp"

#include <algorithm>
#include <cstdint>

#include "doclayout/error.hpp"

namespace doclayout::core {

Vocabulary::Vocabulary(int grid_size, int num_classes)
    : grid_size_(grid_size), num_classes_(num_classes) {
  if (grid_size_ < 2) throw ValidationError("vocabulary grid size must be >= 2");
  if (num_classes_ < 1) throw ValidationError("vocabulary needs at least one class");
  // Geometry, class and control ranges are consecutive half-open intervals.
  if (is_geometry(grid_size_) || is_class(grid_size_ - 1) || is_class(bos())) {
    throw ValidationError("vocabulary token ranges overlap");
  }
}

int Vocabulary::class_token(int class_id) const {
  if (class_id < 0 || class_id >= num_classes_) {
    throw ValidationError("class id " + std::to_string(class_id) + " outside vocabulary");
  }
  return grid_size_ + class_id;
}

int quantize_value(int value, int dim, int grid_size) {
  // floor(v (G-1) / D + 1/2) in exact integer arithmetic.
  const std::int64_t num = 2 * std::int64_t{value} * (grid_size - 1) + dim;
  return static_cast<int>(num / (2 * std::int64_t{dim}));
}

int dequantize_value(int token, int dim, int grid_size) {
  const std::int64_t num = 2 * std::int64_t{token} * dim + (grid_size - 1);
  return static_cast<int>(num / (2 * std::int64_t{grid_size - 1}));
}

TokenSequence quantize(const Layout& layout, const Vocabulary& vocab) {
  if (layout.schema().size() > vocab.num_classes()) {
    throw ValidationError("layout schema has more classes than the vocabulary");
  }
  const int g = vocab.grid_size();
  const auto [pw, ph] = layout.page();
  TokenSequence seq{{}, layout.page()};
  seq.tokens.reserve(kTokensPerElement * layout.size() + 2);
  seq.tokens.push_back(vocab.bos());
  for (const auto& e : layout.elements()) {
    seq.tokens.push_back(vocab.class_token(e.class_id));
    seq.tokens.push_back(quantize_value(e.x, pw, g));
    seq.tokens.push_back(quantize_value(e.y, ph, g));
    seq.tokens.push_back(quantize_value(e.w, pw, g));
    seq.tokens.push_back(quantize_value(e.h, ph, g));
  }
  seq.tokens.push_back(vocab.eos());
  return seq;
}

TokenSequence pad_to(TokenSequence seq, std::size_t length, const Vocabulary& vocab) {
  if (seq.tokens.size() > length) {
    throw ValidationError("token sequence of length " + std::to_string(seq.tokens.size()) +
                          " exceeds maximum " + std::to_string(length));
  }
  seq.tokens.resize(length, vocab.pad());
  return seq;
}

namespace {

LayoutElement decode_group(const int* t, PageSize page, const Vocabulary& vocab) {
  const int g = vocab.grid_size();
  LayoutElement e;
  e.class_id = vocab.class_of(t[0]);
  e.x = std::min(dequantize_value(t[1], page.width, g), page.width - 1);
  e.y = std::min(dequantize_value(t[2], page.height, g), page.height - 1);
  e.w = std::clamp(dequantize_value(t[3], page.width, g), 1, page.width - e.x);
  e.h = std::clamp(dequantize_value(t[4], page.height, g), 1, page.height - e.y);
  return e;
}

}  // namespace

DequantizeResult dequantize(const TokenSequence& seq, const Vocabulary& vocab, SchemaPtr schema,
                            RepairMode mode) {
  if (schema && schema->size() > vocab.num_classes()) {
    throw ValidationError("schema has more classes than the vocabulary");
  }
  const auto& t = seq.tokens;
  const std::size_t n = t.size();
  std::vector<LayoutElement> elements;
  std::vector<std::string> issues;
  int dropped = 0;

  auto report = [&](std::string msg) {
    if (mode == RepairMode::kStrict) throw FormatError("token sequence: " + msg);
    issues.push_back(std::move(msg));
  };

  for (int tok : t) {
    if (!vocab.contains(tok)) report("token " + std::to_string(tok) + " outside vocabulary");
  }

  std::size_t i = 0;
  if (n == 0 || t[0] != vocab.bos()) {
    report("missing BOS");
  } else {
    i = 1;
  }

  bool closed = false;
  bool in_stray_run = false;
  while (i < n) {
    const int tok = t[i];
    if (tok == vocab.eos()) {
      closed = true;
      ++i;
      break;
    }
    if (tok == vocab.pad()) {
      report("PAD before EOS at position " + std::to_string(i));
      break;
    }
    if (vocab.is_class(tok)) {
      in_stray_run = false;
      const bool complete =
          i + 4 < n && std::all_of(t.begin() + i + 1, t.begin() + i + 5,
                                   [&](int v) { return vocab.is_geometry(v); });
      if (complete && (!schema || vocab.class_of(tok) < schema->size())) {
        elements.push_back(decode_group(&t[i], seq.page, vocab));
        i += kTokensPerElement;
        continue;
      }
      report("malformed element group at position " + std::to_string(i));
      ++dropped;
      in_stray_run = true;  // its geometry tokens belong to the dropped group
      ++i;
      continue;
    }
    // Geometry or BOS where a class token belongs.
    report("unexpected token " + std::to_string(tok) + " at position " + std::to_string(i));
    if (!in_stray_run) ++dropped;
    in_stray_run = true;
    ++i;
  }
  if (!closed && i >= n) report("missing EOS");
  for (std::size_t j = i; closed && j < n; ++j) {
    if (t[j] != vocab.pad()) {
      report("non-PAD token after EOS at position " + std::to_string(j));
      break;
    }
  }

  if (!schema) {
    std::vector<std::string> names;
    for (int c = 0; c < vocab.num_classes(); ++c) names.push_back("class" + std::to_string(c));
    schema = std::make_shared<const ClassSchema>(std::move(names));
  }
  return DequantizeResult{Layout(seq.page, std::move(schema), std::move(elements)), dropped,
                          std::move(issues)};
}

}  // namespace doclayout::core
