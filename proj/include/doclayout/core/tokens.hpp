#pragma once

#include <string>
#include <vector>

#include "doclayout/core/layout.hpp"

namespace doclayout::core {

// Dense id space: geometry tokens [0, G), class tokens [G, G+K), then BOS,
// EOS and PAD.
class Vocabulary {
 public:
  Vocabulary(int grid_size, int num_classes);

  int grid_size() const noexcept { return grid_size_; }
  int num_classes() const noexcept { return num_classes_; }
  int size() const noexcept { return grid_size_ + num_classes_ + 3; }

  int bos() const noexcept { return grid_size_ + num_classes_; }
  int eos() const noexcept { return bos() + 1; }
  int pad() const noexcept { return bos() + 2; }

  int class_token(int class_id) const;
  int class_of(int token) const { return token - grid_size_; }

  bool is_geometry(int token) const noexcept { return token >= 0 && token < grid_size_; }
  bool is_class(int token) const noexcept {
    return token >= grid_size_ && token < grid_size_ + num_classes_;
  }
  bool contains(int token) const noexcept { return token >= 0 && token < size(); }

  bool operator==(const Vocabulary&) const = default;

 private:
  int grid_size_;
  int num_classes_;
};

inline constexpr int kDefaultGridSize = 128;
inline constexpr int kTokensPerElement = 5;

struct TokenSequence {
  std::vector<int> tokens;
  PageSize page;
};

// BOS, then (class, x, y, w, h) per element, then EOS. Length 5N+2.
TokenSequence quantize(const Layout& layout, const Vocabulary& vocab);

// Appends PAD up to `length`. Throws ValidationError if already longer.
TokenSequence pad_to(TokenSequence seq, std::size_t length, const Vocabulary& vocab);

// Grid index for a pixel value: round-half-up of v / dim * (G - 1).
int quantize_value(int value, int dim, int grid_size);
int dequantize_value(int token, int dim, int grid_size);

enum class RepairMode { kStrict, kRepair };

struct DequantizeResult {
  Layout layout;
  int dropped_groups = 0;
  std::vector<std::string> issues;

  // True when the token stream needed no repair at all.
  bool structurally_valid() const noexcept { return issues.empty(); }
};

// Inverse of quantize. In strict mode any structural defect throws
// FormatError; in repair mode offending groups are dropped and reported.
DequantizeResult dequantize(const TokenSequence& seq, const Vocabulary& vocab,
                            SchemaPtr schema, RepairMode mode = RepairMode::kRepair);

}  // namespace doclayout::core
