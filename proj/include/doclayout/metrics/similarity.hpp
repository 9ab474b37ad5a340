#pragma once

#include <cstdint>
#include <vector>

#include "doclayout/core/layout.hpp"

namespace doclayout::metrics {

// DocSim-style layout similarity.
//
// Reconstructed from its published description; no reference
// implementation exists, so the constants are a choice:
//   w(b1, b2) = sqrt(min(a1, a2)) * 2^(-dC - 2 dS)   (same class, else 0)
// with a = normalized area, dC = distance between normalized box centres and
// dS = |dw| + |dh| in normalized units. Boxes are paired by maximum-weight
// assignment and the matched sum is divided by max(N, M). Result in [0, 1];
// 0 when either layout is empty.
double docsim(const core::Layout& s, const core::Layout& t);

// Weight of a single box pair as used by docsim().
double docsim_pair_weight(const core::LayoutElement& a, core::PageSize pa,
                          const core::LayoutElement& b, core::PageSize pb);

struct SequenceWasserstein {
  double class_w = 0.0;  // W1 between class histograms under 0/1 cost
  double bbox_w = 0.0;   // W2 between pooled normalized (x, y, w, h) samples
};

inline constexpr std::size_t kWassersteinExactLimit = 2000;

// Corpus-level Wasserstein distances. When a pooled box set exceeds
// `exact_limit`, a seeded uniform subsample of that size is used. Throws
// ValidationError when either corpus has no boxes at all.
SequenceWasserstein wasserstein_seq(const std::vector<core::Layout>& a,
                                    const std::vector<core::Layout>& b, std::uint64_t seed = 0,
                                    std::size_t exact_limit = kWassersteinExactLimit);

}  // namespace doclayout::metrics
