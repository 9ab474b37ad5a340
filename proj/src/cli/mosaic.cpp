#include <cmath>

#include "doclayout/cli/commands.hpp"

namespace doclayout::cli {

using nlohmann::ordered_json;

double mosaic_cost(const core::LayoutElement& g, core::PageSize gp, const core::LayoutElement& r,
                   core::PageSize rp, const MosaicWeights& w) {
  if (g.class_id != r.class_id) return std::numeric_limits<double>::infinity();
  const double aspect_g = static_cast<double>(g.w) / g.h;
  const double aspect_r = static_cast<double>(r.w) / r.h;
  const double area_g = static_cast<double>(g.w) * g.h / (static_cast<double>(gp.width) * gp.height);
  const double area_r = static_cast<double>(r.w) * r.h / (static_cast<double>(rp.width) * rp.height);
  return w.aspect * std::abs(std::log(aspect_g / aspect_r)) +
         w.area * std::abs(std::log(area_g / area_r));
}

std::vector<MosaicEntry> mosaic_plan(const std::vector<core::Layout>& generated,
                                     const std::vector<core::Layout>& real,
                                     const MosaicWeights& weights) {
  if (weights.aspect < 0 || weights.area < 0 || !std::isfinite(weights.aspect) ||
      !std::isfinite(weights.area)) {
    throw ValidationError("mosaic weights must be finite and >= 0");
  }
  if (!generated.empty() && !real.empty() && !core::same_schema(generated.front(), real.front())) {
    throw ValidationError("generated and real corpora use different class schemas");
  }
  std::vector<MosaicEntry> plan;
  for (std::size_t li = 0; li < generated.size(); ++li) {
    const auto& gl = generated[li];
    for (std::size_t ei = 0; ei < gl.size(); ++ei) {
      MosaicEntry entry;
      entry.layout = li;
      entry.element = ei;
      entry.target = gl.elements()[ei];
      for (std::size_t rl = 0; rl < real.size(); ++rl) {
        const auto& rlay = real[rl];
        for (std::size_t re = 0; re < rlay.size(); ++re) {
          const auto& cand = rlay.elements()[re];
          const double c = mosaic_cost(entry.target, gl.page(), cand, rlay.page(), weights);
          if (c < entry.cost) {
            entry.cost = c;
            entry.matched = true;
            entry.source_id = rlay.source_id();
            entry.source_layout = rl;
            entry.source_element = re;
            entry.source = cand;
          }
        }
      }
      plan.push_back(std::move(entry));
    }
  }
  return plan;
}

ordered_json mosaic_json(const std::vector<MosaicEntry>& plan, const core::ClassSchema& schema) {
  auto box = [](const core::LayoutElement& e) { return ordered_json::array({e.x, e.y, e.w, e.h}); };
  ordered_json arr = ordered_json::array();
  for (const auto& e : plan) {
    ordered_json j;
    j["layout"] = e.layout;
    j["element"] = e.element;
    j["class"] = schema.name(e.target.class_id);
    j["target_bbox"] = box(e.target);
    j["matched"] = e.matched;
    if (e.matched) {
      j["source_image_id"] = e.source_id;
      j["source_layout"] = e.source_layout;
      j["source_element"] = e.source_element;
      j["source_bbox"] = box(e.source);
      j["cost"] = e.cost;
    }
    arr.push_back(std::move(j));
  }
  return arr;
}

}  // namespace doclayout::cli
