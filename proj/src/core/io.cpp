#include "doclayout/core/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <unordered_map>

#include "json.hpp"

#include "doclayout/error.hpp"

namespace doclayout::core {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

const json& require_array(const json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key) || !doc.at(key).is_array()) {
    throw FormatError(std::string("COCO document has no '") + key + "' array");
  }
  return doc.at(key);
}

std::string id_string(const json& id) {
  return id.is_string() ? id.get<std::string>() : id.dump();
}

}  // namespace

CocoCorpus ingest_coco(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("COCO document is not valid JSON: ") + e.what());
  }
  const auto& images = require_array(doc, "images");
  const auto& annotations = require_array(doc, "annotations");
  const auto& categories = require_array(doc, "categories");

  CocoCorpus out;
  try {
    std::vector<std::string> names;
    std::unordered_map<std::string, int> category_index;
    for (const auto& c : categories) {
      category_index.emplace(id_string(c.at("id")), static_cast<int>(names.size()));
      names.push_back(c.at("name").get<std::string>());
    }
    out.schema = std::make_shared<const ClassSchema>(std::move(names));

    struct Pending {
      PageSize page;
      std::string id;
      std::vector<LayoutElement> elements;
    };
    std::vector<Pending> pending;
    std::unordered_map<std::string, std::size_t> image_index;
    for (const auto& img : images) {
      const std::string id = id_string(img.at("id"));
      PageSize page{img.at("width").get<int>(), img.at("height").get<int>()};
      image_index.emplace(id, pending.size());
      pending.push_back({page, id, {}});
    }
    out.stats.images = static_cast<int>(pending.size());

    for (const auto& ann : annotations) {
      ++out.stats.annotations;
      auto img_it = image_index.find(id_string(ann.at("image_id")));
      auto cat_it = category_index.find(id_string(ann.at("category_id")));
      if (img_it == image_index.end() || cat_it == category_index.end()) {
        ++out.stats.dropped_unknown;
        continue;
      }
      const auto& bbox = ann.at("bbox");
      if (!bbox.is_array() || bbox.size() != 4) {
        throw FormatError("annotation bbox must be [x, y, w, h]");
      }
      auto& target = pending[img_it->second];
      const auto round_px = [](const json& v) {
        return static_cast<int>(std::lround(v.get<double>()));
      };
      int x = round_px(bbox[0]);
      int y = round_px(bbox[1]);
      int w = round_px(bbox[2]);
      int h = round_px(bbox[3]);
      if (w <= 0 || h <= 0) {
        ++out.stats.dropped_degenerate;
        continue;
      }
      const int x0 = std::clamp(x, 0, target.page.width);
      const int y0 = std::clamp(y, 0, target.page.height);
      const int x1 = std::clamp(x + w, 0, target.page.width);
      const int y1 = std::clamp(y + h, 0, target.page.height);
      if (x0 != x || y0 != y || x1 != x + w || y1 != y + h) ++out.stats.clipped;
      if (x1 <= x0 || y1 <= y0) {
        ++out.stats.dropped_degenerate;
        continue;
      }
      target.elements.push_back({cat_it->second, x0, y0, x1 - x0, y1 - y0});
    }

    out.layouts.reserve(pending.size());
    for (auto& p : pending) {
      out.layouts.emplace_back(p.page, out.schema, std::move(p.elements), std::move(p.id));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("COCO document: ") + e.what());
  }
  return out;
}

CocoCorpus ingest_coco_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return ingest_coco(in);
}

std::vector<Layout> ingest_jsonl(std::istream& in, SchemaPtr expected) {
  std::vector<Layout> layouts;
  std::map<std::vector<std::string>, SchemaPtr> interned;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    try {
      const json rec = json::parse(line);
      const auto& page = rec.at("page");
      if (!page.is_array() || page.size() != 2) throw FormatError(where + "page must be [w, h]");
      const PageSize size{page[0].get<int>(), page[1].get<int>()};
      const auto names = rec.at("schema").get<std::vector<std::string>>();

      SchemaPtr schema;
      std::vector<int> remap(names.size());
      if (expected) {
        schema = expected;
        for (std::size_t i = 0; i < names.size(); ++i) {
          auto idx = expected->index_of(names[i]);
          if (!idx) throw ValidationError(where + "unknown class '" + names[i] + "'");
          remap[i] = *idx;
        }
      } else {
        auto& slot = interned[names];
        if (!slot) slot = std::make_shared<const ClassSchema>(names);
        schema = slot;
        for (std::size_t i = 0; i < names.size(); ++i) remap[i] = static_cast<int>(i);
      }

      std::vector<LayoutElement> elements;
      for (const auto& b : rec.at("boxes")) {
        if (!b.is_array() || b.size() != 5) {
          throw FormatError(where + "box must be [c, x, y, w, h]");
        }
        int local = 0;
        if (b[0].is_string()) {
          const auto name = b[0].get<std::string>();
          auto it = std::find(names.begin(), names.end(), name);
          if (it == names.end()) throw ValidationError(where + "unknown class '" + name + "'");
          local = static_cast<int>(it - names.begin());
        } else {
          local = b[0].get<int>();
          if (local < 0 || local >= static_cast<int>(names.size())) {
            throw ValidationError(where + "class index " + std::to_string(local) +
                                  " outside record schema");
          }
        }
        elements.push_back(
            {remap[local], b[1].get<int>(), b[2].get<int>(), b[3].get<int>(), b[4].get<int>()});
      }
      std::string id = rec.contains("id") ? rec.at("id").get<std::string>() : std::string{};
      try {
        layouts.emplace_back(size, schema, std::move(elements), std::move(id));
      } catch (const ValidationError& e) {
        throw ValidationError(where + e.what());
      }
    } catch (const json::exception& e) {
      throw FormatError(where + e.what());
    }
  }
  return layouts;
}

std::vector<Layout> ingest_jsonl_file(const std::filesystem::path& path, SchemaPtr expected) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return ingest_jsonl(in, std::move(expected));
}

std::string to_jsonl_line(const Layout& layout) {
  ordered_json rec;
  rec["page"] = {layout.page().width, layout.page().height};
  rec["schema"] = layout.schema().names();
  auto boxes = ordered_json::array();
  for (const auto& e : layout.elements()) boxes.push_back({e.class_id, e.x, e.y, e.w, e.h});
  rec["boxes"] = std::move(boxes);
  if (!layout.source_id().empty()) rec["id"] = layout.source_id();
  return rec.dump();
}

void emit_jsonl(std::ostream& out, const std::vector<Layout>& layouts) {
  for (const auto& l : layouts) out << to_jsonl_line(l) << '\n';
}

void emit_jsonl_file(const std::filesystem::path& path, const std::vector<Layout>& layouts) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  emit_jsonl(out, layouts);
}

}  // namespace doclayout::core
