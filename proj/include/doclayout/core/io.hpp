#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "doclayout/core/layout.hpp"

namespace doclayout::core {

struct CocoIngestStats {
  int images = 0;
  int annotations = 0;
  int dropped_degenerate = 0;  // w or h <= 0
  int dropped_unknown = 0;     // unknown image or category id
  int clipped = 0;             // boxes clipped to the page
};

struct CocoCorpus {
  std::vector<Layout> layouts;  // one per image, in `images` order
  SchemaPtr schema;             // dense [0, K) remap of `categories` order
  CocoIngestStats stats;
};

// Reads the COCO subset used for layout datasets: images (id, width, height,
// file_name), annotations (image_id, category_id, bbox) and categories (id,
// name). Annotation order is preserved per image.
CocoCorpus ingest_coco(std::istream& in);
CocoCorpus ingest_coco_file(const std::filesystem::path& path);

// Native interchange: one JSON object per line,
//   {"page":[w,h],"schema":[names...],"boxes":[[c,x,y,w,h],...],"id":"..."}
// "id" is omitted when empty. A box class may be an index or a name.
//
// With `expected` set, every record's schema names must exist in it and box
// classes are remapped into its order; otherwise records with equal schemas
// share one schema object.
std::vector<Layout> ingest_jsonl(std::istream& in, SchemaPtr expected = nullptr);
std::vector<Layout> ingest_jsonl_file(const std::filesystem::path& path,
                                      SchemaPtr expected = nullptr);

std::string to_jsonl_line(const Layout& layout);
void emit_jsonl(std::ostream& out, const std::vector<Layout>& layouts);
void emit_jsonl_file(const std::filesystem::path& path, const std::vector<Layout>& layouts);

}  // namespace doclayout::core
