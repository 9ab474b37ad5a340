#include "doclayout/core/layout.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "doclayout/error.hpp"

namespace doclayout::core {

ClassSchema::ClassSchema(std::vector<std::string> names) : names_(std::move(names)) {
  std::set<std::string_view> seen;
  for (const auto& n : names_) {
    if (!seen.insert(n).second) {
      throw ValidationError("duplicate class name '" + n + "' in schema");
    }
  }
}

std::optional<int> ClassSchema::index_of(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<int>(it - names_.begin());
}

std::shared_ptr<const ClassSchema> ClassSchema::publaynet() {
  static const auto schema = std::make_shared<const ClassSchema>(
      std::vector<std::string>{"text", "title", "list", "table", "figure"});
  return schema;
}

Layout::Layout(PageSize page, SchemaPtr schema, std::vector<LayoutElement> elements,
               std::string source_id)
    : page_(page),
      schema_(std::move(schema)),
      elements_(std::move(elements)),
      source_id_(std::move(source_id)) {
  if (!schema_) throw ValidationError("layout has no class schema");
  if (page_.width <= 0 || page_.height <= 0) {
    throw ValidationError("page dimensions must be positive");
  }
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    const auto& e = elements_[i];
    const std::string where = "element " + std::to_string(i);
    if (e.class_id < 0 || e.class_id >= schema_->size()) {
      throw ValidationError(where + ": class id " + std::to_string(e.class_id) +
                            " outside schema of " + std::to_string(schema_->size()) +
                            " classes");
    }
    if (e.w <= 0 || e.h <= 0) throw ValidationError(where + ": non-positive width/height");
    if (e.x < 0 || e.y < 0 || e.x + e.w > page_.width || e.y + e.h > page_.height) {
      throw ValidationError(where + ": box exceeds page bounds");
    }
  }
}

Layout Layout::sorted_reading_order() const {
  auto sorted = elements_;
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return std::tie(a.y, a.x) < std::tie(b.y, b.x);
  });
  return with_elements(std::move(sorted));
}

Layout Layout::with_elements(std::vector<LayoutElement> elements) const {
  return Layout(page_, schema_, std::move(elements), source_id_);
}

bool same_schema(const Layout& a, const Layout& b) {
  return a.schema_ptr() == b.schema_ptr() || a.schema() == b.schema();
}

void require_shared_schema(const std::vector<Layout>& layouts, std::string_view what) {
  for (std::size_t i = 1; i < layouts.size(); ++i) {
    if (!same_schema(layouts[0], layouts[i])) {
      throw ValidationError(std::string(what) + ": layout " + std::to_string(i) +
                            " has a different class schema");
    }
  }
}

}  // namespace doclayout::core
