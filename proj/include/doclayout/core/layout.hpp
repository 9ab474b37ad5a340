#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace doclayout::core {

// Ordered, duplicate-free list of class names. K = names().size().
class ClassSchema {
 public:
  explicit ClassSchema(std::vector<std::string> names);

  const std::vector<std::string>& names() const noexcept { return names_; }
  int size() const noexcept { return static_cast<int>(names_.size()); }
  std::optional<int> index_of(std::string_view name) const;
  const std::string& name(int class_id) const { return names_.at(class_id); }

  bool operator==(const ClassSchema& other) const { return names_ == other.names_; }

  // Text, Title, List, Table, Figure.
  static std::shared_ptr<const ClassSchema> publaynet();

 private:
  std::vector<std::string> names_;
};

using SchemaPtr = std::shared_ptr<const ClassSchema>;

struct LayoutElement {
  int class_id = 0;
  int x = 0;  // upper-left, pixels
  int y = 0;
  int w = 1;
  int h = 1;

  bool operator==(const LayoutElement&) const = default;
};

struct PageSize {
  int width = 0;
  int height = 0;

  bool operator==(const PageSize&) const = default;
};

// A page plus its class-labeled boxes. Immutable once constructed; the
// constructor rejects any element that leaves the page or names a class
// outside the schema.
class Layout {
 public:
  Layout(PageSize page, SchemaPtr schema, std::vector<LayoutElement> elements = {},
         std::string source_id = {});

  const std::vector<LayoutElement>& elements() const noexcept { return elements_; }
  std::size_t size() const noexcept { return elements_.size(); }
  bool empty() const noexcept { return elements_.empty(); }
  PageSize page() const noexcept { return page_; }
  const ClassSchema& schema() const noexcept { return *schema_; }
  const SchemaPtr& schema_ptr() const noexcept { return schema_; }
  const std::string& source_id() const noexcept { return source_id_; }

  // Top-left lexicographic order (y, then x). Source order is kept otherwise.
  Layout sorted_reading_order() const;

  Layout with_elements(std::vector<LayoutElement> elements) const;

 private:
  PageSize page_;
  SchemaPtr schema_;
  std::vector<LayoutElement> elements_;
  std::string source_id_;
};

bool same_schema(const Layout& a, const Layout& b);

// Throws ValidationError unless every layout shares the schema of the first.
void require_shared_schema(const std::vector<Layout>& layouts, std::string_view what);

}  // namespace doclayout::core
