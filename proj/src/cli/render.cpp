#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "doclayout/cli/commands.hpp"

namespace doclayout::cli {

namespace {

constexpr std::array<const char*, 10> kPalette = {
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
};

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string class_color(int class_id) {
  return kPalette[static_cast<std::size_t>(class_id) % kPalette.size()];
}

std::string render_svg(const core::Layout& layout) {
  const auto page = layout.page();
  const auto& schema = layout.schema();
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << page.width << "\" height=\""
    << page.height << "\" viewBox=\"0 0 " << page.width << ' ' << page.height << "\">\n";
  for (const auto& e : layout.elements()) {
    const auto color = class_color(e.class_id);
    s << "  <rect x=\"" << e.x << "\" y=\"" << e.y << "\" width=\"" << e.w << "\" height=\""
      << e.h << "\" fill=\"" << color << "\" fill-opacity=\"0.35\" stroke=\"" << color
      << "\" stroke-width=\"1\" data-class=\"" << escape_xml(schema.name(e.class_id))
      << "\"/>\n";
  }
  const int font = std::max(6, page.height / 60);
  s << "  <g id=\"legend\" font-family=\"sans-serif\" font-size=\"" << font << "\">\n";
  for (int c = 0; c < schema.size(); ++c) {
    s << "    <text x=\"" << font / 2 << "\" y=\"" << (c + 1) * font << "\" fill=\""
      << class_color(c) << "\">" << escape_xml(schema.name(c)) << "</text>\n";
  }
  s << "  </g>\n</svg>\n";
  return s.str();
}

std::vector<std::filesystem::path> render_corpus(const std::vector<core::Layout>& corpus,
                                                 const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "layout_%05zu.svg", i);
    const auto path = dir / name;
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write '" + path.string() + "'");
    out << render_svg(corpus[i]);
    written.push_back(path);
  }
  return written;
}

}  // namespace doclayout::cli
