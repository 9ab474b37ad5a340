#include "doclayout/metrics/report.hpp"

#include <charconv>
#include <map>

namespace doclayout::metrics {

using nlohmann::ordered_json;

std::string format_number(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

ordered_json to_json(const MetricReport& report, const core::ClassSchema& schema) {
  ordered_json j;
  j["total"] = report.total;
  j["lambda"] = report.lambda;
  ordered_json per_class = ordered_json::object();
  for (const auto& term : report.per_class) per_class[schema.name(term.class_id)] = term.emd;
  j["per_class"] = std::move(per_class);
  auto names = [&](const std::vector<int>& ids) {
    ordered_json arr = ordered_json::array();
    for (int c : ids) arr.push_back(schema.name(c));
    return arr;
  };
  j["penalty_classes"] = names(report.penalty_classes);
  j["degenerate_classes"] = names(report.degenerate_classes);
  return j;
}

ordered_json to_json(const std::vector<PairReport>& pairs, const core::ClassSchema& schema) {
  ordered_json arr = ordered_json::array();
  for (const auto& p : pairs) {
    ordered_json j;
    j["a"] = p.a;
    j["b"] = p.b;
    j["report"] = to_json(p.report, schema);
    arr.push_back(std::move(j));
  }
  return arr;
}

std::string pair_csv_header(const core::ClassSchema& schema) {
  std::string h = "a,b,total";
  for (const auto& n : schema.names()) h += "," + n;
  h += ",penalty_classes";
  return h;
}

void write_pair_csv(std::ostream& out, const std::vector<PairReport>& pairs,
                    const core::ClassSchema& schema) {
  out << pair_csv_header(schema) << '\n';
  for (const auto& p : pairs) {
    std::map<int, double> terms;
    for (const auto& t : p.report.per_class) terms[t.class_id] = t.emd;
    out << p.a << ',' << p.b << ',' << format_number(p.report.total);
    for (int c = 0; c < schema.size(); ++c) {
      out << ',';
      if (auto it = terms.find(c); it != terms.end()) out << format_number(it->second);
    }
    out << ',';
    for (std::size_t i = 0; i < p.report.penalty_classes.size(); ++i) {
      out << (i ? ";" : "") << schema.name(p.report.penalty_classes[i]);
    }
    out << '\n';
  }
}

}  // namespace doclayout::metrics
