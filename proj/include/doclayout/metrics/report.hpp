#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "doclayout/core/layout.hpp"
#include "doclayout/metrics/doc_emd.hpp"

namespace doclayout::metrics {

struct PairReport {
  std::string a;  // pair ids
  std::string b;
  MetricReport report;
};

nlohmann::ordered_json to_json(const MetricReport& report, const core::ClassSchema& schema);
nlohmann::ordered_json to_json(const std::vector<PairReport>& pairs,
                               const core::ClassSchema& schema);

// Header: a,b,total,<one column per class>,penalty_classes. A class column
// holds that class's EMD term and is blank when the class has none; penalty
// classes are joined with ';'.
std::string pair_csv_header(const core::ClassSchema& schema);
void write_pair_csv(std::ostream& out, const std::vector<PairReport>& pairs,
                    const core::ClassSchema& schema);

// Shortest round-tripping decimal form used by every CSV writer.
std::string format_number(double value);

}  // namespace doclayout::metrics
