#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace doclayout::matching {

struct Assignment {
  std::vector<std::pair<int, int>> pairs;  // (row, col), sorted by row
  double total_cost = 0.0;
};

// Minimum-cost assignment (Kuhn-Munkres with potentials, O(n^3)).
//
// Rectangular inputs are padded to square with a constant sentinel of ten
// times the largest absolute entry; padded pairs are dropped from the result,
// so |pairs| = min(rows, cols). Throws ValidationError on NaN or infinite
// entries.
Assignment hungarian(const Eigen::MatrixXd& cost);

}  // namespace doclayout::matching
