#pragma once

#include <Eigen/Dense>
#include <vector>

namespace normot {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Sorted, duplicate-free list of indices.
using IndexSet = std::vector<int>;

bool is_subset(const IndexSet& a, const IndexSet& b);  // a ⊆ b
IndexSet set_intersection(const IndexSet& a, const IndexSet& b);

}  // namespace normot
