#pragma once

#include <Eigen/Core>
#include <vector>

namespace safe_manip {

// Exact min-cost assignment for a rows x cols cost matrix with
// rows <= cols: returns for each row the column it is assigned, columns
// pairwise distinct, total cost minimal. O(rows^2 * cols) potentials method.
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost);

double assignment_cost(const Eigen::MatrixXd& cost, const std::vector<int>& assignment);

}  // namespace safe_manip
