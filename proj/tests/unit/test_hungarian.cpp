#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "safe_manip/errors.hpp"
#include "safe_manip/hungarian.hpp"
#include "safe_manip/rng.hpp"

using namespace safe_manip;

namespace {

double brute_force_min(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  std::vector<int> perm(static_cast<std::size_t>(cost.cols()));
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (int r = 0; r < n; ++r) total += cost(r, perm[static_cast<std::size_t>(r)]);
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

TEST_CASE("assignment matches brute force on random square matrices") {
  Rng rng(2024);
  for (int k = 2; k <= 6; ++k) {
    for (int trial = 0; trial < 100; ++trial) {
      Eigen::MatrixXd cost(k, k);
      for (int r = 0; r < k; ++r) {
        for (int c = 0; c < k; ++c) cost(r, c) = rng.uniform(-5.0, 5.0);
      }
      const std::vector<int> assignment = solve_assignment(cost);
      REQUIRE(static_cast<int>(assignment.size()) == k);
      std::vector<bool> used(static_cast<std::size_t>(k), false);
      for (int c : assignment) {
        REQUIRE(c >= 0);
        REQUIRE(c < k);
        CHECK_FALSE(used[static_cast<std::size_t>(c)]);
        used[static_cast<std::size_t>(c)] = true;
      }
      CHECK(assignment_cost(cost, assignment) ==
            doctest::Approx(brute_force_min(cost)).epsilon(1e-12));
    }
  }
}

TEST_CASE("rectangular assignment leaves surplus columns unused") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int rows = 3, cols = 6;
    Eigen::MatrixXd cost(rows, cols);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) cost(r, c) = rng.uniform(0.0, 10.0);
    }
    const std::vector<int> assignment = solve_assignment(cost);
    CHECK(assignment_cost(cost, assignment) ==
          doctest::Approx(brute_force_min(cost)).epsilon(1e-12));
  }
}

TEST_CASE("assignment rejects malformed input") {
  Eigen::MatrixXd more_rows(3, 2);
  more_rows.setZero();
  CHECK_THROWS_AS(solve_assignment(more_rows), ShapeError);
  Eigen::MatrixXd with_nan(2, 2);
  with_nan << 1.0, 2.0, std::numeric_limits<double>::quiet_NaN(), 3.0;
  CHECK_THROWS_AS(solve_assignment(with_nan), ShapeError);
}
