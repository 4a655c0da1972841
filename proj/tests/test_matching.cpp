#include <random>

#include "doctest.h"
#include "fleetroll/error.hpp"
#include "fleetroll/matching.hpp"

using namespace fleetroll;

namespace {

CostMatrix random_costs(std::mt19937& gen, int rows, int cols, int max_cost) {
  CostMatrix c(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
  std::uniform_int_distribution<int> u(0, max_cost);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) c(i, j) = u(gen);
  return c;
}

}  // namespace

TEST_CASE("line example prefers the non-crossing matching") {
  // Taxis at 1 and 4, requests at 2 and 3 on the line 1-2-3-4.
  CostMatrix c(2, 2);
  c(0, 0) = 1, c(0, 1) = 2, c(1, 0) = 2, c(1, 1) = 1;
  const Assignment a = min_cost_assignment(c);
  CHECK(a.total_cost == 2);
  REQUIRE(a.pairs.size() == 2);
  CHECK(a.pairs[0] == std::pair<std::size_t, std::size_t>{0, 0});
}

TEST_CASE("auction matches brute force on random rectangular instances") {
  std::mt19937 gen(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const int rows = 1 + static_cast<int>(gen() % 7), cols = 1 + static_cast<int>(gen() % 7);
    const CostMatrix c = random_costs(gen, rows, cols, 20);
    const Assignment a = min_cost_assignment(c);
    const Assignment b = brute_force_assignment(c);
    REQUIRE(a.total_cost == b.total_cost);
    CHECK(a.pairs.size() == static_cast<std::size_t>(std::min(rows, cols)));
    CHECK(assignment_cost(c, a) == a.total_cost);
  }
}

TEST_CASE("matching edge cases") {
  CHECK(min_cost_assignment(CostMatrix(0, 3)).pairs.empty());
  CostMatrix one(1, 1);
  one(0, 0) = 4;
  CHECK(min_cost_assignment(one).total_cost == 4);
  CHECK_THROWS_AS(min_cost_assignment(one, 0.0), Error);
  CostMatrix neg(1, 1);
  neg(0, 0) = -1;
  CHECK_THROWS_AS(min_cost_assignment(neg), Error);
  CHECK_THROWS_AS(brute_force_assignment(CostMatrix(9, 9)), Error);
}

TEST_CASE("each row and column used at most once") {
  std::mt19937 gen(5);
  const CostMatrix c = random_costs(gen, 6, 4, 9);
  const Assignment a = min_cost_assignment(c);
  std::vector<int> row(6, 0), col(4, 0);
  for (auto [r, k] : a.pairs) ++row[r], ++col[k];
  for (int v : row) CHECK(v <= 1);
  for (int v : col) CHECK(v == 1);
}
