#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace fleetroll {

/// Dense row-major cost matrix: rows are taxis, columns are requests.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Matched (row, column) index pairs, ascending by row.
struct Assignment {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  double total_cost = 0.0;
};

/// Forward auction with epsilon scaling (minimization form). The returned
/// assignment matches min(rows, cols) pairs and its cost is within
/// min(rows, cols) * epsilon of optimal; with integer costs and
/// epsilon < 1 / min(rows, cols) it is optimal. Empty input yields an empty assignment.
Assignment min_cost_assignment(const CostMatrix& cost, double epsilon);

/// Convenience: epsilon chosen so integer-cost problems are solved exactly.
Assignment min_cost_assignment(const CostMatrix& cost);

/// Exhaustive enumeration of injections of the smaller side into the larger.
/// Ties resolve to the lexicographically smallest column sequence (by row).
/// Throws TooLarge when min(rows, cols) > 8.
Assignment brute_force_assignment(const CostMatrix& cost);

double assignment_cost(const CostMatrix& cost, const Assignment& a);

}  // namespace fleetroll
