#include "fleetroll/matching.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "fleetroll/error.hpp"

namespace fleetroll {

namespace {

// Square auction maximizing sum of benefit(i, owner_of_i). Persons bid in
// ascending order from a FIFO queue; prices persist across scaling phases.
std::vector<std::size_t> square_auction(const std::vector<double>& benefit, std::size_t n, double final_eps,
                                        double start_eps) {
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<double> price(n, 0.0);
  std::vector<std::size_t> owner(n, kNone);   // object -> person
  std::vector<std::size_t> object(n, kNone);  // person -> object
  std::deque<std::size_t> queue;

  double eps = std::max(start_eps, final_eps);
  while (true) {
    std::fill(owner.begin(), owner.end(), kNone);
    std::fill(object.begin(), object.end(), kNone);
    queue.clear();
    for (std::size_t i = 0; i < n; ++i) queue.push_back(i);

    while (!queue.empty()) {
      const std::size_t i = queue.front();
      queue.pop_front();
      const double* row = benefit.data() + i * n;

      std::size_t best = 0;
      double best_value = -std::numeric_limits<double>::infinity();
      double second_value = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n; ++j) {
        const double v = row[j] - price[j];
        if (v > best_value) {
          second_value = best_value;
          best_value = v;
          best = j;
        } else if (v > second_value) {
          second_value = v;
        }
      }
      const double increment = n == 1 ? eps : best_value - second_value + eps;
      price[best] += increment;
      if (owner[best] != kNone) {
        object[owner[best]] = kNone;
        queue.push_back(owner[best]);
      }
      owner[best] = i;
      object[i] = best;
    }

    if (eps <= final_eps) break;
    eps = std::max(eps / 4.0, final_eps);
  }
  return object;
}

}  // namespace

Assignment min_cost_assignment(const CostMatrix& cost, double epsilon) {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "auction epsilon must be positive");
  Assignment result;
  const std::size_t rows = cost.rows(), cols = cost.cols();
  if (rows == 0 || cols == 0) return result;

  const std::size_t n = std::max(rows, cols);
  const std::size_t k = std::min(rows, cols);
  double max_cost = 0.0;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = cost(r, c);
      if (!std::isfinite(v) || v < 0.0) throw Error(ErrorCode::InvalidArgument, "costs must be finite and nonnegative");
      max_cost = std::max(max_cost, v);
    }

  // Pad to square with a constant virtual cost; virtual entries do not
  // change which real pairing is optimal.
  const double virtual_cost = max_cost * static_cast<double>(k) + 1.0;
  std::vector<double> benefit(n * n, -virtual_cost);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) benefit[r * n + c] = -cost(r, c);

  // The square problem's bound is n * eps; scale so the real pairs keep k * epsilon.
  const double final_eps = epsilon * static_cast<double>(k) / static_cast<double>(n);
  const auto object = square_auction(benefit, n, final_eps, max_cost / 2.0);

  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t c = object[r];
    if (c < cols) {
      result.pairs.emplace_back(r, c);
      result.total_cost += cost(r, c);
    }
  }
  return result;
}

Assignment min_cost_assignment(const CostMatrix& cost) {
  const std::size_t k = std::min(cost.rows(), cost.cols());
  return min_cost_assignment(cost, 1.0 / static_cast<double>(k + 1));
}

Assignment brute_force_assignment(const CostMatrix& cost) {
  Assignment best;
  const std::size_t rows = cost.rows(), cols = cost.cols();
  if (rows == 0 || cols == 0) return best;
  if (std::min(rows, cols) > 8) throw Error(ErrorCode::TooLarge, "brute force limited to min(rows, cols) <= 8");

  const bool transpose = rows > cols;
  const std::size_t small = transpose ? cols : rows;
  const std::size_t large = transpose ? rows : cols;
  auto at = [&](std::size_t s, std::size_t l) { return transpose ? cost(l, s) : cost(s, l); };

  std::vector<std::size_t> current(small), chosen(small);
  std::vector<bool> used(large, false);
  double best_cost = std::numeric_limits<double>::infinity();

  // Depth-first in lexicographic order; strict improvement keeps the first optimum.
  auto recurse = [&](auto&& self, std::size_t depth, double partial) -> void {
    if (depth == small) {
      if (partial < best_cost) {
        best_cost = partial;
        chosen = current;
      }
      return;
    }
    for (std::size_t l = 0; l < large; ++l) {
      if (used[l]) continue;
      used[l] = true;
      current[depth] = l;
      self(self, depth + 1, partial + at(depth, l));
      used[l] = false;
    }
  };
  recurse(recurse, 0, 0.0);

  for (std::size_t s = 0; s < small; ++s) {
    if (transpose) best.pairs.emplace_back(chosen[s], s);
    else best.pairs.emplace_back(s, chosen[s]);
  }
  std::sort(best.pairs.begin(), best.pairs.end());
  best.total_cost = best_cost;
  return best;
}

double assignment_cost(const CostMatrix& cost, const Assignment& a) {
  double total = 0.0;
  for (const auto& [r, c] : a.pairs) total += cost(r, c);
  return total;
}

}  // namespace fleetroll
