#include "coarse/detail/linprog.hpp"

#include <cmath>
#include <limits>

#include "coarse/errors.hpp"

namespace coarse::detail {

FeasibilityResult find_nonnegative_solution(const std::vector<std::vector<double>>& a,
                                            const std::vector<double>& b, double tol) {
  const std::size_t m = a.size();
  if (b.size() != m) throw InputError("linear system: row count mismatch");
  const std::size_t k = m == 0 ? 0 : a.front().size();
  for (const auto& row : a) {
    if (row.size() != k) throw InputError("linear system: ragged constraint matrix");
  }
  FeasibilityResult result;
  if (m == 0) {
    result.feasible = true;
    result.x.assign(k, 0.0);
    return result;
  }

  // Tableau columns: k structural, m artificial, 1 right-hand side.
  const std::size_t cols = k + m + 1;
  std::vector<double> t((m + 1) * cols, 0.0);
  auto at = [&](std::size_t r, std::size_t c) -> double& { return t[r * cols + c]; };
  std::vector<std::size_t> basis(m);

  for (std::size_t i = 0; i < m; ++i) {
    const double sign = b[i] < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < k; ++j) at(i, j) = sign * a[i][j];
    at(i, k + i) = 1.0;
    at(i, cols - 1) = sign * b[i];
    basis[i] = k + i;
  }
  // Objective row: reduced costs of minimizing the sum of artificials.
  for (std::size_t j = 0; j < cols; ++j) {
    if (j >= k && j < k + m) continue;
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += at(i, j);
    at(m, j) = -s;  // the right-hand side holds -w
  }

  constexpr double kPivotEps = 1e-12;
  const std::size_t max_pivots = 50 * (k + m) + 1000;
  for (std::size_t iter = 0;; ++iter) {
    if (iter > max_pivots) throw NumericalError("phase-1 simplex exceeded its pivot budget");
    std::size_t enter = cols;
    for (std::size_t j = 0; j + 1 < cols; ++j) {
      if (at(m, j) < -kPivotEps) {
        enter = j;
        break;
      }
    }
    if (enter == cols) break;

    std::size_t leave = m;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      const double coef = at(i, enter);
      if (coef <= kPivotEps) continue;
      const double ratio = at(i, cols - 1) / coef;
      if (leave == m || ratio < best - 1e-15 ||
          (std::abs(ratio - best) <= 1e-15 && basis[i] < basis[leave])) {
        best = ratio;
        leave = i;
      }
    }
    if (leave == m) break;  // unbounded direction cannot occur in phase 1

    const double pivot = at(leave, enter);
    for (std::size_t j = 0; j < cols; ++j) at(leave, j) /= pivot;
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const double f = at(i, enter);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < cols; ++j) at(i, j) -= f * at(leave, j);
    }
    basis[leave] = enter;
  }

  result.x.assign(k, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < k) result.x[basis[i]] = std::max(0.0, at(i, cols - 1));
  }
  result.infeasibility = std::max(0.0, -at(m, cols - 1));
  result.feasible = result.infeasibility <= tol;
  return result;
}

}  // namespace coarse::detail
