#pragma once

#include <vector>

namespace coarse::detail {

struct FeasibilityResult {
  bool feasible = false;
  /// A nonnegative solution when feasible (otherwise the phase-1 optimum).
  std::vector<double> x;
  /// Sum of artificial variables at the phase-1 optimum.
  double infeasibility = 0.0;
};

/// Decides whether {x >= 0 : A x = b} is nonempty with a dense phase-1
/// simplex (Bland's rule). `a` is row-major, one inner vector per constraint.
FeasibilityResult find_nonnegative_solution(const std::vector<std::vector<double>>& a,
                                            const std::vector<double>& b, double tol);

}  // namespace coarse::detail
