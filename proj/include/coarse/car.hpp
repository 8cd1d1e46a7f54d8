#pragma once

#include <optional>
#include <string>
#include <vector>

#include "coarse/distribution.hpp"
#include "coarse/model.hpp"
#include "coarse/sample.hpp"

namespace coarse {

inline constexpr double kDefaultTolerance = 1e-9;

/// One witness against a car-type condition. For pairwise conditions
/// (w-car, s-car) `other` is the second world and the values are the two
/// lambda entries; for per-world conditions `other` is empty and the values
/// are the two sides of the violated identity.
struct Violation {
  Mask set = 0;
  std::size_t world = 0;
  std::optional<std::size_t> other;
  double value = 0.0;
  double other_value = 0.0;
};

struct CarReport {
  bool holds = true;
  std::vector<Violation> violations;
  /// Observed-position sets whose common value is undefined because
  /// P_theta(U) = 0; reported, never checked.
  std::vector<Mask> undefined_sets;

  /// Distinct sets that carry at least one violation, in mask order.
  std::vector<Mask> violated_sets() const;
};

/// Weak car: lambda_{w,U} = lambda_{w',U} for all supported w, w' in U.
CarReport is_wcar(const CompleteDistribution& theta, const CoarseningKernel& lambda,
                  double tol = kDefaultTolerance);

/// Strong car: lambda_{w,U} = lambda_{w',U} for all w, w' in U.
CarReport is_scar(const CoarseningKernel& lambda, double tol = kDefaultTolerance);

/// Fair evidence: P(w | O_U) = P_theta(w | U) whenever P(O_U) > 0.
CarReport fair_evidence(const CompleteDistribution& theta, const CoarseningKernel& lambda,
                        double tol = kDefaultTolerance);

/// For supported w in U: P(O_U | w) * P_theta(U) = P(O_U).
CarReport observation_rate_condition(const CompleteDistribution& theta, const CoarseningKernel& lambda,
                                     double tol = kDefaultTolerance);

struct Compatibility {
  bool compatible = false;
  /// Kernel reproducing m exactly (up to tol) when compatible.
  std::optional<CoarseningKernel> witness;
  /// When incompatible: a set A of worlds with sum_{U subset of A} m(U) > P_theta(A).
  Mask hall_set = 0;
  double hall_excess = 0.0;
  /// 1 - max flow, i.e. the mass that cannot be routed.
  double deficit = 0.0;
};

/// m ~ P_theta, decided as a transportation problem: observed mass m(U) is
/// routed to members of U, world w absorbing exactly p_w.
Compatibility is_compatible(const ObservedSample& m, const CompleteDistribution& theta,
                            double tol = kDefaultTolerance);

struct WcarCompatibility {
  bool compatible = false;
  /// sum over observed U containing w of m(U) / P_theta(U); sets of
  /// probability zero are skipped here and listed in `null_observations`.
  std::vector<double> world_sums;
  std::vector<Mask> null_observations;
  /// max over supported w of |world_sums[w] - 1|.
  double residual = 0.0;
};

WcarCompatibility is_wcar_compatible(const ObservedSample& m, const CompleteDistribution& theta,
                                     double tol = kDefaultTolerance);

enum class ScarMethod { Auto, ClosedForm, LinearProgram };

struct ScarCompatibility {
  bool compatible = false;
  std::optional<CoarseningKernel> witness;
  std::vector<double> world_sums;
  ScarMethod method = ScarMethod::ClosedForm;
};

/// m ~_{s-car} P_theta. The closed form checks that observed sets have
/// positive probability, supported worlds have sums equal to one and the
/// others at most one; the remainder of an unsupported world z goes to {z},
/// which is never observed when the first condition holds. The linear-program
/// route solves the feasibility problem over all 2^n - 1 set values and needs
/// n <= 12.
ScarCompatibility is_scar_compatible(const ObservedSample& m, const CompleteDistribution& theta,
                                     double tol = kDefaultTolerance,
                                     ScarMethod method = ScarMethod::Auto);

struct ScarExtension {
  std::optional<CoarseningKernel> kernel;
  /// Set when no extension exists: an unsupported world whose determined set
  /// values already sum past one.
  std::optional<std::size_t> blocking_world;
  double required_sum = 0.0;
};

/// Re-chooses the rows of unsupported worlds so that lambda becomes s-car
/// while supported rows stay untouched. Requires is_wcar(theta, lambda).
ScarExtension extend_wcar_to_scar(const CompleteDistribution& theta, const CoarseningKernel& lambda,
                                  double tol = kDefaultTolerance);

enum class CoarseningClass { Saturated, WeakCar, StrongCar };

std::string to_string(CoarseningClass c);
CoarseningClass parse_coarsening_class(const std::string& text);

/// Parameter distinctness of Sigma_class(Theta) for a built-in model.
bool classify_pd(CoarseningClass coarsening, const CompleteDataModel& model);

}  // namespace coarse
