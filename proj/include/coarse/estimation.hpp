#pragma once

#include <optional>
#include <string>
#include <vector>

#include "coarse/car.hpp"
#include "coarse/cfactor.hpp"
#include "coarse/model.hpp"

namespace coarse {

struct FitResult {
  CompleteDistribution theta;
  /// Model parameters; for saturated fits the probability vector itself.
  std::vector<double> params;
  /// The maximized objective: log_fv for face-value fits, log_fv + log_c for
  /// profile fits.
  LogLikelihood log_likelihood = kNegInf;
  LogLikelihood log_fv = kNegInf;
  /// c-factor added to log_fv (0 for face-value fits).
  LogLikelihood log_c = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  /// Support of theta.
  CoarseSet stratum;
  /// Stationarity residual at the returned point: for probability-vector fits
  /// max over supported w of |sum_{U containing w} m(U) / P_theta(U) - 1|,
  /// for parametric fits the projected gradient of log_fv divided by N.
  double residual = 0.0;
  /// log_fv at the start and after every accepted step (EM fits only).
  std::vector<double> trace;
};

struct EmOptions {
  double tolerance = 1e-10;
  std::size_t max_iterations = 10000;
  /// Limit probabilities below this are set to zero when that does not lower
  /// the likelihood.
  double leak_threshold = 1e-9;
  /// Newton refinement on the final face.
  bool polish = true;
};

/// EM for the face-value likelihood restricted to distributions supported in v:
/// p'_w = sum_U m(U) p_w [w in U] / P_theta(U). Starts from `init` (restricted
/// to v and renormalized) or from the uniform distribution on v. Throws
/// InputError when an observed set misses v.
FitResult em_fv(const ObservedSample& sample, const CoarseSet& v,
                const std::optional<CompleteDistribution>& init = std::nullopt, const EmOptions& opts = {});

/// Global face-value maximum over the whole simplex.
FitResult mle_fv_saturated(const ObservedSample& sample, const EmOptions& opts = {});

/// Inclusion-minimal sets of worlds meeting every observed set, ordered by
/// size and then lexicographically. Exhaustive; n <= 12 and at most 64
/// distinct observed sets.
std::vector<CoarseSet> minimal_hitting_sets(const ObservedSample& sample);

/// Local maxima of the w-car profile likelihood, one EM run per candidate
/// support. Default candidates are the minimal hitting sets together with W.
/// Results are deduplicated and sorted by value (descending), support size,
/// then support lexicographically.
std::vector<FitResult> profile_wcar_maxima(const ObservedSample& sample,
                                           const std::optional<std::vector<CoarseSet>>& supports = std::nullopt,
                                           const EmOptions& opts = {});

/// Face-value maximum over a built-in model, or over one stratum of it.
/// Paired-binary fits scan a grid with `grid_steps` points per axis, refine by
/// coordinate shrink search and finish with Newton steps.
FitResult mle_fv_parametric(const CompleteDataModel& model, const ObservedSample& sample,
                            std::size_t grid_steps = 201, const std::optional<Stratum>& stratum = std::nullopt);

struct StratumRow {
  Stratum stratum;
  /// Face-value maximizer over the closure of the stratum; absent when some
  /// observed set misses the stratum support.
  std::optional<FitResult> fit;
  LogLikelihood log_fv = kNegInf;
  LogLikelihood log_c = kNegInf;
  LogLikelihood log_profile = kNegInf;
  /// False when the face-value supremum is approached only at the stratum's
  /// boundary, i.e. from a point belonging to another stratum.
  bool attained = false;
};

struct ProfileTable {
  std::vector<StratumRow> rows;
  /// Index of the row holding the overall w-car profile maximum; absent if
  /// no row attains a finite value.
  std::optional<std::size_t> best;
};

/// Maximizes the w-car profile likelihood stratum by stratum: within each
/// support the c-factor is constant, so the profile is log_fv plus c_wcar(V).
ProfileTable profile_wcar_parametric(const CompleteDataModel& model, const ObservedSample& sample,
                                     std::size_t grid_steps = 201);

struct LrtResult {
  /// 2 (sup_saturated - sup_scar), never negative.
  double statistic = 0.0;
  LogLikelihood sup_saturated = kNegInf;
  LogLikelihood sup_scar = kNegInf;
  LogLikelihood log_c_scar = kNegInf;
  /// The face-value fit achieving the s-car supremum.
  std::optional<FitResult> fit;
};

/// Likelihood-ratio statistic for s-car under `model` against the saturated
/// coarse data model. Reports the statistic only.
LrtResult lrt_scar(const CompleteDataModel& model, const ObservedSample& sample);

struct HullResult {
  /// Distinct completions in order of first appearance over orderings
  /// enumerated lexicographically. Orderings that complete every set
  /// identically yield one point, so there may be fewer than n! extremes.
  std::vector<CompleteDistribution> extremes;
  std::size_t orderings_tried = 0;
};

/// For every ordering of W, completes each observed set to its first member
/// and records the empirical distribution. n <= 9.
HullResult dempster_extremes(const ObservedSample& sample);

}  // namespace coarse
