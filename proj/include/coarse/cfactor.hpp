#pragma once

#include <map>
#include <string>
#include <vector>

#include "coarse/car.hpp"
#include "coarse/likelihood.hpp"
#include "coarse/sample.hpp"

namespace coarse {

/// Status of the row constraint sum_{observed U containing w} lambda_U <= 1.
enum class Binding {
  Unconstrained,  ///< w outside the support; its row is free
  Slack,          ///< strict inequality; an unobserved set absorbs the rest
  Tight,          ///< equality at the optimum, slack set available
  Forced,         ///< no unobserved set meets the support only in w
};

std::string to_string(Binding b);

enum class CFactorSolver { DualCoordinate, ProjectedGradient };

/// max over admissible coarsening parameters of prod_i lambda_{U_i}, in logs.
struct CFactorResult {
  LogLikelihood log_value = kNegInf;
  /// Optimal lambda_U per observed set (sets disjoint from the support are absent).
  std::map<Mask, double> argmax;
  /// Per world.
  std::vector<Binding> binding;
  /// Observed sets disjoint from the support; non-empty means log_value = -inf.
  std::vector<Mask> uncovered;
  /// Max over constrained worlds of the KKT violation (primal infeasibility,
  /// complementary slackness, dual sign).
  double kkt_residual = 0.0;
  std::size_t iterations = 0;
  CFactorSolver solver = CFactorSolver::DualCoordinate;
  bool converged = false;

  double value() const;
};

struct CFactorOptions {
  double tolerance = 1e-12;
  std::size_t max_sweeps = 100000;
  /// Run the projected-gradient path even if the dual iteration converges.
  bool force_gradient = false;
};

/// c_{w-car}(V, sample): rows of worlds in V constrain the shared set values.
CFactorResult c_wcar(const CoarseSet& support, const ObservedSample& sample, const CFactorOptions& opts = {});

/// c_{s-car}(sample): every world constrains; independent of theta.
CFactorResult c_scar(const ObservedSample& sample, const CFactorOptions& opts = {});

/// Profile log-likelihood max_lambda log L_OD(theta, lambda) within a class.
/// The saturated class runs an EM ascent over lambda started from the w-car
/// optimum.
LogLikelihood log_profile(const CompleteDistribution& theta, const ObservedSample& sample,
                          CoarseningClass coarsening);

struct SaturatedProfile {
  LogLikelihood value = kNegInf;
  std::size_t iterations = 0;
  bool converged = false;
};

SaturatedProfile saturated_profile(const CompleteDistribution& theta, const ObservedSample& sample,
                                   double tol = 1e-12, std::size_t max_iter = 200000);

}  // namespace coarse
