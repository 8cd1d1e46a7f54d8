#pragma once

#include <limits>
#include <span>

#include "coarse/distribution.hpp"
#include "coarse/sample.hpp"

namespace coarse {

/// Log-likelihoods live on the extended real line; -infinity marks an observed
/// set of probability zero and is a regular value, not an error.
using LogLikelihood = double;

inline constexpr LogLikelihood kNegInf = -std::numeric_limits<double>::infinity();

/// Face-value log-likelihood: sum_U count(U) log P_theta(U).
LogLikelihood log_lfv(const CompleteDistribution& theta, const ObservedSample& sample);
LogLikelihood log_lfv(std::span<const double> p, const ObservedSample& sample);

/// Observed-data log-likelihood: sum_U count(U) log P_{theta,lambda}(O_U).
LogLikelihood log_lod(const CompleteDistribution& theta, const CoarseningKernel& lambda,
                      const ObservedSample& sample);

/// Supremum of the observed-data log-likelihood over the saturated coarse
/// data model: N sum_U m(U) log m(U).
LogLikelihood empirical_sup_logl(const ObservedSample& sample);

}  // namespace coarse
