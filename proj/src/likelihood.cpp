#include "coarse/likelihood.hpp"

#include <cmath>

namespace coarse {

namespace {

LogLikelihood weighted_log(double count, double prob) {
  if (prob <= 0.0) return kNegInf;
  return count * std::log(std::min(prob, 1.0));
}

}  // namespace

LogLikelihood log_lfv(std::span<const double> p, const ObservedSample& sample) {
  LogLikelihood total = 0.0;
  for (const auto& [u, c] : sample.counts()) {
    total += weighted_log(static_cast<double>(c), mass(p, u));
    if (total == kNegInf) return kNegInf;
  }
  return total;
}

LogLikelihood log_lfv(const CompleteDistribution& theta, const ObservedSample& sample) {
  require_same_world(theta.world(), sample.world(), "log_lfv");
  return log_lfv(theta.probs(), sample);
}

LogLikelihood log_lod(const CompleteDistribution& theta, const CoarseningKernel& lambda,
                      const ObservedSample& sample) {
  require_same_world(theta.world(), sample.world(), "log_lod");
  require_same_world(lambda.world(), sample.world(), "log_lod");
  LogLikelihood total = 0.0;
  for (const auto& [u, c] : sample.counts()) {
    total += weighted_log(static_cast<double>(c), joint_obs_prob(theta, lambda, u));
    if (total == kNegInf) return kNegInf;
  }
  return total;
}

LogLikelihood empirical_sup_logl(const ObservedSample& sample) {
  const double n = static_cast<double>(sample.total());
  LogLikelihood total = 0.0;
  for (const auto& [u, c] : sample.counts()) {
    const double cd = static_cast<double>(c);
    total += cd * std::log(cd / n);
  }
  return total;
}

}  // namespace coarse
