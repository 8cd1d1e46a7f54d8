#pragma once

#include <map>
#include <span>
#include <vector>

#include "coarse/world.hpp"

namespace coarse {

/// Tolerance for "sums to one" checks on probability vectors and kernel rows.
inline constexpr double kStochasticTolerance = 1e-9;

/// A distribution P_theta on W. Support is {w : p_w > threshold}; with the
/// default threshold 0 only exact zeros are unsupported.
class CompleteDistribution {
 public:
  CompleteDistribution(WorldPtr world, std::vector<double> probs, double support_threshold = 0.0);

  static CompleteDistribution uniform(WorldPtr world);
  static CompleteDistribution uniform_on(const CoarseSet& support);
  static CompleteDistribution point_mass(WorldPtr world, std::size_t w);

  const WorldPtr& world() const noexcept { return world_; }
  std::size_t size() const noexcept { return probs_.size(); }
  const std::vector<double>& probs() const noexcept { return probs_; }
  double operator[](std::size_t w) const { return probs_.at(w); }
  double support_threshold() const noexcept { return threshold_; }

  bool supported(std::size_t w) const { return probs_.at(w) > threshold_; }
  Mask support() const noexcept;

  /// P_theta(U) for a raw mask.
  double mass(Mask u) const noexcept;

 private:
  WorldPtr world_;
  std::vector<double> probs_;
  double threshold_;
};

/// Sum of p over the members of u.
double mass(std::span<const double> p, Mask u) noexcept;

/// P_theta(U).
double prob_of_set(const CompleteDistribution& theta, const CoarseSet& u);

/// Coarsening parameters lambda_{w,U} = P((w,U) | w). Rows are sparse over a
/// declared family of sets; absent entries are zero. Rows are kept for worlds
/// of probability zero as well, so the parameter space does not depend on theta.
class CoarseningKernel {
 public:
  using Row = std::map<Mask, double>;

  CoarseningKernel(WorldPtr world, std::vector<Row> rows);

  /// lambda_{w,{w}} = 1 for every w.
  static CoarseningKernel identity(WorldPtr world);

  /// Builds a kernel from one value per set (lambda_U shared by all members),
  /// which is s-car by construction. Rows must sum to one.
  static CoarseningKernel from_set_values(WorldPtr world, const std::map<Mask, double>& values);

  const WorldPtr& world() const noexcept { return world_; }
  std::size_t size() const noexcept { return rows_.size(); }
  const Row& row(std::size_t w) const { return rows_.at(w); }
  const std::vector<Row>& rows() const noexcept { return rows_; }

  double value(std::size_t w, Mask u) const;

  /// All sets appearing in some row, in mask order.
  std::vector<Mask> family() const;

 private:
  WorldPtr world_;
  std::vector<Row> rows_;
};

/// P_{theta,lambda}(O_U) = sum over w in U of p_w * lambda_{w,U}.
double joint_obs_prob(const CompleteDistribution& theta, const CoarseningKernel& lambda,
                      const CoarseSet& u);
double joint_obs_prob(const CompleteDistribution& theta, const CoarseningKernel& lambda, Mask u);

}  // namespace coarse
