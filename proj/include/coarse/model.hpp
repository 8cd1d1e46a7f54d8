#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "coarse/distribution.hpp"
#include "coarse/sample.hpp"

namespace coarse {

enum class ModelKind { Saturated, FixedSupport, PairedBinary };

/// One coordinate of a stratum's parameter region: either pinned to a value
/// (lo == hi) or ranging over the open interval (lo, hi).
struct ParamRange {
  double lo = 0.0;
  double hi = 1.0;

  static ParamRange fixed(double v) { return {v, v}; }
  static ParamRange open(double lo = 0.0, double hi = 1.0) { return {lo, hi}; }
  bool is_fixed() const noexcept { return lo == hi; }
  bool contains(double x) const noexcept { return is_fixed() ? x == lo : (x > lo && x < hi); }
};

/// Parameters whose distributions all share the support `support`.
struct Stratum {
  CoarseSet support;
  std::vector<ParamRange> region;
  std::string description;
};

/// Built-in complete-data families.
///
///  - Saturated: parameters are the full probability vector (n entries summing
///    to one, n - 1 free).
///  - FixedSupport(V): |V| probabilities placed on V in world order.
///  - PairedBinary: (a, b) in [0,1]^2 over the four worlds (AB, AB~, A~B, A~B~),
///    P = (ab, a(1-b), (1-a)(1-b), (1-a)b).
class CompleteDataModel {
 public:
  static CompleteDataModel saturated(WorldPtr world);
  static CompleteDataModel fixed_support(const CoarseSet& v);
  static CompleteDataModel paired_binary(WorldPtr world);

  ModelKind kind() const noexcept { return kind_; }
  const WorldPtr& world() const noexcept { return world_; }
  /// Number of free parameters.
  std::size_t param_dim() const noexcept;
  /// Length of the parameter vector accepted by to_distribution.
  std::size_t param_count() const noexcept;
  /// Only meaningful for FixedSupport.
  Mask fixed_mask() const noexcept { return fixed_; }

  CompleteDistribution to_distribution(std::span<const double> params) const;
  std::vector<Stratum> support_strata() const;

  /// Uniform-like interior point of the parameter space.
  std::vector<double> default_params() const;

  std::string name() const;

 private:
  CompleteDataModel(ModelKind kind, WorldPtr world, Mask fixed)
      : kind_(kind), world_(std::move(world)), fixed_(fixed) {}

  ModelKind kind_;
  WorldPtr world_;
  Mask fixed_ = 0;
};

CompleteDistribution model_to_distribution(const CompleteDataModel& model,
                                           std::span<const double> params);

std::vector<Stratum> support_strata(const CompleteDataModel& model);

/// Draws N pairs (w, U) with w ~ P_theta and U ~ lambda_{w,.}, keeping U.
ObservedSample sample_coarse(const CompleteDistribution& theta, const CoarseningKernel& lambda,
                             std::uint64_t n, std::uint64_t seed);

using Rng = std::mt19937_64;

/// Derives an independent generator from `parent`.
Rng split_rng(Rng& parent);

}  // namespace coarse
