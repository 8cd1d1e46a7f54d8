#include "coarse/distribution.hpp"

#include <cmath>
#include <set>

#include "coarse/errors.hpp"

namespace coarse {

CompleteDistribution::CompleteDistribution(WorldPtr world, std::vector<double> probs,
                                           double support_threshold)
    : world_(std::move(world)), probs_(std::move(probs)), threshold_(support_threshold) {
  if (!world_) throw InputError("distribution without a world");
  if (probs_.size() != world_->size()) {
    throw InputError("distribution has " + std::to_string(probs_.size()) +
                     " entries but the world has " + std::to_string(world_->size()));
  }
  if (!(threshold_ >= 0.0) || !std::isfinite(threshold_)) {
    throw InputError("support threshold must be a nonnegative real");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    const double p = probs_[i];
    if (!(p >= 0.0 && p <= 1.0)) {
      throw InputError("probability of '" + world_->label(i) + "' is outside [0,1]");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > kStochasticTolerance) {
    throw InputError("probabilities sum to " + std::to_string(total) + ", not 1");
  }
}

CompleteDistribution CompleteDistribution::uniform(WorldPtr world) {
  const std::size_t n = world->size();
  return CompleteDistribution(std::move(world), std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

CompleteDistribution CompleteDistribution::uniform_on(const CoarseSet& support) {
  std::vector<double> p(support.world()->size(), 0.0);
  const double v = 1.0 / static_cast<double>(support.size());
  for (auto w : support.members()) p[w] = v;
  return CompleteDistribution(support.world(), std::move(p));
}

CompleteDistribution CompleteDistribution::point_mass(WorldPtr world, std::size_t w) {
  std::vector<double> p(world->size(), 0.0);
  p.at(w) = 1.0;
  return CompleteDistribution(std::move(world), std::move(p));
}

Mask CompleteDistribution::support() const noexcept {
  Mask m = 0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    if (probs_[i] > threshold_) m |= mask::bit(i);
  }
  return m;
}

double mass(std::span<const double> p, Mask u) noexcept {
  double s = 0.0;
  while (u != 0) {
    s += p[static_cast<std::size_t>(std::countr_zero(u))];
    u &= u - 1;
  }
  return s;
}

double CompleteDistribution::mass(Mask u) const noexcept { return coarse::mass(probs_, u); }

double prob_of_set(const CompleteDistribution& theta, const CoarseSet& u) {
  require_same_world(theta.world(), u.world(), "prob_of_set");
  return std::min(1.0, theta.mass(u.mask()));
}

CoarseningKernel::CoarseningKernel(WorldPtr world, std::vector<Row> rows)
    : world_(std::move(world)), rows_(std::move(rows)) {
  if (!world_) throw InputError("kernel without a world");
  if (rows_.size() != world_->size()) throw InputError("kernel needs one row per world");
  const Mask full = world_->full_mask();
  for (std::size_t w = 0; w < rows_.size(); ++w) {
    double total = 0.0;
    for (auto it = rows_[w].begin(); it != rows_[w].end();) {
      const auto [u, v] = *it;
      if (u == 0 || !mask::subset_of(u, full)) throw InputError("kernel refers to an invalid set");
      if (!mask::has(u, w)) {
        throw InputError("kernel row '" + world_->label(w) + "' contains a set not containing it: {" +
                         format_mask(*world_, u) + "}");
      }
      if (!(v >= 0.0 && v <= 1.0)) {
        throw InputError("kernel entry for '" + world_->label(w) + "' outside [0,1]");
      }
      total += v;
      it = (v == 0.0) ? rows_[w].erase(it) : std::next(it);
    }
    if (std::abs(total - 1.0) > kStochasticTolerance) {
      throw InputError("kernel row '" + world_->label(w) + "' sums to " + std::to_string(total));
    }
  }
}

CoarseningKernel CoarseningKernel::identity(WorldPtr world) {
  std::vector<Row> rows(world->size());
  for (std::size_t w = 0; w < rows.size(); ++w) rows[w][mask::bit(w)] = 1.0;
  return CoarseningKernel(std::move(world), std::move(rows));
}

CoarseningKernel CoarseningKernel::from_set_values(WorldPtr world, const std::map<Mask, double>& values) {
  std::vector<Row> rows(world->size());
  for (const auto& [u, v] : values) {
    for (auto w : mask::members(u)) {
      if (w >= rows.size()) throw InputError("set value refers to an index outside the world");
      rows[w][u] = v;
    }
  }
  return CoarseningKernel(std::move(world), std::move(rows));
}

double CoarseningKernel::value(std::size_t w, Mask u) const {
  const auto& r = rows_.at(w);
  auto it = r.find(u);
  return it == r.end() ? 0.0 : it->second;
}

std::vector<Mask> CoarseningKernel::family() const {
  std::set<Mask> all;
  for (const auto& r : rows_) {
    for (const auto& [u, v] : r) all.insert(u);
  }
  return {all.begin(), all.end()};
}

double joint_obs_prob(const CompleteDistribution& theta, const CoarseningKernel& lambda, Mask u) {
  double s = 0.0;
  for (auto w : mask::members(u)) s += theta[w] * lambda.value(w, u);
  return s;
}

double joint_obs_prob(const CompleteDistribution& theta, const CoarseningKernel& lambda,
                      const CoarseSet& u) {
  require_same_world(theta.world(), lambda.world(), "joint_obs_prob");
  require_same_world(theta.world(), u.world(), "joint_obs_prob");
  return joint_obs_prob(theta, lambda, u.mask());
}

}  // namespace coarse
