#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "coarse/world.hpp"

namespace coarse {

/// A multiset of observed coarse sets. Entries are kept in mask order, which
/// makes every downstream iteration deterministic.
class ObservedSample {
 public:
  /// Zero counts are dropped; at least one positive count is required.
  ObservedSample(WorldPtr world, const std::map<Mask, std::uint64_t>& counts);
  ObservedSample(WorldPtr world, const std::vector<std::pair<CoarseSet, std::uint64_t>>& entries);

  const WorldPtr& world() const noexcept { return world_; }
  std::size_t world_size() const noexcept { return world_->size(); }

  /// N, the number of observations.
  std::uint64_t total() const noexcept { return total_; }
  /// Number of distinct observed sets.
  std::size_t distinct() const noexcept { return counts_.size(); }

  const std::map<Mask, std::uint64_t>& counts() const noexcept { return counts_; }
  std::vector<std::pair<CoarseSet, std::uint64_t>> entries() const;

  std::uint64_t count(Mask u) const;
  bool observed(Mask u) const { return counts_.count(u) != 0; }

  /// Empirical weight m(O_U) = count(U) / N.
  double weight(Mask u) const;

  /// Observed sets containing world w.
  std::vector<Mask> containing(std::size_t w) const;

  /// Union of all observed sets.
  Mask coverage() const noexcept;

  /// First observed set disjoint from v, if any.
  std::optional<Mask> first_uncovered(Mask v) const noexcept;

  /// Every count multiplied by k.
  ObservedSample scaled(std::uint64_t k) const;

  friend bool operator==(const ObservedSample& a, const ObservedSample& b) {
    return same_world(a.world_, b.world_) && a.counts_ == b.counts_;
  }

 private:
  WorldPtr world_;
  std::map<Mask, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

}  // namespace coarse
