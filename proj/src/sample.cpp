#include "coarse/sample.hpp"

#include "coarse/errors.hpp"

namespace coarse {

ObservedSample::ObservedSample(WorldPtr world, const std::map<Mask, std::uint64_t>& counts)
    : world_(std::move(world)) {
  if (!world_) throw InputError("sample without a world");
  for (const auto& [u, c] : counts) {
    if (c == 0) continue;
    CoarseSet check(world_, u);  // validates the mask
    counts_.emplace(check.mask(), c);
    total_ += c;
  }
  if (total_ == 0) throw InputError("sample must contain at least one observation");
}

namespace {

std::map<Mask, std::uint64_t> collect(const WorldPtr& world,
                                      const std::vector<std::pair<CoarseSet, std::uint64_t>>& entries) {
  std::map<Mask, std::uint64_t> out;
  for (const auto& [set, c] : entries) {
    require_same_world(world, set.world(), "ObservedSample");
    out[set.mask()] += c;
  }
  return out;
}

}  // namespace

ObservedSample::ObservedSample(WorldPtr world,
                               const std::vector<std::pair<CoarseSet, std::uint64_t>>& entries)
    : ObservedSample(world, collect(world, entries)) {}

std::vector<std::pair<CoarseSet, std::uint64_t>> ObservedSample::entries() const {
  std::vector<std::pair<CoarseSet, std::uint64_t>> out;
  out.reserve(counts_.size());
  for (const auto& [u, c] : counts_) out.emplace_back(CoarseSet(world_, u), c);
  return out;
}

std::uint64_t ObservedSample::count(Mask u) const {
  auto it = counts_.find(u);
  return it == counts_.end() ? 0 : it->second;
}

double ObservedSample::weight(Mask u) const {
  return static_cast<double>(count(u)) / static_cast<double>(total_);
}

std::vector<Mask> ObservedSample::containing(std::size_t w) const {
  std::vector<Mask> out;
  for (const auto& [u, c] : counts_) {
    if (mask::has(u, w)) out.push_back(u);
  }
  return out;
}

Mask ObservedSample::coverage() const noexcept {
  Mask m = 0;
  for (const auto& [u, c] : counts_) m |= u;
  return m;
}

std::optional<Mask> ObservedSample::first_uncovered(Mask v) const noexcept {
  for (const auto& [u, c] : counts_) {
    if ((u & v) == 0) return u;
  }
  return std::nullopt;
}

ObservedSample ObservedSample::scaled(std::uint64_t k) const {
  std::map<Mask, std::uint64_t> out;
  for (const auto& [u, c] : counts_) out.emplace(u, c * k);
  return ObservedSample(world_, out);
}

}  // namespace coarse
