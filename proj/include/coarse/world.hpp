#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace coarse {

/// Subset of world indices; bit i set means w_i is a member.
using Mask = std::uint32_t;

inline constexpr std::size_t kMaxWorlds = 30;
/// Operations that walk every subset of W.
inline constexpr std::size_t kMaxEnumerableWorlds = 20;
/// Orderings of W are enumerated exhaustively by the hull construction.
inline constexpr std::size_t kMaxHullWorlds = 9;

namespace mask {

inline constexpr Mask bit(std::size_t i) noexcept { return Mask{1} << i; }
inline constexpr bool has(Mask m, std::size_t i) noexcept { return (m >> i) & 1u; }
inline constexpr std::size_t size(Mask m) noexcept {
  return static_cast<std::size_t>(std::popcount(m));
}
inline constexpr bool subset_of(Mask a, Mask b) noexcept { return (a & ~b) == 0; }
inline constexpr Mask full(std::size_t n) noexcept {
  return n >= 32 ? ~Mask{0} : (Mask{1} << n) - 1;
}

std::vector<std::size_t> members(Mask m);

/// Lexicographic comparison of the sorted member lists.
bool lex_less(Mask a, Mask b) noexcept;

}  // namespace mask

/// The finite complete-data space W = {w_1, ..., w_n} with a fixed order.
class World {
 public:
  explicit World(std::vector<std::string> labels);

  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::string& label(std::size_t i) const { return labels_.at(i); }

  /// Throws InputError for unknown labels.
  std::size_t index(std::string_view label) const;
  std::optional<std::size_t> find(std::string_view label) const;

  Mask full_mask() const noexcept { return mask::full(size()); }

  bool operator==(const World& other) const { return labels_ == other.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> index_;
};

using WorldPtr = std::shared_ptr<const World>;

WorldPtr make_world(std::vector<std::string> labels);

/// Convenience for fixtures: labels w1..wn.
WorldPtr make_indexed_world(std::size_t n, std::string_view prefix = "w");

bool same_world(const WorldPtr& a, const WorldPtr& b) noexcept;
void require_same_world(const WorldPtr& a, const WorldPtr& b, std::string_view context);

/// A nonempty subset U of W. Used both as an event in W and, in observation
/// position, as the event O_U that U was reported.
class CoarseSet {
 public:
  CoarseSet(WorldPtr world, Mask bits);

  static CoarseSet of(WorldPtr world, std::initializer_list<std::size_t> indices);
  static CoarseSet full(WorldPtr world);
  /// Labels separated by `sep` (whitespace around labels is ignored).
  static CoarseSet parse(WorldPtr world, std::string_view text, char sep = ',');

  Mask mask() const noexcept { return mask_; }
  const WorldPtr& world() const noexcept { return world_; }

  bool contains(std::size_t w) const noexcept { return mask::has(mask_, w); }
  std::size_t size() const noexcept { return mask::size(mask_); }
  std::vector<std::size_t> members() const { return mask::members(mask_); }

  /// Canonical key: member labels in world order joined by '|'.
  std::string key() const;
  /// Human readable "{a,b}".
  std::string to_string() const;

  friend bool operator==(const CoarseSet& a, const CoarseSet& b) noexcept {
    return a.mask_ == b.mask_ && same_world(a.world_, b.world_);
  }
  friend std::strong_ordering operator<=>(const CoarseSet& a, const CoarseSet& b) noexcept {
    return a.mask_ <=> b.mask_;
  }

 private:
  WorldPtr world_;
  Mask mask_;
};

std::string format_mask(const World& world, Mask m, std::string_view sep = ",");

}  // namespace coarse
