#include "coarse/world.hpp"

#include <algorithm>

#include "coarse/errors.hpp"

namespace coarse {

namespace mask {

std::vector<std::size_t> members(Mask m) {
  std::vector<std::size_t> out;
  out.reserve(size(m));
  while (m != 0) {
    out.push_back(static_cast<std::size_t>(std::countr_zero(m)));
    m &= m - 1;
  }
  return out;
}

bool lex_less(Mask a, Mask b) noexcept {
  while (a != 0 && b != 0) {
    const int ia = std::countr_zero(a);
    const int ib = std::countr_zero(b);
    if (ia != ib) return ia < ib;
    a &= a - 1;
    b &= b - 1;
  }
  return a == 0 && b != 0;
}

}  // namespace mask

World::World(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) throw InputError("world must contain at least one element");
  if (labels_.size() > kMaxWorlds) {
    throw InputError("world has " + std::to_string(labels_.size()) +
                     " elements; at most " + std::to_string(kMaxWorlds) + " are supported");
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const auto& l = labels_[i];
    if (l.empty()) throw InputError("world labels must be non-empty");
    if (l.find_first_of(",| \t\r\n#") != std::string::npos) {
      throw InputError("world label '" + l + "' contains a reserved character");
    }
    if (!index_.emplace(l, i).second) throw InputError("duplicate world label '" + l + "'");
  }
}

std::optional<std::size_t> World::find(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t World::index(std::string_view label) const {
  if (auto i = find(label)) return *i;
  throw InputError("unknown world label '" + std::string(label) + "'");
}

WorldPtr make_world(std::vector<std::string> labels) {
  return std::make_shared<const World>(std::move(labels));
}

WorldPtr make_indexed_world(std::size_t n, std::string_view prefix) {
  std::vector<std::string> labels;
  for (std::size_t i = 1; i <= n; ++i) labels.push_back(std::string(prefix) + std::to_string(i));
  return make_world(std::move(labels));
}

bool same_world(const WorldPtr& a, const WorldPtr& b) noexcept {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

void require_same_world(const WorldPtr& a, const WorldPtr& b, std::string_view context) {
  if (!same_world(a, b)) {
    throw InputError(std::string(context) + ": arguments refer to different worlds");
  }
}

CoarseSet::CoarseSet(WorldPtr world, Mask bits) : world_(std::move(world)), mask_(bits) {
  if (!world_) throw InputError("coarse set without a world");
  if (mask_ == 0) throw InputError("coarse sets must be nonempty");
  if (!mask::subset_of(mask_, world_->full_mask())) {
    throw InputError("coarse set refers to indices outside the world");
  }
}

CoarseSet CoarseSet::of(WorldPtr world, std::initializer_list<std::size_t> indices) {
  Mask m = 0;
  const std::size_t n = world ? world->size() : 0;
  for (auto i : indices) {
    if (i >= n) throw InputError("world index " + std::to_string(i) + " out of range");
    m |= mask::bit(i);
  }
  return CoarseSet(std::move(world), m);
}

CoarseSet CoarseSet::full(WorldPtr world) {
  const Mask m = world->full_mask();
  return CoarseSet(std::move(world), m);
}

CoarseSet CoarseSet::parse(WorldPtr world, std::string_view text, char sep) {
  Mask m = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(sep, start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view token = text.substr(start, end - start);
    while (!token.empty() && (token.front() == ' ' || token.front() == '\t')) token.remove_prefix(1);
    while (!token.empty() && (token.back() == ' ' || token.back() == '\t')) token.remove_suffix(1);
    if (token.empty()) throw InputError("empty label in set '" + std::string(text) + "'");
    const std::size_t i = world->index(token);
    if (mask::has(m, i)) {
      throw InputError("label '" + std::string(token) + "' repeated in set '" + std::string(text) + "'");
    }
    m |= mask::bit(i);
    start = end + 1;
  }
  return CoarseSet(std::move(world), m);
}

std::string format_mask(const World& world, Mask m, std::string_view sep) {
  std::string out;
  for (auto i : mask::members(m)) {
    if (!out.empty()) out += sep;
    out += world.label(i);
  }
  return out;
}

std::string CoarseSet::key() const { return format_mask(*world_, mask_, "|"); }

std::string CoarseSet::to_string() const { return "{" + format_mask(*world_, mask_, ",") + "}"; }

}  // namespace coarse
