#include <algorithm>
#include <numeric>

#include "coarse/errors.hpp"
#include "coarse/estimation.hpp"

namespace coarse {

HullResult dempster_extremes(const ObservedSample& sample) {
  const std::size_t n = sample.world_size();
  if (n > kMaxHullWorlds) {
    throw InputError("the completion hull enumerates n! orderings and supports n <= " +
                     std::to_string(kMaxHullWorlds) + "; use is_compatible to test single points");
  }
  HullResult out;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::size_t> rank(n);
  std::vector<std::vector<std::uint64_t>> seen;
  const double total = static_cast<double>(sample.total());
  do {
    ++out.orderings_tried;
    for (std::size_t i = 0; i < n; ++i) rank[order[i]] = i;
    std::vector<std::uint64_t> counts(n, 0);
    for (const auto& [u, c] : sample.counts()) {
      std::size_t first = n;
      for (auto w : mask::members(u)) {
        if (first == n || rank[w] < rank[first]) first = w;
      }
      counts[first] += c;
    }
    if (std::find(seen.begin(), seen.end(), counts) != seen.end()) continue;
    std::vector<double> p(n);
    for (std::size_t w = 0; w < n; ++w) p[w] = static_cast<double>(counts[w]) / total;
    out.extremes.emplace_back(sample.world(), std::move(p));
    seen.push_back(std::move(counts));
  } while (std::next_permutation(order.begin(), order.end()));
  return out;
}

}  // namespace coarse
