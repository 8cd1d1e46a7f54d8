#include "fixtures.hpp"

#include <algorithm>

namespace fixtures {

using coarse::CoarseSet;

WorldPtr world3() { return coarse::make_world({"w1", "w2", "w3"}); }

ReferencePair reference_pair(int i) {
  const auto w = world3();
  const double t = 1.0 / 3.0;
  // sets by mask: {w1}=1 {w2}=2 {w1,w2}=3 {w3}=4 {w1,w3}=5 {w2,w3}=6 W=7
  std::vector<CoarseningKernel::Row> rows;
  std::vector<double> theta;
  switch (i) {
    case 1:
      theta = {0, 1, 0};
      rows = {{{1, t}, {3, t}, {5, 0}, {7, t}}, {{2, 0}, {3, t}, {6, t}, {7, t}}, {{4, t}, {5, 0}, {6, t}, {7, t}}};
      break;
    case 2:
      theta = {0.5, 0, 0.5};
      rows = {{{1, 0}, {3, 2 * t}, {5, 0}, {7, t}},
              {{2, t}, {3, 2 * t}, {6, 0}, {7, 0}},
              {{4, 0}, {5, 0}, {6, 2 * t}, {7, t}}};
      break;
    default:
      theta = {t, t, t};
      rows = {{{1, t}, {3, t}, {5, 0}, {7, t}}, {{2, 0}, {3, t}, {6, t}, {7, t}}, {{4, t}, {5, 0}, {6, t}, {7, t}}};
      break;
  }
  return {CompleteDistribution(w, theta), CoarseningKernel(w, rows)};
}

ObservedSample sample_s1() { return ObservedSample(world3(), std::map<Mask, std::uint64_t>{{3, 1}, {6, 1}, {7, 1}}); }

WorldPtr world_pairs() { return coarse::make_world({"AB", "ABn", "AnB", "AnBn"}); }

ObservedSample sample_s2() {
  return ObservedSample(world_pairs(), std::map<Mask, std::uint64_t>{{0b0011, 6}, {0b0101, 3}, {0b1010, 3}, {0b1000, 1}});
}

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

CompleteDistribution random_theta(Rng& rng, const WorldPtr& world, double zero_prob) {
  const std::size_t n = world->size();
  std::vector<double> p(n);
  std::exponential_distribution<double> expo(1.0);
  for (auto& x : p) x = uniform(rng) < zero_prob ? 0.0 : expo(rng) + 1e-3;
  if (std::all_of(p.begin(), p.end(), [](double x) { return x == 0.0; })) {
    p[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)] = 1.0;
  }
  double s = 0.0;
  for (double x : p) s += x;
  for (auto& x : p) x /= s;
  return CompleteDistribution(world, p);
}

namespace {

CoarseningKernel::Row random_row(Rng& rng, std::size_t w, std::size_t n) {
  std::vector<Mask> sets;
  for (Mask u = 1; u < (Mask{1} << n); ++u) {
    if (coarse::mask::has(u, w) && uniform(rng) < 0.6) sets.push_back(u);
  }
  if (sets.empty()) sets.push_back(coarse::mask::bit(w));
  std::vector<double> v(sets.size());
  double s = 0.0;
  for (auto& x : v) s += x = uniform(rng, 0.05, 1.0);
  CoarseningKernel::Row row;
  for (std::size_t i = 0; i < sets.size(); ++i) row[sets[i]] = v[i] / s;
  return row;
}

}  // namespace

CoarseningKernel random_kernel(Rng& rng, const CompleteDistribution& theta, double perturb) {
  const std::size_t n = theta.size();
  std::vector<CoarseningKernel::Row> rows(n);
  if (uniform(rng) < 0.5) {
    // shared set values on non-singletons, remainder on the private singleton
    const double cap = 1.0 / static_cast<double>(Mask{1} << (n - 1));
    std::map<Mask, double> shared;
    for (Mask u = 1; u < (Mask{1} << n); ++u) {
      if (coarse::mask::size(u) > 1) shared[u] = uniform(rng) < 0.35 ? 0.0 : uniform(rng, 0.0, cap);
    }
    for (std::size_t w = 0; w < n; ++w) {
      if (!theta.supported(w)) {
        rows[w] = random_row(rng, w, n);
        continue;
      }
      double used = 0.0;
      for (const auto& [u, v] : shared) {
        if (coarse::mask::has(u, w) && v > 0.0) {
          rows[w][u] = v;
          used += v;
        }
      }
      rows[w][coarse::mask::bit(w)] = 1.0 - used;
    }
  } else {
    for (std::size_t w = 0; w < n; ++w) rows[w] = random_row(rng, w, n);
  }
  if (uniform(rng) < perturb) {
    std::vector<std::size_t> supported;
    for (std::size_t w = 0; w < n; ++w) {
      if (theta.supported(w)) supported.push_back(w);
    }
    const std::size_t w = supported[std::uniform_int_distribution<std::size_t>(0, supported.size() - 1)(rng)];
    rows[w] = random_row(rng, w, n);
  }
  return CoarseningKernel(theta.world(), rows);
}

ObservedSample random_sample(Rng& rng, const WorldPtr& world, std::size_t max_sets, std::uint64_t max_count) {
  const Mask full = world->full_mask();
  std::uniform_int_distribution<Mask> pick_set(1, full);
  std::uniform_int_distribution<std::size_t> pick_k(1, max_sets);
  std::uniform_int_distribution<std::uint64_t> pick_c(1, max_count);
  std::map<Mask, std::uint64_t> counts;
  const std::size_t k = pick_k(rng);
  for (std::size_t i = 0; i < k; ++i) counts[pick_set(rng)] += pick_c(rng);
  return ObservedSample(world, counts);
}

CompleteDistribution random_completion(Rng& rng, const ObservedSample& sample) {
  std::vector<double> p(sample.world_size(), 0.0);
  for (const auto& [u, c] : sample.counts()) {
    const auto members = coarse::mask::members(u);
    std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
    for (std::uint64_t i = 0; i < c; ++i) p[members[pick(rng)]] += 1.0;
  }
  for (auto& x : p) x /= static_cast<double>(sample.total());
  return CompleteDistribution(sample.world(), p);
}

}  // namespace fixtures
