#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "coarse/distribution.hpp"
#include "coarse/model.hpp"
#include "coarse/sample.hpp"

namespace fixtures {

using coarse::CoarseningKernel;
using coarse::CompleteDistribution;
using coarse::Mask;
using coarse::ObservedSample;
using coarse::WorldPtr;

/// w1, w2, w3.
WorldPtr world3();

/// The three (theta, lambda) pairs of the running three-world example.
struct ReferencePair {
  CompleteDistribution theta;
  CoarseningKernel lambda;
};
ReferencePair reference_pair(int i);

/// One observation each of {w1,w2}, {w2,w3}, {w1,w2,w3}.
ObservedSample sample_s1();

/// Worlds AB, AB~, A~B, A~B~ (indices 0..3) and the counts 6 x {AB,AB~},
/// 3 x {AB,A~B}, 3 x {AB~,A~B~}, 1 x {A~B~}.
WorldPtr world_pairs();
ObservedSample sample_s2();

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo = 0.0, double hi = 1.0);

/// Random distribution; each world is zero with probability `zero_prob`
/// (at least one world stays positive).
CompleteDistribution random_theta(Rng& rng, const WorldPtr& world, double zero_prob = 0.0);

/// Random kernel. With probability one half the supported rows are built
/// from shared set values (so the kernel is w-car); unsupported rows are
/// arbitrary. With probability `perturb` one supported row is then moved.
CoarseningKernel random_kernel(Rng& rng, const CompleteDistribution& theta, double perturb = 0.3);

/// Random sample of up to `max_sets` distinct non-empty sets.
ObservedSample random_sample(Rng& rng, const WorldPtr& world, std::size_t max_sets, std::uint64_t max_count = 5);

/// Empirical distribution of a completion that maps every observation of U
/// to a uniformly chosen member of U (per observation).
CompleteDistribution random_completion(Rng& rng, const ObservedSample& sample);

}  // namespace fixtures
