#include <doctest.h>

#include <cmath>

#include "coarse/cfactor.hpp"
#include "coarse/errors.hpp"
#include "coarse/likelihood.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace coarse;

namespace {

CoarseSet set_of(const ObservedSample& s, Mask m) { return CoarseSet(s.world(), m); }

// a covering support for the sample, chosen at random
Mask random_cover(fixtures::Rng& rng, const ObservedSample& s) {
  const Mask full = s.world()->full_mask();
  for (;;) {
    const Mask v = static_cast<Mask>(std::uniform_int_distribution<Mask>(1, full)(rng));
    if (!s.first_uncovered(v)) return v;
  }
}

}  // namespace

TEST_CASE("reference c-factors on the three-world sample") {
  const auto s = fixtures::sample_s1();
  const auto full = c_wcar(set_of(s, 0b111), s);
  CHECK(full.value() == doctest::Approx(1.0 / 27).epsilon(1e-10));
  CHECK(full.converged);
  CHECK(full.kkt_residual < 1e-9);
  for (const auto& [u, l] : full.argmax) CHECK(l == doctest::Approx(1.0 / 3).epsilon(1e-9));

  CHECK(c_wcar(set_of(s, 0b010), s).value() == doctest::Approx(1.0 / 27).epsilon(1e-10));
  const auto outer = c_wcar(set_of(s, 0b101), s);
  CHECK(outer.value() == doctest::Approx(4.0 / 27).epsilon(1e-10));
  CHECK(outer.argmax.at(0b111) == doctest::Approx(1.0 / 3).epsilon(1e-8));
  CHECK(outer.argmax.at(0b011) == doctest::Approx(2.0 / 3).epsilon(1e-8));

  // with every world constraining the s-car factor equals the full-support one
  CHECK(c_scar(s).value() == doctest::Approx(1.0 / 27).epsilon(1e-10));
}

TEST_CASE("reference c-factors on the paired-binary sample") {
  const auto s = fixtures::sample_s2();
  CHECK(c_wcar(set_of(s, 0b1001), s).value() == doctest::Approx(1.0 / 2916).epsilon(1e-10));
  const double expected = 7 * std::log(7.0 / 13) + 6 * std::log(6.0 / 13);
  CHECK(c_scar(s).log_value == doctest::Approx(expected).epsilon(1e-10));
  CHECK(c_wcar(set_of(s, 0b1111), s).log_value == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("binding classes") {
  const auto s = fixtures::sample_s1();
  const auto full = c_wcar(set_of(s, 0b111), s);
  CHECK(full.binding == std::vector<Binding>{Binding::Slack, Binding::Tight, Binding::Slack});
  const auto mid = c_wcar(set_of(s, 0b010), s);
  CHECK(mid.binding == std::vector<Binding>{Binding::Unconstrained, Binding::Tight, Binding::Unconstrained});

  // every set meeting {w2} only in w2 is observed, so its row must sum to one
  const auto w = fixtures::world3();
  const ObservedSample all(w, std::map<Mask, std::uint64_t>{{0b010, 1}, {0b011, 1}, {0b110, 1}, {0b111, 1}});
  const auto forced = c_wcar(CoarseSet(w, 0b010), all);
  CHECK(forced.binding[1] == Binding::Forced);
  CHECK(forced.value() == doctest::Approx(1.0 / 256).epsilon(1e-10));
  CHECK(to_string(Binding::Forced) == "forced");
}

TEST_CASE("uncovered sets give minus infinity") {
  const auto s = fixtures::sample_s1();
  const auto r = c_wcar(set_of(s, 0b001), s);
  CHECK(r.log_value == kNegInf);
  CHECK(r.value() == 0.0);
  CHECK(r.uncovered == std::vector<Mask>{0b110});
  CHECK_THROWS_AS(c_wcar(CoarseSet(make_world({"a", "b", "c"}), 1), s), InputError);
}

TEST_CASE("c-factor matches a grid search") {
  fixtures::Rng rng(17);
  for (int trial = 0; trial < 60; ++trial) {
    const auto w = make_indexed_world(2 + trial % 2);
    const auto s = fixtures::random_sample(rng, w, 3, 6);
    const Mask v = random_cover(rng, s);
    CAPTURE(v);
    const auto r = c_wcar(CoarseSet(w, v), s);
    const double grid = oracles::grid_log_cfactor(s, v, 2e-3);
    CHECK(r.log_value >= grid - 1e-9);
    CHECK(r.log_value == doctest::Approx(grid).epsilon(1e-5).scale(1));
  }
}

TEST_CASE("projected gradient agrees with the dual iteration") {
  fixtures::Rng rng(23);
  for (int trial = 0; trial < 80; ++trial) {
    const auto w = make_indexed_world(2 + trial % 4);
    const auto s = fixtures::random_sample(rng, w, 5);
    const Mask v = random_cover(rng, s);
    const auto a = c_wcar(CoarseSet(w, v), s);
    CFactorOptions opts;
    opts.force_gradient = true;
    const auto b = c_wcar(CoarseSet(w, v), s, opts);
    CHECK(b.solver == CFactorSolver::ProjectedGradient);
    CHECK(b.converged);
    CHECK(a.log_value == doctest::Approx(b.log_value).epsilon(1e-9).scale(1));
  }
}

TEST_CASE("optimal set values are feasible and satisfy the KKT conditions") {
  fixtures::Rng rng(29);
  for (int trial = 0; trial < 200; ++trial) {
    const auto w = make_indexed_world(1 + trial % 5);
    const auto s = fixtures::random_sample(rng, w, 6);
    const Mask v = random_cover(rng, s);
    const auto r = c_wcar(CoarseSet(w, v), s);
    CHECK(r.converged);
    CHECK(r.kkt_residual < 1e-8);
    for (auto x : mask::members(v)) {
      double row = 0.0;
      for (const auto& [u, l] : r.argmax) {
        if (mask::has(u, x)) row += l;
      }
      CHECK(row <= 1.0 + 1e-12);
    }
    double lv = 0.0;
    for (const auto& [u, c] : s.counts()) lv += static_cast<double>(c) * std::log(r.argmax.at(u));
    CHECK(lv == doctest::Approx(r.log_value).epsilon(1e-12).scale(1));
  }
}

TEST_CASE("shrinking the support never lowers the c-factor") {
  fixtures::Rng rng(41);
  int checked = 0;
  while (checked < 500) {
    const auto w = make_indexed_world(2 + checked % 4);
    const auto s = fixtures::random_sample(rng, w, 5);
    const Mask big = random_cover(rng, s);
    const Mask small = big & static_cast<Mask>(std::uniform_int_distribution<Mask>(0, big)(rng));
    if (small == 0 || s.first_uncovered(small)) continue;
    ++checked;
    const double cs = c_wcar(CoarseSet(w, small), s).log_value;
    const double cb = c_wcar(CoarseSet(w, big), s).log_value;
    CHECK(cs >= cb - 1e-9 * std::max(1.0, std::abs(cb)));
    CHECK(c_scar(s).log_value <= cb + 1e-9 * std::max(1.0, std::abs(cb)));
  }
}

TEST_CASE("profiles within the coarsening classes") {
  const auto s = fixtures::sample_s1();
  const double sup = empirical_sup_logl(s);
  for (int i = 1; i <= 3; ++i) {
    const auto theta = fixtures::reference_pair(i).theta;
    const double w = log_profile(theta, s, CoarseningClass::WeakCar);
    const double sc = log_profile(theta, s, CoarseningClass::StrongCar);
    const double sat = log_profile(theta, s, CoarseningClass::Saturated);
    CHECK(w == doctest::Approx(log_lfv(theta, s) + c_wcar(CoarseSet(theta.world(), theta.support()), s).log_value));
    CHECK(sc == doctest::Approx(log_lfv(theta, s) + c_scar(s).log_value));
    CHECK(sc <= w + 1e-12);
    CHECK(w <= sat + 1e-9);
    CHECK(sat <= sup + 1e-9);
  }
  // distributions under which the data are compatible reach the empirical sup
  CHECK(log_profile(fixtures::reference_pair(1).theta, s, CoarseningClass::Saturated) == doctest::Approx(sup));
  CHECK(log_profile(fixtures::reference_pair(3).theta, s, CoarseningClass::Saturated) == doctest::Approx(sup));
  // a point mass that misses an observed set cannot explain the data
  CHECK(log_profile(CompleteDistribution::point_mass(s.world(), 0), s, CoarseningClass::Saturated) == kNegInf);
}

TEST_CASE("saturated profile on random instances") {
  fixtures::Rng rng(43);
  for (int trial = 0; trial < 100; ++trial) {
    const auto w = make_indexed_world(2 + trial % 3);
    const auto s = fixtures::random_sample(rng, w, 4);
    const auto theta = trial % 2 ? fixtures::random_completion(rng, s) : fixtures::random_theta(rng, w);
    const auto sat = saturated_profile(theta, s);
    const double wcar = log_profile(theta, s, CoarseningClass::WeakCar);
    if (wcar == kNegInf) continue;
    CHECK(sat.value >= wcar - 1e-9 * std::max(1.0, std::abs(wcar)));
    CHECK(sat.value <= empirical_sup_logl(s) + 1e-9);
    if (trial % 2) CHECK(sat.value == doctest::Approx(empirical_sup_logl(s)).epsilon(1e-6));
  }
}
