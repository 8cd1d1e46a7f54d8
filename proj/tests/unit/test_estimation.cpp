#include <doctest.h>

#include <cmath>

#include "coarse/errors.hpp"
#include "coarse/estimation.hpp"
#include "coarse/likelihood.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace coarse;

namespace {

void check_probs(const CompleteDistribution& d, const std::vector<double>& expected, double eps) {
  REQUIRE(d.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CAPTURE(i);
    CHECK(d[i] == doctest::Approx(expected[i]).epsilon(eps).scale(1));
  }
}

void check_trace(const FitResult& r) {
  for (std::size_t i = 1; i < r.trace.size(); ++i) {
    const double prev = r.trace[i - 1];
    CHECK(r.trace[i] >= prev - 1e-12 * std::max(1.0, std::abs(prev)));
  }
}

}  // namespace

TEST_CASE("face-value EM on the three-world sample") {
  const auto s = fixtures::sample_s1();
  const auto w = s.world();
  const auto full = em_fv(s, CoarseSet::full(w));
  CHECK(full.converged);
  CHECK(full.log_fv == doctest::Approx(0.0).scale(1));
  check_probs(full.theta, {0, 1, 0}, 1e-8);
  CHECK(full.log_fv >= oracles::simplex_grid_fv(s).value - 1e-12);
  check_trace(full);

  const auto outer = em_fv(s, CoarseSet(w, 0b101));
  CHECK(outer.converged);
  CHECK(outer.log_fv == doctest::Approx(std::log(0.25)));
  check_probs(outer.theta, {0.5, 0, 0.5}, 1e-8);
  CHECK(outer.stratum.mask() == 0b101);

  CHECK_THROWS_AS(em_fv(s, CoarseSet(w, 0b001)), InputError);
}

TEST_CASE("face-value EM respects the starting point and the face") {
  const auto s = fixtures::sample_s1();
  const auto w = s.world();
  const auto init = CompleteDistribution(w, {0.7, 0.1, 0.2});
  const auto r = em_fv(s, CoarseSet(w, 0b101), init);
  check_probs(r.theta, {0.5, 0, 0.5}, 1e-8);
  CHECK(r.trace.front() == doctest::Approx(log_lfv(CompleteDistribution(w, {0.7 / 0.9, 0, 0.2 / 0.9}), s)));
  EmOptions opts;
  opts.max_iterations = 1;
  opts.polish = false;
  const auto one = em_fv(s, CoarseSet::full(w), std::nullopt, opts);
  CHECK(one.iterations <= 1);
}

TEST_CASE("face-value EM on random samples") {
  fixtures::Rng rng(53);
  for (int trial = 0; trial < 60; ++trial) {
    const auto w = make_indexed_world(3);
    const auto s = fixtures::random_sample(rng, w, 5);
    const auto r = mle_fv_saturated(s);
    CHECK(r.converged);
    CHECK(r.residual <= 1e-6);
    check_trace(r);
    const auto grid = oracles::simplex_grid_fv(s, 2e-3);
    CHECK(r.log_fv >= grid.value - 1e-9);
    CHECK(r.log_fv == doctest::Approx(grid.value).epsilon(1e-3).scale(1));
  }
}

TEST_CASE("the face-value MLE determines the set probabilities uniquely") {
  fixtures::Rng rng(59);
  for (int sample = 0; sample < 5; ++sample) {
    const auto w = make_indexed_world(4);
    const auto s = fixtures::random_sample(rng, w, 6);
    const auto ref = mle_fv_saturated(s);
    for (int start = 0; start < 20; ++start) {
      const auto r = em_fv(s, CoarseSet::full(w), fixtures::random_theta(rng, w));
      CHECK(r.log_fv == doctest::Approx(ref.log_fv).epsilon(1e-9).scale(1));
      for (const auto& [u, c] : s.counts()) CHECK(r.theta.mass(u) == doctest::Approx(ref.theta.mass(u)).epsilon(1e-5));
    }
  }
}

TEST_CASE("minimal hitting sets") {
  const auto s1 = fixtures::sample_s1();
  const auto h1 = minimal_hitting_sets(s1);
  REQUIRE(h1.size() == 2);
  CHECK(h1[0].mask() == 0b010);
  CHECK(h1[1].mask() == 0b101);

  const auto h2 = minimal_hitting_sets(fixtures::sample_s2());
  REQUIRE(h2.size() == 2);
  CHECK(h2[0].mask() == 0b1001);
  CHECK(h2[1].mask() == 0b1110);

  fixtures::Rng rng(61);
  for (int trial = 0; trial < 100; ++trial) {
    const auto w = make_indexed_world(2 + trial % 4);
    const auto s = fixtures::random_sample(rng, w, 5);
    const auto hs = minimal_hitting_sets(s);
    CHECK_FALSE(hs.empty());
    for (const auto& h : hs) {
      CHECK_FALSE(s.first_uncovered(h.mask()).has_value());
      for (auto x : mask::members(h.mask())) CHECK(s.first_uncovered(h.mask() & ~mask::bit(x)).has_value());
    }
  }
  CHECK_THROWS_AS(minimal_hitting_sets(ObservedSample(make_indexed_world(13), std::map<Mask, std::uint64_t>{{1, 1}})),
                  InputError);
}

TEST_CASE("w-car profile maxima on the three-world sample") {
  const auto s = fixtures::sample_s1();
  const auto maxima = profile_wcar_maxima(s);
  REQUIRE(maxima.size() == 2);
  check_probs(maxima[0].theta, {0, 1, 0}, 1e-7);
  check_probs(maxima[1].theta, {0.5, 0, 0.5}, 1e-7);
  for (const auto& m : maxima) {
    CHECK(m.log_likelihood == doctest::Approx(std::log(1.0 / 27)));
    CHECK(m.log_likelihood == doctest::Approx(m.log_fv + m.log_c));
    CHECK(m.converged);
  }
}

TEST_CASE("w-car profile maxima on the paired-binary sample") {
  const auto s = fixtures::sample_s2();
  const double sup = empirical_sup_logl(s);
  const auto maxima = profile_wcar_maxima(s);
  REQUIRE(maxima.size() == 3);
  check_probs(maxima[0].theta, {9.0 / 13, 0, 0, 4.0 / 13}, 1e-7);
  check_probs(maxima[1].theta, {0.5, 5.0 / 14, 0, 1.0 / 7}, 1e-7);
  check_probs(maxima[2].theta, {0, 60.0 / 91, 3.0 / 13, 10.0 / 91}, 1e-7);
  for (const auto& m : maxima) CHECK(m.log_likelihood == doctest::Approx(sup).epsilon(1e-9));

  // a run from the full support that leaks is reported on its smaller face
  const auto only_full = profile_wcar_maxima(s, std::vector<CoarseSet>{CoarseSet::full(s.world())});
  REQUIRE_FALSE(only_full.empty());
  for (const auto& m : only_full) CHECK(m.stratum.mask() != 0b1111);
}

TEST_CASE("paired-binary face-value fits") {
  const auto s = fixtures::sample_s2();
  const auto model = CompleteDataModel::paired_binary(s.world());
  const auto fit = mle_fv_parametric(model, s);
  CHECK(fit.converged);
  CHECK(fit.params[0] == doctest::Approx(0.845).epsilon(5e-3).scale(1));
  CHECK(fit.params[1] == doctest::Approx(0.636).epsilon(5e-3).scale(1));
  CHECK(fit.log_fv == doctest::Approx(log_lfv(model.to_distribution(fit.params), s)));
  CHECK(fit.residual < 1e-8);

  const auto strata = model.support_strata();
  const auto edge = mle_fv_parametric(model, s, 201, strata[2]);
  CHECK(edge.params[0] == doctest::Approx(9.0 / 13).epsilon(1e-6).scale(1));
  CHECK(edge.params[1] == 1.0);
  CHECK(edge.stratum.mask() == 0b1001);

  const ObservedSample ab(s.world(), std::map<Mask, std::uint64_t>{{0b0001, 4}});
  const auto corner = mle_fv_parametric(model, ab);
  CHECK(corner.params[0] == doctest::Approx(1.0));
  CHECK(corner.params[1] == doctest::Approx(1.0));
  CHECK(corner.log_fv == doctest::Approx(0.0).scale(1));
}

TEST_CASE("parametric fits of the saturated and fixed-support models use EM") {
  const auto s = fixtures::sample_s1();
  const auto sat = mle_fv_parametric(CompleteDataModel::saturated(s.world()), s);
  check_probs(sat.theta, {0, 1, 0}, 1e-8);
  const auto fixed = mle_fv_parametric(CompleteDataModel::fixed_support(CoarseSet(s.world(), 0b101)), s);
  check_probs(fixed.theta, {0.5, 0, 0.5}, 1e-8);
}

TEST_CASE("paired-binary w-car profile table") {
  const auto s = fixtures::sample_s2();
  const auto model = CompleteDataModel::paired_binary(s.world());
  const auto table = profile_wcar_parametric(model, s);
  REQUIRE(table.rows.size() == 9);
  REQUIRE(table.best.has_value());
  const auto& best = table.rows[*table.best];
  CHECK(best.stratum.description == "0<a<1, b=1");
  CHECK(best.attained);
  CHECK(best.log_c == doctest::Approx(std::log(1.0 / 2916)));
  CHECK(best.log_profile == doctest::Approx(best.log_fv + best.log_c));
  const auto& interior = table.rows[0];
  CHECK(interior.attained);
  CHECK(interior.log_fv == doctest::Approx(-7.59379).epsilon(1e-5).scale(1));
  CHECK(best.log_profile > interior.log_profile);
  for (const auto& row : table.rows) {
    if (!row.fit) CHECK(row.log_profile == kNegInf);
  }
}

TEST_CASE("likelihood-ratio statistic for s-car") {
  const auto s = fixtures::sample_s2();
  const auto pb = CompleteDataModel::paired_binary(s.world());
  const auto r = lrt_scar(pb, s);
  CHECK(r.statistic > 0.0);
  CHECK(r.statistic == doctest::Approx(1.12819).epsilon(1e-5).scale(1));
  CHECK(r.sup_saturated == doctest::Approx(empirical_sup_logl(s)));
  CHECK(r.statistic == doctest::Approx(2 * (r.sup_saturated - r.sup_scar)));
  REQUIRE(r.fit.has_value());

  // the saturated model attains the empirical supremum
  const auto s1 = fixtures::sample_s1();
  CHECK(lrt_scar(CompleteDataModel::saturated(s1.world()), s1).statistic == doctest::Approx(0.0).scale(1));
  CHECK(lrt_scar(CompleteDataModel::saturated(s.world()), s).statistic == doctest::Approx(0.0).scale(1));

  for (std::uint64_t k : {2u, 5u}) {
    CHECK(lrt_scar(pb, s.scaled(k)).statistic == doctest::Approx(k * r.statistic).epsilon(1e-7));
  }
}
