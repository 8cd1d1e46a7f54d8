// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <sstream>
#include <string>

#include "coarse/car.hpp"
#include "coarse/cfactor.hpp"
#include "coarse/estimation.hpp"
#include "coarse/likelihood.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace coarse;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail << "first failure: " << what << "; ";
    pass = pass && ok;
  }
};

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

std::string num(double x) {
  std::ostringstream s;
  s.precision(10);
  s << x;
  return s.str();
}

Mask random_cover(fixtures::Rng& rng, const ObservedSample& s) {
  const Mask full = s.world()->full_mask();
  for (;;) {
    const Mask v = std::uniform_int_distribution<Mask>(1, full)(rng);
    if (!s.first_uncovered(v)) return v;
  }
}

void likelihood_table(Outcome& o) {
  const auto s = fixtures::sample_s1();
  const double fv[3] = {1.0, 0.25, 4.0 / 9};
  const double cw[3] = {1.0 / 27, 4.0 / 27, 1.0 / 27};
  const double cs = 1.0 / 27;
  for (int i = 1; i <= 3; ++i) {
    const auto theta = fixtures::reference_pair(i).theta;
    const double lfv = std::exp(log_lfv(theta, s));
    const double c = c_wcar(CoarseSet(theta.world(), theta.support()), s).value();
    const double pw = std::exp(log_profile(theta, s, CoarseningClass::WeakCar));
    const double ps = std::exp(log_profile(theta, s, CoarseningClass::StrongCar));
    const auto tag = "theta" + std::to_string(i);
    o.require(close(lfv, fv[i - 1], 1e-9), tag + " L_FV " + num(lfv));
    o.require(close(c, cw[i - 1], 1e-9), tag + " c_wcar " + num(c));
    o.require(close(pw, fv[i - 1] * cw[i - 1], 1e-9), tag + " w-car product " + num(pw));
    o.require(close(ps, fv[i - 1] * cs, 1e-9), tag + " s-car product " + num(ps));
  }
  const double c = c_scar(s).value();
  o.require(close(c, cs, 1e-9), "c_scar " + num(c));
  o.detail << "L_FV (1, 1/4, 4/9), c_wcar (1/27, 4/27, 1/27), c_scar " << num(c);
}

void reference_kernel_verdicts(Outcome& o) {
  for (int i = 1; i <= 3; ++i) {
    const auto [theta, lambda] = fixtures::reference_pair(i);
    o.require(is_wcar(theta, lambda).holds, "w-car " + std::to_string(i));
    o.require(is_scar(lambda).holds == (i != 2), "s-car " + std::to_string(i));
  }
  const auto [theta, lambda] = fixtures::reference_pair(2);
  const auto ext = extend_wcar_to_scar(theta, lambda);
  o.require(!ext.kernel.has_value(), "extension must fail");
  o.require(ext.blocking_world == std::optional<std::size_t>{1}, "blocking world w2");
  o.require(close(ext.required_sum, 5.0 / 3, 1e-9), "certificate " + num(ext.required_sum));
  o.detail << "s-car pattern (yes, no, yes), extension blocked at w2 with row sum " << num(ext.required_sum);
}

void equivalence(Outcome& o) {
  fixtures::Rng rng(2024);
  int disagreements = 0, holds = 0;
  const int trials = 1200;
  for (int t = 0; t < trials; ++t) {
    const auto w = make_indexed_world(2 + t % 3);
    const auto theta = fixtures::random_theta(rng, w, 0.25);
    const auto lambda = fixtures::random_kernel(rng, theta);
    const bool a = is_wcar(theta, lambda, 1e-9).holds;
    const bool b = fair_evidence(theta, lambda, 1e-9).holds;
    const bool c = observation_rate_condition(theta, lambda, 1e-9).holds;
    disagreements += (a != b) || (a != c);
    holds += a;
  }
  o.require(disagreements == 0, std::to_string(disagreements) + " disagreements");
  o.detail << trials << " instances, " << holds << " w-car, " << disagreements << " disagreements";
}

void example_maxima(Outcome& o) {
  const auto s = fixtures::sample_s1();
  const auto maxima = profile_wcar_maxima(s);
  o.require(maxima.size() == 2, "expected two maxima, got " + std::to_string(maxima.size()));
  const std::vector<std::vector<double>> expected{{0, 1, 0}, {0.5, 0, 0.5}};
  for (std::size_t k = 0; k < std::min<std::size_t>(2, maxima.size()); ++k) {
    for (std::size_t i = 0; i < 3; ++i) o.require(close(maxima[k].theta[i], expected[k][i], 1e-6), "maximum point");
    o.require(close(maxima[k].log_likelihood, std::log(1.0 / 27), 1e-9), "profile " + num(maxima[k].log_likelihood));
  }
  const auto r3 = is_wcar_compatible(s, fixtures::reference_pair(3).theta);
  o.require(!r3.compatible, "theta3 must fail");
  o.require(close(r3.world_sums[0], 5.0 / 6, 1e-9), "w1 sum " + num(r3.world_sums[0]));
  o.detail << "maxima (0,1,0) and (1/2,0,1/2) at log(1/27); theta3 w1-sum " << num(r3.world_sums[0]);
}

void paired_binary(Outcome& o) {
  const auto s = fixtures::sample_s2();
  const auto model = CompleteDataModel::paired_binary(s.world());
  const auto hat = mle_fv_parametric(model, s);
  o.require(close(hat.params[0], 0.845, 5e-3) && close(hat.params[1], 0.636, 5e-3),
            "FV fit (" + num(hat.params[0]) + ", " + num(hat.params[1]) + ")");
  o.require(hat.residual < 1e-6, "FV residual " + num(hat.residual));

  const auto strata = model.support_strata();
  const auto edge = mle_fv_parametric(model, s, 201, strata[2]);
  o.require(close(edge.params[0], 9.0 / 13, 1e-6), "edge a " + num(edge.params[0]));

  const double cv = c_wcar(CoarseSet(s.world(), 0b1001), s).value();
  const double cw = c_wcar(CoarseSet::full(s.world()), s).value();
  o.require(close(cv, 1.0 / 2916, 1e-9), "c(V) " + num(cv));
  o.require(close(cw, std::pow(7.0 / 13, 7) * std::pow(6.0 / 13, 6), 1e-9), "c(W) " + num(cw));

  const auto table = profile_wcar_parametric(model, s);
  o.require(table.best.has_value(), "profile table has a best row");
  double gap = 0.0;
  if (table.best) {
    const auto& best = table.rows[*table.best];
    o.require(best.fit && close(best.fit->params[0], 9.0 / 13, 1e-6) && best.fit->params[1] == 1.0,
              "w-car argmax is the edge point");
    gap = best.log_profile - log_profile(hat.theta, s, CoarseningClass::WeakCar);
    o.require(close(gap, 0.571, 1e-2), "gap " + num(gap));
  }

  const auto lrt = lrt_scar(model, s);
  o.require(lrt.fit && close(lrt.fit->params[0], hat.params[0], 1e-6) && close(lrt.fit->params[1], hat.params[1], 1e-6),
            "s-car MLE equals the face-value fit");
  o.require(!is_scar_compatible(s, hat.theta).compatible, "theta-hat must not be s-car compatible");
  o.require(lrt.statistic > 0.0, "T " + num(lrt.statistic));
  o.detail << "theta-hat (" << num(hat.params[0]) << ", " << num(hat.params[1]) << "), edge a " << num(edge.params[0])
           << ", c(V) " << num(cv) << ", c(W) " << num(cw) << ", gap " << num(gap) << ", T " << num(lrt.statistic);
}

void hull(Outcome& o) {
  const auto s = fixtures::sample_s1();
  const auto r = dempster_extremes(s);
  const std::vector<std::vector<double>> expected{
      {2.0 / 3, 1.0 / 3, 0}, {2.0 / 3, 0, 1.0 / 3}, {0, 1, 0}, {1.0 / 3, 0, 2.0 / 3}, {0, 1.0 / 3, 2.0 / 3}};
  o.require(r.extremes.size() == 5, std::to_string(r.extremes.size()) + " extremes");
  for (std::size_t k = 0; k < std::min(r.extremes.size(), expected.size()); ++k) {
    for (std::size_t i = 0; i < 3; ++i) o.require(close(r.extremes[k][i], expected[k][i], 1e-12), "extreme " + std::to_string(k));
  }
  fixtures::Rng rng(6);
  int combos = 0, completions = 0;
  for (int t = 0; t < 100; ++t) {
    std::vector<double> mix(3, 0.0), weights(r.extremes.size());
    double total = 0.0;
    for (auto& x : weights) total += (x = fixtures::uniform(rng));
    for (std::size_t k = 0; k < r.extremes.size(); ++k) {
      for (std::size_t i = 0; i < 3; ++i) mix[i] += weights[k] / total * r.extremes[k][i];
    }
    combos += is_compatible(s, CompleteDistribution(s.world(), mix)).compatible;
    completions += is_compatible(s, fixtures::random_completion(rng, s)).compatible;
  }
  o.require(combos == 100, std::to_string(combos) + "/100 combinations");
  o.require(completions == 100, std::to_string(completions) + "/100 completions");
  o.detail << r.extremes.size() << " extremes from " << r.orderings_tried << " orderings, " << combos
           << "/100 combinations and " << completions << "/100 completions compatible";
}

void hall(Outcome& o) {
  fixtures::Rng rng(7);
  int mismatches = 0, compatible = 0;
  const int trials = 600;
  for (int t = 0; t < trials; ++t) {
    const auto w = make_indexed_world(1 + t % 4);
    const auto m = fixtures::random_sample(rng, w, 4);
    const auto theta = t % 2 ? fixtures::random_completion(rng, m) : fixtures::random_theta(rng, w, 0.2);
    const bool flow = is_compatible(m, theta).compatible;
    mismatches += flow != oracles::hall_compatible(m, theta);
    compatible += flow;
  }
  o.require(mismatches == 0, std::to_string(mismatches) + " mismatches");
  o.detail << trials << " instances, " << compatible << " compatible, " << mismatches << " mismatches";
}

void car_is_everything(Outcome& o) {
  fixtures::Rng rng(8);
  int failures = 0;
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const auto w = make_indexed_world(1 + t % 4);
    const auto m = fixtures::random_sample(rng, w, 5);
    failures += !is_scar_compatible(m, mle_fv_saturated(m).theta, 1e-6).compatible;
    worst = std::max(worst, std::abs(lrt_scar(CompleteDataModel::saturated(w), m).statistic));
  }
  o.require(failures == 0, std::to_string(failures) + " incompatible fits");
  o.require(worst <= 1e-6, "max T " + num(worst));
  o.detail << "200 samples, " << failures << " incompatible, max saturated T " << num(worst);
}

void cfactor_oracle(Outcome& o) {
  fixtures::Rng rng(9);
  double worst = 0.0;
  int instances = 0;
  // every covering support of the three-world sample, then random instances
  const auto s1 = fixtures::sample_s1();
  for (Mask v = 1; v < 8; ++v) {
    if (s1.first_uncovered(v)) continue;
    worst = std::max(worst, std::abs(c_wcar(CoarseSet(s1.world(), v), s1).log_value - oracles::grid_log_cfactor(s1, v)));
    ++instances;
  }
  for (int t = 0; t < 40; ++t) {
    const auto w = make_indexed_world(2 + t % 3);
    const auto m = fixtures::random_sample(rng, w, 3, 6);
    const Mask v = random_cover(rng, m);
    worst = std::max(worst, std::abs(c_wcar(CoarseSet(w, v), m).log_value - oracles::grid_log_cfactor(m, v)));
    ++instances;
  }
  o.require(worst <= 1e-5, "max |KKT - grid| " + num(worst));

  int violations = 0, pairs = 0;
  while (pairs < 500) {
    const auto w = make_indexed_world(2 + pairs % 4);
    const auto m = fixtures::random_sample(rng, w, 5);
    const Mask big = random_cover(rng, m);
    const Mask small = big & std::uniform_int_distribution<Mask>(0, big)(rng);
    if (small == 0 || m.first_uncovered(small)) continue;
    ++pairs;
    const double cs = c_wcar(CoarseSet(w, small), m).log_value;
    const double cb = c_wcar(CoarseSet(w, big), m).log_value;
    violations += cs < cb - 1e-9;
  }
  o.require(violations == 0, std::to_string(violations) + " monotonicity violations");
  o.detail << instances << " grid instances, max deviation " << num(worst) << "; " << pairs << " nested pairs, "
           << violations << " violations";
}

void em_properties(Outcome& o) {
  fixtures::Rng rng(10);
  int runs = 0, decreases = 0, converged = 0, bad_residual = 0;
  double worst = 0.0;
  auto inspect = [&](const FitResult& f) {
    ++runs;
    for (std::size_t i = 1; i < f.trace.size(); ++i) {
      if (f.trace[i] < f.trace[i - 1] - 1e-12 * std::max(1.0, std::abs(f.trace[i - 1]))) ++decreases;
    }
    if (f.converged) {
      ++converged;
      worst = std::max(worst, f.residual);
      bad_residual += f.residual > 1e-6;
    }
  };
  for (int t = 0; t < 300; ++t) {
    const auto w = make_indexed_world(2 + t % 4);
    const auto m = fixtures::random_sample(rng, w, 6);
    inspect(em_fv(m, CoarseSet(w, random_cover(rng, m)), fixtures::random_theta(rng, w)));
    if (t % 3 == 0) inspect(mle_fv_saturated(m));
  }
  for (const auto& f : profile_wcar_maxima(fixtures::sample_s2())) inspect(f);
  o.require(decreases == 0, std::to_string(decreases) + " decreasing steps");
  o.require(bad_residual == 0, std::to_string(bad_residual) + " converged fits above 1e-6");
  o.detail << runs << " runs, " << converged << " converged, " << decreases << " decreasing steps, max residual "
           << num(worst);
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"likelihood table", likelihood_table},
      {"reference kernel verdicts", reference_kernel_verdicts},
      {"w-car / fair evidence / observation rate equivalence", equivalence},
      {"w-car profile maxima of the three-world sample", example_maxima},
      {"paired-binary end to end", paired_binary},
      {"extreme completion hull", hull},
      {"flow compatibility vs Hall condition", hall},
      {"car is everything", car_is_everything},
      {"c-factor solver vs grid, monotonicity", cfactor_oracle},
      {"EM ascent and stationarity", em_properties},
  };
  int failed = 0;
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      criteria[k].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    failed += !o.pass;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(), o.detail.str().c_str());
    std::fflush(stdout);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%d of %zu criteria passed in %.1f s\n", static_cast<int>(criteria.size()) - failed, criteria.size(), secs);
  return failed == 0 ? 0 : 1;
}
