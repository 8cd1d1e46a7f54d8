#include "coarse/estimation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "coarse/errors.hpp"

namespace coarse {

namespace {

struct Terms {
  std::vector<Mask> sets;
  std::vector<double> counts;
  double total = 0.0;

  explicit Terms(const ObservedSample& sample) : total(static_cast<double>(sample.total())) {
    for (const auto& [u, c] : sample.counts()) {
      sets.push_back(u);
      counts.push_back(static_cast<double>(c));
    }
  }

  double loglik(const std::vector<double>& p) const {
    double ll = 0.0;
    for (std::size_t j = 0; j < sets.size(); ++j) {
      const double pu = mass(p, sets[j]);
      if (!(pu > 0.0)) return kNegInf;
      ll += counts[j] * std::log(pu);
    }
    return ll;
  }

  // g_w = sum_{U containing w} count(U) / P(U)
  std::vector<double> gradient(const std::vector<double>& p) const {
    std::vector<double> g(p.size(), 0.0);
    for (std::size_t j = 0; j < sets.size(); ++j) {
      const double r = counts[j] / mass(p, sets[j]);
      for (auto w : mask::members(sets[j])) g[w] += r;
    }
    return g;
  }

  bool covers(const std::vector<double>& p) const {
    return std::all_of(sets.begin(), sets.end(), [&](Mask u) { return mass(p, u) > 0.0; });
  }
};

Mask support_of(const std::vector<double>& p) {
  Mask s = 0;
  for (std::size_t w = 0; w < p.size(); ++w) {
    if (p[w] > 0.0) s |= mask::bit(w);
  }
  return s;
}

double stationarity_residual(const Terms& terms, const std::vector<double>& p) {
  if (terms.loglik(p) == kNegInf) return std::numeric_limits<double>::infinity();
  const auto g = terms.gradient(p);
  double r = 0.0;
  for (std::size_t w = 0; w < p.size(); ++w) {
    if (p[w] > 0.0) r = std::max(r, std::abs(g[w] / terms.total - 1.0));
  }
  return r;
}

// Newton steps for max log_fv on the face {p_w > 0}, sum p = 1. Steps are
// taken only when they keep the face and do not lower the likelihood beyond
// rounding.
std::size_t newton_polish(const Terms& terms, std::vector<double>& p, double& ll, std::vector<double>& trace,
                          int max_steps) {
  std::vector<std::size_t> face;
  for (std::size_t w = 0; w < p.size(); ++w) {
    if (p[w] > 0.0) face.push_back(w);
  }
  const auto k = static_cast<Eigen::Index>(face.size());
  if (k < 2) return 0;
  std::vector<Eigen::Index> slot(p.size(), -1);
  for (Eigen::Index i = 0; i < k; ++i) slot[face[i]] = i;

  std::size_t steps = 0;
  for (int it = 0; it < max_steps; ++it) {
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(k + 1, k + 1);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
    for (std::size_t j = 0; j < terms.sets.size(); ++j) {
      const double pu = mass(p, terms.sets[j]);
      std::vector<Eigen::Index> in;
      for (auto w : mask::members(terms.sets[j])) {
        if (slot[w] >= 0) in.push_back(slot[w]);
      }
      const double g = terms.counts[j] / pu;
      const double h = terms.counts[j] / (pu * pu);
      for (auto a : in) {
        rhs(a) -= g;
        for (auto b : in) kkt(a, b) -= h;
      }
    }
    for (Eigen::Index i = 0; i < k; ++i) {
      kkt(i, k) = 1.0;
      kkt(k, i) = 1.0;
    }
    // H d + nu 1 = -g, 1'd = 0
    const Eigen::VectorXd sol = kkt.completeOrthogonalDecomposition().solve(rhs);
    if (!sol.allFinite()) break;
    double t = 1.0;
    bool accepted = false;
    double size = 0.0;
    for (int bt = 0; bt < 60 && !accepted; ++bt, t *= 0.5) {
      std::vector<double> q = p;
      bool inside = true;
      size = 0.0;
      for (Eigen::Index i = 0; i < k; ++i) {
        q[face[i]] += t * sol(i);
        size = std::max(size, std::abs(t * sol(i)));
        if (!(q[face[i]] > 0.0)) inside = false;
      }
      if (!inside) continue;
      const double s = std::accumulate(q.begin(), q.end(), 0.0);
      for (auto& x : q) x /= s;
      const double next = terms.loglik(q);
      // near the optimum likelihood gains drop below rounding; then a smaller
      // stationarity residual decides
      const double noise = 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(ll));
      if (next > ll || (next >= ll - noise && stationarity_residual(terms, q) < stationarity_residual(terms, p))) {
        p = q;
        ll = next;
        trace.push_back(ll);
        accepted = true;
      }
    }
    if (!accepted) break;
    ++steps;
    if (size < 1e-15) break;
  }
  return steps;
}

std::string describe(const WorldPtr& world, Mask m) { return "{" + format_mask(*world, m) + "}"; }

}  // namespace

FitResult em_fv(const ObservedSample& sample, const CoarseSet& v, const std::optional<CompleteDistribution>& init,
                const EmOptions& opts) {
  require_same_world(sample.world(), v.world(), "em_fv");
  const WorldPtr& world = sample.world();
  if (auto miss = sample.first_uncovered(v.mask())) {
    throw InputError("observed set " + describe(world, *miss) + " does not meet the support " + v.to_string());
  }
  const std::size_t n = world->size();
  const Terms terms(sample);

  std::vector<double> p(n, 0.0);
  if (init) {
    require_same_world(world, init->world(), "em_fv initial point");
    double s = 0.0;
    for (auto w : v.members()) s += p[w] = (*init)[w];
    if (!(s > 0.0)) throw InputError("initial point puts no mass on the support " + v.to_string());
    for (auto& x : p) x /= s;
    if (!terms.covers(p)) throw InputError("initial point gives probability zero to an observed set");
  } else {
    for (auto w : v.members()) p[w] = 1.0 / static_cast<double>(v.size());
  }

  double ll = terms.loglik(p);
  std::vector<double> trace{ll};
  std::size_t iter = 0;
  bool criterion = false;
  std::vector<double> next(n);
  for (;;) {
    criterion = false;
    while (iter < opts.max_iterations) {
      ++iter;
      const auto g = terms.gradient(p);
      double change = 0.0;
      for (std::size_t w = 0; w < n; ++w) {
        next[w] = p[w] * g[w] / terms.total;
        change = std::max(change, std::abs(next[w] - p[w]));
      }
      const double s = std::accumulate(next.begin(), next.end(), 0.0);
      for (auto& x : next) x /= s;
      const double ll_next = terms.loglik(next);
      const double rel = std::abs(ll_next - ll) / std::max(1.0, std::abs(ll));
      p = next;
      ll = ll_next;
      trace.push_back(ll);
      if (rel < opts.tolerance && change < opts.tolerance) {
        criterion = true;
        break;
      }
      // EM slows down when much information is missing; Newton steps on the
      // current face speed it up without giving up monotonicity
      if (opts.polish && iter % 50 == 0) newton_polish(terms, p, ll, trace, 3);
    }

    // drop leaking coordinates, then refit on the smaller face
    std::vector<double> q = p;
    bool dropped = false;
    for (std::size_t w = 0; w < n; ++w) {
      if (q[w] > 0.0 && q[w] < opts.leak_threshold) {
        q[w] = 0.0;
        dropped = true;
      }
    }
    if (!dropped || !terms.covers(q)) break;
    const double s = std::accumulate(q.begin(), q.end(), 0.0);
    for (auto& x : q) x /= s;
    const double ll_q = terms.loglik(q);
    if (ll_q < ll - 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(ll))) break;
    p = q;
    ll = ll_q;
    trace.push_back(ll);
    if (iter >= opts.max_iterations) break;
  }

  if (opts.polish) {
    iter += newton_polish(terms, p, ll, trace, 50);
    // Newton steps blocked by the boundary can leave a vanishing coordinate
    // behind; drop it and polish the smaller face
    for (;;) {
      std::vector<double> q = p;
      bool dropped = false;
      for (auto& x : q) {
        if (x > 0.0 && x < opts.leak_threshold) {
          x = 0.0;
          dropped = true;
        }
      }
      if (!dropped || !terms.covers(q)) break;
      const double s = std::accumulate(q.begin(), q.end(), 0.0);
      for (auto& x : q) x /= s;
      const double ll_q = terms.loglik(q);
      if (ll_q < ll - 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(ll))) break;
      p = q;
      ll = ll_q;
      trace.push_back(ll);
      iter += newton_polish(terms, p, ll, trace, 50);
    }
  }

  const double residual = stationarity_residual(terms, p);
  const Mask supp = support_of(p);
  FitResult fit{CompleteDistribution(world, p), p, ll, ll, 0.0, iter, criterion && residual <= 1e-6,
                CoarseSet(world, supp), residual, std::move(trace)};
  return fit;
}

FitResult mle_fv_saturated(const ObservedSample& sample, const EmOptions& opts) {
  return em_fv(sample, CoarseSet::full(sample.world()), std::nullopt, opts);
}

std::vector<CoarseSet> minimal_hitting_sets(const ObservedSample& sample) {
  const std::size_t n = sample.world_size();
  if (n > 12) throw InputError("minimal hitting sets are enumerated for at most 12 worlds; supply candidate supports");
  if (sample.distinct() > 64) {
    throw InputError("minimal hitting sets are enumerated for at most 64 distinct observed sets; supply candidate supports");
  }
  std::vector<Mask> masks(std::size_t{1} << n);
  for (Mask m = 0; m < masks.size(); ++m) masks[m] = m;
  std::stable_sort(masks.begin(), masks.end(), [](Mask a, Mask b) {
    if (mask::size(a) != mask::size(b)) return mask::size(a) < mask::size(b);
    return mask::lex_less(a, b);
  });
  std::vector<Mask> found;
  for (Mask m : masks) {
    if (m == 0 || sample.first_uncovered(m)) continue;
    const bool minimal = std::none_of(found.begin(), found.end(), [&](Mask f) { return mask::subset_of(f, m); });
    if (minimal) found.push_back(m);
  }
  std::vector<CoarseSet> out;
  for (Mask m : found) out.emplace_back(sample.world(), m);
  return out;
}

std::vector<FitResult> profile_wcar_maxima(const ObservedSample& sample,
                                           const std::optional<std::vector<CoarseSet>>& supports,
                                           const EmOptions& opts) {
  const WorldPtr& world = sample.world();
  std::vector<CoarseSet> candidates;
  if (supports) {
    if (supports->empty()) throw InputError("no candidate supports given");
    candidates = *supports;
  } else {
    candidates = minimal_hitting_sets(sample);
    const CoarseSet whole = CoarseSet::full(world);
    if (std::find(candidates.begin(), candidates.end(), whole) == candidates.end()) candidates.push_back(whole);
  }

  std::vector<FitResult> kept;
  for (const auto& v : candidates) {
    require_same_world(world, v.world(), "profile_wcar_maxima");
    FitResult fit = em_fv(sample, v, std::nullopt, opts);
    // a limit whose support shrank belongs to the smaller stratum; refit there
    for (std::size_t guard = 0; fit.stratum != v && guard < world->size(); ++guard) {
      const CoarseSet smaller = fit.stratum;
      fit = em_fv(sample, smaller, fit.theta, opts);
      if (fit.stratum == smaller) break;
    }
    if (fit.log_fv == kNegInf) continue;
    fit.log_c = c_wcar(fit.stratum, sample).log_value;
    fit.log_likelihood = fit.log_fv + fit.log_c;

    const bool duplicate = std::any_of(kept.begin(), kept.end(), [&](const FitResult& other) {
      if (other.stratum != fit.stratum) return false;
      for (std::size_t w = 0; w < fit.params.size(); ++w) {
        if (std::abs(other.params[w] - fit.params[w]) > 1e-7) return false;
      }
      return true;
    });
    if (!duplicate) kept.push_back(std::move(fit));
  }

  std::stable_sort(kept.begin(), kept.end(), [](const FitResult& a, const FitResult& b) {
    if (std::abs(a.log_likelihood - b.log_likelihood) > 1e-9) return a.log_likelihood > b.log_likelihood;
    if (a.stratum.size() != b.stratum.size()) return a.stratum.size() < b.stratum.size();
    return mask::lex_less(a.stratum.mask(), b.stratum.mask());
  });
  return kept;
}

namespace {

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool fixed = false;
};

// log_fv and its derivatives for the paired-binary family
struct PairedBinaryObjective {
  const CompleteDataModel& model;
  const Terms& terms;

  double value(double a, double b) const {
    const std::vector<double> p{a * b, a * (1 - b), (1 - a) * (1 - b), (1 - a) * b};
    return terms.loglik(p);
  }

  void derivatives(double a, double b, Eigen::Vector2d& grad, Eigen::Matrix2d& hess) const {
    const double p[4] = {a * b, a * (1 - b), (1 - a) * (1 - b), (1 - a) * b};
    const double da[4] = {b, 1 - b, -(1 - b), -b};
    const double db[4] = {a, -a, -(1 - a), 1 - a};
    const double dab[4] = {1, -1, 1, -1};
    grad.setZero();
    hess.setZero();
    for (std::size_t j = 0; j < terms.sets.size(); ++j) {
      double pu = 0, ga = 0, gb = 0, gab = 0;
      for (auto w : mask::members(terms.sets[j])) {
        pu += p[w];
        ga += da[w];
        gb += db[w];
        gab += dab[w];
      }
      const double c = terms.counts[j];
      grad(0) += c * ga / pu;
      grad(1) += c * gb / pu;
      hess(0, 0) -= c * ga * ga / (pu * pu);
      hess(1, 1) -= c * gb * gb / (pu * pu);
      hess(0, 1) += c * (gab / pu - ga * gb / (pu * pu));
    }
    hess(1, 0) = hess(0, 1);
  }
};

FitResult fit_paired_binary(const CompleteDataModel& model, const ObservedSample& sample, std::size_t grid_steps,
                            const std::optional<Stratum>& stratum) {
  if (grid_steps < 3) throw InputError("grid needs at least 3 points per axis");
  const Terms terms(sample);
  const PairedBinaryObjective f{model, terms};

  Axis axes[2];
  bool open[2] = {false, false};
  if (stratum) {
    if (stratum->region.size() != 2) throw InputError("paired-binary strata have two coordinates");
    for (int k = 0; k < 2; ++k) {
      const auto& r = stratum->region[k];
      axes[k] = {r.lo, r.hi, r.is_fixed()};
      open[k] = !r.is_fixed();
    }
  }

  auto grid = [&](int k) {
    std::vector<double> pts;
    if (axes[k].fixed) return std::vector<double>{axes[k].lo};
    const std::size_t first = open[k] ? 1 : 0;
    const std::size_t last = open[k] ? grid_steps - 2 : grid_steps - 1;
    for (std::size_t i = first; i <= last; ++i) {
      pts.push_back(axes[k].lo + (axes[k].hi - axes[k].lo) * static_cast<double>(i) /
                                     static_cast<double>(grid_steps - 1));
    }
    return pts;
  };

  double x[2] = {0.5, 0.5};
  double best = kNegInf;
  bool any = false;
  for (double a : grid(0)) {
    for (double b : grid(1)) {
      const double v = f.value(a, b);
      if (!any || v > best) {
        best = v;
        x[0] = a;
        x[1] = b;
        any = true;
      }
    }
  }

  // coordinate shrink search on the closure of the region
  std::size_t iterations = 0;
  double h = 1.0 / static_cast<double>(grid_steps - 1);
  while (h > 1e-9 && iterations < 100000) {
    ++iterations;
    bool improved = false;
    for (int k = 0; k < 2; ++k) {
      if (axes[k].fixed) continue;
      for (double dir : {1.0, -1.0}) {
        double y[2] = {x[0], x[1]};
        y[k] = std::clamp(x[k] + dir * h, axes[k].lo, axes[k].hi);
        const double v = f.value(y[0], y[1]);
        if (v > best) {
          best = v;
          x[0] = y[0];
          x[1] = y[1];
          improved = true;
        }
      }
    }
    if (!improved) h *= 0.5;
  }

  // Newton on the coordinates strictly inside their ranges
  auto interior = [&](int k) { return !axes[k].fixed && x[k] > axes[k].lo && x[k] < axes[k].hi; };
  for (int it = 0; it < 50 && best > kNegInf; ++it) {
    Eigen::Vector2d grad;
    Eigen::Matrix2d hess;
    f.derivatives(x[0], x[1], grad, hess);
    std::vector<int> idx;
    for (int k = 0; k < 2; ++k) {
      if (interior(k)) idx.push_back(k);
    }
    if (idx.empty()) break;
    const auto d = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd hs(d, d);
    Eigen::VectorXd gs(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      gs(i) = grad(idx[i]);
      for (Eigen::Index j = 0; j < d; ++j) hs(i, j) = hess(idx[i], idx[j]);
    }
    const Eigen::VectorXd step = hs.completeOrthogonalDecomposition().solve(-gs);
    if (!step.allFinite()) break;
    bool accepted = false;
    double size = 0.0;
    for (double t = 1.0; t > 1e-12 && !accepted; t *= 0.5) {
      double y[2] = {x[0], x[1]};
      bool inside = true;
      size = 0.0;
      for (Eigen::Index i = 0; i < d; ++i) {
        const int k = idx[i];
        y[k] += t * step(i);
        size = std::max(size, std::abs(t * step(i)));
        if (!(y[k] >= axes[k].lo && y[k] <= axes[k].hi)) inside = false;
      }
      if (!inside) continue;
      const double v = f.value(y[0], y[1]);
      if (v >= best) {
        best = v;
        x[0] = y[0];
        x[1] = y[1];
        accepted = true;
      }
    }
    ++iterations;
    if (!accepted || size < 1e-15) break;
  }

  double residual = std::numeric_limits<double>::infinity();
  if (best > kNegInf) {
    Eigen::Vector2d grad;
    Eigen::Matrix2d hess;
    f.derivatives(x[0], x[1], grad, hess);
    residual = 0.0;
    for (int k = 0; k < 2; ++k) {
      if (axes[k].fixed) continue;
      double g = grad(k) / terms.total;
      if (x[k] <= axes[k].lo && g < 0.0) g = 0.0;
      if (x[k] >= axes[k].hi && g > 0.0) g = 0.0;
      residual = std::max(residual, std::abs(g));
    }
  }

  const std::vector<double> params{x[0], x[1]};
  CompleteDistribution theta = model.to_distribution(params);
  const Mask supp = theta.support();
  return FitResult{std::move(theta), params, best, best, 0.0, iterations, residual <= 1e-6,
                   CoarseSet(sample.world(), supp), residual, {}};
}

bool attained_in(const Stratum& s, const std::vector<double>& params) {
  for (std::size_t k = 0; k < s.region.size(); ++k) {
    const auto& r = s.region[k];
    if (r.is_fixed()) {
      if (params[k] != r.lo) return false;
    } else if (!(params[k] > r.lo + 1e-7 && params[k] < r.hi - 1e-7)) {
      return false;
    }
  }
  return true;
}

}  // namespace

FitResult mle_fv_parametric(const CompleteDataModel& model, const ObservedSample& sample, std::size_t grid_steps,
                            const std::optional<Stratum>& stratum) {
  require_same_world(model.world(), sample.world(), "mle_fv_parametric");
  switch (model.kind()) {
    case ModelKind::Saturated:
      return stratum ? em_fv(sample, stratum->support) : mle_fv_saturated(sample);
    case ModelKind::FixedSupport: {
      FitResult fit = em_fv(sample, CoarseSet(sample.world(), model.fixed_mask()));
      std::vector<double> params;
      for (auto w : mask::members(model.fixed_mask())) params.push_back(fit.theta[w]);
      fit.params = std::move(params);
      return fit;
    }
    case ModelKind::PairedBinary:
      return fit_paired_binary(model, sample, grid_steps, stratum);
  }
  throw InputError("unknown model");
}

ProfileTable profile_wcar_parametric(const CompleteDataModel& model, const ObservedSample& sample,
                                     std::size_t grid_steps) {
  require_same_world(model.world(), sample.world(), "profile_wcar_parametric");
  ProfileTable table;
  for (auto& s : model.support_strata()) {
    StratumRow row{std::move(s), std::nullopt};
    if (!sample.first_uncovered(row.stratum.support.mask())) {
      FitResult fit = model.kind() == ModelKind::PairedBinary
                          ? fit_paired_binary(model, sample, grid_steps, row.stratum)
                          : em_fv(sample, row.stratum.support);
      if (model.kind() == ModelKind::FixedSupport) {
        std::vector<double> params;
        for (auto w : mask::members(model.fixed_mask())) params.push_back(fit.theta[w]);
        fit.params = std::move(params);
      }
      row.attained = model.kind() == ModelKind::PairedBinary ? attained_in(row.stratum, fit.params)
                                                              : fit.stratum == row.stratum.support;
      row.log_fv = fit.log_fv;
      row.log_c = c_wcar(row.stratum.support, sample).log_value;
      row.log_profile = row.log_fv + row.log_c;
      fit.log_c = row.log_c;
      fit.log_likelihood = row.log_profile;
      row.fit = std::move(fit);
    }
    table.rows.push_back(std::move(row));
  }
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    if (!r.attained || r.log_profile == kNegInf) continue;
    if (!table.best || r.log_profile > table.rows[*table.best].log_profile + 1e-12) table.best = i;
  }
  return table;
}

LrtResult lrt_scar(const CompleteDataModel& model, const ObservedSample& sample) {
  LrtResult out;
  out.sup_saturated = empirical_sup_logl(sample);
  out.log_c_scar = c_scar(sample).log_value;
  FitResult fit = mle_fv_parametric(model, sample);
  out.sup_scar = out.log_c_scar + fit.log_fv;
  fit.log_c = out.log_c_scar;
  fit.log_likelihood = out.sup_scar;
  out.fit = std::move(fit);
  const double t = 2.0 * (out.sup_saturated - out.sup_scar);
  if (t < -1e-9 * std::max(1.0, std::abs(out.sup_saturated))) {
    throw NumericalError("s-car supremum exceeds the saturated supremum by " + std::to_string(-t / 2.0));
  }
  out.statistic = std::max(0.0, t);
  return out;
}

}  // namespace coarse
