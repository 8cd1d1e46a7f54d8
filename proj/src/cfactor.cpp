#include "coarse/cfactor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "coarse/errors.hpp"

namespace coarse {

std::string to_string(Binding b) {
  switch (b) {
    case Binding::Unconstrained: return "unconstrained";
    case Binding::Slack: return "slack";
    case Binding::Tight: return "tight";
    case Binding::Forced: return "forced";
  }
  return "?";
}

double CFactorResult::value() const { return std::exp(log_value); }

namespace {

// The optimization
//   max sum_j c_j log lambda_j  s.t.  sum_{j : w in S_j} lambda_j <= 1  (w constrained)
// where S_j = U_j intersected with the support. Its dual is
//   min_{mu >= 0} sum_w mu_w - sum_j c_j log(sum_{w in S_j} mu_w)
// with lambda_j = c_j / sum_{w in S_j} mu_w at the optimum.
struct Problem {
  std::vector<Mask> sets;       // S_j
  std::vector<double> counts;   // c_j
  std::vector<std::size_t> worlds;                    // constrained worlds
  std::vector<std::vector<std::size_t>> incidence;    // per constrained world: indices j
  std::vector<std::vector<std::size_t>> members;      // per j: positions in `worlds`
};

std::vector<double> primal(const Problem& prob, const std::vector<double>& mu) {
  std::vector<double> lambda(prob.sets.size());
  for (std::size_t j = 0; j < prob.sets.size(); ++j) {
    double s = 0.0;
    for (auto k : prob.members[j]) s += mu[k];
    lambda[j] = prob.counts[j] / s;
  }
  return lambda;
}

double dual_objective(const Problem& prob, const std::vector<double>& mu) {
  double d = std::accumulate(mu.begin(), mu.end(), 0.0);
  for (std::size_t j = 0; j < prob.sets.size(); ++j) {
    double s = 0.0;
    for (auto k : prob.members[j]) s += mu[k];
    if (!(s > 0.0)) return std::numeric_limits<double>::infinity();
    d -= prob.counts[j] * std::log(s);
  }
  return d;
}

// Root of 1 - sum_j c_j / (x + r_j) on x >= 0, or 0 if the derivative of the
// dual is already nonnegative there.
double coordinate_minimizer(const std::vector<double>& c, const std::vector<double>& r) {
  auto f = [&](double x) {
    double s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) s += c[i] / (x + r[i]);
    return 1.0 - s;
  };
  const bool pole_at_zero = std::any_of(r.begin(), r.end(), [](double v) { return v <= 0.0; });
  if (!pole_at_zero && f(0.0) >= 0.0) return 0.0;

  double lo = 0.0;
  double hi = std::accumulate(c.begin(), c.end(), 0.0);
  double x = hi;
  for (int it = 0; it < 200; ++it) {
    double s = 0.0;
    double ds = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      const double d = x + r[i];
      s += c[i] / d;
      ds += c[i] / (d * d);
    }
    const double fx = 1.0 - s;
    if (fx < 0.0) lo = x; else hi = x;
    if (fx == 0.0 || hi - lo <= 1e-16 * hi) break;
    double next = x - fx / ds;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-16 * std::max(1.0, x)) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

bool dual_coordinate_descent(const Problem& prob, std::vector<double>& mu, const CFactorOptions& opts,
                             std::size_t& sweeps) {
  std::vector<double> lambda = primal(prob, mu);
  std::vector<double> c;
  std::vector<double> r;
  for (sweeps = 1; sweeps <= opts.max_sweeps; ++sweeps) {
    for (std::size_t k = 0; k < prob.worlds.size(); ++k) {
      c.clear();
      r.clear();
      for (auto j : prob.incidence[k]) {
        double rest = 0.0;
        for (auto other : prob.members[j]) {
          if (other != k) rest += mu[other];
        }
        c.push_back(prob.counts[j]);
        r.push_back(rest);
      }
      mu[k] = coordinate_minimizer(c, r);
    }
    const auto next = primal(prob, mu);
    double change = 0.0;
    for (std::size_t j = 0; j < next.size(); ++j) change = std::max(change, std::abs(next[j] - lambda[j]));
    lambda = next;
    if (change < opts.tolerance) return true;
  }
  return false;
}

// max over k of the projected-gradient violation at mu; fills grad
double projected_gradient(const Problem& prob, const std::vector<double>& mu, std::vector<double>& grad) {
  const auto lambda = primal(prob, mu);
  std::fill(grad.begin(), grad.end(), 1.0);
  for (std::size_t j = 0; j < lambda.size(); ++j) {
    for (auto k : prob.members[j]) grad[k] -= lambda[j];
  }
  double pg = 0.0;
  for (std::size_t k = 0; k < mu.size(); ++k) {
    pg = std::max(pg, mu[k] > 0.0 ? std::abs(grad[k]) : std::max(0.0, -grad[k]));
  }
  return pg;
}

// Projected gradient on the dual, scaled by the inverse Hessian on the
// coordinates that are not held at zero.
bool dual_projected_gradient(const Problem& prob, std::vector<double>& mu, const CFactorOptions& opts,
                             std::size_t& iterations) {
  const std::size_t m = mu.size();
  const std::size_t max_iter = std::max<std::size_t>(opts.max_sweeps, 1000);
  std::vector<double> grad(m);
  std::vector<double> trial_grad(m);
  std::vector<double> trial(m);
  std::vector<double> dir(m);
  double current = dual_objective(prob, mu);
  double pg = projected_gradient(prob, mu, grad);
  for (iterations = 1; iterations <= max_iter; ++iterations) {
    if (pg < opts.tolerance) return true;

    // coordinates at (or next to) zero that the gradient pushes further down
    const double eps = std::min(1e-6, pg);
    std::vector<bool> held(m, false);
    std::vector<Eigen::Index> slot(m, -1);
    Eigen::Index free = 0;
    for (std::size_t k = 0; k < m; ++k) {
      held[k] = mu[k] <= eps && grad[k] > 0.0;
      if (!held[k]) slot[k] = free++;
    }
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(free, free);
    Eigen::VectorXd g(free);
    for (std::size_t k = 0; k < m; ++k) {
      if (slot[k] >= 0) g(slot[k]) = grad[k];
    }
    for (std::size_t j = 0; j < prob.sets.size(); ++j) {
      double sj = 0.0;
      for (auto k : prob.members[j]) sj += mu[k];
      const double w = prob.counts[j] / (sj * sj);
      for (auto a : prob.members[j]) {
        if (slot[a] < 0) continue;
        for (auto b : prob.members[j]) {
          if (slot[b] >= 0) h(slot[a], slot[b]) += w;
        }
      }
    }
    Eigen::VectorXd d = -g;
    if (free > 0) {
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
      const Eigen::VectorXd newton = ldlt.solve(-g);
      if (ldlt.info() == Eigen::Success && newton.allFinite() && newton.dot(g) < 0.0) d = newton;
    }
    for (std::size_t k = 0; k < m; ++k) dir[k] = held[k] ? -grad[k] : d(slot[k]);

    bool moved = false;
    double t = 1.0;
    for (int bt = 0; bt < 200; ++bt, t *= 0.5) {
      double decrease = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        trial[k] = std::max(0.0, mu[k] + t * dir[k]);
        decrease += grad[k] * (mu[k] - trial[k]);
      }
      if (trial == mu) break;
      const double value = dual_objective(prob, trial);
      // once objective changes fall below rounding, a smaller projected
      // gradient decides
      const double noise = 8 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(current));
      bool accept = value <= current - 1e-4 * decrease;
      if (!accept && std::isfinite(value) && value <= current + noise) {
        accept = projected_gradient(prob, trial, trial_grad) < pg;
      }
      if (accept) {
        mu = trial;
        current = value;
        pg = projected_gradient(prob, mu, grad);
        moved = true;
        break;
      }
    }
    if (!moved) return pg < 1e-9;
  }
  return pg < opts.tolerance;
}

CFactorResult solve(const ObservedSample& sample, Mask support, const CFactorOptions& opts) {
  const std::size_t n = sample.world_size();
  CFactorResult result;
  result.binding.assign(n, Binding::Unconstrained);

  for (const auto& [u, c] : sample.counts()) {
    if ((u & support) == 0) result.uncovered.push_back(u);
  }
  if (!result.uncovered.empty()) {
    result.log_value = kNegInf;
    result.converged = true;
    return result;
  }

  Problem prob;
  std::vector<Mask> observed;
  for (const auto& [u, c] : sample.counts()) {
    observed.push_back(u);
    prob.sets.push_back(u & support);
    prob.counts.push_back(static_cast<double>(c));
  }
  std::vector<std::size_t> position(n, n);
  for (std::size_t w = 0; w < n; ++w) {
    if (!mask::has(support, w)) continue;
    std::vector<std::size_t> inc;
    for (std::size_t j = 0; j < prob.sets.size(); ++j) {
      if (mask::has(prob.sets[j], w)) inc.push_back(j);
    }
    if (inc.empty()) {
      result.binding[w] = Binding::Slack;
      continue;
    }
    position[w] = prob.worlds.size();
    prob.worlds.push_back(w);
    prob.incidence.push_back(std::move(inc));
  }
  prob.members.resize(prob.sets.size());
  for (std::size_t j = 0; j < prob.sets.size(); ++j) {
    for (auto w : mask::members(prob.sets[j])) prob.members[j].push_back(position[w]);
  }

  std::vector<double> mu(prob.worlds.size());
  for (std::size_t k = 0; k < prob.worlds.size(); ++k) {
    for (auto j : prob.incidence[k]) mu[k] += prob.counts[j];
  }

  std::size_t iterations = 0;
  bool converged = false;
  if (!opts.force_gradient) converged = dual_coordinate_descent(prob, mu, opts, iterations);
  result.iterations = iterations;
  if (!converged) {
    if (opts.force_gradient) {
      for (std::size_t k = 0; k < prob.worlds.size(); ++k) {
        mu[k] = 0.0;
        for (auto j : prob.incidence[k]) mu[k] += prob.counts[j];
      }
    }
    converged = dual_projected_gradient(prob, mu, opts, iterations);
    result.iterations += iterations;
    result.solver = CFactorSolver::ProjectedGradient;
  }
  result.converged = converged;

  auto lambda = primal(prob, mu);
  std::vector<double> row_sum(prob.worlds.size(), 0.0);
  for (std::size_t j = 0; j < lambda.size(); ++j) {
    for (auto k : prob.members[j]) row_sum[k] += lambda[j];
  }
  const double worst = row_sum.empty() ? 0.0 : *std::max_element(row_sum.begin(), row_sum.end());
  if (worst > 1.0) {
    for (auto& l : lambda) l /= worst;
    for (auto& s : row_sum) s /= worst;
  }

  const double mu_scale = std::accumulate(prob.counts.begin(), prob.counts.end(), 0.0);
  const std::size_t outside = n - mask::size(support);
  for (std::size_t k = 0; k < prob.worlds.size(); ++k) {
    const std::size_t w = prob.worlds[k];
    double kkt = std::max(0.0, row_sum[k] - 1.0);
    if (mu[k] > 1e-12 * mu_scale) kkt = std::max(kkt, std::abs(1.0 - row_sum[k]));
    result.kkt_residual = std::max(kkt, result.kkt_residual);

    // private slack: an unobserved set meeting the support exactly in {w}
    std::size_t private_observed = 0;
    for (Mask u : observed) {
      if ((u & support) == mask::bit(w)) ++private_observed;
    }
    const bool has_slack = outside >= 63 || private_observed < (std::size_t{1} << outside);
    if (!has_slack) {
      result.binding[w] = Binding::Forced;
    } else {
      result.binding[w] = row_sum[k] >= 1.0 - 1e-9 ? Binding::Tight : Binding::Slack;
    }
  }

  result.log_value = 0.0;
  for (std::size_t j = 0; j < lambda.size(); ++j) {
    result.argmax[observed[j]] = lambda[j];
    result.log_value += prob.counts[j] * std::log(lambda[j]);
  }
  return result;
}

}  // namespace

CFactorResult c_wcar(const CoarseSet& support, const ObservedSample& sample, const CFactorOptions& opts) {
  require_same_world(support.world(), sample.world(), "c_wcar");
  return solve(sample, support.mask(), opts);
}

CFactorResult c_scar(const ObservedSample& sample, const CFactorOptions& opts) {
  return solve(sample, sample.world()->full_mask(), opts);
}

SaturatedProfile saturated_profile(const CompleteDistribution& theta, const ObservedSample& sample, double tol,
                                   std::size_t max_iter) {
  require_same_world(theta.world(), sample.world(), "saturated_profile");
  SaturatedProfile out;
  const Mask support = theta.support();
  const auto start = solve(sample, support, {});
  if (!start.uncovered.empty()) {
    out.converged = true;
    return out;
  }

  // flat layout: for each observed set j, one slot per supported member
  struct Cell {
    std::size_t set;
    std::size_t world;
  };
  std::vector<Mask> sets;
  std::vector<double> counts;
  std::vector<Cell> cells;
  for (const auto& [u, c] : sample.counts()) {
    for (auto w : mask::members(u & support)) cells.push_back({sets.size(), w});
    sets.push_back(u);
    counts.push_back(static_cast<double>(c));
  }
  const std::size_t n = theta.size();
  std::vector<double> lambda(cells.size());
  std::vector<double> row(n, 0.0);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    lambda[i] = start.argmax.at(sets[cells[i].set]);
    row[cells[i].world] += lambda[i];
  }
  for (std::size_t i = 0; i < cells.size(); ++i) lambda[i] /= row[cells[i].world];

  std::vector<double> q(sets.size());
  auto evaluate = [&]() {
    std::fill(q.begin(), q.end(), 0.0);
    for (std::size_t i = 0; i < cells.size(); ++i) q[cells[i].set] += theta[cells[i].world] * lambda[i];
    double ll = 0.0;
    for (std::size_t j = 0; j < sets.size(); ++j) ll += counts[j] * std::log(q[j]);
    return ll;
  };

  double ll = evaluate();
  std::vector<double> weight(cells.size());
  for (out.iterations = 1; out.iterations <= max_iter; ++out.iterations) {
    std::fill(row.begin(), row.end(), 0.0);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      weight[i] = counts[cells[i].set] * theta[cells[i].world] * lambda[i] / q[cells[i].set];
      row[cells[i].world] += weight[i];
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
      lambda[i] = row[cells[i].world] > 0.0 ? weight[i] / row[cells[i].world] : 0.0;
    }
    const double next = evaluate();
    const double change = std::abs(next - ll);
    ll = std::max(ll, next);
    if (change <= tol * std::max(1.0, std::abs(ll))) {
      out.converged = true;
      break;
    }
  }
  out.value = ll;
  return out;
}

LogLikelihood log_profile(const CompleteDistribution& theta, const ObservedSample& sample,
                          CoarseningClass coarsening) {
  require_same_world(theta.world(), sample.world(), "log_profile");
  switch (coarsening) {
    case CoarseningClass::WeakCar: {
      const LogLikelihood fv = log_lfv(theta, sample);
      if (fv == kNegInf) return kNegInf;
      return c_wcar(CoarseSet(theta.world(), theta.support()), sample).log_value + fv;
    }
    case CoarseningClass::StrongCar: {
      const LogLikelihood fv = log_lfv(theta, sample);
      if (fv == kNegInf) return kNegInf;
      return c_scar(sample).log_value + fv;
    }
    case CoarseningClass::Saturated: return saturated_profile(theta, sample).value;
  }
  return kNegInf;
}

}  // namespace coarse
