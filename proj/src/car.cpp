#include "coarse/car.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "coarse/detail/linprog.hpp"
#include "coarse/detail/maxflow.hpp"
#include "coarse/errors.hpp"

namespace coarse {

std::vector<Mask> CarReport::violated_sets() const {
  std::set<Mask> out;
  for (const auto& v : violations) out.insert(v.set);
  return {out.begin(), out.end()};
}

namespace {

CarReport pairwise_report(const CoarseningKernel& lambda, Mask eligible, double tol) {
  CarReport report;
  for (Mask u : lambda.family()) {
    const auto members = mask::members(u & eligible);
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        const double a = lambda.value(members[i], u);
        const double b = lambda.value(members[j], u);
        if (std::abs(a - b) > tol) report.violations.push_back({u, members[i], members[j], a, b});
      }
    }
  }
  report.holds = report.violations.empty();
  return report;
}

}  // namespace

CarReport is_wcar(const CompleteDistribution& theta, const CoarseningKernel& lambda, double tol) {
  require_same_world(theta.world(), lambda.world(), "is_wcar");
  const Mask support = theta.support();
  CarReport report = pairwise_report(lambda, support, tol);
  for (Mask u : lambda.family()) {
    if ((u & support) == 0) report.undefined_sets.push_back(u);
  }
  return report;
}

CarReport is_scar(const CoarseningKernel& lambda, double tol) {
  return pairwise_report(lambda, lambda.world()->full_mask(), tol);
}

CarReport fair_evidence(const CompleteDistribution& theta, const CoarseningKernel& lambda, double tol) {
  require_same_world(theta.world(), lambda.world(), "fair_evidence");
  CarReport report;
  for (Mask u : lambda.family()) {
    const double obs = joint_obs_prob(theta, lambda, u);
    if (!(obs > 0.0)) continue;
    const double pu = theta.mass(u);
    for (auto w : mask::members(u)) {
      const double given_obs = theta[w] * lambda.value(w, u) / obs;
      const double given_set = theta[w] / pu;
      if (std::abs(given_obs - given_set) > tol) report.violations.push_back({u, w, std::nullopt, given_obs, given_set});
    }
  }
  report.holds = report.violations.empty();
  return report;
}

CarReport observation_rate_condition(const CompleteDistribution& theta, const CoarseningKernel& lambda,
                                     double tol) {
  require_same_world(theta.world(), lambda.world(), "observation_rate_condition");
  CarReport report;
  const Mask support = theta.support();
  for (Mask u : lambda.family()) {
    const double obs = joint_obs_prob(theta, lambda, u);
    const double pu = theta.mass(u);
    for (auto w : mask::members(u & support)) {
      const double lhs = lambda.value(w, u) * pu;
      if (std::abs(lhs - obs) > tol) report.violations.push_back({u, w, std::nullopt, lhs, obs});
    }
  }
  report.holds = report.violations.empty();
  return report;
}

Compatibility is_compatible(const ObservedSample& m, const CompleteDistribution& theta, double tol) {
  require_same_world(m.world(), theta.world(), "is_compatible");
  const std::size_t n = theta.size();
  const std::size_t k = m.distinct();
  const std::size_t source = 0;
  const std::size_t sink = k + n + 1;
  detail::FlowNetwork net(k + n + 2);

  std::vector<Mask> sets;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> routes(k);  // (world, edge)
  double supply = 0.0;
  for (const auto& [u, c] : m.counts()) {
    const std::size_t node = 1 + sets.size();
    const double weight = m.weight(u);
    supply += weight;
    net.add_edge(source, node, weight);
    for (auto w : mask::members(u)) routes[sets.size()].emplace_back(w, net.add_edge(node, 1 + k + w, 2.0));
    sets.push_back(u);
  }
  for (std::size_t w = 0; w < n; ++w) net.add_edge(1 + k + w, sink, theta[w]);

  Compatibility result;
  const double flow = net.max_flow(source, sink);
  result.deficit = std::max(0.0, supply - flow);
  result.compatible = result.deficit <= tol;

  if (result.compatible) {
    std::vector<CoarseningKernel::Row> rows(n);
    std::vector<double> routed(n, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
      for (const auto& [w, e] : routes[i]) {
        const double f = net.flow(e);
        if (f > 0.0 && theta.supported(w)) {
          rows[w][sets[i]] += f;
          routed[w] += f;
        }
      }
    }
    for (std::size_t w = 0; w < n; ++w) {
      if (routed[w] > 0.0) {
        for (auto& [u, v] : rows[w]) v /= routed[w];
      } else {
        rows[w].clear();
        rows[w][mask::bit(w)] = 1.0;
      }
    }
    result.witness.emplace(theta.world(), std::move(rows));
  } else {
    const auto seen = net.reachable(source);
    Mask a = 0;
    for (std::size_t w = 0; w < n; ++w) {
      if (seen[1 + k + w]) a |= mask::bit(w);
    }
    double inside = 0.0;
    for (const auto& [u, c] : m.counts()) {
      if (mask::subset_of(u, a)) inside += m.weight(u);
    }
    result.hall_set = a;
    result.hall_excess = inside - theta.mass(a);
  }
  return result;
}

WcarCompatibility is_wcar_compatible(const ObservedSample& m, const CompleteDistribution& theta, double tol) {
  require_same_world(m.world(), theta.world(), "is_wcar_compatible");
  WcarCompatibility result;
  result.world_sums.assign(theta.size(), 0.0);
  for (const auto& [u, c] : m.counts()) {
    const double pu = theta.mass(u);
    if (!(pu > 0.0)) {
      result.null_observations.push_back(u);
      continue;
    }
    const double ratio = m.weight(u) / pu;
    for (auto w : mask::members(u)) result.world_sums[w] += ratio;
  }
  for (std::size_t w = 0; w < theta.size(); ++w) {
    if (theta.supported(w)) result.residual = std::max(result.residual, std::abs(result.world_sums[w] - 1.0));
  }
  result.compatible = result.null_observations.empty() && result.residual <= tol;
  return result;
}

namespace {

ScarCompatibility scar_closed_form(const ObservedSample& m, const CompleteDistribution& theta, double tol) {
  const auto wcar = is_wcar_compatible(m, theta, tol);
  ScarCompatibility result;
  result.method = ScarMethod::ClosedForm;
  result.world_sums = wcar.world_sums;
  if (!wcar.null_observations.empty() || wcar.residual > tol) return result;
  for (std::size_t w = 0; w < theta.size(); ++w) {
    if (!theta.supported(w) && wcar.world_sums[w] > 1.0 + tol) return result;
  }
  result.compatible = true;

  const std::size_t n = theta.size();
  std::vector<CoarseningKernel::Row> rows(n);
  for (const auto& [u, c] : m.counts()) {
    const double value = m.weight(u) / theta.mass(u);
    for (auto w : mask::members(u)) rows[w][u] = value;
  }
  for (std::size_t w = 0; w < n; ++w) {
    if (!theta.supported(w)) {
      const double slack = 1.0 - wcar.world_sums[w];
      if (slack > 0.0) rows[w][mask::bit(w)] = slack;
    }
    double total = 0.0;
    for (const auto& [u, v] : rows[w]) total += v;
    if (total <= 0.0) {
      rows[w] = {{mask::bit(w), 1.0}};
      continue;
    }
    for (auto& [u, v] : rows[w]) v = std::min(1.0, v / total);
  }
  result.witness.emplace(theta.world(), std::move(rows));
  return result;
}

ScarCompatibility scar_linear_program(const ObservedSample& m, const CompleteDistribution& theta, double tol) {
  const std::size_t n = theta.size();
  if (n > 12) throw InputError("linear-program s-car check enumerates all subsets; n <= 12 required");
  ScarCompatibility result;
  result.method = ScarMethod::LinearProgram;
  result.world_sums = is_wcar_compatible(m, theta, tol).world_sums;

  // Unobserved sets of positive probability are pinned to zero and dropped.
  std::vector<Mask> vars;
  for (Mask u = 1; u <= mask::full(n); ++u) {
    if (m.observed(u) || theta.mass(u) <= 0.0) vars.push_back(u);
  }
  std::vector<std::vector<double>> a;
  std::vector<double> b;
  for (const auto& [u, c] : m.counts()) {
    std::vector<double> row(vars.size(), 0.0);
    const auto it = std::lower_bound(vars.begin(), vars.end(), u);
    row[static_cast<std::size_t>(it - vars.begin())] = theta.mass(u);
    a.push_back(std::move(row));
    b.push_back(m.weight(u));
  }
  for (std::size_t w = 0; w < n; ++w) {
    std::vector<double> row(vars.size(), 0.0);
    for (std::size_t j = 0; j < vars.size(); ++j) {
      if (mask::has(vars[j], w)) row[j] = 1.0;
    }
    a.push_back(std::move(row));
    b.push_back(1.0);
  }
  const auto lp = detail::find_nonnegative_solution(a, b, tol * static_cast<double>(b.size()));
  result.compatible = lp.feasible;
  if (lp.feasible) {
    std::map<Mask, double> values;
    for (std::size_t j = 0; j < vars.size(); ++j) {
      if (lp.x[j] > 0.0) values[vars[j]] = std::min(1.0, lp.x[j]);
    }
    try {
      result.witness = CoarseningKernel::from_set_values(theta.world(), values);
    } catch (const InputError&) {
      // rounding pushed a row past the kernel tolerance; verdict stands
    }
  }
  return result;
}

}  // namespace

ScarCompatibility is_scar_compatible(const ObservedSample& m, const CompleteDistribution& theta, double tol,
                                     ScarMethod method) {
  require_same_world(m.world(), theta.world(), "is_scar_compatible");
  switch (method) {
    case ScarMethod::LinearProgram: return scar_linear_program(m, theta, tol);
    case ScarMethod::ClosedForm:
    case ScarMethod::Auto: return scar_closed_form(m, theta, tol);
  }
  return scar_closed_form(m, theta, tol);
}

ScarExtension extend_wcar_to_scar(const CompleteDistribution& theta, const CoarseningKernel& lambda,
                                  double tol) {
  require_same_world(theta.world(), lambda.world(), "extend_wcar_to_scar");
  if (!is_wcar(theta, lambda, tol).holds) {
    throw InputError("extend_wcar_to_scar requires a kernel that is w-car under theta");
  }
  const Mask support = theta.support();
  const std::size_t n = theta.size();

  // Set values pinned by supported worlds.
  std::map<Mask, double> pinned;
  for (Mask u : lambda.family()) {
    const Mask hit = u & support;
    if (hit == 0) continue;
    pinned[u] = lambda.value(static_cast<std::size_t>(std::countr_zero(hit)), u);
  }

  ScarExtension result;
  std::vector<double> required(n, 0.0);
  for (std::size_t z = 0; z < n; ++z) {
    if (mask::has(support, z)) continue;
    for (const auto& [u, v] : pinned) {
      if (mask::has(u, z)) required[z] += v;
    }
    if (required[z] > 1.0 + tol && (!result.blocking_world || required[z] > result.required_sum)) {
      result.blocking_world = z;
      result.required_sum = required[z];
    }
  }
  if (result.blocking_world) return result;

  std::vector<CoarseningKernel::Row> rows(n);
  for (std::size_t w = 0; w < n; ++w) {
    if (mask::has(support, w)) {
      rows[w] = lambda.row(w);
      continue;
    }
    for (const auto& [u, v] : pinned) {
      if (mask::has(u, w) && v > 0.0) rows[w][u] = v;
    }
    const double slack = 1.0 - required[w];
    if (slack > 0.0) rows[w][mask::bit(w)] = slack;
  }
  result.kernel.emplace(theta.world(), std::move(rows));
  return result;
}

std::string to_string(CoarseningClass c) {
  switch (c) {
    case CoarseningClass::Saturated: return "saturated";
    case CoarseningClass::WeakCar: return "w-car";
    case CoarseningClass::StrongCar: return "s-car";
  }
  return "?";
}

CoarseningClass parse_coarsening_class(const std::string& text) {
  if (text == "saturated" || text == "sat") return CoarseningClass::Saturated;
  if (text == "w-car" || text == "wcar") return CoarseningClass::WeakCar;
  if (text == "s-car" || text == "scar") return CoarseningClass::StrongCar;
  throw InputError("unknown coarsening class '" + text + "' (expected saturated, wcar or scar)");
}

bool classify_pd(CoarseningClass coarsening, const CompleteDataModel& model) {
  switch (coarsening) {
    case CoarseningClass::Saturated:
    case CoarseningClass::StrongCar: return true;
    case CoarseningClass::WeakCar: break;
  }
  if (model.kind() == ModelKind::Saturated) return model.world()->size() == 1;
  const auto strata = model.support_strata();
  return std::all_of(strata.begin(), strata.end(),
                     [&](const Stratum& s) { return s.support.mask() == strata.front().support.mask(); });
}

}  // namespace coarse
