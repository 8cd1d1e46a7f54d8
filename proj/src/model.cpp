#include "coarse/model.hpp"

#include <cmath>
#include <map>

#include "coarse/errors.hpp"

namespace coarse {

CompleteDataModel CompleteDataModel::saturated(WorldPtr world) {
  if (!world) throw InputError("model without a world");
  return CompleteDataModel(ModelKind::Saturated, std::move(world), 0);
}

CompleteDataModel CompleteDataModel::fixed_support(const CoarseSet& v) {
  return CompleteDataModel(ModelKind::FixedSupport, v.world(), v.mask());
}

CompleteDataModel CompleteDataModel::paired_binary(WorldPtr world) {
  if (!world || world->size() != 4) {
    throw InputError("paired-binary model needs exactly four worlds (AB, AB~, A~B, A~B~)");
  }
  return CompleteDataModel(ModelKind::PairedBinary, std::move(world), 0);
}

std::size_t CompleteDataModel::param_dim() const noexcept {
  switch (kind_) {
    case ModelKind::Saturated: return world_->size() - 1;
    case ModelKind::FixedSupport: return mask::size(fixed_) - 1;
    case ModelKind::PairedBinary: return 2;
  }
  return 0;
}

std::size_t CompleteDataModel::param_count() const noexcept {
  switch (kind_) {
    case ModelKind::Saturated: return world_->size();
    case ModelKind::FixedSupport: return mask::size(fixed_);
    case ModelKind::PairedBinary: return 2;
  }
  return 0;
}

std::vector<double> CompleteDataModel::default_params() const {
  if (kind_ == ModelKind::PairedBinary) return {0.5, 0.5};
  const std::size_t k = param_count();
  return std::vector<double>(k, 1.0 / static_cast<double>(k));
}

std::string CompleteDataModel::name() const {
  switch (kind_) {
    case ModelKind::Saturated: return "saturated";
    case ModelKind::FixedSupport: return "fixed-support:" + format_mask(*world_, fixed_);
    case ModelKind::PairedBinary: return "paired-binary";
  }
  return "?";
}

CompleteDistribution CompleteDataModel::to_distribution(std::span<const double> params) const {
  if (params.size() != param_count()) {
    throw InputError(name() + " model expects " + std::to_string(param_count()) + " parameters, got " +
                     std::to_string(params.size()));
  }
  for (double x : params) {
    if (!(x >= 0.0 && x <= 1.0)) throw InputError(name() + " model parameter outside [0,1]");
  }
  switch (kind_) {
    case ModelKind::Saturated:
      return CompleteDistribution(world_, {params.begin(), params.end()});
    case ModelKind::FixedSupport: {
      std::vector<double> p(world_->size(), 0.0);
      std::size_t k = 0;
      for (auto w : mask::members(fixed_)) p[w] = params[k++];
      return CompleteDistribution(world_, std::move(p));
    }
    case ModelKind::PairedBinary: {
      const double a = params[0];
      const double b = params[1];
      return CompleteDistribution(world_, {a * b, a * (1.0 - b), (1.0 - a) * (1.0 - b), (1.0 - a) * b});
    }
  }
  throw InputError("unknown model kind");
}

namespace {

std::string describe_range(const char* name, const ParamRange& r) {
  if (r.is_fixed()) return std::string(name) + "=" + (r.lo == 0.0 ? "0" : "1");
  return "0<" + std::string(name) + "<1";
}

}  // namespace

std::vector<Stratum> CompleteDataModel::support_strata() const {
  std::vector<Stratum> out;
  switch (kind_) {
    case ModelKind::Saturated: {
      const std::size_t n = world_->size();
      if (n > kMaxEnumerableWorlds) {
        throw InputError("saturated strata enumerate 2^n supports; n <= " +
                         std::to_string(kMaxEnumerableWorlds) + " required");
      }
      for (Mask v = 1; v <= world_->full_mask(); ++v) {
        std::vector<ParamRange> region(n, ParamRange::fixed(0.0));
        for (auto w : mask::members(v)) {
          region[w] = mask::size(v) == 1 ? ParamRange::fixed(1.0) : ParamRange::open();
        }
        out.push_back({CoarseSet(world_, v), std::move(region), "support {" + format_mask(*world_, v) + "}"});
      }
      break;
    }
    case ModelKind::FixedSupport: {
      const std::size_t k = mask::size(fixed_);
      std::vector<ParamRange> region(k, k == 1 ? ParamRange::fixed(1.0) : ParamRange::open());
      out.push_back({CoarseSet(world_, fixed_), std::move(region),
                     "support {" + format_mask(*world_, fixed_) + "}"});
      break;
    }
    case ModelKind::PairedBinary: {
      // interior first, then edges, then corners
      const ParamRange choices[3] = {ParamRange::open(), ParamRange::fixed(0.0), ParamRange::fixed(1.0)};
      std::vector<std::pair<ParamRange, ParamRange>> order;
      order.emplace_back(choices[0], choices[0]);
      for (int i = 1; i < 3; ++i) order.emplace_back(choices[0], choices[i]);
      for (int i = 1; i < 3; ++i) order.emplace_back(choices[i], choices[0]);
      for (int i = 1; i < 3; ++i) {
        for (int j = 1; j < 3; ++j) order.emplace_back(choices[i], choices[j]);
      }
      for (const auto& [ra, rb] : order) {
        // representative point determines the support
        const double a = ra.is_fixed() ? ra.lo : 0.5;
        const double b = rb.is_fixed() ? rb.lo : 0.5;
        const double pa[2] = {a, b};
        const Mask v = to_distribution(pa).support();
        out.push_back({CoarseSet(world_, v), {ra, rb},
                       describe_range("a", ra) + ", " + describe_range("b", rb)});
      }
      break;
    }
  }
  return out;
}

CompleteDistribution model_to_distribution(const CompleteDataModel& model, std::span<const double> params) {
  return model.to_distribution(params);
}

std::vector<Stratum> support_strata(const CompleteDataModel& model) { return model.support_strata(); }

Rng split_rng(Rng& parent) {
  std::seed_seq seq{parent(), parent(), parent(), parent()};
  return Rng(seq);
}

ObservedSample sample_coarse(const CompleteDistribution& theta, const CoarseningKernel& lambda,
                             std::uint64_t n, std::uint64_t seed) {
  require_same_world(theta.world(), lambda.world(), "sample_coarse");
  if (n == 0) throw InputError("sample size must be at least 1");
  if (theta.support() == 0) throw InputError("cannot sample from a distribution with empty support");

  Rng rng(seed);
  std::discrete_distribution<std::size_t> pick_world(theta.probs().begin(), theta.probs().end());

  std::vector<std::vector<Mask>> row_sets(lambda.size());
  std::vector<std::discrete_distribution<std::size_t>> pick_set(lambda.size());
  for (std::size_t w = 0; w < lambda.size(); ++w) {
    std::vector<double> weights;
    for (const auto& [u, v] : lambda.row(w)) {
      row_sets[w].push_back(u);
      weights.push_back(v);
    }
    pick_set[w] = std::discrete_distribution<std::size_t>(weights.begin(), weights.end());
  }

  std::map<Mask, std::uint64_t> counts;
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::size_t w = pick_world(rng);
    const Mask u = row_sets[w][pick_set[w](rng)];
    ++counts[u];
  }
  return ObservedSample(theta.world(), counts);
}

}  // namespace coarse
