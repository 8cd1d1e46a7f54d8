#include "cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <map>
#include <ostream>
#include <sstream>

#include "coarse/car.hpp"
#include "coarse/cfactor.hpp"
#include "coarse/errors.hpp"
#include "coarse/estimation.hpp"
#include "coarse/io.hpp"
#include "coarse/likelihood.hpp"

namespace coarse::cli {

namespace {

using Json = nlohmann::ordered_json;

struct Globals {
  double tol = kDefaultTolerance;
  std::uint64_t seed = 1;
  std::string format = "text";
  bool json() const { return format == "json"; }
};

Json num(double x) {
  if (std::isfinite(x)) return x;
  return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
}

Json num_vec(const std::vector<double>& v) {
  Json arr = Json::array();
  for (double x : v) arr.push_back(num(x));
  return arr;
}

std::string vec_text(const std::vector<double>& v) {
  std::string s = "(";
  std::string exact = "(";
  bool all_fractions = true;
  for (std::size_t i = 0; i < v.size(); ++i) {
    s += (i ? ", " : "") + format_number(v[i]);
    const auto f = as_fraction(v[i]);
    if (!f) all_fractions = false;
    else exact += (i ? ", " : "") + (f->second == 1 ? std::to_string(f->first)
                                                    : std::to_string(f->first) + "/" + std::to_string(f->second));
  }
  s += ")";
  if (all_fractions && exact + ")" != s) s += " = " + exact + ")";
  return s;
}

std::string set_text(const World& world, Mask u) { return "{" + format_mask(world, u, ",") + "}"; }
std::string set_key(const World& world, Mask u) { return format_mask(world, u, "|"); }

std::string yes_no(bool b) { return b ? "yes" : "no"; }

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

std::vector<double> parse_vector(std::string_view text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    out.push_back(parse_number(text.substr(start, end - start)));
    start = end + 1;
  }
  return out;
}

CompleteDistribution theta_from_text(const WorldPtr& world, const std::string& text) {
  auto p = parse_vector(text);
  if (p.size() != world->size()) {
    throw InputError("theta '" + text + "' has " + std::to_string(p.size()) + " entries, expected " +
                     std::to_string(world->size()));
  }
  return CompleteDistribution(world, std::move(p));
}

ModelFile model_file_for(const std::string& path, const WorldPtr& world) {
  ModelFile file = read_model_file(path);
  if (!(*file.world == *world)) throw InputError(path + ": worlds differ from the observations file header");
  // rebuild on the sample's world object so that world checks pass
  ModelFile out{world, std::nullopt, std::nullopt, std::nullopt, file.params, {}};
  if (file.theta) out.theta = CompleteDistribution(world, file.theta->probs());
  for (const auto& t : file.thetas) out.thetas.emplace_back(world, t.probs());
  if (file.lambda) out.lambda = CoarseningKernel(world, file.lambda->rows());
  if (file.model) {
    out.model = file.model->kind() == ModelKind::FixedSupport
                    ? CompleteDataModel::fixed_support(CoarseSet(world, file.model->fixed_mask()))
                    : parse_model_spec(world, file.model->name());
  }
  return out;
}

// Distributions named on the command line or in a model file.
std::vector<CompleteDistribution> collect_thetas(const WorldPtr& world, const std::vector<std::string>& texts,
                                                 const std::string& model_path) {
  std::vector<CompleteDistribution> out;
  for (const auto& t : texts) out.push_back(theta_from_text(world, t));
  if (!model_path.empty()) {
    ModelFile file = model_file_for(model_path, world);
    if (file.theta) out.push_back(*file.theta);
    for (auto& t : file.thetas) out.push_back(std::move(t));
    if (file.model && file.params) out.push_back(file.model->to_distribution(*file.params));
  }
  return out;
}

Json violation_json(const World& world, const Violation& v) {
  Json j;
  j["set"] = set_key(world, v.set);
  j["world"] = world.label(v.world);
  if (v.other) j["other"] = world.label(*v.other);
  j["value"] = num(v.value);
  j["other_value"] = num(v.other_value);
  return j;
}

Json fit_json(const World& world, const FitResult& fit) {
  Json j;
  j["theta"] = num_vec(fit.theta.probs());
  j["params"] = num_vec(fit.params);
  j["support"] = set_key(world, fit.stratum.mask());
  j["log_likelihood"] = num(fit.log_likelihood);
  j["likelihood"] = num(std::exp(fit.log_likelihood));
  j["log_fv"] = num(fit.log_fv);
  j["log_c"] = num(fit.log_c);
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  j["residual"] = num(fit.residual);
  return j;
}

void fit_text(std::ostream& out, const World& world, const FitResult& fit, bool parametric, const std::string& indent) {
  out << indent << "theta          " << vec_text(fit.theta.probs()) << '\n';
  if (parametric) out << indent << "params         " << vec_text(fit.params) << '\n';
  out << indent << "support        " << set_text(world, fit.stratum.mask()) << '\n';
  out << indent << "log-likelihood " << format_number(fit.log_likelihood) << "  (likelihood "
      << format_exact(std::exp(fit.log_likelihood)) << ")\n";
  out << indent << "log L_FV       " << format_number(fit.log_fv) << '\n';
  out << indent << "log c          " << format_number(fit.log_c) << "  (c " << format_exact(std::exp(fit.log_c))
      << ")\n";
  out << indent << "iterations     " << fit.iterations << "  converged " << yes_no(fit.converged) << "  residual "
      << format_number(fit.residual) << '\n';
}

void emit(std::ostream& out, const Json& doc) { out << doc.dump(2) << '\n'; }

// ---------------------------------------------------------------- check

int cmd_check(const Globals& g, const std::string& path, std::ostream& out) {
  const ModelFile file = read_model_file(path);
  if (!file.theta || !file.lambda) throw InputError(path + ": check needs both 'theta' and 'lambda'");
  const World& world = *file.world;
  const CompleteDistribution& theta = *file.theta;
  const CoarseningKernel& lambda = *file.lambda;

  const std::pair<std::string, CarReport> reports[] = {
      {"w-car", is_wcar(theta, lambda, g.tol)},
      {"s-car", is_scar(lambda, g.tol)},
      {"fair-evidence", fair_evidence(theta, lambda, g.tol)},
      {"observation-rate", observation_rate_condition(theta, lambda, g.tol)},
  };
  std::optional<ScarExtension> extension;
  if (reports[0].second.holds && !reports[1].second.holds) extension = extend_wcar_to_scar(theta, lambda, g.tol);

  if (g.json()) {
    Json doc;
    doc["command"] = "check";
    doc["tolerance"] = g.tol;
    doc["conditions"] = Json::array();
    for (const auto& [name, r] : reports) {
      Json c;
      c["name"] = name;
      c["holds"] = r.holds;
      c["violated_sets"] = Json::array();
      for (Mask u : r.violated_sets()) c["violated_sets"].push_back(set_key(world, u));
      c["violations"] = Json::array();
      for (const auto& v : r.violations) c["violations"].push_back(violation_json(world, v));
      c["undefined_sets"] = Json::array();
      for (Mask u : r.undefined_sets) c["undefined_sets"].push_back(set_key(world, u));
      doc["conditions"].push_back(c);
    }
    if (extension) {
      Json e;
      e["possible"] = extension->kernel.has_value();
      if (extension->blocking_world) e["blocking_world"] = world.label(*extension->blocking_world);
      e["required_sum"] = num(extension->required_sum);
      doc["scar_extension"] = e;
    }
    emit(out, doc);
    return kOk;
  }

  out << pad("condition", 18) << pad("holds", 7) << "violated sets\n";
  for (const auto& [name, r] : reports) {
    std::string sets;
    for (Mask u : r.violated_sets()) sets += (sets.empty() ? "" : " ") + set_text(world, u);
    out << pad(name, 18) << pad(yes_no(r.holds), 7) << (sets.empty() ? "-" : sets) << '\n';
  }
  for (const auto& [name, r] : reports) {
    for (const auto& v : r.violations) {
      out << "  " << name << " violation at " << set_text(world, v.set) << ": " << world.label(v.world) << " "
          << format_exact(v.value);
      if (v.other) out << " vs " << world.label(*v.other);
      out << " " << format_exact(v.other_value) << '\n';
    }
  }
  if (!reports[0].second.undefined_sets.empty()) {
    out << "sets with P(U) = 0 (not checked):";
    for (Mask u : reports[0].second.undefined_sets) out << ' ' << set_text(world, u);
    out << '\n';
  }
  if (extension) {
    if (extension->kernel) {
      out << "s-car extension: possible by re-choosing unsupported rows\n";
    } else {
      out << "s-car extension: impossible, world " << world.label(*extension->blocking_world)
          << " would need row sum " << format_exact(extension->required_sum) << '\n';
    }
  }
  return kOk;
}

// ---------------------------------------------------------------- fit

struct FitArgs {
  std::string path;
  std::string coarsening = "fv";
  std::string model = "saturated";
  std::string support;
  bool all_maxima = false;
  std::size_t grid = 201;
};

void table_text(std::ostream& out, const World& world, const ProfileTable& table) {
  out << pad("stratum", 22) << pad("support", 22) << pad("log L_FV", 18) << pad("log c_w-car", 18)
      << pad("log profile", 18) << "attained\n";
  for (const auto& row : table.rows) {
    out << pad(row.stratum.description, 22) << pad(set_text(world, row.stratum.support.mask()), 22)
        << pad(format_number(row.log_fv), 18) << pad(format_number(row.log_c), 18)
        << pad(format_number(row.log_profile), 18) << yes_no(row.attained) << '\n';
  }
}

Json table_json(const World& world, const ProfileTable& table) {
  Json rows = Json::array();
  for (const auto& row : table.rows) {
    Json r;
    r["stratum"] = row.stratum.description;
    r["support"] = set_key(world, row.stratum.support.mask());
    r["log_fv"] = num(row.log_fv);
    r["log_c"] = num(row.log_c);
    r["log_profile"] = num(row.log_profile);
    r["attained"] = row.attained;
    if (row.fit) r["params"] = num_vec(row.fit->params);
    rows.push_back(r);
  }
  return rows;
}

int cmd_fit(const Globals& g, const FitArgs& a, std::ostream& out, std::ostream& err) {
  const ObservedSample sample = read_observations_file(a.path);
  const WorldPtr& world = sample.world();
  const CompleteDataModel model = parse_model_spec(world, a.model);
  const CoarseningClass klass = a.coarsening == "fv" ? CoarseningClass::Saturated : parse_coarsening_class(a.coarsening);
  const bool parametric = model.kind() == ModelKind::PairedBinary;
  if (!a.support.empty() && model.kind() != ModelKind::Saturated) {
    throw InputError("--support applies to the saturated model only");
  }
  std::optional<CoarseSet> support;
  if (!a.support.empty()) support = CoarseSet::parse(world, a.support, ',');

  std::vector<FitResult> fits;
  std::optional<ProfileTable> table;
  if (a.coarsening == "fv" || klass == CoarseningClass::StrongCar) {
    FitResult fit = support ? em_fv(sample, *support) : mle_fv_parametric(model, sample, a.grid);
    if (klass == CoarseningClass::StrongCar) {
      fit.log_c = c_scar(sample).log_value;
      fit.log_likelihood = fit.log_fv + fit.log_c;
    }
    fits.push_back(std::move(fit));
  } else if (klass == CoarseningClass::WeakCar) {
    if (model.kind() == ModelKind::Saturated) {
      std::optional<std::vector<CoarseSet>> candidates;
      if (support) candidates = std::vector<CoarseSet>{*support};
      auto maxima = profile_wcar_maxima(sample, candidates);
      for (auto& m : maxima) {
        if (a.all_maxima || m.log_likelihood >= maxima.front().log_likelihood - 1e-9) fits.push_back(std::move(m));
      }
    } else {
      table = profile_wcar_parametric(model, sample, a.grid);
      if (!table->best) throw NumericalError("no stratum attains a finite w-car profile value");
      fits.push_back(*table->rows[*table->best].fit);
    }
  } else {
    throw InputError("--class must be fv, wcar or scar");
  }

  const bool all_converged = std::all_of(fits.begin(), fits.end(), [](const FitResult& f) { return f.converged; });
  const World& w = *world;
  if (g.json()) {
    Json doc;
    doc["command"] = "fit";
    doc["class"] = a.coarsening;
    doc["model"] = model.name();
    doc["fits"] = Json::array();
    for (const auto& f : fits) doc["fits"].push_back(fit_json(w, f));
    if (table && a.all_maxima) doc["strata"] = table_json(w, *table);
    emit(out, doc);
  } else {
    out << "class " << a.coarsening << ", model " << model.name() << ", " << fits.size()
        << (fits.size() == 1 ? " maximum\n" : " maxima\n");
    for (std::size_t i = 0; i < fits.size(); ++i) {
      out << "maximum " << i + 1 << '\n';
      fit_text(out, w, fits[i], parametric || model.kind() == ModelKind::FixedSupport, "  ");
    }
    if (table && a.all_maxima) table_text(out, w, *table);
  }
  if (!all_converged) {
    err << "error: the solver did not reach its convergence criterion\n";
    return kNumericalError;
  }
  return kOk;
}

// ---------------------------------------------------------------- profile

struct ProfileArgs {
  std::string path;
  std::vector<std::string> thetas;
  std::string model_file;
  double grid = 0.0;
  std::string model = "paired-binary";
};

int profile_grid(const Globals& g, const ProfileArgs& a, const ObservedSample& sample, std::ostream& out) {
  const WorldPtr& world = sample.world();
  const CompleteDataModel model = parse_model_spec(world, a.model);
  if (model.kind() != ModelKind::PairedBinary) throw InputError("--grid needs --model paired-binary");
  if (!(a.grid > 0.0 && a.grid <= 0.5)) throw InputError("--grid step must lie in (0, 0.5]");
  const auto steps = static_cast<std::size_t>(std::llround(1.0 / a.grid)) + 1;

  std::map<Mask, double> cache;
  auto c_of = [&](Mask v) {
    auto it = cache.find(v);
    if (it == cache.end()) it = cache.emplace(v, c_wcar(CoarseSet(world, v), sample).log_value).first;
    return it->second;
  };
  struct Point {
    double a = 0, b = 0, fv = kNegInf, profile = kNegInf;
  };
  Point fv_interior, profile_interior, profile_best;
  for (std::size_t i = 0; i < steps; ++i) {
    for (std::size_t j = 0; j < steps; ++j) {
      const double pa[2] = {static_cast<double>(i) / static_cast<double>(steps - 1),
                            static_cast<double>(j) / static_cast<double>(steps - 1)};
      const auto theta = model.to_distribution(pa);
      const double fv = log_lfv(theta, sample);
      const double prof = fv == kNegInf ? kNegInf : fv + c_of(theta.support());
      const Point p{pa[0], pa[1], fv, prof};
      const bool interior = i > 0 && j > 0 && i + 1 < steps && j + 1 < steps;
      if (interior && fv > fv_interior.fv) fv_interior = p;
      if (interior && prof > profile_interior.profile) profile_interior = p;
      if (prof > profile_best.profile) profile_best = p;
    }
  }
  const ProfileTable table = profile_wcar_parametric(model, sample, steps);
  const StratumRow& inner = table.rows.front();

  if (g.json()) {
    Json doc;
    doc["command"] = "profile";
    doc["grid_step"] = a.grid;
    auto pt = [](const Point& p) {
      Json j;
      j["a"] = p.a;
      j["b"] = p.b;
      j["log_fv"] = num(p.fv);
      j["log_profile_wcar"] = num(p.profile);
      return j;
    };
    doc["fv_max_interior"] = pt(fv_interior);
    doc["profile_max_interior"] = pt(profile_interior);
    doc["profile_max"] = pt(profile_best);
    doc["strata"] = table_json(*world, table);
    doc["discontinuities"] = Json::array();
    for (std::size_t i = 1; i < table.rows.size(); ++i) {
      const auto& r = table.rows[i];
      if (r.log_c == kNegInf || inner.log_c == kNegInf) continue;
      Json d;
      d["boundary"] = r.stratum.description;
      d["log_jump"] = num(r.log_c - inner.log_c);
      doc["discontinuities"].push_back(d);
    }
    emit(out, doc);
    return kOk;
  }
  auto pt = [&](const char* name, const Point& p) {
    out << pad(name, 28) << "(a, b) = (" << format_number(p.a) << ", " << format_number(p.b) << ")  log L_FV "
        << format_number(p.fv) << "  log profile " << format_number(p.profile) << '\n';
  };
  out << "grid step " << format_number(a.grid) << " (" << steps << " points per axis)\n";
  pt("face-value max, interior", fv_interior);
  pt("w-car profile max, interior", profile_interior);
  pt("w-car profile max, overall", profile_best);
  out << "\nstrata (refined)\n";
  table_text(out, *world, table);
  out << "\ndiscontinuities of the w-car profile entering each boundary stratum from the interior\n";
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    if (r.log_c == kNegInf || inner.log_c == kNegInf) continue;
    out << "  " << pad(r.stratum.description, 20) << "log jump " << format_number(r.log_c - inner.log_c) << '\n';
  }
  return kOk;
}

int cmd_profile(const Globals& g, const ProfileArgs& a, std::ostream& out) {
  const ObservedSample sample = read_observations_file(a.path);
  if (a.grid > 0.0) return profile_grid(g, a, sample, out);
  const auto thetas = collect_thetas(sample.world(), a.thetas, a.model_file);
  if (thetas.empty()) throw InputError("profile needs --theta, --model-file or --grid");
  const World& world = *sample.world();
  const double cs = c_scar(sample).log_value;

  struct Row {
    double fv, cw, cs;
  };
  std::vector<Row> rows;
  for (const auto& t : thetas) {
    const double fv = log_lfv(t, sample);
    const double cw = c_wcar(CoarseSet(t.world(), t.support()), sample).log_value;
    rows.push_back({fv, cw, cs});
  }
  auto prod = [](double a, double b) { return a == kNegInf || b == kNegInf ? kNegInf : a + b; };

  if (g.json()) {
    Json doc;
    doc["command"] = "profile";
    doc["rows"] = Json::array();
    for (std::size_t i = 0; i < thetas.size(); ++i) {
      Json r;
      r["theta"] = num_vec(thetas[i].probs());
      r["support"] = set_key(world, thetas[i].support());
      r["L_fv"] = num(std::exp(rows[i].fv));
      r["c_wcar"] = num(std::exp(rows[i].cw));
      r["L_wcar"] = num(std::exp(prod(rows[i].fv, rows[i].cw)));
      r["c_scar"] = num(std::exp(rows[i].cs));
      r["L_scar"] = num(std::exp(prod(rows[i].fv, rows[i].cs)));
      r["log_L_fv"] = num(rows[i].fv);
      r["log_L_wcar"] = num(prod(rows[i].fv, rows[i].cw));
      r["log_L_scar"] = num(prod(rows[i].fv, rows[i].cs));
      doc["rows"].push_back(r);
    }
    emit(out, doc);
    return kOk;
  }
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    out << "theta " << vec_text(thetas[i].probs()) << "  support " << set_text(world, thetas[i].support()) << '\n';
    auto line = [&](const char* name, double logv) {
      out << "  " << pad(name, 11) << pad(format_exact(std::exp(logv)), 36) << "log " << format_number(logv)
          << '\n';
    };
    line("L_FV", rows[i].fv);
    line("c_w-car", rows[i].cw);
    line("L_P,w-car", prod(rows[i].fv, rows[i].cw));
    line("c_s-car", rows[i].cs);
    line("L_P,s-car", prod(rows[i].fv, rows[i].cs));
  }
  return kOk;
}

// ---------------------------------------------------------------- compat

int cmd_compat(const Globals& g, const std::string& path, const std::vector<std::string>& theta_texts,
               const std::string& model_file, std::ostream& out) {
  const ObservedSample sample = read_observations_file(path);
  const World& world = *sample.world();
  const auto thetas = collect_thetas(sample.world(), theta_texts, model_file);
  if (thetas.empty()) throw InputError("compat needs --theta or --model-file");

  Json doc;
  doc["command"] = "compat";
  doc["results"] = Json::array();
  for (const auto& theta : thetas) {
    const auto c = is_compatible(sample, theta, g.tol);
    const auto w = is_wcar_compatible(sample, theta, g.tol);
    const auto s = is_scar_compatible(sample, theta, g.tol);
    if (g.json()) {
      Json r;
      r["theta"] = num_vec(theta.probs());
      r["compatible"] = c.compatible;
      r["deficit"] = num(c.deficit);
      if (!c.compatible) {
        r["hall_set"] = set_key(world, c.hall_set);
        r["hall_excess"] = num(c.hall_excess);
      }
      r["wcar_compatible"] = w.compatible;
      r["world_sums"] = num_vec(w.world_sums);
      r["scar_compatible"] = s.compatible;
      doc["results"].push_back(r);
      continue;
    }
    out << "theta " << vec_text(theta.probs()) << '\n';
    out << "  m ~ P_theta        " << yes_no(c.compatible);
    if (!c.compatible) {
      out << "  (set " << set_text(world, c.hall_set) << " receives " << format_exact(c.hall_excess)
          << " more observed mass than its probability)";
    }
    out << '\n';
    out << "  m ~w-car P_theta   " << yes_no(w.compatible) << "  world sums";
    for (std::size_t i = 0; i < world.size(); ++i) out << ' ' << world.label(i) << '=' << format_exact(w.world_sums[i]);
    out << '\n';
    out << "  m ~s-car P_theta   " << yes_no(s.compatible) << '\n';
  }
  if (g.json()) emit(out, doc);
  return kOk;
}

// ---------------------------------------------------------------- cfactor

int cmd_cfactor(const Globals& g, const std::string& path, const std::string& support, bool scar, std::ostream& out,
                std::ostream& err) {
  const ObservedSample sample = read_observations_file(path);
  const World& world = *sample.world();
  if (scar == !support.empty()) throw InputError("cfactor needs exactly one of --support or --scar");
  const CFactorResult r = scar ? c_scar(sample) : c_wcar(CoarseSet::parse(sample.world(), support, ','), sample);

  if (g.json()) {
    Json doc;
    doc["command"] = "cfactor";
    doc["support"] = scar ? set_key(world, world.full_mask()) : set_key(world, CoarseSet::parse(sample.world(), support).mask());
    doc["value"] = num(r.value());
    doc["log_value"] = num(r.log_value);
    Json arg = Json::object();
    for (const auto& [u, v] : r.argmax) arg[set_key(world, u)] = num(v);
    doc["argmax"] = arg;
    Json binding = Json::object();
    for (std::size_t w = 0; w < world.size(); ++w) binding[world.label(w)] = to_string(r.binding[w]);
    doc["binding"] = binding;
    doc["uncovered"] = Json::array();
    for (Mask u : r.uncovered) doc["uncovered"].push_back(set_key(world, u));
    doc["solver"] = r.solver == CFactorSolver::DualCoordinate ? "dual-coordinate" : "projected-gradient";
    doc["iterations"] = r.iterations;
    doc["converged"] = r.converged;
    doc["kkt_residual"] = num(r.kkt_residual);
    emit(out, doc);
  } else {
    out << (scar ? "c_s-car" : "c_w-car") << "  " << format_exact(r.value()) << "  log " << format_number(r.log_value)
        << '\n';
    if (!r.uncovered.empty()) {
      out << "observed sets missing the support:";
      for (Mask u : r.uncovered) out << ' ' << set_text(world, u);
      out << '\n';
    }
    for (const auto& [u, v] : r.argmax) out << "  lambda " << pad(set_text(world, u), 20) << format_exact(v) << '\n';
    for (std::size_t w = 0; w < world.size(); ++w) {
      out << "  row " << pad(world.label(w), 12) << to_string(r.binding[w]) << '\n';
    }
    out << "solver " << (r.solver == CFactorSolver::DualCoordinate ? "dual-coordinate" : "projected-gradient")
        << ", " << r.iterations << " sweeps, kkt residual " << format_number(r.kkt_residual) << '\n';
  }
  if (!r.converged) {
    err << "error: the c-factor solver did not converge\n";
    return kNumericalError;
  }
  return kOk;
}

// ---------------------------------------------------------------- hull

int cmd_hull(const Globals& g, const std::string& path, std::ostream& out) {
  const ObservedSample sample = read_observations_file(path);
  const HullResult hull = dempster_extremes(sample);
  if (g.json()) {
    Json doc;
    doc["command"] = "hull";
    doc["orderings_tried"] = hull.orderings_tried;
    doc["extremes"] = Json::array();
    for (const auto& e : hull.extremes) doc["extremes"].push_back(num_vec(e.probs()));
    emit(out, doc);
    return kOk;
  }
  out << hull.extremes.size() << " extreme points from " << hull.orderings_tried << " orderings\n";
  for (const auto& e : hull.extremes) out << "  " << vec_text(e.probs()) << '\n';
  return kOk;
}

// ---------------------------------------------------------------- scar-test

int cmd_scar_test(const Globals& g, const std::string& path, const std::string& model_text, std::ostream& out) {
  const ObservedSample sample = read_observations_file(path);
  const CompleteDataModel model = parse_model_spec(sample.world(), model_text);
  const LrtResult r = lrt_scar(model, sample);
  if (g.json()) {
    Json doc;
    doc["command"] = "scar-test";
    doc["model"] = model.name();
    doc["statistic"] = num(r.statistic);
    doc["sup_saturated"] = num(r.sup_saturated);
    doc["sup_scar"] = num(r.sup_scar);
    doc["log_c_scar"] = num(r.log_c_scar);
    doc["log_fv"] = num(r.fit->log_fv);
    doc["params"] = num_vec(r.fit->params);
    emit(out, doc);
    return kOk;
  }
  out << "model " << model.name() << '\n';
  out << "  T = 2 (sup saturated - sup s-car)  " << format_number(r.statistic) << '\n';
  out << "  sup saturated (log)                " << format_number(r.sup_saturated) << '\n';
  out << "  sup s-car (log)                    " << format_number(r.sup_scar) << '\n';
  out << "    log c_s-car                      " << format_number(r.log_c_scar) << '\n';
  out << "    max log L_FV                     " << format_number(r.fit->log_fv) << " at "
      << vec_text(r.fit->params) << '\n';
  return kOk;
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const Globals& g, const std::string& model_path, std::uint64_t n, const std::string& out_path,
                 std::ostream& out) {
  const ModelFile file = read_model_file(model_path);
  if (!file.lambda) throw InputError(model_path + ": simulate needs 'lambda'");
  std::optional<CompleteDistribution> theta = file.theta;
  if (!theta && file.model && file.params) theta = file.model->to_distribution(*file.params);
  if (!theta) throw InputError(model_path + ": simulate needs 'theta' or 'model' with 'params'");
  const ObservedSample sample = sample_coarse(*theta, *file.lambda, n, g.seed);
  if (out_path.empty()) {
    write_observations(out, sample);
    return kOk;
  }
  std::ofstream f(out_path);
  if (!f) throw InputError("cannot write '" + out_path + "'");
  write_observations(f, sample);
  f.close();
  if (!f) throw InputError("failed writing '" + out_path + "'");
  if (g.json()) {
    Json doc;
    doc["command"] = "simulate";
    doc["out"] = out_path;
    doc["observations"] = sample.total();
    doc["distinct_sets"] = sample.distinct();
    doc["seed"] = g.seed;
    emit(out, doc);
  } else {
    out << "wrote " << sample.total() << " observations (" << sample.distinct() << " distinct sets) to " << out_path
        << '\n';
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Coarse data analysis: car conditions, profile likelihoods and estimation"};
  app.name("coarse");
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--tol", g.tol, "Tolerance for condition checks")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"text", "json"}));

  std::string path;
  auto* check = app.add_subcommand("check", "Check w-car, s-car and fair evidence for (theta, lambda)");
  check->add_option("model-file", path, "Model file with theta and lambda")->required();

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Maximum-likelihood fits");
  fit_cmd->add_option("observations", fit.path, "Observations file")->required();
  fit_cmd->add_option("--class", fit.coarsening, "fv, wcar or scar")->check(CLI::IsMember({"fv", "wcar", "scar"}));
  fit_cmd->add_option("--model", fit.model, "saturated, paired-binary or fixed-support:<labels>");
  fit_cmd->add_option("--support", fit.support, "Restrict the saturated fit to this support");
  fit_cmd->add_flag("--all-maxima", fit.all_maxima, "Report every local maximum / stratum");
  fit_cmd->add_option("--grid", fit.grid, "Grid points per axis for parametric fits")->check(CLI::Range(3, 100001));

  ProfileArgs prof;
  auto* prof_cmd = app.add_subcommand("profile", "Face-value and profile likelihoods at given distributions");
  prof_cmd->add_option("observations", prof.path, "Observations file")->required();
  prof_cmd->add_option("--theta", prof.thetas, "Comma-separated probabilities (repeatable)");
  prof_cmd->add_option("--model-file", prof.model_file, "Model file with theta, thetas or model+params");
  prof_cmd->add_option("--grid", prof.grid, "Grid step for a parameter scan");
  prof_cmd->add_option("--model", prof.model, "Model for --grid");

  std::vector<std::string> compat_thetas;
  std::string compat_model;
  auto* compat = app.add_subcommand("compat", "Compatibility of the empirical distribution with theta");
  compat->add_option("observations", path, "Observations file")->required();
  compat->add_option("--theta", compat_thetas, "Comma-separated probabilities (repeatable)");
  compat->add_option("--model-file", compat_model, "Model file with theta");

  std::string support;
  bool scar = false;
  auto* cf = app.add_subcommand("cfactor", "Maximized coarsening factor");
  cf->add_option("observations", path, "Observations file")->required();
  cf->add_option("--support", support, "Support V for the w-car factor");
  cf->add_flag("--scar", scar, "Strong car factor");

  auto* hull = app.add_subcommand("hull", "Extreme points of the distributions compatible with the data");
  hull->add_option("observations", path, "Observations file")->required();

  std::string test_model = "saturated";
  auto* test = app.add_subcommand("scar-test", "Likelihood-ratio statistic for strong car");
  test->add_option("observations", path, "Observations file")->required();
  test->add_option("--model", test_model, "saturated, paired-binary or fixed-support:<labels>");

  std::string sim_model;
  std::string sim_out;
  std::uint64_t sim_n = 0;
  auto* sim = app.add_subcommand("simulate", "Draw a coarse sample from theta and lambda");
  sim->add_option("--model-file", sim_model, "Model file with lambda and theta (or model+params)")->required();
  sim->add_option("--n", sim_n, "Number of observations")->required()->check(CLI::PositiveNumber);
  sim->add_option("--out", sim_out, "Output observations file (default: standard output)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }

  try {
    if (check->parsed()) return cmd_check(g, path, out);
    if (fit_cmd->parsed()) return cmd_fit(g, fit, out, err);
    if (prof_cmd->parsed()) return cmd_profile(g, prof, out);
    if (compat->parsed()) return cmd_compat(g, path, compat_thetas, compat_model, out);
    if (cf->parsed()) return cmd_cfactor(g, path, support, scar, out, err);
    if (hull->parsed()) return cmd_hull(g, path, out);
    if (test->parsed()) return cmd_scar_test(g, path, test_model, out);
    if (sim->parsed()) return cmd_simulate(g, sim_model, sim_n, sim_out, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalError;
  }
  return kInputError;
}

}  // namespace coarse::cli
