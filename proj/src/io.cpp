#include "coarse/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>

#include "coarse/errors.hpp"

namespace coarse {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_labels(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    out.emplace_back(trim(text.substr(start, end - start)));
    start = end + 1;
  }
  return out;
}

double parse_decimal(std::string_view text) {
  text = trim(text);
  double value = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw InputError("not a number: '" + std::string(text) + "'");
  }
  return value;
}

double json_number(const nlohmann::json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    try {
      return parse_number(j.get<std::string>());
    } catch (const InputError& e) {
      throw InputError(where + ": " + e.what());
    }
  }
  throw InputError(where + ": expected a number or a numeric string");
}

std::vector<double> json_vector(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array()) throw InputError(where + ": expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(json_number(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

nlohmann::ordered_json number_json(double x) {
  if (auto f = as_fraction(x); f && f->second > 1) return std::to_string(f->first) + "/" + std::to_string(f->second);
  return x;
}

}  // namespace

ObservedSample parse_observations(std::string_view text) {
  WorldPtr world;
  std::map<Mask, std::uint64_t> counts;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);

    if (line.starts_with("worlds:")) {
      if (world) throw InputError(where + ": duplicate worlds header");
      try {
        world = make_world(split_labels(line.substr(7)));
      } catch (const InputError& e) {
        throw InputError(where + ": " + e.what());
      }
      continue;
    }
    if (!world) throw InputError(where + ": observation before the 'worlds:' header");

    const auto gap = line.find_first_of(" \t");
    if (gap == std::string_view::npos) throw InputError(where + ": expected '<count> <label>{,<label>}'");
    const std::string_view count_text = line.substr(0, gap);
    std::uint64_t count = 0;
    auto [ptr, ec] = std::from_chars(count_text.data(), count_text.data() + count_text.size(), count);
    if (ec != std::errc() || ptr != count_text.data() + count_text.size() || count == 0) {
      throw InputError(where + ": count must be a positive integer, got '" + std::string(count_text) + "'");
    }
    Mask u = 0;
    try {
      u = CoarseSet::parse(world, trim(line.substr(gap)), ',').mask();
    } catch (const InputError& e) {
      throw InputError(where + ": " + e.what());
    }
    if (counts[u] > std::numeric_limits<std::uint64_t>::max() - count) throw InputError(where + ": count overflow");
    counts[u] += count;
  }
  if (!world) throw InputError("missing 'worlds:' header");
  if (counts.empty()) throw InputError("no observations");
  return ObservedSample(world, counts);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ObservedSample read_observations_file(const std::string& path) {
  try {
    return parse_observations(read_text_file(path));
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

void write_observations(std::ostream& out, const ObservedSample& sample) {
  const World& world = *sample.world();
  out << "worlds: ";
  for (std::size_t i = 0; i < world.size(); ++i) out << (i ? "," : "") << world.label(i);
  out << '\n';
  for (const auto& [u, c] : sample.counts()) out << c << '\t' << format_mask(world, u, ",") << '\n';
}

std::string format_observations(const ObservedSample& sample) {
  std::ostringstream out;
  write_observations(out, sample);
  return out.str();
}

CompleteDataModel parse_model_spec(const WorldPtr& world, std::string_view text) {
  text = trim(text);
  if (text == "saturated") return CompleteDataModel::saturated(world);
  if (text == "paired-binary") return CompleteDataModel::paired_binary(world);
  if (text.starts_with("fixed-support:")) {
    return CompleteDataModel::fixed_support(CoarseSet::parse(world, text.substr(14), ','));
  }
  throw InputError("unknown model '" + std::string(text) +
                   "' (expected saturated, paired-binary or fixed-support:<labels>)");
}

ModelFile parse_model_file(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw InputError("model file must be a JSON object");
  if (!doc.contains("worlds") || !doc["worlds"].is_array()) throw InputError("model file needs a 'worlds' array");
  std::vector<std::string> labels;
  for (const auto& l : doc["worlds"]) {
    if (!l.is_string()) throw InputError("world labels must be strings");
    labels.push_back(l.get<std::string>());
  }
  ModelFile file{make_world(std::move(labels)), std::nullopt, std::nullopt, std::nullopt, std::nullopt, {}};
  const std::size_t n = file.world->size();

  for (const auto& [key, value] : doc.items()) {
    if (key != "worlds" && key != "theta" && key != "lambda" && key != "model" && key != "params" &&
        key != "thetas") {
      throw InputError("unknown key '" + key + "' in model file");
    }
  }
  auto read_theta = [&](const nlohmann::json& j, const std::string& where) {
    auto p = json_vector(j, where);
    if (p.size() != n) throw InputError(where + ": expected " + std::to_string(n) + " probabilities");
    try {
      return CompleteDistribution(file.world, std::move(p));
    } catch (const InputError& e) {
      throw InputError(where + ": " + e.what());
    }
  };
  if (doc.contains("theta")) file.theta = read_theta(doc["theta"], "theta");
  if (doc.contains("thetas")) {
    if (!doc["thetas"].is_array()) throw InputError("thetas: expected an array");
    for (std::size_t i = 0; i < doc["thetas"].size(); ++i) {
      file.thetas.push_back(read_theta(doc["thetas"][i], "thetas[" + std::to_string(i) + "]"));
    }
  }
  if (doc.contains("lambda")) {
    const auto& jl = doc["lambda"];
    if (!jl.is_object()) throw InputError("lambda: expected an object keyed by world label");
    std::vector<CoarseningKernel::Row> rows(n);
    for (const auto& [wl, row] : jl.items()) {
      const std::size_t w = file.world->index(wl);
      if (!row.is_object()) throw InputError("lambda." + wl + ": expected an object keyed by set");
      for (const auto& [setkey, v] : row.items()) {
        const Mask u = CoarseSet::parse(file.world, setkey, '|').mask();
        if (rows[w].count(u)) throw InputError("lambda." + wl + ": set '" + setkey + "' listed twice");
        rows[w][u] = json_number(v, "lambda." + wl + "." + setkey);
      }
    }
    for (std::size_t w = 0; w < n; ++w) {
      if (!jl.contains(file.world->label(w))) throw InputError("lambda: missing row for " + file.world->label(w));
    }
    file.lambda = CoarseningKernel(file.world, std::move(rows));
  }
  if (doc.contains("model")) {
    if (!doc["model"].is_string()) throw InputError("model: expected a string");
    file.model = parse_model_spec(file.world, doc["model"].get<std::string>());
  }
  if (doc.contains("params")) {
    file.params = json_vector(doc["params"], "params");
    if (file.model) file.model->to_distribution(*file.params);
  }
  return file;
}

ModelFile read_model_file(const std::string& path) {
  try {
    return parse_model_file(read_text_file(path));
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

std::string format_model_file(const ModelFile& file) {
  nlohmann::ordered_json doc;
  doc["worlds"] = file.world->labels();
  auto vec = [](const std::vector<double>& v) {
    auto arr = nlohmann::ordered_json::array();
    for (double x : v) arr.push_back(number_json(x));
    return arr;
  };
  if (file.theta) doc["theta"] = vec(file.theta->probs());
  if (!file.thetas.empty()) {
    doc["thetas"] = nlohmann::ordered_json::array();
    for (const auto& t : file.thetas) doc["thetas"].push_back(vec(t.probs()));
  }
  if (file.lambda) {
    nlohmann::ordered_json jl = nlohmann::ordered_json::object();
    for (std::size_t w = 0; w < file.world->size(); ++w) {
      nlohmann::ordered_json row = nlohmann::ordered_json::object();
      for (const auto& [u, v] : file.lambda->row(w)) row[format_mask(*file.world, u, "|")] = number_json(v);
      jl[file.world->label(w)] = row;
    }
    doc["lambda"] = jl;
  }
  if (file.model) doc["model"] = file.model->name();
  if (file.params) doc["params"] = vec(*file.params);
  return doc.dump(2) + "\n";
}

double parse_number(std::string_view text) {
  text = trim(text);
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const double num = parse_decimal(text.substr(0, slash));
    const double den = parse_decimal(text.substr(slash + 1));
    if (den == 0.0) throw InputError("zero denominator in '" + std::string(text) + "'");
    return num / den;
  }
  return parse_decimal(text);
}

std::string format_number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  std::ostringstream out;
  out << std::setprecision(12) << x;
  return out.str();
}

std::optional<std::pair<long long, long long>> as_fraction(double x) {
  if (!std::isfinite(x) || std::abs(x) > 1e6) return std::nullopt;
  for (long long q = 1; q <= 10000; ++q) {
    const double p = std::round(x * static_cast<double>(q));
    if (std::abs(x - p / static_cast<double>(q)) <= 1e-12) return std::make_pair(static_cast<long long>(p), q);
  }
  return std::nullopt;
}

std::string format_exact(double x) {
  std::string s = format_number(x);
  if (auto f = as_fraction(x); f && f->second > 1) {
    s += " (" + std::to_string(f->first) + "/" + std::to_string(f->second) + ")";
  }
  return s;
}

}  // namespace coarse
