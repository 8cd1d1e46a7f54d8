#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "coarse/distribution.hpp"
#include "coarse/model.hpp"
#include "coarse/sample.hpp"

namespace coarse {

/// Observations text format:
///
///   # comment
///   worlds: a,b,c
///   3  a,b
///   1  c
///
/// The header fixes the world order. Each data line is a positive integer
/// count followed by a comma-separated label set. Repeated sets are merged.
ObservedSample parse_observations(std::string_view text);
ObservedSample read_observations_file(const std::string& path);
void write_observations(std::ostream& out, const ObservedSample& sample);
std::string format_observations(const ObservedSample& sample);

/// JSON document describing a world with an optional distribution, kernel,
/// model and parameter vector:
///
///   {"worlds": ["w1","w2"], "theta": [0.5, "1/2"],
///    "lambda": {"w1": {"w1": 1}, "w2": {"w1|w2": "1/3", "w2": "2/3"}},
///    "model": "paired-binary", "params": [0.5, 0.5],
///    "thetas": [[...], ...]}
///
/// Numbers may be JSON numbers or strings holding a decimal or a fraction
/// "p/q". Set keys list labels joined by '|' in any order.
struct ModelFile {
  WorldPtr world;
  std::optional<CompleteDistribution> theta;
  std::optional<CoarseningKernel> lambda;
  std::optional<CompleteDataModel> model;
  std::optional<std::vector<double>> params;
  /// Extra distributions to evaluate side by side.
  std::vector<CompleteDistribution> thetas;
};

ModelFile parse_model_file(std::string_view json_text);
ModelFile read_model_file(const std::string& path);
std::string format_model_file(const ModelFile& file);

/// Parses "saturated", "paired-binary" or "fixed-support:a,b".
CompleteDataModel parse_model_spec(const WorldPtr& world, std::string_view text);

/// Decimal ("0.25", "1e-3") or fraction ("4/27").
double parse_number(std::string_view text);

/// Decimal with 12 significant digits.
std::string format_number(double x);

/// Smallest-denominator fraction p/q (q <= 10^4) within 1e-12 of x.
std::optional<std::pair<long long, long long>> as_fraction(double x);

/// format_number(x), followed by " (p/q)" when x is a recognizable fraction
/// with q > 1.
std::string format_exact(double x);

std::string read_text_file(const std::string& path);

}  // namespace coarse
