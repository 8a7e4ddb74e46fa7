#pragma once

// Declarative Monte Carlo experiments. Each trial is a pure function of
// (config, block, trial index), so output rows do not depend on how many
// workers run them.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "klab/kostlan.hpp"

namespace klab {

enum class ExperimentKind {
  bounds,
  large_components,
  nests,
  separation,
  supnorm_tail,
  univariate_roots,
  barrier_stability,
};

/// CLI spelling, e.g. "large-components".
const char* to_string(ExperimentKind k) noexcept;
/// Throws ConfigError for unknown names.
ExperimentKind parse_experiment(std::string_view s);

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::bounds;
  std::vector<int> degrees{20};
  std::vector<double> f_values{1.0};
  double g = 0.0;         // ball scale; 0 picks the per-kind default
  double alpha = 0.9;     // P1 order: N from floor(alpha f)
  double p1_f = 6.0;      // P1 scale used by nests and barrier-stability
  double epsilon = 0.3;
  int m = 2;
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  int resolution = 0;     // 0 = per-experiment default
  double r_max = 2.0;     // nests: chart half-width
  bool refine_check = true;  // nests: compare against doubled resolution
  std::string subspace = "p2";  // supnorm-tail: "p2" or "x0"
  std::vector<std::string> kinds{"P0", "P1", "P2"};  // bounds, barrier-stability
  VarianceConvention convention = VarianceConvention::half;
  int workers = 1;
  std::string out_dir = ".";
  std::string format = "csv";  // csv or json for the trial table

  /// Checks every parameter domain; throws ConfigError.
  void validate() const;
  nlohmann::json to_json() const;
  /// Missing keys keep their defaults; unknown keys are an error.
  static ExperimentConfig from_json(const nlohmann::json& j);
  /// Flat "key = value" text; '#' and ';' start comments, [sections] ignored.
  static ExperimentConfig from_ini(std::string_view text);
  /// Dispatches on the extension (.json or anything else as INI).
  static ExperimentConfig load(const std::string& path);
  /// Applies one key/value pair using the same keys as the file formats.
  void set(std::string_view key, std::string_view value);
};

/// Rows of string cells. Numbers are formatted by format_number so the
/// text is identical across runs and schedules.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

std::string format_number(double x);
std::string format_number(long long x);
inline std::string format_number(int x) { return format_number(static_cast<long long>(x)); }
inline std::string format_number(std::size_t x) { return format_number(static_cast<long long>(x)); }

struct ExperimentResult {
  ExperimentConfig config;
  Table trials;                  // one row per trial, block then trial order
  std::vector<double> wall_ms;   // parallel to trials.rows
  nlohmann::json summary;
  bool invariants_ok = true;     // false means a check that holds by proof failed
  std::vector<std::string> warnings;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

ExperimentResult run_bounds(const ExperimentConfig& cfg);
ExperimentResult run_large_components(const ExperimentConfig& cfg);
ExperimentResult run_nests(const ExperimentConfig& cfg);
ExperimentResult run_separation(const ExperimentConfig& cfg);
ExperimentResult run_supnorm_tail(const ExperimentConfig& cfg);
ExperimentResult run_univariate_roots(const ExperimentConfig& cfg);
ExperimentResult run_barrier_stability(const ExperimentConfig& cfg);

}  // namespace klab
