// Command-line front end: one subcommand per experiment.
//
// Exit codes: 0 success, 2 invariant violation, 3 configuration error,
// 1 anything else.

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "klab/error.hpp"
#include "klab/experiments.hpp"
#include "klab/report.hpp"

namespace {

struct Flag {
  const char* name;   // without the leading dashes
  const char* key;    // ExperimentConfig key
  const char* help;
};

constexpr Flag kCommon[] = {
    {"d", "d", "degree list, comma separated"},
    {"trials", "trials", "trials per block"},
    {"seed", "seed", "master seed"},
    {"resolution", "resolution", "grid resolution (0 = default)"},
    {"convention", "convention", "coefficient variance convention {half|unit}"},
    {"out", "out", "output directory"},
    {"format", "format", "trial table format {csv,json}"},
    {"workers", "workers", "worker threads"},
    {"f", "f", "f value list, comma separated"},
    {"epsilon", "epsilon", "separation exponent epsilon"},
    {"m", "m", "number of separated points"},
};

struct Extra {
  klab::ExperimentKind kind;
  std::vector<Flag> flags;
};

const std::vector<Extra>& extras() {
  static const std::vector<Extra> e = {
      {klab::ExperimentKind::bounds,
       {{"g", "g", "ball scale (0 = per-kind default)"},
        {"alpha", "alpha", "P1 order parameter"},
        {"kinds", "kinds", "reference kinds, e.g. P0,P1,P2"}}},
      {klab::ExperimentKind::large_components, {{"g", "g", "ball scale (0 = 6f)"}}},
      {klab::ExperimentKind::nests,
       {{"r-max", "r_max", "chart half-width around the center"},
        {"p1-f", "p1_f", "f of the P1 parity certificate"},
        {"alpha", "alpha", "P1 order parameter"},
        {"refine-check", "refine_check", "compare against doubled resolution {true|false}"}}},
      {klab::ExperimentKind::supnorm_tail, {{"subspace", "subspace", "hyperplane normal {p2|x0}"}}},
      {klab::ExperimentKind::barrier_stability,
       {{"g", "g", "ball scale (0 = per-kind default)"},
        {"alpha", "alpha", "P1 order parameter"},
        {"p1-f", "p1_f", "f used for P1"},
        {"kinds", "kinds", "reference kinds, e.g. P0,P1,P2"}}},
  };
  return e;
}

constexpr klab::ExperimentKind kAll[] = {
    klab::ExperimentKind::bounds,         klab::ExperimentKind::large_components,
    klab::ExperimentKind::nests,          klab::ExperimentKind::separation,
    klab::ExperimentKind::supnorm_tail,   klab::ExperimentKind::univariate_roots,
    klab::ExperimentKind::barrier_stability,
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kostlan random plane curve laboratory"};
  app.require_subcommand(1);

  struct Bound {
    CLI::Option* opt;
    std::string key;
  };
  std::map<CLI::App*, std::vector<Bound>> bound;
  std::map<CLI::App*, klab::ExperimentKind> kinds;
  std::map<std::string, std::string> raw;
  std::string config_path;

  for (auto kind : kAll) {
    CLI::App* sub = app.add_subcommand(klab::to_string(kind), std::string("run the ") +
                                                                  klab::to_string(kind) + " experiment");
    kinds[sub] = kind;
    sub->add_option("--config", config_path, "INI or JSON config file; flags override it");
    auto add = [&](const Flag& f) {
      CLI::Option* o = sub->add_option(std::string("--") + f.name, raw[f.name], f.help);
      bound[sub].push_back({o, f.key});
    };
    for (const auto& f : kCommon) add(f);
    for (const auto& e : extras())
      if (e.kind == kind)
        for (const auto& f : e.flags) add(f);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 3;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    klab::ExperimentConfig cfg = config_path.empty() ? klab::ExperimentConfig{} : klab::ExperimentConfig::load(config_path);
    cfg.experiment = kinds.at(sub);
    for (const auto& b : bound[sub])
      if (b.opt->count() > 0) cfg.set(b.key, b.opt->as<std::string>());
    cfg.validate();

    const klab::ExperimentResult result = klab::run_experiment(cfg);
    const auto table = klab::write_outputs(result, cfg.out_dir);
    std::cout << klab::to_string(cfg.experiment) << ": " << result.trials.rows.size() << " rows -> "
              << table.string() << '\n';
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
    if (!result.invariants_ok) {
      std::cerr << "invariant violation: see " << (std::filesystem::path(cfg.out_dir) / "summary.json").string()
                << '\n';
      return 2;
    }
    return 0;
  } catch (const klab::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 3;
  } catch (const klab::InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
