#include "klab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>
#include <thread>
#include <type_traits>

#include "klab/barrier.hpp"
#include "klab/error.hpp"
#include "klab/projgeom.hpp"
#include "klab/reference.hpp"
#include "klab/stats.hpp"
#include "klab/topology.hpp"

namespace klab {

using nlohmann::json;

// ---------------------------------------------------------------------------
// names and config

namespace {

constexpr std::pair<ExperimentKind, const char*> kNames[] = {
    {ExperimentKind::bounds, "bounds"},
    {ExperimentKind::large_components, "large-components"},
    {ExperimentKind::nests, "nests"},
    {ExperimentKind::separation, "separation"},
    {ExperimentKind::supnorm_tail, "supnorm-tail"},
    {ExperimentKind::univariate_roots, "univariate-roots"},
    {ExperimentKind::barrier_stability, "barrier-stability"},
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto pos = s.find(',', start);
    const auto end = pos == std::string_view::npos ? s.size() : pos;
    auto item = trim(s.substr(start, end - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError("bad value for '" + std::string(key) + "': '" + s + "'");
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("bad boolean for '" + std::string(key) + "': '" + s + "'");
}

}  // namespace

const char* to_string(ExperimentKind k) noexcept {
  for (const auto& [kind, name] : kNames)
    if (kind == k) return name;
  return "?";
}

ExperimentKind parse_experiment(std::string_view s) {
  for (const auto& [kind, name] : kNames)
    if (s == name) return kind;
  throw ConfigError("unknown experiment '" + std::string(s) + "'");
}

void ExperimentConfig::set(std::string_view key_in, std::string_view value) {
  const std::string key = trim(key_in);
  if (key == "experiment") {
    experiment = parse_experiment(trim(value));
  } else if (key == "d" || key == "degrees") {
    degrees.clear();
    for (const auto& item : split_list(value)) degrees.push_back(parse_number<int>(key, item));
  } else if (key == "f" || key == "f_values") {
    f_values.clear();
    for (const auto& item : split_list(value)) f_values.push_back(parse_number<double>(key, item));
  } else if (key == "g") {
    g = parse_number<double>(key, value);
  } else if (key == "alpha") {
    alpha = parse_number<double>(key, value);
  } else if (key == "p1_f") {
    p1_f = parse_number<double>(key, value);
  } else if (key == "epsilon") {
    epsilon = parse_number<double>(key, value);
  } else if (key == "m") {
    m = parse_number<int>(key, value);
  } else if (key == "trials") {
    trials = parse_number<std::size_t>(key, value);
  } else if (key == "seed") {
    seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "resolution") {
    resolution = parse_number<int>(key, value);
  } else if (key == "r_max") {
    r_max = parse_number<double>(key, value);
  } else if (key == "refine_check") {
    refine_check = parse_bool(key, value);
  } else if (key == "subspace") {
    subspace = trim(value);
  } else if (key == "kinds") {
    kinds = split_list(value);
  } else if (key == "convention") {
    convention = parse_convention(trim(value));
  } else if (key == "workers") {
    workers = parse_number<int>(key, value);
  } else if (key == "out" || key == "out_dir") {
    out_dir = trim(value);
  } else if (key == "format") {
    format = trim(value);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (degrees.empty()) throw ConfigError("at least one degree is required");
  const int min_degree =
      (experiment == ExperimentKind::bounds || experiment == ExperimentKind::barrier_stability ||
       experiment == ExperimentKind::supnorm_tail || experiment == ExperimentKind::nests)
          ? 2
          : 1;
  for (int d : degrees) {
    if (d < min_degree) {
      throw ConfigError(std::string(to_string(experiment)) + ": degree must be >= " +
                        std::to_string(min_degree));
    }
    if (d > 100000) throw ConfigError("degree too large");
  }
  if (f_values.empty()) throw ConfigError("at least one f value is required");
  for (double f : f_values)
    if (!(f > 0.0) || !std::isfinite(f)) throw ConfigError("f must be positive");
  if (!(g >= 0.0) || !std::isfinite(g)) throw ConfigError("g must be >= 0 (0 = default)");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (!(p1_f > 0.0)) throw ConfigError("p1_f must be positive");
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw ConfigError("epsilon must lie in (0, 1/2)");
  if (m < 1) throw ConfigError("m must be >= 1");
  if (resolution < 0) throw ConfigError("resolution must be >= 0");
  if (!(r_max > 0.0) || r_max > 1e3) throw ConfigError("r_max must lie in (0, 1000]");
  if (subspace != "p2" && subspace != "x0") throw ConfigError("subspace must be 'p2' or 'x0'");
  if (kinds.empty()) throw ConfigError("kinds must not be empty");
  for (const auto& k : kinds)
    if (k != "P0" && k != "P1" && k != "P2") throw ConfigError("unknown reference kind '" + k + "'");
  if (workers < 1 || workers > 1024) throw ConfigError("workers must lie in [1, 1024]");
  if (format != "csv" && format != "json") throw ConfigError("format must be 'csv' or 'json'");

  if (experiment == ExperimentKind::large_components) {
    for (int d : degrees)
      for (double f : f_values)
        if (6.0 * f > d) throw ConfigError("large-components: need 6 f <= d for the packing radius");
  }
  if (experiment == ExperimentKind::barrier_stability || experiment == ExperimentKind::bounds) {
    for (int d : degrees) {
      for (double f : f_values)
        if (f > d) throw ConfigError("f must not exceed d");
      if (g > d) throw ConfigError("g must not exceed d");
    }
  }
}

json ExperimentConfig::to_json() const {
  return json{{"experiment", to_string(experiment)},
              {"d", degrees},
              {"f", f_values},
              {"g", g},
              {"alpha", alpha},
              {"p1_f", p1_f},
              {"epsilon", epsilon},
              {"m", m},
              {"trials", trials},
              {"seed", seed},
              {"resolution", resolution},
              {"r_max", r_max},
              {"refine_check", refine_check},
              {"subspace", subspace},
              {"kinds", kinds},
              {"convention", to_string(convention)},
              {"workers", workers},
              {"out", out_dir},
              {"format", format}};
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config JSON must be an object");
  ExperimentConfig cfg;
  for (const auto& [key, value] : j.items()) {
    std::string text;
    if (value.is_array()) {
      for (const auto& item : value) {
        if (!text.empty()) text += ',';
        text += item.is_string() ? item.get<std::string>() : item.dump();
      }
    } else if (value.is_string()) {
      text = value.get<std::string>();
    } else {
      text = value.dump();
    }
    cfg.set(key, text);
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::from_ini(std::string_view text) {
  ExperimentConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty() || t.front() == '[') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    cfg.set(t.substr(0, eq), t.substr(eq + 1));
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  if (path.size() >= 5 && path.ends_with(".json")) {
    try {
      return from_json(json::parse(buf.str()));
    } catch (const json::exception& e) {
      throw ConfigError("config JSON: " + std::string(e.what()));
    }
  }
  return from_ini(buf.str());
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string format_number(long long x) { return std::to_string(x); }

// ---------------------------------------------------------------------------
// harness

namespace {

using Clock = std::chrono::steady_clock;

template <class Fn>
auto parallel_map(std::size_t n, int workers, Fn fn) {
  using R = std::invoke_result_t<Fn&, std::size_t>;
  std::vector<std::optional<R>> slots(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, workers)), n);
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(work);
    work();
  }
  if (error) std::rethrow_exception(error);
  std::vector<R> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

struct Row {
  std::vector<std::string> cells;
  double ms = 0.0;
};

template <class Fn>
Row timed(Fn&& fn) {
  const auto t0 = Clock::now();
  Row r;
  r.cells = fn();
  r.ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  return r;
}

void append(ExperimentResult& res, std::vector<Row>&& rows) {
  for (auto& r : rows) {
    res.trials.rows.push_back(std::move(r.cells));
    res.wall_ms.push_back(r.ms);
  }
}

std::uint64_t block_seed(const ExperimentConfig& cfg, int d, std::size_t param) {
  const std::uint64_t tag = (static_cast<std::uint64_t>(cfg.experiment) << 56) ^
                            (static_cast<std::uint64_t>(d) << 20) ^ static_cast<std::uint64_t>(param);
  return derive_seed(cfg.seed, tag);
}

SamplerConfig sampler(const ExperimentConfig& cfg, int d, std::size_t param) {
  return {d, cfg.convention, block_seed(cfg, d, param)};
}

const char* yes_no(bool b) { return b ? "1" : "0"; }

json interval_json(const Interval& ci) { return json::array({ci.lo, ci.hi}); }

ExperimentResult start(const ExperimentConfig& cfg, ExperimentKind kind) {
  ExperimentConfig c = cfg;
  c.experiment = kind;
  c.validate();
  ExperimentResult res;
  res.config = c;
  res.summary = json::object();
  res.summary["experiment"] = to_string(kind);
  res.summary["config"] = c.to_json();
  return res;
}

// Outcome of a topological computation with one automatic 4x retry.
template <class T>
struct Attempt {
  std::optional<T> value;
  bool retried = false;
  std::string error;  // kind of the final failure
};

// A certified boundary crossing or a vanishing center value does not
// depend on resolution, so only the remaining kinds are retried.
bool resolution_dependent(TopologyErrorKind k) {
  return k != TopologyErrorKind::boundary_crossing && k != TopologyErrorKind::degenerate_point;
}

template <class Fn>
auto with_retry(Fn fn) {
  using T = std::invoke_result_t<Fn&, int>;
  Attempt<T> a;
  try {
    a.value = fn(1);
    return a;
  } catch (const TopologyError& e) {
    a.error = to_string(e.kind());
    if (!resolution_dependent(e.kind())) return a;
    a.retried = true;
  }
  try {
    a.value = fn(4);
    a.error.clear();
  } catch (const TopologyError& e) {
    a.error = to_string(e.kind());
  }
  return a;
}

double default_g(ReferenceKind kind, double f) {
  switch (kind) {
    case ReferenceKind::P0: return 6.0 * f;
    case ReferenceKind::P1: return 4.0 * f;
    case ReferenceKind::P2: return 6.0;
  }
  return 1.0;
}

ReferenceKind parse_kind(const std::string& s) {
  if (s == "P0") return ReferenceKind::P0;
  if (s == "P1") return ReferenceKind::P1;
  return ReferenceKind::P2;
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// bounds

ExperimentResult run_bounds(const ExperimentConfig& cfg_in) {
  ExperimentResult res = start(cfg_in, ExperimentKind::bounds);
  const auto& cfg = res.config;
  res.trials.columns = {"d",          "f",           "g",         "kind",       "inf_K_numeric",
                        "inf_K_paper", "m",          "prob_lower_log10", "convention", "order",
                        "norm_sq",    "norm_sq_ref", "norm_ratio", "bound_met",  "factor"};
  json rows = json::array();
  for (int d : cfg.degrees) {
    for (double f : cfg.f_values) {
      for (const auto& kname : cfg.kinds) {
        const ReferenceKind kind = parse_kind(kname);
        if (kind == ReferenceKind::P2 && f != cfg.f_values.front()) continue;  // f-independent
        const auto t0 = Clock::now();
        Reference ref;
        double norm_ref = 0.0;
        int order = 0;
        try {
          switch (kind) {
            case ReferenceKind::P0:
              ref = build_p0(d, f);
              norm_ref = 2.0 * f * f / std::pow(static_cast<double>(d), 4);
              break;
            case ReferenceKind::P1:
              ref = build_p1(d, f, cfg.alpha);
              norm_ref = p1_norm_sq_bound(d, f);
              order = ref.N;
              break;
            case ReferenceKind::P2: {
              const auto pts = separated_points(d, cfg.epsilon, cfg.m);
              ref = build_p2(d, pts, cfg.epsilon);
              norm_ref = 10.0 * cfg.m / std::pow(static_cast<double>(d), 4);
              order = cfg.m;
              break;
            }
          }
        } catch (const ConfigError& e) {
          res.warnings.push_back("skipped " + kname + " at d=" + std::to_string(d) + ", f=" +
                                 format_number(f) + ": " + e.what());
          continue;
        }
        const double g = cfg.g > 0.0 ? cfg.g : std::min<double>(default_g(kind, f), d);
        const BoundaryReport rep = boundary_fs_infimum(ref);
        const BarrierCertificate cert = make_certificate(ref, g, cfg.convention);
        if (!rep.satisfied) {
          res.warnings.push_back(kname + " at d=" + std::to_string(d) + ", f=" + format_number(f) +
                                 ": numeric inf_K " + format_number(rep.numeric_inf) +
                                 " below the closed-form bound " + format_number(rep.closed_form_bound) +
                                 " (below the asymptotic regime)");
        }
        Row r;
        r.cells = {format_number(d),
                   format_number(f),
                   format_number(g),
                   kname,
                   format_number(rep.numeric_inf),
                   format_number(rep.closed_form_bound),
                   format_number(cert.m),
                   format_number(cert.prob_lower.log10),
                   to_string(cfg.convention),
                   format_number(order),
                   format_number(ref.norm_sq),
                   format_number(norm_ref),
                   format_number(ref.norm_sq / norm_ref),
                   yes_no(rep.satisfied),
                   format_number(cert.factor)};
        r.ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        rows.push_back({{"d", d},
                        {"f", f},
                        {"kind", kname},
                        {"g", g},
                        {"order", order},
                        {"norm_sq", ref.norm_sq},
                        {"norm_sq_reference", norm_ref},
                        {"inf_k", rep.numeric_inf},
                        {"inf_k_bound", rep.closed_form_bound},
                        {"bound_met", rep.satisfied},
                        {"m", cert.m},
                        {"log10_probability_bound", cert.prob_lower.log10}});
        std::vector<Row> one;
        one.push_back(std::move(r));
        append(res, std::move(one));
      }
    }
  }
  res.summary["rows"] = rows;
  return res;
}

// ---------------------------------------------------------------------------
// large components

ExperimentResult run_large_components(const ExperimentConfig& cfg_in) {
  ExperimentResult res = start(cfg_in, ExperimentKind::large_components);
  const auto& cfg = res.config;
  res.trials.columns = {"d", "f", "trial", "outcome", "error", "retried"};
  json blocks = json::array();

  for (int d : cfg.degrees) {
    std::vector<double> fs, phats;
    for (std::size_t fi = 0; fi < cfg.f_values.size(); ++fi) {
      const double f = cfg.f_values[fi];
      const SamplerConfig sc = sampler(cfg, d, fi);
      const AnnulusSpec ann{Rotation::identity(), std::sqrt(f / (2.0 * d)), std::sqrt(3.0 * f / (2.0 * d))};

      auto rows = parallel_map(cfg.trials, cfg.workers, [&](std::size_t t) {
        return timed([&] {
          const HomogeneousPoly F = sample_kostlan(sc, t);
          const auto a = with_retry([&](int s) {
            return annulus_class(F, ann, 8 * s, s == 1 ? 0 : 1024);
          });
          const std::string outcome = a.value ? to_string(*a.value) : "indeterminate";
          return std::vector<std::string>{format_number(d), format_number(f), format_number(t), outcome,
                                          a.error, yes_no(a.retried)};
        });
      });

      std::size_t nontrivial = 0, trivial = 0, indeterminate = 0, retried = 0;
      for (const auto& r : rows) {
        const auto& o = r.cells[3];
        if (o == "nontrivial") ++nontrivial;
        else if (o == "trivial") ++trivial;
        else ++indeterminate;
        if (r.cells[5] == "1") ++retried;
      }
      append(res, std::move(rows));

      const std::size_t determinate = nontrivial + trivial;
      const double n = static_cast<double>(cfg.trials);
      const double p_hat = determinate ? static_cast<double>(nontrivial) / determinate : NAN;
      const Interval ci = wilson_interval(nontrivial, determinate);
      const double rho = std::atan(std::sqrt(6.0 * f / d));
      const std::size_t packing = pack_fs_balls(std::min(rho, std::numbers::pi / 4)).size();

      json block{{"d", d},
                 {"f", f},
                 {"trials", cfg.trials},
                 {"nontrivial", nontrivial},
                 {"trivial", trivial},
                 {"indeterminate", indeterminate},
                 {"retried", retried},
                 {"fraction_nontrivial", nontrivial / n},
                 {"fraction_trivial", trivial / n},
                 {"fraction_indeterminate", indeterminate / n},
                 {"p_hat", p_hat},
                 {"ci95", interval_json(ci)},
                 {"ci_excludes_zero", ci.lo > 0.0},
                 {"packing_rho", rho},
                 {"packing_count", packing},
                 {"expected_count_lower_estimate", std::isnan(p_hat) ? 0.0 : p_hat * packing},
                 {"expected_count_ci_low", ci.lo * packing}};

      const double g = cfg.g > 0.0 ? cfg.g : 6.0 * f;
      if (g <= d && f <= d && d >= 2) {
        const BarrierCertificate cert = make_certificate(build_p0(d, f), g, cfg.convention);
        block["barrier"] = {{"g", g},
                            {"inf_k", cert.inf_k},
                            {"m", cert.m},
                            {"probability_bound", cert.prob_lower.value},
                            {"log10_probability_bound", cert.prob_lower.log10},
                            {"dominates", ci.lo >= cert.prob_lower.value}};
      } else {
        res.warnings.push_back("no barrier bound at d=" + std::to_string(d) + ": g exceeds d");
      }
      blocks.push_back(block);
      fs.push_back(f);
      phats.push_back(std::isnan(p_hat) ? 0.0 : p_hat);
    }
    if (fs.size() > 1) {
      const double s = slope(fs, phats);
      res.summary["trend"].push_back({{"d", d}, {"slope_p_hat_vs_f", s}, {"non_increasing", s <= 0.0}});
    }
  }
  res.summary["blocks"] = blocks;
  return res;
}

// ---------------------------------------------------------------------------
// nests

ExperimentResult run_nests(const ExperimentConfig& cfg_in) {
  ExperimentResult res = start(cfg_in, ExperimentKind::nests);
  const auto& cfg = res.config;
  res.trials.columns = {"d",         "trial",     "outcome",        "depth",   "lower_bound", "closed",
                        "open",      "unstable",  "cert_nontrivial", "cert_indeterminate", "retried"};
  json blocks = json::array();
  const ProjectivePoint origin(1.0, 0.0, 0.0);

  for (int d : cfg.degrees) {
    const SamplerConfig sc = sampler(cfg, d, 0);
    const int base_res = cfg.resolution > 0 ? cfg.resolution : default_resolution(d, cfg.r_max);

    std::optional<Reference> p1;
    try {
      p1 = build_p1(d, cfg.p1_f, cfg.alpha);
      if (p1->extremal_radii.front() >= cfg.r_max) p1.reset();
    } catch (const ConfigError& e) {
      res.warnings.push_back("d=" + std::to_string(d) + ": no parity certificate (" + e.what() + ")");
    }

    auto rows = parallel_map(cfg.trials, cfg.workers, [&](std::size_t t) {
      return timed([&] {
        const HomogeneousPoly F = sample_kostlan(sc, t);
        bool unstable = false;
        const auto a = with_retry([&](int s) {
          NestDepth nd = nest_depth_at(F, origin, cfg.r_max, base_res * s);
          if (s == 1 && cfg.refine_check) {
            const NestDepth fine = nest_depth_at(F, origin, cfg.r_max, 2 * base_res - 1);
            if (fine.depth != nd.depth || fine.closed_components != nd.closed_components) {
              unstable = true;
              nd = nest_depth_at(F, origin, cfg.r_max, 4 * base_res + 1);
            }
          }
          return nd;
        });
        int cert_nt = 0, cert_ind = 0;
        if (p1) {
          for (const auto& ann : p1->annuli) {
            try {
              if (annulus_class(F, ann) == AnnulusClass::nontrivial) ++cert_nt;
            } catch (const TopologyError&) {
              ++cert_ind;
            }
          }
        }
        std::vector<std::string> c{format_number(d), format_number(t)};
        if (a.value) {
          c.insert(c.end(), {"ok", format_number(a.value->depth), yes_no(a.value->lower_bound),
                             format_number(a.value->closed_components), format_number(a.value->open_components)});
        } else {
          c.insert(c.end(), {"indeterminate", "", "", "", ""});
        }
        c.insert(c.end(), {yes_no(unstable), format_number(cert_nt), format_number(cert_ind), yes_no(a.retried)});
        return c;
      });
    });

    std::vector<double> depths;
    std::map<int, std::size_t> histogram;
    std::size_t indeterminate = 0, lower_bound = 0, unstable = 0, at_least_one = 0, at_least_half = 0;
    std::size_t cert_full = 0, cert_inconsistent = 0;
    const int half = p1 ? p1->N / 2 : 0;
    for (const auto& r : rows) {
      if (r.cells[2] != "ok") {
        ++indeterminate;
        continue;
      }
      const int depth = std::stoi(r.cells[3]);
      depths.push_back(depth);
      ++histogram[depth];
      if (r.cells[4] == "1") ++lower_bound;
      if (r.cells[7] == "1") ++unstable;
      if (depth >= 1) ++at_least_one;
      const int cert_nt = std::stoi(r.cells[8]);
      if (p1 && depth >= half) ++at_least_half;
      if (p1 && cert_nt == half) ++cert_full;
      // Each nontrivial annulus holds a distinct oval around the center.
      if (cert_nt > depth && r.cells[4] == "0") ++cert_inconsistent;
    }
    append(res, std::move(rows));

    const MeanStats ms = mean_stats(depths);
    const double bound = std::sqrt(static_cast<double>(d)) / 2.0;
    json hist = json::object();
    for (const auto& [k, v] : histogram) hist[std::to_string(k)] = v;
    json block{{"d", d},
               {"trials", cfg.trials},
               {"resolution", base_res},
               {"r_max", cfg.r_max},
               {"indeterminate", indeterminate},
               {"lower_bound_flags", lower_bound},
               {"unstable_under_refinement", unstable},
               {"stable_fraction", depths.empty() ? 0.0 : 1.0 - static_cast<double>(unstable) / depths.size()},
               {"depth_histogram", hist},
               {"mean_depth", ms.mean},
               {"std_error", ms.std_error},
               {"sqrt_d_over_2", bound},
               {"mean_within_bound", ms.mean <= bound + 3.0 * ms.std_error},
               {"p_depth_ge_1", depths.empty() ? 0.0 : static_cast<double>(at_least_one) / depths.size()},
               {"p_depth_ge_1_ci95", interval_json(wilson_interval(at_least_one, depths.size()))},
               {"certificate_inconsistencies", cert_inconsistent}};
    if (p1) {
      const NestDepth det = nest_depth_at(p1->normalized(), origin, cfg.r_max, base_res);
      const bool det_ok = det.depth == half;
      if (!det_ok) res.invariants_ok = false;
      block["p1"] = {{"f", cfg.p1_f},
                     {"N", p1->N},
                     {"half_N", half},
                     {"reference_depth", det.depth},
                     {"reference_depth_ok", det_ok},
                     {"p_depth_ge_half_N", depths.empty() ? 0.0 : static_cast<double>(at_least_half) / depths.size()},
                     {"p_depth_ge_half_N_ci95", interval_json(wilson_interval(at_least_half, depths.size()))},
                     {"certificate_full_nest", cert_full}};
    }
    blocks.push_back(block);
  }
  res.summary["blocks"] = blocks;
  return res;
}

// ---------------------------------------------------------------------------
// separation

ExperimentResult run_separation(const ExperimentConfig& cfg_in) {
  ExperimentResult res = start(cfg_in, ExperimentKind::separation);
  const auto& cfg = res.config;
  res.trials.columns = {"d", "trial", "outcome", "groups", "partition", "error", "retried"};
  json blocks = json::array();

  for (int d : cfg.degrees) {
    const auto points = separated_points(d, cfg.epsilon, cfg.m);
    const SamplerConfig sc = sampler(cfg, d, 0);
    const int base_res = cfg.resolution > 0 ? cfg.resolution : separation_grid_resolution(d);
    const SphereGrid& grid = shared_sphere_grid(base_res);

    auto rows = parallel_map(cfg.trials, cfg.workers, [&](std::size_t t) {
      return timed([&] {
        const HomogeneousPoly F = sample_kostlan(sc, t);
        const auto a = with_retry([&](int s) {
          return separation_classes(F, points, s == 1 ? grid : shared_sphere_grid(4 * base_res));
        });
        std::vector<std::string> c{format_number(d), format_number(t)};
        if (a.value) {
          const bool sep = static_cast<int>(a.value->size()) == cfg.m;
          c.insert(c.end(), {sep ? "separated" : "joined", format_number(a.value->size()),
                             partition_to_json(*a.value), a.error});
        } else {
          c.insert(c.end(), {"indeterminate", "", "", a.error});
        }
        c.push_back(yes_no(a.retried));
        return c;
      });
    });

    std::size_t separated = 0, joined = 0, indeterminate = 0;
    for (const auto& r : rows) {
      if (r.cells[2] == "separated") ++separated;
      else if (r.cells[2] == "joined") ++joined;
      else ++indeterminate;
    }
    append(res, std::move(rows));

    const Reference p2 = build_p2(d, points, cfg.epsilon);
    bool det_ok = false;
    std::string det_partition;
    try {
      const auto groups = separation_classes(p2.normalized(), points, grid);
      det_ok = static_cast<int>(groups.size()) == cfg.m;
      det_partition = partition_to_json(groups);
    } catch (const TopologyError& e) {
      det_partition = std::string("error: ") + e.what();
    }
    if (!det_ok) res.invariants_ok = false;

    const std::size_t determinate = separated + joined;
    const Interval ci = wilson_interval(separated, determinate);
    blocks.push_back({{"d", d},
                      {"m", cfg.m},
                      {"epsilon", cfg.epsilon},
                      {"grid_resolution", base_res},
                      {"trials", cfg.trials},
                      {"separated", separated},
                      {"joined", joined},
                      {"indeterminate", indeterminate},
                      {"p_hat", determinate ? static_cast<double>(separated) / determinate : NAN},
                      {"ci95", interval_json(ci)},
                      {"ci_excludes_zero", ci.lo > 0.0},
                      {"reference_partition", det_partition},
                      {"reference_separated", det_ok}});
  }
  res.summary["blocks"] = blocks;
  return res;
}

// ---------------------------------------------------------------------------
// sup-norm tails

ExperimentResult run_supnorm_tail(const ExperimentConfig& cfg_in) {
  ExperimentResult res = start(cfg_in, ExperimentKind::supnorm_tail);
  const auto& cfg = res.config;
  res.trials.columns = {"d", "trial", "sup_full", "sup_subspace"};
  json blocks = json::array();
  std::vector<double> ratio_full, ratio_sub, logd, exceed_full;

  for (int d : cfg.degrees) {
    const SamplerConfig sc = sampler(cfg, d, 0);
    HomogeneousPoly v(d);
    if (cfg.subspace == "p2") {
      v = build_p2(d, separated_points(d, cfg.epsilon, cfg.m), cfg.epsilon).normalized();
    } else {
      v.set({d, 0, 0}, 1.0);
      v = normalize_l2(v);
    }

    auto rows = parallel_map(cfg.trials, cfg.workers, [&](std::size_t t) {
      return timed([&] {
        const double full = sup_norm_estimate(sample_unit_sphere(sc, t), cfg.resolution);
        const double sub = sup_norm_estimate(normalize_l2(sample_in_hyperplane(sc, v, t)), cfg.resolution);
        return std::vector<std::string>{format_number(d), format_number(t), format_number(full),
                                        format_number(sub)};
      });
    });
    std::vector<double> full, sub;
    for (const auto& r : rows) {
      full.push_back(std::stod(r.cells[2]));
      sub.push_back(std::stod(r.cells[3]));
    }
    append(res, std::move(rows));

    const double sl = std::sqrt(std::log(static_cast<double>(d)));
    const double med_full = quantile(full, 0.5);
    const double med_sub = quantile(sub, 0.5);
    auto exceed = [](const std::vector<double>& x, double thr) {
      return static_cast<double>(std::count_if(x.begin(), x.end(), [&](double s) { return s > thr; })) / x.size();
    };
    const int grid_res = std::max(8, static_cast<int>(std::ceil(2.0 * std::sqrt(static_cast<double>(d)))));
    const SubspaceDiag diag = subspace_alpha(v, shared_sphere_grid(grid_res));
    const double p0_sup = sup_norm_estimate(build_p0(d, 1.0).normalized(), cfg.resolution);

    ratio_full.push_back(med_full / sl);
    ratio_sub.push_back(med_sub / sl);
    logd.push_back(std::log(static_cast<double>(d)));
    exceed_full.push_back(exceed(full, 2.0 * med_full));
    blocks.push_back({{"d", d},
                      {"samples", cfg.trials},
                      {"sqrt_log_d", sl},
                      {"full", {{"q10", quantile(full, 0.1)},
                                {"median", med_full},
                                {"q90", quantile(full, 0.9)},
                                {"q99", quantile(full, 0.99)},
                                {"max", *std::max_element(full.begin(), full.end())},
                                {"median_over_sqrt_log_d", med_full / sl},
                                {"exceedance_2x_median", exceed(full, 2.0 * med_full)}}},
                      {"subspace", {{"v", cfg.subspace},
                                    {"q10", quantile(sub, 0.1)},
                                    {"median", med_sub},
                                    {"q90", quantile(sub, 0.9)},
                                    {"q99", quantile(sub, 0.99)},
                                    {"max", *std::max_element(sub.begin(), sub.end())},
                                    {"median_over_sqrt_log_d", med_sub / sl},
                                    {"exceedance_2x_median", exceed(sub, 2.0 * med_sub)}}},
                      {"median_relative_difference", std::abs(med_full - med_sub) / med_full},
                      {"alpha", {{"alpha_d", diag.alpha_d},
                                 {"band_lo", diag.band_lo},
                                 {"band_hi", diag.band_hi},
                                 {"mean_diag", diag.mean_diag},
                                 {"k_d", diag.k_d},
                                 {"grid_resolution", diag.grid_resolution}}},
                      {"p0_sup_norm", p0_sup}});
  }
  auto spread = [](const std::vector<double>& r) {
    return *std::max_element(r.begin(), r.end()) / *std::min_element(r.begin(), r.end());
  };
  double c_fit = 0.0;
  for (double r : ratio_full) c_fit += r;
  c_fit /= ratio_full.size();
  for (auto& b : blocks) {
    b["p0_over_fitted_c_sqrt_log_d"] = b["p0_sup_norm"].get<double>() / (c_fit * b["sqrt_log_d"].get<double>());
  }
  res.summary["blocks"] = blocks;
  res.summary["fitted_c"] = c_fit;
  res.summary["ratio_spread_full"] = spread(ratio_full);
  res.summary["ratio_spread_subspace"] = spread(ratio_sub);
  res.summary["exceedance_slope_vs_log_d"] = slope(logd, exceed_full);
  return res;
}

// ---------------------------------------------------------------------------
// univariate roots

ExperimentResult run_univariate_roots(const ExperimentConfig& cfg_in) {
  ExperimentResult res = start(cfg_in, ExperimentKind::univariate_roots);
  const auto& cfg = res.config;
  res.trials.columns = {"d", "trial", "roots", "flagged", "fallback"};
  json blocks = json::array();
  for (int d : cfg.degrees) {
    const std::uint64_t seed = block_seed(cfg, d, 0);
    auto rows = parallel_map(cfg.trials, cfg.workers, [&](std::size_t t) {
      return timed([&] {
        Rng rng = make_rng(seed, t, Stream::univariate);
        const RootCount rc = count_real_roots(sample_univariate_kostlan(d, rng));
        return std::vector<std::string>{format_number(d), format_number(t), format_number(rc.count),
                                        yes_no(rc.flagged), yes_no(rc.used_fallback)};
      });
    });
    std::vector<double> counts;
    std::size_t flagged = 0, fallback = 0;
    for (const auto& r : rows) {
      counts.push_back(std::stod(r.cells[2]));
      if (r.cells[3] == "1") ++flagged;
      if (r.cells[4] == "1") ++fallback;
    }
    append(res, std::move(rows));
    const MeanStats ms = mean_stats(counts);
    const double expected = std::sqrt(static_cast<double>(d));
    const double z = ms.std_error > 0.0 ? (ms.mean - expected) / ms.std_error : 0.0;
    blocks.push_back({{"d", d},
                      {"samples", cfg.trials},
                      {"mean_roots", ms.mean},
                      {"std_error", ms.std_error},
                      {"sqrt_d", expected},
                      {"z_score", z},
                      {"within_3_sigma", std::abs(ms.mean - expected) <= 3.0 * ms.std_error},
                      {"flagged", flagged},
                      {"fallback", fallback}});
  }
  res.summary["blocks"] = blocks;
  return res;
}

// ---------------------------------------------------------------------------
// barrier stability

namespace {

// One ball per independent region: P0/P1 share a single ball around the
// origin holding all of K; P2 has one ball and one annulus per center.
struct Region {
  BallSpec ball;
  std::vector<std::size_t> circles;  // indices into ref.boundary
  std::vector<std::size_t> annuli;   // indices into ref.annuli
  double factor = 0.0;
};

Reference build_reference(ReferenceKind kind, int d, const ExperimentConfig& cfg) {
  switch (kind) {
    case ReferenceKind::P0: return build_p0(d, cfg.f_values.front());
    case ReferenceKind::P1: return build_p1(d, cfg.p1_f, cfg.alpha);
    case ReferenceKind::P2: return build_p2(d, separated_points(d, cfg.epsilon, cfg.m), cfg.epsilon);
  }
  throw ConfigError("unknown reference kind");
}

// Sign changes of F along the projective line through frame * e0 in the
// direction phi, sampled on a half great circle; parity must be d mod 2.
int line_crossings(const HomogeneousPoly& f, const Rotation& frame, double phi) {
  const Vec3 c = frame.apply(Vec3{1.0, 0.0, 0.0});
  const Vec3 w = frame.apply(Vec3{0.0, std::cos(phi), std::sin(phi)});
  constexpr int n = 4096;
  std::vector<Vec3> pts(n + 1);
  pts[0] = c;
  for (int k = 1; k <= n; ++k) {
    const double th = std::numbers::pi * k / n;
    pts[k] = k == n ? Vec3{-c[0], -c[1], -c[2]}
                    : Vec3{std::cos(th) * c[0] + std::sin(th) * w[0], std::cos(th) * c[1] + std::sin(th) * w[1],
                           std::cos(th) * c[2] + std::sin(th) * w[2]};
  }
  const std::vector<double> v = evaluate_homogeneous(f, std::span<const Vec3>(pts));
  int crossings = 0;
  for (int k = 1; k <= n; ++k)
    if ((v[k] < 0.0) != (v[k - 1] < 0.0)) ++crossings;
  return crossings;
}

}  // namespace

ExperimentResult run_barrier_stability(const ExperimentConfig& cfg_in) {
  ExperimentResult res = start(cfg_in, ExperimentKind::barrier_stability);
  const auto& cfg = res.config;
  res.trials.columns = {"kind", "d", "trial", "a", "max_sup_ratio", "class_ok", "sup_ok", "line_parity_ok"};
  json blocks = json::array();
  constexpr int kCircleSamples = 512;

  for (int d : cfg.degrees) {
    for (std::size_t ki = 0; ki < cfg.kinds.size(); ++ki) {
      const std::string& kname = cfg.kinds[ki];
      const ReferenceKind kind = parse_kind(kname);
      Reference ref;
      try {
        ref = build_reference(kind, d, cfg);
      } catch (const ConfigError& e) {
        throw ConfigError("barrier-stability " + kname + " at d=" + std::to_string(d) + ": " + e.what());
      }
      const double f = kind == ReferenceKind::P1 ? cfg.p1_f : cfg.f_values.front();
      const double g = cfg.g > 0.0 ? cfg.g : default_g(kind, f);
      if (g > d) throw ConfigError("barrier-stability: g exceeds d for " + kname);
      const HomogeneousPoly P = ref.normalized();
      const BoundaryReport rep = boundary_fs_infimum(ref);

      std::vector<Region> regions;
      if (kind == ReferenceKind::P2) {
        for (std::size_t j = 0; j < ref.points.size(); ++j) {
          Region r{BallSpec::make(ref.points[j], g, d), {2 * j, 2 * j + 1}, {j}, 0.0};
          regions.push_back(r);
        }
      } else {
        Region r{BallSpec::make(ref.points.front(), g, d), {}, {}, 0.0};
        for (std::size_t c = 0; c < ref.boundary.size(); ++c) r.circles.push_back(c);
        for (std::size_t a = 0; a < ref.annuli.size(); ++a) r.annuli.push_back(a);
        regions.push_back(r);
      }
      for (auto& r : regions) {
        double inf = INFINITY;
        for (auto c : r.circles) inf = std::min(inf, rep.per_circle[c]);
        r.factor = local_sup_bound_factor(g, d, inf);
        for (auto c : r.circles) {
          if (ref.boundary[c].radius > r.ball.R()) {
            throw ConfigError("barrier-stability: boundary circle outside the ball; increase g");
          }
        }
      }

      std::vector<AnnulusClass> base;
      for (const auto& ann : ref.annuli) base.push_back(annulus_class(P, ann));
      const bool base_nontrivial =
          std::all_of(base.begin(), base.end(), [](AnnulusClass c) { return c == AnnulusClass::nontrivial; });
      if (!base_nontrivial) res.invariants_ok = false;

      // Boundary sample points and reference values, shared by all trials.
      std::vector<std::vector<Vec3>> circle_pts(ref.boundary.size());
      std::vector<std::vector<double>> circle_p(ref.boundary.size());
      for (std::size_t c = 0; c < ref.boundary.size(); ++c) {
        const auto& bc = ref.boundary[c];
        const int n = bc.radius == 0.0 ? 1 : kCircleSamples;
        for (int k = 0; k < n; ++k) {
          const double t = 2.0 * std::numbers::pi * k / n;
          const Vec3 x = normalized(bc.frame.apply(Vec3{1.0, bc.radius * std::cos(t), bc.radius * std::sin(t)}));
          circle_pts[c].push_back(x);
          const double pv = evaluate_homogeneous(P, x);
          circle_p[c].push_back(pv * pv);
        }
      }

      const SamplerConfig sc = sampler(cfg, d, ki);
      auto rows = parallel_map(cfg.trials, cfg.workers, [&](std::size_t t) {
        return timed([&] {
          const HomogeneousPoly Q = sample_in_hyperplane(sc, P, t);
          std::vector<double> need(regions.size());
          double a2 = 0.0;
          for (std::size_t j = 0; j < regions.size(); ++j) {
            need[j] = regions[j].factor * ball_average_norm_sq_exact(Q, regions[j].ball);
            a2 = std::max(a2, need[j]);
          }
          const double a = std::sqrt(a2);

          double max_ratio = 0.0;
          for (std::size_t j = 0; j < regions.size(); ++j) {
            for (auto c : regions[j].circles) {
              const std::vector<double> q = evaluate_homogeneous(Q, std::span<const Vec3>(circle_pts[c]));
              for (std::size_t k = 0; k < q.size(); ++k)
                max_ratio = std::max(max_ratio, q[k] * q[k] / circle_p[c][k] / need[j]);
            }
          }
          const bool sup_ok = max_ratio <= 1.0 + 1e-9;

          const HomogeneousPoly F = a * P + Q;
          bool class_ok = true;
          for (std::size_t i = 0; i < ref.annuli.size(); ++i) {
            try {
              if (annulus_class(F, ref.annuli[i]) != base[i]) class_ok = false;
            } catch (const TopologyError&) {
              class_ok = false;
            }
          }
          const double phi = std::fmod(2.399963229728653 * static_cast<double>(t), 2.0 * std::numbers::pi);
          const bool parity_ok = line_crossings(F, ref.frames.front(), phi) % 2 == d % 2;
          return std::vector<std::string>{kname, format_number(d), format_number(t), format_number(a),
                                          format_number(max_ratio), yes_no(class_ok), yes_no(sup_ok),
                                          yes_no(parity_ok)};
        });
      });

      std::size_t class_bad = 0, sup_bad = 0, parity_bad = 0;
      double worst_ratio = 0.0;
      for (const auto& r : rows) {
        if (r.cells[5] != "1") ++class_bad;
        if (r.cells[6] != "1") ++sup_bad;
        if (r.cells[7] != "1") ++parity_bad;
        worst_ratio = std::max(worst_ratio, std::stod(r.cells[4]));
      }
      append(res, std::move(rows));
      if (class_bad || sup_bad || parity_bad) res.invariants_ok = false;

      json factors = json::array();
      for (const auto& r : regions) factors.push_back(r.factor);
      blocks.push_back({{"kind", kname},
                        {"d", d},
                        {"g", g},
                        {"annuli", ref.annuli.size()},
                        {"reference_classes_nontrivial", base_nontrivial},
                        {"inf_k", rep.numeric_inf},
                        {"factors", factors},
                        {"trials", cfg.trials},
                        {"class_violations", class_bad},
                        {"sup_bound_violations", sup_bad},
                        {"line_parity_violations", parity_bad},
                        {"worst_sup_ratio", worst_ratio}});
    }
  }
  res.summary["blocks"] = blocks;
  return res;
}

// ---------------------------------------------------------------------------

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.experiment) {
    case ExperimentKind::bounds: return run_bounds(cfg);
    case ExperimentKind::large_components: return run_large_components(cfg);
    case ExperimentKind::nests: return run_nests(cfg);
    case ExperimentKind::separation: return run_separation(cfg);
    case ExperimentKind::supnorm_tail: return run_supnorm_tail(cfg);
    case ExperimentKind::univariate_roots: return run_univariate_roots(cfg);
    case ExperimentKind::barrier_stability: return run_barrier_stability(cfg);
  }
  throw ConfigError("unknown experiment");
}

}  // namespace klab
