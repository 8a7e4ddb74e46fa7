// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 only
// when every selected criterion passes. `--only 3,5` runs a subset.

#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "klab/barrier.hpp"
#include "klab/experiments.hpp"
#include "klab/reference.hpp"
#include "klab/report.hpp"
#include "klab/topology.hpp"
#include "oracles.hpp"

using namespace klab;
using json = nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

using Criterion = std::function<void(Outcome&)>;

ExperimentConfig make(ExperimentKind k, std::vector<int> d, std::size_t trials, std::uint64_t seed) {
  ExperimentConfig c;
  c.experiment = k;
  c.degrees = std::move(d);
  c.trials = trials;
  c.seed = seed;
  c.workers = std::max(1u, std::thread::hardware_concurrency());
  return c;
}

// Monomial norms: Monte Carlo over FS-uniform points and the two closed forms.
void c1(Outcome& o) {
  std::mt19937_64 rng(20240601);
  const int n = 1000000;
  const int dmax = 8;
  std::vector<std::vector<double>> sums(dmax + 1);
  for (int d = 0; d <= dmax; ++d) sums[d].assign(dim_homogeneous(d), 0.0);
  std::array<std::array<double, dmax + 1>, 3> pw{};
  for (int s = 0; s < n; ++s) {
    const auto w = oracle::fs_uniform_moduli(rng);
    for (int j = 0; j < 3; ++j) {
      pw[j][0] = 1.0;
      for (int e = 1; e <= dmax; ++e) pw[j][e] = pw[j][e - 1] * w[j];
    }
    for (int d = 0; d <= dmax; ++d)
      for (int i2 = 0; i2 <= d; ++i2)
        for (int i1 = 0; i1 + i2 <= d; ++i1) sums[d][pack_index(d, i1, i2)] += pw[0][d - i1 - i2] * pw[1][i1] * pw[2][i2];
  }
  double worst = 0.0;
  for (int d = 0; d <= dmax; ++d)
    for (int i2 = 0; i2 <= d; ++i2)
      for (int i1 = 0; i1 + i2 <= d; ++i1) {
        const double mc = sums[d][pack_index(d, i1, i2)] / n;
        const double ex = monomial_l2_norm_sq({d - i1 - i2, i1, i2});
        worst = std::max(worst, std::abs(mc / ex - 1.0));
      }
  o.require(worst <= 0.02, "Monte Carlo within 2%");
  double worst_exact = 0.0;
  for (int d = 2; d <= 300; ++d) {
    const double a = 2.0 / ((d + 2.0) * (d + 1.0));
    const double b = 4.0 / ((d + 2.0) * (d + 1.0) * d * (d - 1.0));
    worst_exact = std::max(worst_exact, std::abs(monomial_l2_norm_sq({d, 0, 0}) / a - 1.0));
    worst_exact = std::max(worst_exact, std::abs(monomial_l2_norm_sq({d - 2, 2, 0}) / b - 1.0));
  }
  o.require(worst_exact <= 4e-16, "closed forms to machine precision");
  o.detail << "max MC rel err " << worst << " over d<=8 at 1e6 samples; max closed-form rel err " << worst_exact;
}

void c2(Outcome& o) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n01;
  double worst = 0.0;
  for (int d : {5, 10, 20, 30}) {
    for (int i = 0; i < 100; ++i) {
      const std::complex<double> z1(n01(rng), n01(rng)), z2(n01(rng), n01(rng));
      worst = std::max(worst, std::abs(bergman_diagonal(d, z1, z2) / static_cast<double>(dim_homogeneous(d)) - 1.0));
    }
  }
  o.require(worst <= 1e-9, "rel tol 1e-9");
  o.detail << "max rel deviation from N_d " << worst;
}

void c3(Outcome& o) {
  double worst = 0.0;
  for (int n = 0; n <= 64; ++n)
    for (int k = 0; k < 1000; ++k) {
      const double t = std::numbers::pi * (k + 0.5) / 1000.0;
      worst = std::max(worst, std::abs(chebyshev_eval(n, std::cos(t)) - std::cos(n * t)));
    }
  o.require(worst <= 1e-8, "T_n(cos t) = cos(n t)");
  bool bound_ok = true;
  for (int n = 0; n <= 40; ++n) {
    const auto c = chebyshev_coeffs(n);
    for (int j = 0; j <= n; ++j) {
      boost::multiprecision::cpp_int b = oracle::binomial(n, j);
      b <<= j;
      bound_ok = bound_ok && abs(c.coeffs[j]) <= b;
    }
  }
  o.require(bound_ok, "coefficient bound, exact integers");
  double worst_re = 0.0;
  for (int n = 1; n <= 64; ++n) {
    for (double x : chebyshev_roots(n)) worst_re = std::max(worst_re, std::abs(chebyshev_eval(n, x)));
    for (double x : chebyshev_extrema(n)) worst_re = std::max(worst_re, std::abs(std::abs(chebyshev_eval(n, x)) - 1.0));
  }
  o.require(worst_re <= 1e-10, "roots and extrema");
  o.detail << "identity err " << worst << "; roots/extrema err " << worst_re;
}

void c4(Outcome& o) {
  double worst = 0.0;
  for (int d : {100, 1000, 10000}) {
    for (double f : {1.0, 2.0, std::log(static_cast<double>(d))}) {
      const Reference r = build_p0(d, f);
      const double lhs = std::pow(static_cast<double>(d), 4) * r.norm_sq / (2 * f * f);
      const double err = std::abs(lhs - (1.0 - 3.0 / d + 4.0 / (f * f)));
      worst = std::max(worst, err * d / 10.0);
      o.require(err <= 10.0 / d, "d=" + std::to_string(d) + " f=" + std::to_string(f));
      o.require(std::abs(r.norm_sq / p0_norm_sq_exact(d, f) - 1.0) < 1e-12, "closed form");
    }
  }
  o.detail << "max |err| / (10/d) = " << worst;
}

void c5(Outcome& o) {
  const int d = 400;
  const double f = 6.0;
  const Reference r = build_p1(d, f, 0.9);
  o.require(r.N == 4, "N = 4");
  o.require(static_cast<int>(r.zero_radii.size()) == r.N / 2, "N/2 radii");
  double worst_zero = 0.0;
  for (std::size_t k = 0; k < r.zero_radii.size(); ++k)
    for (int a = 0; a < 16; ++a) {
      const double t = 2 * std::numbers::pi * a / 16;
      worst_zero = std::max(worst_zero, std::abs(evaluate_affine(r.poly, r.zero_radii[k] * std::cos(t), r.zero_radii[k] * std::sin(t))));
    }
  o.require(worst_zero < 1e-9, "zero circles at R_k");
  // exactly N/2 sign changes along a radius from the centre to r_0
  for (int a = 0; a < 8; ++a) {
    const double t = 2 * std::numbers::pi * a / 8;
    const RayScan s = ray_scan(r.poly, AnnulusSpec{Rotation::identity(), 0.0, r.extremal_radii[0]}, {std::cos(t), std::sin(t)}, 4096);
    o.require(s.crossings == r.N / 2, "crossings along a radius");
  }
  bool alt = true;
  for (std::size_t k = 0; k < r.extremal_radii.size(); ++k) {
    const double v = evaluate_affine(r.poly, r.extremal_radii[k], 0.0);
    alt = alt && ((k % 2 == 0) ? v > 0 : v < 0) && std::abs(std::abs(v) - 1.0) < 1e-9;
  }
  o.require(alt, "sign alternation at r_k");
  o.require(r.norm_sq <= p1_norm_sq_bound(d, f), "norm bound");
  o.detail << "N=" << r.N << ", max |P1| on zero circles " << worst_zero << ", ||P1||^2=" << r.norm_sq << " <= "
           << p1_norm_sq_bound(d, f);
}

void c6(Outcome& o) {
  const Reference r = build_p2(200, separated_points(200, 0.3, 2), 0.3);
  const double base = build_p0(200, 1.0).norm_sq;
  const double cross = std::abs(l2_inner(r.copies[0], r.copies[1]));
  o.require(cross <= 1e-3 * base, "cross term");
  const int d = 1000;
  const Reference big = build_p2(d, separated_points(d, 0.3, 2), 0.3);
  const double scaled = big.norm_sq * std::pow(static_cast<double>(d), 4) / 20.0;
  o.require(scaled >= 0.9 && scaled <= 1.1, "norm band at d=1000");
  o.detail << "cross/||P||^2 = " << cross / base << " at d=200; ||P2||^2 d^4/(10m) = " << scaled << " at d=1000";
}

void c7(Outcome& o) {
  ExperimentConfig c = make(ExperimentKind::barrier_stability, {80}, 1000, 7);
  const ExperimentResult r = run_experiment(c);
  o.require(r.invariants_ok, "invariants");
  for (const auto& b : r.summary["blocks"]) {
    const std::string k = b["kind"];
    o.require(b["class_violations"] == 0, k + " class changes");
    o.require(b["sup_bound_violations"] == 0, k + " sup violations");
    o.require(b["line_parity_violations"] == 0, k + " line parity");
    o.detail << k << ": " << b["trials"] << " trials, worst sup ratio " << b["worst_sup_ratio"].get<double>() << "; ";
  }
}

void c8(Outcome& o) {
  const ExperimentResult r = run_experiment(make(ExperimentKind::univariate_roots, {4, 16, 64}, 20000, 8));
  for (const auto& b : r.summary["blocks"]) {
    o.require(b["within_3_sigma"] == true, "d=" + b["d"].dump());
    o.detail << "d=" << b["d"] << " mean " << b["mean_roots"].get<double>() << " (z " << b["z_score"].get<double>() << "); ";
  }
}

void c9(Outcome& o) {
  const ExperimentResult r = run_experiment(make(ExperimentKind::nests, {10, 20, 40}, 10000, 9));
  o.require(r.invariants_ok, "invariants");
  for (const auto& b : r.summary["blocks"]) {
    const double bound = b["sqrt_d_over_2"].get<double>() + 3.0 * b["std_error"].get<double>();
    o.require(b["mean_depth"].get<double>() <= bound, "d=" + b["d"].dump());
    o.detail << "d=" << b["d"] << " mean " << b["mean_depth"].get<double>() << " <= " << bound << "; ";
  }
}

void c10(Outcome& o) {
  ExperimentConfig lc = make(ExperimentKind::large_components, {20, 50, 100}, 300000, 10);
  lc.f_values = {1.0};
  const ExperimentResult r = run_experiment(lc);
  o.require(r.invariants_ok, "large-components invariants");
  for (const auto& b : r.summary["blocks"]) {
    o.require(b["ci_excludes_zero"] == true, "CI excludes 0 at d=" + b["d"].dump());
    o.require(b["barrier"]["dominates"] == true, "dominates the lower bound at d=" + b["d"].dump());
    o.detail << "d=" << b["d"] << " nontrivial " << b["nontrivial"] << "/" << b["trials"] << " CI ["
             << b["ci95"][0].get<double>() << ", " << b["ci95"][1].get<double>() << "] vs log10 bound "
             << b["barrier"]["log10_probability_bound"].get<double>() << "; ";
  }
  ExperimentConfig sep = make(ExperimentKind::separation, {50, 100}, 2000, 11);
  sep.m = 2;
  const ExperimentResult s = run_experiment(sep);
  o.require(s.invariants_ok, "separation invariants");
  for (const auto& b : s.summary["blocks"]) {
    o.require(b["ci_excludes_zero"] == true, "separation CI at d=" + b["d"].dump());
    o.require(b["reference_separated"] == true, "deterministic separation at d=" + b["d"].dump());
    o.detail << "separation d=" << b["d"] << " p_hat " << b["p_hat"].get<double>() << "; ";
  }
}

void c11(Outcome& o) {
  const ExperimentResult r = run_experiment(make(ExperimentKind::supnorm_tail, {10, 20, 40, 80}, 500, 12));
  const double full = r.summary["ratio_spread_full"];
  const double sub = r.summary["ratio_spread_subspace"];
  o.require(full <= 1.25, "full-space spread");
  o.require(sub <= 1.25, "subspace spread");
  for (const auto& b : r.summary["blocks"]) {
    o.require(b["median_relative_difference"].get<double>() < 0.10, "median difference at d=" + b["d"].dump());
  }
  o.detail << "spread full " << full << ", subspace " << sub;
}

void c12(Outcome& o) {
  const auto root = std::filesystem::temp_directory_path() / "klab_acceptance_repro";
  std::vector<ExperimentConfig> cfgs;
  {
    auto c = make(ExperimentKind::large_components, {20, 40}, 2000, 12);
    cfgs.push_back(c);
  }
  cfgs.push_back(make(ExperimentKind::nests, {10}, 100, 12));
  cfgs.push_back(make(ExperimentKind::separation, {50}, 200, 12));
  cfgs.push_back(make(ExperimentKind::supnorm_tail, {10, 20}, 50, 12));
  cfgs.push_back(make(ExperimentKind::univariate_roots, {16}, 2000, 12));
  cfgs.push_back(make(ExperimentKind::barrier_stability, {40}, 50, 12));
  cfgs.push_back(make(ExperimentKind::bounds, {100, 400}, 1, 12));
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  for (auto c : cfgs) {
    const std::string name = to_string(c.experiment);
    std::string text[2];
    for (int i = 0; i < 2; ++i) {
      c.workers = i == 0 ? 1 : 8;
      const auto dir = root / name / (i == 0 ? "w1" : "w8");
      write_outputs(run_experiment(c), dir);
      text[i] = slurp(dir / "trials.csv");
    }
    o.require(!text[0].empty() && text[0] == text[1], name + " byte-identical");
    o.detail << name << " " << text[0].size() << "B; ";
  }
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11, c12};
  std::set<int> only;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--only") {
      std::stringstream ss(argv[++i]);
      std::string tok;
      while (std::getline(ss, tok, ',')) only.insert(std::stoi(tok));
    }
  }
  int failed = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.contains(id)) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      all[i](o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << " (" << std::fixed
              << std::setprecision(1) << secs << " s) " << std::defaultfloat << std::setprecision(6)
              << o.detail.str() << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
