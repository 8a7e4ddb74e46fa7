#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "klab/barrier.hpp"
#include "klab/error.hpp"
#include "oracles.hpp"

using namespace klab;

namespace {

// Average over the chart ball |t| <= R in C^2 of (1 + |t|^2)^{-e}, weighted
// by the FS volume density (1 + |t|^2)^{-3} r^3 dr, by Simpson's rule.
double radial_average(double R, double e) {
  const int n = 20000;
  auto w = [](double r) { return r * r * r / std::pow(1 + r * r, 3); };
  double num = 0.0, den = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double r = R * k / n;
    const double c = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    num += c * w(r) * std::pow(1 + r * r, -e);
    den += c * w(r);
  }
  return num / den;
}

}  // namespace

TEST_SUITE("barrier") {

TEST_CASE("ball geometry") {
  const BallSpec b = BallSpec::make(ProjectivePoint(1, 0, 0), 4.0, 100);
  CHECK(b.R() == doctest::Approx(0.2));
  CHECK(b.rho() == doctest::Approx(std::atan(0.2)));
  CHECK_THROWS_AS(BallSpec::make(ProjectivePoint(1, 0, 0), 0.5, 100), ConfigError);
  CHECK_THROWS_AS(BallSpec::make(ProjectivePoint(1, 0, 0), 101, 100), ConfigError);
}

TEST_CASE("ball averages") {
  auto rng = make_rng(1, 0, Stream::auxiliary);
  const BallSpec b = BallSpec::make(ProjectivePoint(1, 0, 0), 6.0, 50);
  CHECK(ball_average_norm_sq(HomogeneousPoly(50), b, 2000, rng).value == 0.0);
  CHECK(ball_average_norm_sq_exact(HomogeneousPoly(50), b) == 0.0);

  const int d = 50;
  const HomogeneousPoly peak = normalize_l2(HomogeneousPoly::monomial({d, 0, 0}));
  const double oracle_avg = dim_homogeneous(d) * radial_average(b.R(), d);
  CHECK(ball_average_norm_sq_exact(peak, b) == doctest::Approx(oracle_avg).epsilon(1e-8));
  const BallAverage mc = ball_average_norm_sq(peak, b, 200000, rng);
  CHECK(std::abs(mc.value - oracle_avg) <= 4.0 * mc.std_error);

  // exact and Monte Carlo agree for a random polynomial at an off-origin center
  const SamplerConfig sc{20, VarianceConvention::half, 3};
  const HomogeneousPoly q = sample_kostlan(sc, 0);
  const BallSpec b2 = BallSpec::make(ProjectivePoint(0.3, -0.8, 0.5), 3.0, 20);
  const double ex = ball_average_norm_sq_exact(q, b2);
  const BallAverage mc2 = ball_average_norm_sq(q, b2, 200000, rng);
  CHECK(std::abs(mc2.value - ex) <= 4.0 * mc2.std_error);
  CHECK_THROWS(ball_average_norm_sq(q, b2, 10, rng));
}

TEST_CASE("bound factors and m") {
  CHECK(local_sup_bound_factor(4.0, 10000, 1.0) == doctest::Approx(16.0 * std::exp(3.0) * std::pow(1.0004, 3)));
  CHECK(local_sup_bound_factor(1e-12, 1000000000, 16.0) == doctest::Approx(1.0).epsilon(1e-9));
  for (int d : {10, 200}) {
    for (double g : {1.0, 6.0}) {
      const double inf = 32.0 * dim_homogeneous(d) * std::exp(0.75 * g) * std::pow(1 + g / d, 3);
      CHECK(compute_m(d, g, inf) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  // m^2 <= 2^10 exp(6 f) with g = 6f and the closed-form inf_K
  const int d = 10000;
  const double f = 2.0;
  const double inf = static_cast<double>(d) * d / 32.0 * std::exp(-f / 2);
  const double m = compute_m(d, 6 * f, inf);
  CHECK(m * m <= std::pow(2.0, 10) * std::exp(6 * f));
}

TEST_CASE("probability lower bound") {
  CHECK(barrier_probability_lower_bound(1.0).value ==
        doctest::Approx(std::exp(-2.0) / (2.0 * std::sqrt(2.0 * std::numbers::pi))).epsilon(1e-14));
  double prev = barrier_probability_lower_bound(0.5).value;
  for (double m = 0.6; m < 20.0; m += 0.1) {
    const double v = barrier_probability_lower_bound(m).value;
    CHECK(v <= prev);
    prev = v;
  }
  const ProbabilityBound tiny = barrier_probability_lower_bound(500.0);
  CHECK(tiny.value == 0.0);
  CHECK(tiny.log10 == doctest::Approx((std::log(500.0 / (2 * std::sqrt(2 * std::numbers::pi))) - 2.0 * 500 * 500) /
                                      std::log(10.0)));
}

TEST_CASE("Bergman diagonal is constant") {
  CHECK(bergman_diagonal(7, 0.0, 0.0) == doctest::Approx(36.0));
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n01;
  for (int i = 0; i < 30; ++i) {
    const std::complex<double> z1(n01(rng), n01(rng)), z2(n01(rng), n01(rng));
    CHECK(bergman_diagonal(1, z1, z2) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(bergman_diagonal(20, z1, z2) == doctest::Approx(231.0).epsilon(1e-9));
  }
}

TEST_CASE("subspace diagonal") {
  const int d = 12;
  const SphereGrid& grid = shared_sphere_grid(16);
  const double nd = dim_homogeneous(d);
  const SubspaceDiag peak = subspace_alpha(normalize_l2(HomogeneousPoly::monomial({d, 0, 0})), grid);
  CHECK(peak.k_d == nd - 1);
  CHECK(peak.min_diag == doctest::Approx(0.0).epsilon(1e-9).scale(1.0));
  CHECK(peak.alpha_d == doctest::Approx(nd / (nd - 1)).epsilon(1e-6));

  const SamplerConfig sc{d, VarianceConvention::half, 5};
  const SubspaceDiag r = subspace_alpha(sample_unit_sphere(sc, 0), grid);
  CHECK(r.alpha_d >= 1.0 - 1e-9);
  CHECK(r.alpha_d <= r.band_hi + 1e-12);
  CHECK(r.band_lo <= 1.0);
  // grid vertices are not FS-equidistributed, so only a loose check on the average
  CHECK(r.mean_diag == doctest::Approx(nd - 1).epsilon(0.05));
  CHECK_THROWS_AS(subspace_alpha(HomogeneousPoly::monomial({d, 0, 0}), grid), ConfigError);
}

TEST_CASE("sup norm estimate") {
  for (int d : {5, 30, 90}) {
    const HomogeneousPoly peak = normalize_l2(HomogeneousPoly::monomial({d, 0, 0}));
    CHECK(sup_norm_estimate(peak) == doctest::Approx(std::sqrt(static_cast<double>(dim_homogeneous(d)))).epsilon(1e-9));
  }
  // brute force over many random directions never beats the estimate by much
  std::mt19937_64 rng(12);
  for (int d : {8, 25}) {
    const SamplerConfig sc{d, VarianceConvention::half, 77};
    const HomogeneousPoly p = sample_unit_sphere(sc, 1);
    double brute = 0.0;
    for (int i = 0; i < 40000; ++i) {
      const double v = static_cast<double>(oracle::naive_eval(p, oracle::random_unit(rng)));
      brute = std::max(brute, std::abs(v));
    }
    const double est = sup_norm_estimate(p);
    CHECK(est >= 0.995 * brute);
    CHECK(est <= 1.03 * brute);
  }
}

TEST_CASE("certificates") {
  const Reference r = build_p0(400, 2.0);
  const BarrierCertificate c = make_certificate(r, 12.0);
  CHECK(c.kind == ReferenceKind::P0);
  CHECK(c.inf_k == doctest::Approx(boundary_fs_infimum(r).numeric_inf));
  CHECK(c.factor == doctest::Approx(local_sup_bound_factor(12.0, 400, c.inf_k)));
  CHECK(c.m == doctest::Approx(compute_m(400, 12.0, c.inf_k)));
  CHECK(c.prob_lower.log10 == doctest::Approx(barrier_probability_lower_bound(c.m).log10));
}

}  // TEST_SUITE
