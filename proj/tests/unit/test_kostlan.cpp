#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "klab/error.hpp"
#include "klab/kostlan.hpp"
#include "klab/stats.hpp"
#include "oracles.hpp"

using namespace klab;

TEST_SUITE("kostlan") {

TEST_CASE("conventions") {
  CHECK(parse_convention("half") == VarianceConvention::half);
  CHECK(parse_convention("unit") == VarianceConvention::unit);
  CHECK_THROWS_AS(parse_convention("double"), ConfigError);
  CHECK(coordinate_variance(VarianceConvention::half) == 0.5);
  CHECK(std::string(to_string(VarianceConvention::unit)) == "unit");
}

TEST_CASE("sampling is a pure function of (seed, trial, stream)") {
  const SamplerConfig cfg{12, VarianceConvention::half, 99};
  CHECK(sample_kostlan(cfg, 5) == sample_kostlan(cfg, 5));
  CHECK_FALSE(sample_kostlan(cfg, 5) == sample_kostlan(cfg, 6));
  CHECK_FALSE(sample_kostlan(cfg, 5) == sample_kostlan(cfg, 5, Stream::auxiliary));
  CHECK_FALSE(derive_seed(1, 2) == derive_seed(1, 3));
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
  auto a = make_rng(3, 4, Stream::points);
  auto b = make_rng(3, 4, Stream::points);
  for (int i = 0; i < 10; ++i) CHECK(a() == b());
}

TEST_CASE("conventions differ by a global factor only") {
  const SamplerConfig h{9, VarianceConvention::half, 7};
  const SamplerConfig u{9, VarianceConvention::unit, 7};
  const auto ph = sample_kostlan(h, 3).dense();
  const auto pu = sample_kostlan(u, 3).dense();
  for (std::size_t k = 0; k < ph.size(); ++k) CHECK(pu[k] == doctest::Approx(std::sqrt(2.0) * ph[k]).epsilon(1e-14));
}

TEST_CASE("mean squared norm is N_d / 2 under the half convention") {
  const int d = 8;
  const SamplerConfig cfg{d, VarianceConvention::half, 17};
  std::vector<double> v;
  for (std::uint64_t t = 0; t < 10000; ++t) v.push_back(l2_norm_sq(sample_kostlan(cfg, t)));
  const MeanStats ms = mean_stats(v);
  const double expect = dim_homogeneous(d) / 2.0;
  CHECK(std::abs(ms.mean - expect) <= 3.0 * ms.std_error);
}

TEST_CASE("unit sphere and rotation invariance of the law") {
  const int d = 10;
  const SamplerConfig cfg{d, VarianceConvention::half, 23};
  CHECK(l2_norm(sample_unit_sphere(cfg, 0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sample_unit_sphere(cfg, 4) == sample_unit_sphere(cfg, 4));
  const Vec3 x = normalized(Vec3{1, 0, 0});
  const Vec3 y = normalized(Vec3{0.3, -0.5, 0.8});
  std::vector<double> a, b;
  for (std::uint64_t t = 0; t < 10000; ++t) {
    const auto p = sample_unit_sphere(cfg, t);
    a.push_back(fs_norm_sq_at_point(p, x));
    b.push_back(fs_norm_sq_at_point(p, y));
  }
  const MeanStats ma = mean_stats(a), mb = mean_stats(b);
  CHECK(std::abs(ma.mean - mb.mean) <= 3.0 * std::hypot(ma.std_error, mb.std_error));
  // E ||P(x)||^2 for a unit-sphere sample is Pi(x,x) / N_d = 1
  CHECK(std::abs(ma.mean - 1.0) <= 3.0 * ma.std_error);
}

TEST_CASE("hyperplane samples") {
  const int d = 7;
  const SamplerConfig cfg{d, VarianceConvention::half, 31};
  const HomogeneousPoly v = normalize_l2(HomogeneousPoly::monomial({d, 0, 0}));
  std::vector<double> n2;
  for (std::uint64_t t = 0; t < 4000; ++t) {
    const HomogeneousPoly q = sample_in_hyperplane(cfg, v, t);
    if (t < 100) {
      CHECK(std::abs(l2_inner(q, v)) < 1e-10);
      CHECK(std::abs(orthonormal_coords(q)[pack_index(d, 0, 0)]) < 1e-12);
    }
    n2.push_back(l2_norm_sq(q));
  }
  const MeanStats ms = mean_stats(n2);
  CHECK(std::abs(ms.mean - (dim_homogeneous(d) - 1.0) / 2.0) <= 3.0 * ms.std_error);
  std::mt19937_64 rng(1);
  const HomogeneousPoly w = normalize_l2(oracle::random_poly(d, rng));
  const HomogeneousPoly q = sample_in_hyperplane(cfg, w, 0);
  CHECK(std::abs(l2_inner(q, w)) < 1e-10);
  CHECK_THROWS_AS(sample_in_hyperplane(cfg, 2.0 * w, 0), ConfigError);
}

TEST_CASE("FS-uniform points of CP^2 have Dirichlet moduli") {
  auto rng = make_rng(5, 0, Stream::auxiliary);
  double m1 = 0.0, m2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const auto z = sample_fs_uniform_cp2(rng);
    const double w = std::norm(z[0]);
    CHECK_MESSAGE(std::abs(std::norm(z[0]) + std::norm(z[1]) + std::norm(z[2]) - 1.0) < 1e-12, "not unit");
    m1 += w;
    m2 += w * w;
  }
  CHECK(m1 / n == doctest::Approx(1.0 / 3.0).epsilon(0.01));
  CHECK(m2 / n == doctest::Approx(1.0 / 6.0).epsilon(0.02));
}

TEST_CASE("real root counting") {
  CHECK(count_real_roots({2, {1.0, 0.0, 1.0}}).count == 0);
  CHECK(count_real_roots({3, {0.0, -3.0, 0.0, 1.0}}).count == 3);
  CHECK(count_real_roots({1, {2.0, -1.0}}).count == 1);
  CHECK(count_real_roots({4, {-1.0, 0.0, 5.0, 0.0, -4.0}}).count == 4);  // roots +-1, +-1/2
  CHECK_THROWS_AS(count_real_roots({3, {0.0, 0.0, 0.0, 0.0}}), std::invalid_argument);
  // agreement with a sign-grid oracle on random Kostlan inputs
  auto rng = make_rng(8, 0, Stream::univariate);
  for (int i = 0; i < 40; ++i) {
    const int d = 3 + i % 10;
    const UnivariatePoly p = sample_univariate_kostlan(d, rng);
    CHECK(count_real_roots(p).count == oracle::sign_changes_on_line(p.coeffs, 20000));
  }
}

TEST_CASE("univariate coefficient variances are binomial") {
  auto rng = make_rng(2, 0, Stream::univariate);
  const int d = 6;
  std::vector<double> s(d + 1, 0.0);
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    const auto p = sample_univariate_kostlan(d, rng);
    for (int k = 0; k <= d; ++k) s[k] += p.coeffs[k] * p.coeffs[k];
  }
  for (int k = 0; k <= d; ++k) {
    const double binom = static_cast<double>(oracle::binomial(d, k));
    CHECK(s[k] / n == doctest::Approx(binom).epsilon(0.04));
  }
}

TEST_CASE("expected real roots of small degrees") {
  for (int d : {1, 4}) {
    auto rng = make_rng(40 + d, 0, Stream::univariate);
    std::vector<double> c;
    for (int i = 0; i < 5000; ++i) c.push_back(count_real_roots(sample_univariate_kostlan(d, rng)).count);
    const MeanStats ms = mean_stats(c);
    CHECK(std::abs(ms.mean - std::sqrt(d)) <= 3.0 * ms.std_error + 1e-12);
  }
}

}  // TEST_SUITE
