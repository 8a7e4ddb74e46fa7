#include "klab/kostlan.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "klab/error.hpp"

namespace klab {

const char* to_string(VarianceConvention c) noexcept {
  return c == VarianceConvention::half ? "half" : "unit";
}

VarianceConvention parse_convention(std::string_view s) {
  if (s == "half") return VarianceConvention::half;
  if (s == "unit") return VarianceConvention::unit;
  throw ConfigError("variance convention must be 'half' or 'unit', got '" + std::string(s) + "'");
}

double coordinate_variance(VarianceConvention c) noexcept {
  return c == VarianceConvention::half ? 0.5 : 1.0;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Rng make_rng(std::uint64_t master_seed, std::uint64_t trial_index, Stream stream) {
  std::uint64_t k = splitmix64(master_seed);
  k = splitmix64(k ^ trial_index);
  k = splitmix64(k ^ (static_cast<std::uint64_t>(stream) * 0xd1b54a32d192ed03ULL));
  return Rng(k);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t tag) {
  return splitmix64(splitmix64(master_seed ^ 0x5851f42d4c957f2dULL) ^ tag);
}

HomogeneousPoly sample_kostlan(int degree, VarianceConvention convention, Rng& rng) {
  if (degree < 1) throw ConfigError("sample_kostlan: degree must be >= 1");
  const double sigma = std::sqrt(coordinate_variance(convention));
  const auto norms = monomial_norm_table(degree);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> c(norms.size());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = sigma * normal(rng) / norms[k];
  return HomogeneousPoly::from_dense(degree, c);
}

HomogeneousPoly sample_kostlan(const SamplerConfig& cfg, std::uint64_t trial_index, Stream stream) {
  Rng rng = make_rng(cfg.master_seed, trial_index, stream);
  return sample_kostlan(cfg.degree, cfg.convention, rng);
}

HomogeneousPoly sample_unit_sphere(const SamplerConfig& cfg, std::uint64_t trial_index) {
  return normalize_l2(sample_kostlan(cfg, trial_index));
}

HomogeneousPoly project_out(const HomogeneousPoly& q, const HomogeneousPoly& v) {
  return q - l2_inner(q, v) * v;
}

HomogeneousPoly sample_in_hyperplane(const SamplerConfig& cfg, const HomogeneousPoly& v,
                                     std::uint64_t trial_index) {
  if (v.degree() != cfg.degree) throw ConfigError("sample_in_hyperplane: degree mismatch");
  if (std::abs(l2_norm(v) - 1.0) > 1e-10) {
    throw ConfigError("sample_in_hyperplane: v must have unit L2 norm");
  }
  return project_out(sample_kostlan(cfg, trial_index, Stream::hyperplane), v);
}

std::array<std::complex<double>, 3> sample_fs_uniform_cp2(Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::array<std::complex<double>, 3> z{};
  double n2 = 0.0;
  do {
    n2 = 0.0;
    for (auto& zi : z) {
      zi = {normal(rng), normal(rng)};
      n2 += std::norm(zi);
    }
  } while (n2 == 0.0);
  const double s = 1.0 / std::sqrt(n2);
  for (auto& zi : z) zi *= s;
  return z;
}

Vec3 sample_sphere_point(Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec3 x{};
  double n2 = 0.0;
  do {
    x = {normal(rng), normal(rng), normal(rng)};
    n2 = dot(x, x);
  } while (n2 == 0.0);
  return normalized(x);
}

// ---------------------------------------------------------------------------
// Univariate ensemble

double UnivariatePoly::operator()(double x) const {
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
  return acc;
}

UnivariatePoly sample_univariate_kostlan(int d, Rng& rng) {
  if (d < 1) throw ConfigError("sample_univariate_kostlan: degree must be >= 1");
  std::normal_distribution<double> normal(0.0, 1.0);
  UnivariatePoly p;
  p.degree = d;
  p.coeffs.resize(static_cast<std::size_t>(d + 1));
  double log_binom = 0.0;  // log C(d, k)
  for (int k = 0; k <= d; ++k) {
    if (k > 0) log_binom += std::log(static_cast<double>(d - k + 1)) - std::log(static_cast<double>(k));
    p.coeffs[k] = std::exp(0.5 * log_binom) * normal(rng);
  }
  return p;
}

namespace {

// Parlett-Reinsch diagonal balancing by powers of two.
void balance(Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  constexpr double radix = 2.0;
  bool done = false;
  while (!done) {
    done = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double c = 0.0;
      double r = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a(j, i));
        r += std::abs(a(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= radix * radix;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= radix * radix;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        a.row(i) /= f;
        a.col(i) *= f;
      }
    }
  }
}

// p(x) cos^n(theta) at x = tan(theta), evaluated without overflow.
double homogenized(const std::vector<double>& a, double theta) {
  const int n = static_cast<int>(a.size()) - 1;
  const double s = std::sin(theta);
  const double c = std::cos(theta);
  double acc = 0.0;
  if (std::abs(c) >= std::abs(s)) {
    const double t = s / c;
    for (int k = n; k >= 0; --k) acc = acc * t + a[k];
    return acc * std::pow(c, n);
  }
  const double t = c / s;
  for (int k = 0; k <= n; ++k) acc = acc * t + a[k];
  return acc * std::pow(s, n);
}

struct ScanResult {
  int count = 0;
  bool tangency = false;
};

ScanResult sign_scan(const std::vector<double>& a) {
  const int n = static_cast<int>(a.size()) - 1;
  const int m = std::max(4096, 128 * n);
  const double pi = std::numbers::pi;
  std::vector<double> h(static_cast<std::size_t>(m + 1));
  for (int i = 0; i <= m; ++i) h[i] = homogenized(a, -pi / 2 + pi * i / m);
  double scale = 0.0;
  for (double v : h) scale = std::max(scale, std::abs(v));

  ScanResult res;
  for (int i = 0; i < m; ++i) {
    if ((h[i] < 0) != (h[i + 1] < 0)) ++res.count;
  }
  // A pair of close roots can hide between samples: inspect local minima of |h|.
  for (int i = 1; i < m; ++i) {
    const bool same = (h[i - 1] < 0) == (h[i] < 0) && (h[i] < 0) == (h[i + 1] < 0);
    if (!same || !(std::abs(h[i]) < std::abs(h[i - 1]) && std::abs(h[i]) < std::abs(h[i + 1]))) {
      continue;
    }
    const double sgn = h[i] < 0 ? -1.0 : 1.0;
    double lo = -pi / 2 + pi * (i - 1) / m;
    double hi = -pi / 2 + pi * (i + 1) / m;
    const double phi = (std::sqrt(5.0) - 1) / 2;
    double x1 = hi - phi * (hi - lo);
    double x2 = lo + phi * (hi - lo);
    double f1 = sgn * homogenized(a, x1);
    double f2 = sgn * homogenized(a, x2);
    for (int it = 0; it < 80 && f1 > 0 && f2 > 0; ++it) {
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - phi * (hi - lo);
        f1 = sgn * homogenized(a, x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + phi * (hi - lo);
        f2 = sgn * homogenized(a, x2);
      }
    }
    const double fmin = std::min(f1, f2);
    if (fmin <= 0.0) {
      res.count += 2;
    } else if (fmin < 1e-10 * scale) {
      res.tangency = true;
    }
  }
  return res;
}

}  // namespace

RootCount count_real_roots(const UnivariatePoly& p) {
  int hi = static_cast<int>(p.coeffs.size()) - 1;
  while (hi >= 0 && p.coeffs[hi] == 0.0) --hi;
  if (hi < 0) throw std::invalid_argument("count_real_roots: zero polynomial");
  int lo = 0;
  while (p.coeffs[lo] == 0.0) ++lo;

  RootCount out;
  const int zero_root = lo > 0 ? 1 : 0;
  const std::vector<double> a(p.coeffs.begin() + lo, p.coeffs.begin() + hi + 1);
  const int n = hi - lo;
  if (n == 0) {
    out.count = zero_root;
    return out;
  }
  if (n == 1) {
    out.count = zero_root + 1;
    return out;
  }

  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) comp(0, j) = -a[n - 1 - j] / a[n];
  for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  balance(comp);
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
  if (es.info() != Eigen::Success) {
    const auto scan = sign_scan(a);
    return {scan.count + zero_root, true, true};
  }

  std::vector<double> real_roots;
  bool gray = false;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    const auto lam = es.eigenvalues()[k];
    const double mag = 1.0 + std::abs(lam);
    const double im = std::abs(lam.imag());
    if (im <= 1e-8 * mag) {
      real_roots.push_back(lam.real());
    } else if (im <= 1e-5 * mag) {
      gray = true;
    }
  }
  std::sort(real_roots.begin(), real_roots.end());
  for (std::size_t k = 1; k < real_roots.size(); ++k) {
    if (real_roots[k] - real_roots[k - 1] <= 1e-6 * (1.0 + std::abs(real_roots[k]))) gray = true;
  }
  const int eig_count = static_cast<int>(real_roots.size());
  if (!gray && (eig_count % 2) == (n % 2)) {
    out.count = eig_count + zero_root;
    return out;
  }

  const auto scan = sign_scan(a);
  out.count = scan.count + zero_root;
  out.used_fallback = true;
  out.flagged = scan.tangency || scan.count != eig_count;
  return out;
}

}  // namespace klab
