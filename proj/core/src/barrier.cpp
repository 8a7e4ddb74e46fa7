#include "klab/barrier.hpp"

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <numbers>

#include "klab/error.hpp"

namespace klab {

namespace {

constexpr double kPi = std::numbers::pi;

bool is_identity(const Rotation& r) {
  const auto& m = r.matrix();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (m[i][j] != (i == j ? 1.0 : 0.0)) return false;
  return true;
}

}  // namespace

BallSpec BallSpec::make(const ProjectivePoint& center, double g, int d) {
  if (d < 1) throw ConfigError("ball: degree must be >= 1");
  if (!(g >= 1.0) || g > d) throw ConfigError("ball: need 1 <= g <= d");
  return {center, g, d};
}

double BallSpec::R() const { return std::sqrt(g / d); }
double BallSpec::rho() const { return std::atan(R()); }

BallAverage ball_average_norm_sq(const HomogeneousPoly& q, const BallSpec& ball,
                                 std::size_t n_samples, Rng& rng) {
  if (n_samples < 1000) throw ConfigError("ball_average_norm_sq: need at least 1000 samples");
  const Rotation frame = rotation_to(ball.center);
  const double R = ball.R();
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  double mean = 0.0;
  double m2 = 0.0;
  std::size_t n = 0;
  while (n < n_samples) {
    std::array<double, 4> g{normal(rng), normal(rng), normal(rng), normal(rng)};
    const double gn = std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2] + g[3] * g[3]);
    if (gn == 0.0) continue;
    const double r = R * std::pow(unif(rng), 0.25);
    const double t2 = r * r;
    if (unif(rng) >= std::pow(1.0 + t2, -3.0)) continue;
    const std::complex<double> t1(g[0] / gn * r, g[1] / gn * r);
    const std::complex<double> t2c(g[2] / gn * r, g[3] / gn * r);
    std::array<std::complex<double>, 3> x{};
    const auto& m = frame.matrix();
    double nrm = 0.0;
    for (int i = 0; i < 3; ++i) {
      x[i] = m[i][0] + m[i][1] * t1 + m[i][2] * t2c;
      nrm += std::norm(x[i]);
    }
    const double s = 1.0 / std::sqrt(nrm);
    for (auto& xi : x) xi *= s;
    const double v = std::norm(evaluate_homogeneous(q, x));
    ++n;
    const double delta = v - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (v - mean);
  }
  const double var = n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
  return {mean, std::sqrt(var / static_cast<double>(n)), n};
}

double ball_average_norm_sq_exact(const HomogeneousPoly& q, const BallSpec& ball) {
  const int d = q.degree();
  const Rotation frame = rotation_to(ball.center);
  const HomogeneousPoly q0 = is_identity(frame) ? q : rotate_poly(q, frame.transpose());

  // Over the ball |t| < R around [1:0:0], with U = sin^2 rho and k = a + b:
  //   avg |X^i|_FS^2 = 2 a! b! / (k+1)! * B(U; k+2, d-k+1) / sin^4 rho.
  const double rho = ball.rho();
  const double u = std::sin(rho) * std::sin(rho);
  const double log_sin4 = 4.0 * std::log(std::sin(rho));
  std::vector<double> wk(static_cast<std::size_t>(d + 1));
  for (int k = 0; k <= d; ++k) {
    const double p = k + 2;
    const double r = d - k + 1;
    const double ib = boost::math::ibeta(p, r, u);
    const double lbeta = std::lgamma(p) + std::lgamma(r) - std::lgamma(p + r);
    wk[k] = ib > 0.0 ? std::log(ib) + lbeta - std::lgamma(k + 2.0) - log_sin4 + std::log(2.0)
                     : -INFINITY;
  }
  double sum = 0.0;
  for (const auto& t : q0.terms()) {
    const int a = t.index.i1;
    const int b = t.index.i2;
    const double lw = wk[a + b] + std::lgamma(a + 1.0) + std::lgamma(b + 1.0);
    if (lw == -INFINITY || t.coeff == 0.0) continue;
    sum += std::exp(2.0 * std::log(std::abs(t.coeff)) + lw);
  }
  return sum;
}

double local_sup_bound_factor(double g, int d, double inf_k) {
  if (!(inf_k > 0.0)) throw ConfigError("local_sup_bound_factor: inf_K must be positive");
  return 16.0 * std::exp(0.75 * g) * std::pow(1.0 + g / d, 3) / inf_k;
}

double compute_m(int d, double g, double inf_k) {
  return std::sqrt(local_sup_bound_factor(g, d, inf_k) * 2.0 *
                   static_cast<double>(dim_homogeneous(d)));
}

ProbabilityBound barrier_probability_lower_bound(double m) {
  if (!(m > 0.0)) throw ConfigError("barrier_probability_lower_bound: m must be positive");
  const double ln = std::log(m) - std::log(2.0 * std::sqrt(2.0 * kPi)) - 2.0 * m * m;
  ProbabilityBound b;
  b.log10 = ln / std::numbers::ln10;
  b.value = b.log10 < -300.0 ? 0.0 : std::exp(ln);
  return b;
}

double bergman_diagonal(int d, std::complex<double> z1, std::complex<double> z2) {
  const double n2 = 1.0 + std::norm(z1) + std::norm(z2);
  const std::array<double, 3> w{1.0 / n2, std::norm(z1) / n2, std::norm(z2) / n2};
  std::array<std::vector<double>, 3> pw;
  for (int k = 0; k < 3; ++k) {
    pw[k].resize(static_cast<std::size_t>(d + 1));
    pw[k][0] = 1.0;
    for (int e = 1; e <= d; ++e) pw[k][e] = pw[k][e - 1] * w[k];
  }
  const auto norms = monomial_norm_table(d);
  double sum = 0.0;
  std::size_t idx = 0;
  for (int i2 = 0; i2 <= d; ++i2) {
    for (int i1 = 0; i1 + i2 <= d; ++i1, ++idx) {
      const double n = norms[idx];
      sum += pw[0][d - i1 - i2] * pw[1][i1] * pw[2][i2] / (n * n);
    }
  }
  return sum;
}

namespace {

// One vertex per antipodal pair, in vertex order.
std::vector<Vec3> half_vertices(const SphereGrid& grid) {
  std::vector<Vec3> pts;
  pts.reserve(grid.num_vertices() / 2 + 1);
  for (std::size_t i = 0; i < grid.num_vertices(); ++i)
    if (static_cast<std::size_t>(grid.antipodal_vertex[i]) >= i) pts.push_back(grid.vertices[i]);
  return pts;
}

}  // namespace

SubspaceDiag subspace_alpha(const HomogeneousPoly& v, const SphereGrid& grid) {
  if (std::abs(l2_norm(v) - 1.0) > 1e-10) throw ConfigError("subspace_alpha: v must be a unit vector");
  const double nd = static_cast<double>(dim_homogeneous(v.degree()));
  SubspaceDiag out;
  out.k_d = nd - 1.0;
  out.grid_resolution = grid.resolution;
  double max_v2 = 0.0;
  double min_v2 = INFINITY;
  double sum = 0.0;
  std::size_t count = 0;
  const std::vector<double> vals = evaluate_homogeneous(v, std::span<const Vec3>(half_vertices(grid)));
  for (const double val : vals) {
    const double v2 = val * val;
    max_v2 = std::max(max_v2, v2);
    min_v2 = std::min(min_v2, v2);
    sum += nd - v2;
    ++count;
  }
  out.max_diag = nd - min_v2;
  out.min_diag = nd - max_v2;
  out.mean_diag = sum / static_cast<double>(count);
  out.alpha_d = out.max_diag / out.k_d;
  out.band_lo = out.min_diag / out.k_d;
  out.band_hi = nd / out.k_d;
  return out;
}

double sup_norm_estimate(const HomogeneousPoly& p, int resolution) {
  const int d = p.degree();
  const int n = resolution > 0 ? resolution
                               : std::max(8, static_cast<int>(std::ceil(kPi * std::sqrt(d))));
  const SphereGrid& grid = shared_sphere_grid(n);

  std::vector<std::pair<double, int>> vals;
  vals.reserve(grid.num_vertices() / 2 + 1);
  {
    std::vector<int> idx;
    std::vector<Vec3> pts;
    for (std::size_t i = 0; i < grid.num_vertices(); ++i) {
      if (static_cast<std::size_t>(grid.antipodal_vertex[i]) < i) continue;
      idx.push_back(static_cast<int>(i));
      pts.push_back(grid.vertices[i]);
    }
    const std::vector<double> v = evaluate_homogeneous(p, std::span<const Vec3>(pts));
    for (std::size_t k = 0; k < v.size(); ++k) vals.emplace_back(v[k] * v[k], idx[k]);
  }
  const std::size_t top = std::min<std::size_t>(4, vals.size());
  std::partial_sort(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(top), vals.end(),
                    [](const auto& a, const auto& b) { return a.first > b.first; });

  double best = vals.front().first;
  const double h0 = 1.5 * kPi / (2.0 * n);
  for (std::size_t c = 0; c < top; ++c) {
    Vec3 x = grid.vertices[static_cast<std::size_t>(vals[c].second)];
    double local = vals[c].first;
    double h = h0;
    for (int round = 0; round < 2; ++round) {
      const Vec3 helper = std::abs(x[0]) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
      const Vec3 e1 = normalized(cross(x, helper));
      const Vec3 e2 = cross(x, e1);
      std::vector<Vec3> ys;
      for (int i = -4; i <= 4; ++i) {
        for (int j = -4; j <= 4; ++j) {
          const double a = h * i / 4.0;
          const double b = h * j / 4.0;
          ys.push_back(normalized(Vec3{x[0] + a * e1[0] + b * e2[0], x[1] + a * e1[1] + b * e2[1],
                                       x[2] + a * e1[2] + b * e2[2]}));
        }
      }
      const std::vector<double> v = evaluate_homogeneous(p, std::span<const Vec3>(ys));
      Vec3 arg = x;
      for (std::size_t k = 0; k < ys.size(); ++k) {
        if (v[k] * v[k] > local) {
          local = v[k] * v[k];
          arg = ys[k];
        }
      }
      x = arg;
      h /= 4.0;
    }
    best = std::max(best, local);
  }
  return std::sqrt(best);
}

BarrierCertificate make_certificate(const Reference& ref, double g, VarianceConvention convention) {
  const BoundaryReport rep = boundary_fs_infimum(ref);
  BarrierCertificate c;
  c.kind = ref.kind;
  c.d = ref.d;
  c.g = g;
  c.inf_k = rep.numeric_inf;
  c.factor = local_sup_bound_factor(g, ref.d, rep.numeric_inf);
  c.m = compute_m(ref.d, g, rep.numeric_inf);
  c.prob_lower = barrier_probability_lower_bound(c.m);
  c.convention = convention;
  return c;
}

}  // namespace klab
