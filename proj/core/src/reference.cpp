#include "klab/reference.hpp"

#include <algorithm>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <numbers>
#include <string>

#include "klab/error.hpp"

namespace klab {

namespace mp = boost::multiprecision;

namespace {
constexpr double kPi = std::numbers::pi;
}

ChebyshevPoly chebyshev_coeffs(int n) {
  if (n < 0) throw ConfigError("chebyshev_coeffs: n must be >= 0");
  std::vector<mp::cpp_int> prev{1};
  if (n == 0) return {0, prev};
  std::vector<mp::cpp_int> cur{0, 1};
  for (int k = 1; k < n; ++k) {
    std::vector<mp::cpp_int> next(static_cast<std::size_t>(k + 2), 0);
    for (int j = 0; j <= k; ++j) next[j + 1] += 2 * cur[j];
    for (int j = 0; j < k; ++j) next[j] -= prev[j];
    prev = std::move(cur);
    cur = std::move(next);
  }
  return {n, cur};
}

double ChebyshevPoly::evaluate(double x) const {
  using F = mp::cpp_bin_float_100;
  F acc = 0;
  const F fx = x;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * fx + F(*it);
  return static_cast<double>(acc);
}

double chebyshev_eval(int n, double x) {
  if (n < 0) throw ConfigError("chebyshev_eval: n must be >= 0");
  if (std::abs(x) <= 1.0) return std::cos(n * std::acos(x));
  double t0 = 1.0;
  double t1 = x;
  if (n == 0) return t0;
  for (int k = 1; k < n; ++k) {
    const double t2 = 2.0 * x * t1 - t0;
    t0 = t1;
    t1 = t2;
  }
  return t1;
}

std::vector<double> chebyshev_roots(int n) {
  if (n < 1) throw ConfigError("chebyshev_roots: n must be >= 1");
  std::vector<double> r;
  for (int k = n - 1; k >= 0; --k) r.push_back(std::cos((2 * k + 1) * kPi / (2 * n)));
  return r;
}

std::vector<double> chebyshev_extrema(int n) {
  if (n < 1) throw ConfigError("chebyshev_extrema: n must be >= 1");
  std::vector<double> r;
  for (int k = n; k >= 0; --k) r.push_back(std::cos(k * kPi / n));
  return r;
}

const char* to_string(ReferenceKind k) noexcept {
  switch (k) {
    case ReferenceKind::P0: return "P0";
    case ReferenceKind::P1: return "P1";
    case ReferenceKind::P2: return "P2";
  }
  return "?";
}

// ---------------------------------------------------------------------------

double p0_norm_sq_exact(int d, double f) {
  const double dd = d;
  const double a = f / dd;
  return a * a * 2.0 / ((dd + 2) * (dd + 1)) + 8.0 / ((dd + 2) * (dd + 1) * dd * (dd - 1));
}

double p1_norm_sq_bound(int d, double f) {
  return f * f * std::exp2(10.0 * f) / (static_cast<double>(d) * d);
}

namespace {

HomogeneousPoly p0_poly(int d, double f) {
  HomogeneousPoly p(d);
  p.set({d, 0, 0}, -f / d);
  p.set({d - 2, 2, 0}, 1.0);
  p.set({d - 2, 0, 2}, 1.0);
  return p;
}

// X0^{d-2} (X1^2 + X2^2 - X0^2/d) at y, for the P2 structured evaluation.
double p0_unit_value(int d, const Vec3& y) {
  return std::pow(y[0], d - 2) * (y[1] * y[1] + y[2] * y[2] - y[0] * y[0] / d);
}

}  // namespace

Reference build_p0(int d, double f) {
  if (d < 2) throw ConfigError("build_p0: degree must be >= 2");
  if (!(f > 0.0) || f > d) throw ConfigError("build_p0: need 0 < f <= d");
  Reference r;
  r.kind = ReferenceKind::P0;
  r.d = d;
  r.f = f;
  r.points = {ProjectivePoint(1.0, 0.0, 0.0)};
  r.frames = {Rotation::identity()};
  r.poly = p0_poly(d, f);
  r.norm_sq = l2_norm_sq(r.poly);
  r.zero_radii = {std::sqrt(f / d)};
  const double r1 = std::sqrt(f / (2.0 * d));
  const double r2 = std::sqrt(3.0 * f / (2.0 * d));
  r.annuli = {AnnulusSpec{Rotation::identity(), r1, r2}};
  const double c = static_cast<double>(d) * d / 32.0;
  r.boundary = {{Rotation::identity(), r1, c * std::exp(-f / 2)},
                {Rotation::identity(), r2, c * std::exp(-3 * f / 2)}};
  return r;
}

int p1_order(double f, double alpha) {
  const int base = static_cast<int>(std::floor(alpha * f));
  return base % 2 == 0 ? base : base - 1;
}

Reference build_p1(int d, double f, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("build_p1: alpha must lie in (0, 1)");
  if (!(f > 0.0) || f > d) throw ConfigError("build_p1: need 0 < f <= d");
  const int N = p1_order(f, alpha);
  if (N < 2) throw ConfigError("build_p1: f too small for nesting (N < 2)");
  if (d < 2 * N) throw ConfigError("build_p1: degree must be at least 2N");

  Reference r;
  r.kind = ReferenceKind::P1;
  r.d = d;
  r.f = f;
  r.alpha = alpha;
  r.N = N;
  r.points = {ProjectivePoint(1.0, 0.0, 0.0)};
  r.frames = {Rotation::identity()};

  const ChebyshevPoly t = chebyshev_coeffs(N);
  HomogeneousPoly p(d);
  const double scale = d / f;
  for (int j = 0; j <= N; ++j) {
    const double a = static_cast<double>(t.coeffs[j]);
    if (a == 0.0) continue;
    const double aj = a * std::pow(scale, j);
    double binom = 1.0;  // C(j, l)
    for (int l = 0; l <= j; ++l) {
      if (l > 0) binom = binom * (j - l + 1) / l;
      p.add({d - 2 * j, 2 * l, 2 * j - 2 * l}, aj * binom);
    }
  }
  r.poly = std::move(p);
  r.norm_sq = l2_norm_sq(r.poly);

  for (int k = 0; k < N / 2; ++k) {
    r.zero_radii.push_back(std::sqrt(f / d * std::cos((2 * k + 1) * kPi / (2 * N))));
  }
  for (int k = 0; k <= N / 2; ++k) {
    r.extremal_radii.push_back(2 * k == N ? 0.0 : std::sqrt(f / d * std::cos(k * kPi / N)));
  }
  const double bound = static_cast<double>(d) * d / (f * f) * std::exp(-9 * f);
  for (int k = 0; k < N / 2; ++k) {
    r.annuli.push_back({Rotation::identity(), r.extremal_radii[k + 1], r.extremal_radii[k]});
  }
  for (double rk : r.extremal_radii) r.boundary.push_back({Rotation::identity(), rk, bound});
  return r;
}

std::vector<ProjectivePoint> separated_points(int d, double epsilon, int m) {
  if (m < 1) throw ConfigError("need at least one point");
  const double delta = std::pow(static_cast<double>(d), -0.5 + epsilon);
  if (!(delta > 0.0) || delta > kPi / 4) {
    throw ConfigError("separation radius d^{-1/2+epsilon} must lie in (0, pi/4]");
  }
  auto centers = pack_fs_balls(delta);
  if (static_cast<int>(centers.size()) < m) {
    throw ConfigError("cannot place " + std::to_string(m) + " points at separation " +
                      std::to_string(2 * delta));
  }
  centers.erase(centers.begin() + m, centers.end());
  return centers;
}

Reference build_p2(int d, const std::vector<ProjectivePoint>& points, double epsilon) {
  if (d < 2) throw ConfigError("build_p2: degree must be >= 2");
  if (points.empty()) throw ConfigError("build_p2: need at least one point");
  const double sep = 2.0 * std::pow(static_cast<double>(d), -0.5 + epsilon);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double dist = fs_distance(points[i], points[j]);
      if (dist < sep * (1.0 - 1e-12)) {
        throw ConfigError("build_p2: points " + std::to_string(i) + " and " + std::to_string(j) +
                          " are " + std::to_string(dist) + " apart, need " + std::to_string(sep));
      }
    }
  }
  Reference r;
  r.kind = ReferenceKind::P2;
  r.d = d;
  r.f = 1.0;
  r.epsilon = epsilon;
  r.points = points;
  const HomogeneousPoly base = p0_poly(d, 1.0);
  r.poly = HomogeneousPoly(d);
  const double r1 = std::sqrt(1.0 / (2.0 * d));
  const double r2 = std::sqrt(3.0 / (2.0 * d));
  const double m = static_cast<double>(points.size());
  const double bound = static_cast<double>(d) * d / (1000.0 * m);
  for (const auto& p : points) {
    const Rotation frame = rotation_to(p);
    r.frames.push_back(frame);
    r.copies.push_back(rotate_poly(base, frame));
    r.poly += r.copies.back();
    r.annuli.push_back({frame, r1, r2});
    r.boundary.push_back({frame, r1, bound});
    r.boundary.push_back({frame, r2, bound});
  }
  r.zero_radii = {std::sqrt(1.0 / d)};
  r.norm_sq = l2_norm_sq(r.poly);
  return r;
}

double Reference::normalized_value(const Vec3& x) const {
  const double s = 1.0 / std::sqrt(norm_sq);
  if (kind != ReferenceKind::P2) return s * evaluate_homogeneous(poly, x);
  double sum = 0.0;
  for (const auto& fr : frames) sum += p0_unit_value(d, fr.apply_transpose(x));
  return s * sum;
}

BoundaryReport boundary_fs_infimum(const Reference& ref) {
  BoundaryReport rep;
  rep.numeric_inf = INFINITY;
  rep.closed_form_bound = INFINITY;
  rep.satisfied = true;
  auto value_sq = [&](const BoundaryCircle& c, double t) {
    const Vec3 x = normalized(c.frame.apply(Vec3{1.0, c.radius * std::cos(t), c.radius * std::sin(t)}));
    const double v = ref.normalized_value(x);
    return v * v;
  };
  for (const auto& c : ref.boundary) {
    double inf = INFINITY;
    if (c.radius == 0.0) {
      inf = value_sq(c, 0.0);
    } else if (ref.kind == ReferenceKind::P2) {
      for (int k = 0; k < 2048; ++k) inf = std::min(inf, value_sq(c, 2 * kPi * k / 2048));
    } else {
      const double v0 = value_sq(c, 0.0);
      for (int k = 1; k < 8; ++k) {
        const double v = value_sq(c, 2 * kPi * k / 8);
        if (std::abs(v - v0) > 1e-9 * std::abs(v0)) {
          throw InvariantViolation("reference is not radially constant on a boundary circle");
        }
      }
      inf = v0;
    }
    rep.per_circle.push_back(inf);
    rep.numeric_inf = std::min(rep.numeric_inf, inf);
    rep.closed_form_bound = std::min(rep.closed_form_bound, c.closed_form_bound);
    if (inf < c.closed_form_bound) rep.satisfied = false;
  }
  return rep;
}

BoundaryReport boundary_fs_lower_bound(const Reference& ref) {
  BoundaryReport rep = boundary_fs_infimum(ref);
  if (!rep.satisfied) {
    for (std::size_t i = 0; i < rep.per_circle.size(); ++i) {
      if (rep.per_circle[i] < ref.boundary[i].closed_form_bound) {
        throw AsymptoticRegimeError(
            std::string(to_string(ref.kind)) + " at d=" + std::to_string(ref.d) +
                ": boundary infimum below the closed-form bound (d below the asymptotic regime)",
            rep.per_circle[i], ref.boundary[i].closed_form_bound);
      }
    }
  }
  return rep;
}

}  // namespace klab
