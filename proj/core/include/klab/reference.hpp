#pragma once

// Chebyshev polynomials of the first kind and the reference polynomials
// P0 (one circle), P1 (Chebyshev nest) and P2 (rotated copies of P0 at
// separated points), with their boundary sets and closed-form bounds.

#include <boost/multiprecision/cpp_int.hpp>
#include <vector>

#include "klab/poly.hpp"
#include "klab/projgeom.hpp"
#include "klab/topology.hpp"

namespace klab {

struct ChebyshevPoly {
  int n = 0;
  std::vector<boost::multiprecision::cpp_int> coeffs;  // a_{0,n} .. a_{n,n}
  /// Horner evaluation in 100-digit arithmetic, rounded to double.
  double evaluate(double x) const;
};

/// Exact coefficients from T_{n+1} = 2x T_n - T_{n-1}.
ChebyshevPoly chebyshev_coeffs(int n);
/// cos(n acos x) on [-1, 1], three-term recurrence outside.
double chebyshev_eval(int n, double x);
/// cos((2k+1) pi / 2n), ascending.
std::vector<double> chebyshev_roots(int n);
/// cos(k pi / n), k = 0..n, ascending.
std::vector<double> chebyshev_extrema(int n);

enum class ReferenceKind { P0, P1, P2 };
const char* to_string(ReferenceKind k) noexcept;

/// A circle of Euclidean radius `radius` in the chart centered at frame * e0,
/// with the closed-form lower bound for the normalized reference on it.
struct BoundaryCircle {
  Rotation frame;
  double radius = 0.0;
  double closed_form_bound = 0.0;
};

struct Reference {
  ReferenceKind kind = ReferenceKind::P0;
  int d = 0;
  double f = 1.0;
  double alpha = 0.0;    // P1
  int N = 0;             // P1, even
  double epsilon = 0.0;  // P2
  std::vector<ProjectivePoint> points;  // P2 centers; [1:0:0] otherwise
  std::vector<Rotation> frames;         // chart frame per center

  HomogeneousPoly poly;                 // unnormalized
  std::vector<HomogeneousPoly> copies;  // P2: P composed with each frame
  double norm_sq = 0.0;                 // ||poly||_2^2

  std::vector<double> zero_radii;      // P0: sqrt(f/d); P1: R_k
  std::vector<double> extremal_radii;  // P1: r_k, k = 0..N/2
  std::vector<AnnulusSpec> annuli;     // each carries the nontrivial class
  std::vector<BoundaryCircle> boundary;

  HomogeneousPoly normalized() const { return poly * (1.0 / std::sqrt(norm_sq)); }
  /// Normalized reference evaluated at a unit vector, using the rotated
  /// structure for P2 rather than the dense expansion.
  double normalized_value(const Vec3& unit_x) const;
};

/// X0^{d-2} (X1^2 + X2^2 - (f/d) X0^2). Requires d >= 2, 0 < f <= d.
Reference build_p0(int d, double f);

/// floor(alpha f) if even, floor(alpha f) - 1 otherwise.
int p1_order(double f, double alpha);
/// Homogenized T_N((d/f)(X1^2 + X2^2)/X0^2). Throws ConfigError when
/// N < 2 ("f too small for nesting") or d < 2N.
Reference build_p1(int d, double f, double alpha);

/// Sum of P0(d, 1) composed with rotation_to(p_i)^T. Throws ConfigError
/// naming the first pair closer than 2 d^{-1/2 + epsilon}.
Reference build_p2(int d, const std::vector<ProjectivePoint>& points, double epsilon);

/// First m centers of pack_fs_balls(d^{-1/2 + epsilon}).
std::vector<ProjectivePoint> separated_points(int d, double epsilon, int m);

struct BoundaryReport {
  double numeric_inf = 0.0;  // inf over all of K
  double closed_form_bound = 0.0;  // smallest closed-form bound over K
  std::vector<double> per_circle;
  bool satisfied = false;    // every circle meets its own bound
};

/// Infimum of the pointwise FS norm squared of the normalized reference
/// over its boundary set. P0/P1 are checked for radial constancy at 8
/// angles; P2 circles use a 2048-angle sweep.
BoundaryReport boundary_fs_infimum(const Reference& ref);
/// Same, but throws AsymptoticRegimeError when a bound is not met.
BoundaryReport boundary_fs_lower_bound(const Reference& ref);

/// Closed-form ||P0||^2 from the two monomial norms.
double p0_norm_sq_exact(int d, double f);
/// Upper bound f^2 2^{10 f} / d^2 on ||P1||^2.
double p1_norm_sq_bound(int d, double f);

}  // namespace klab
