#pragma once

// Quantitative barrier layer: ball-average norms, the local sup-norm
// bound factor, m(d), probability lower bounds, Bergman diagonal and
// subspace diagnostics, and sup-norm estimation on RP^2.

#include <complex>
#include <cstddef>

#include "klab/kostlan.hpp"
#include "klab/poly.hpp"
#include "klab/projgeom.hpp"
#include "klab/reference.hpp"

namespace klab {

/// Ball of Euclidean radius R = sqrt(g/d) in the chart centered at
/// `center`, i.e. the FS ball of radius rho = atan(R).
struct BallSpec {
  ProjectivePoint center{1.0, 0.0, 0.0};
  double g = 1.0;
  int d = 1;

  /// Validates 1 <= g <= d.
  static BallSpec make(const ProjectivePoint& center, double g, int d);
  double R() const;
  double rho() const;
};

struct BallAverage {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// Monte Carlo average of ||Q(t)||_FS^2 over the ball with FS-uniform samples
/// (rejection from the Euclidean 4-ball with weight (1 + |t|^2)^{-3}).
/// Requires n_samples >= 1000.
BallAverage ball_average_norm_sq(const HomogeneousPoly& q, const BallSpec& ball,
                                 std::size_t n_samples, Rng& rng);

/// Exact value of the same average. Monomials are orthogonal over a ball
/// centered at [1:0:0]; each weight is an incomplete beta function. Other
/// centers are handled by rotating Q first.
double ball_average_norm_sq_exact(const HomogeneousPoly& q, const BallSpec& ball);

/// 2^4 exp(3g/4) (1 + g/d)^3 / inf_K.
double local_sup_bound_factor(double g, int d, double inf_k);
/// sqrt(local_sup_bound_factor * 2 N_d).
double compute_m(int d, double g, double inf_k);

struct ProbabilityBound {
  double value = 0.0;   // 0 when below 1e-300
  double log10 = 0.0;
};
/// m / (2 sqrt(2 pi)) exp(-2 m^2), computed in log space.
ProbabilityBound barrier_probability_lower_bound(double m);

/// sum_i ||X^i(z)||_FS^2 / ||X^i||_2^2, which equals N_d on CP^2.
double bergman_diagonal(int d, std::complex<double> z1, std::complex<double> z2);

struct SubspaceDiag {
  double k_d = 0.0;        // N_d - 1
  double alpha_d = 0.0;    // max diagonal / k_d
  double max_diag = 0.0;
  double min_diag = 0.0;
  double mean_diag = 0.0;  // grid average, near N_d - 1
  double band_lo = 0.0;    // (N_d - max ||v||_FS^2) / (N_d - 1)
  double band_hi = 0.0;    // N_d / (N_d - 1)
  int grid_resolution = 0;
};

/// Pi_W(x, x) = N_d - ||v(x)||_FS^2 for W = v^perp, sampled on the grid
/// vertices. Requires ||v||_2 = 1 within 1e-10.
SubspaceDiag subspace_alpha(const HomogeneousPoly& v, const SphereGrid& grid);

/// sqrt of the maximum of ||P(x)||_FS^2 over RP^2: a sphere-grid scan at
/// `resolution` (default ceil(pi sqrt d), at least 8) followed by two rounds
/// of local refinement around the best candidates.
double sup_norm_estimate(const HomogeneousPoly& p, int resolution = 0);

/// Reference data for a barrier argument around the reference's annuli.
struct BarrierCertificate {
  ReferenceKind kind = ReferenceKind::P0;
  int d = 0;
  double g = 0.0;
  double inf_k = 0.0;
  double factor = 0.0;
  double m = 0.0;
  ProbabilityBound prob_lower;
  VarianceConvention convention = VarianceConvention::half;
};

/// Uses the numeric boundary infimum of the normalized reference.
BarrierCertificate make_certificate(const Reference& ref, double g,
                                    VarianceConvention convention = VarianceConvention::half);

}  // namespace klab
