#pragma once

// Kostlan ensemble sampling with per-trial deterministic RNG streams, and
// the univariate Kostlan ensemble with real-root counting.

#include <complex>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "klab/poly.hpp"

namespace klab {

enum class VarianceConvention { half, unit };

const char* to_string(VarianceConvention c) noexcept;
/// "half" or "unit"; throws ConfigError otherwise.
VarianceConvention parse_convention(std::string_view s);
/// Per-coordinate variance: 1/2 for `half`, 1 for `unit`.
double coordinate_variance(VarianceConvention c) noexcept;

using Rng = std::mt19937_64;

/// Stream ids keep independent consumers of one trial apart.
enum class Stream : std::uint64_t {
  kostlan = 1,
  hyperplane = 2,
  univariate = 3,
  points = 4,
  auxiliary = 5,
};

/// Generator keyed by (master_seed, trial_index, stream). A pure function of
/// its arguments, so results never depend on scheduling.
Rng make_rng(std::uint64_t master_seed, std::uint64_t trial_index, Stream stream);
/// Child seed for an independent block of trials (e.g. one degree).
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t tag);

struct SamplerConfig {
  int degree = 1;
  VarianceConvention convention = VarianceConvention::half;
  std::uint64_t master_seed = 0;
};

/// Coefficient of X^i is sigma * g_i / ||X^i||_2 with g_i standard normal.
HomogeneousPoly sample_kostlan(const SamplerConfig& cfg, std::uint64_t trial_index,
                               Stream stream = Stream::kostlan);
HomogeneousPoly sample_kostlan(int degree, VarianceConvention convention, Rng& rng);

/// sample_kostlan followed by L^2 normalization.
HomogeneousPoly sample_unit_sphere(const SamplerConfig& cfg, std::uint64_t trial_index);

/// Q_raw - <Q_raw, v> v with Q_raw ~ Kostlan. Throws ConfigError unless
/// ||v||_2 = 1 within 1e-10.
HomogeneousPoly sample_in_hyperplane(const SamplerConfig& cfg, const HomogeneousPoly& v,
                                     std::uint64_t trial_index);
/// Orthogonal projection onto v^perp (v a unit vector).
HomogeneousPoly project_out(const HomogeneousPoly& q, const HomogeneousPoly& v);

/// Fubini-Study uniform point of CP^2 (uniform on S^5 in C^3).
std::array<std::complex<double>, 3> sample_fs_uniform_cp2(Rng& rng);
/// Uniform point of S^2 (hence of RP^2 after identification).
Vec3 sample_sphere_point(Rng& rng);

struct UnivariatePoly {
  int degree = 0;
  std::vector<double> coeffs;  // a_0 .. a_degree
  double operator()(double x) const;
};

/// a_k ~ N(0, binom(d, k)).
UnivariatePoly sample_univariate_kostlan(int d, Rng& rng);

struct RootCount {
  int count = 0;
  bool flagged = false;       // suspected multiple or clustered roots
  bool used_fallback = false; // sign-scan path taken
};

/// Distinct real roots. Balanced companion-matrix eigenvalues, real when
/// |Im| <= 1e-8 (1 + |lambda|); borderline spectra switch to a sign scan of
/// the homogenized polynomial on the projective line. Throws
/// std::invalid_argument for the zero polynomial.
RootCount count_real_roots(const UnivariatePoly& p);

}  // namespace klab
