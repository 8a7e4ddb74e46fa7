#pragma once

// Real homogeneous polynomials in X0, X1, X2 with the Fubini-Study L^2
// structure. Coefficients are stored sparsely as (packed index, value)
// pairs sorted by packed index; a dense vector view indexed by the same
// packing is available for degree-wide iteration.

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "klab/projgeom.hpp"

namespace klab {

struct MultiIndex {
  int i0 = 0;
  int i1 = 0;
  int i2 = 0;
  int degree() const { return i0 + i1 + i2; }
  auto operator<=>(const MultiIndex&) const = default;
};

/// N_d = (d+2 choose 2), the dimension of the space of degree-d forms.
constexpr std::size_t dim_homogeneous(int d) {
  return static_cast<std::size_t>(d + 1) * static_cast<std::size_t>(d + 2) / 2;
}

/// Dense packing of degree-d multi-indices: rows by i2, i1 increasing.
constexpr std::uint32_t pack_index(int d, int i1, int i2) {
  return static_cast<std::uint32_t>(i2 * (d + 1) - i2 * (i2 - 1) / 2 + i1);
}
inline std::uint32_t pack_index(const MultiIndex& m) { return pack_index(m.degree(), m.i1, m.i2); }
MultiIndex unpack_index(int d, std::uint32_t k);

struct Term {
  MultiIndex index;
  double coeff = 0.0;
};

class HomogeneousPoly {
 public:
  explicit HomogeneousPoly(int degree = 0);

  /// `coeffs` indexed by pack_index(degree, i1, i2); zeros are dropped.
  static HomogeneousPoly from_dense(int degree, std::span<const double> coeffs);
  static HomogeneousPoly monomial(const MultiIndex& m, double c = 1.0);

  int degree() const { return degree_; }
  std::span<const Term> terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }

  double coeff(const MultiIndex& m) const;
  /// Sets a coefficient; setting zero removes the term.
  void set(const MultiIndex& m, double c);
  void add(const MultiIndex& m, double c);

  std::vector<double> dense() const;

  HomogeneousPoly& operator+=(const HomogeneousPoly& rhs);
  HomogeneousPoly& operator-=(const HomogeneousPoly& rhs);
  HomogeneousPoly& operator*=(double s);
  friend HomogeneousPoly operator+(HomogeneousPoly a, const HomogeneousPoly& b) { return a += b; }
  friend HomogeneousPoly operator-(HomogeneousPoly a, const HomogeneousPoly& b) { return a -= b; }
  friend HomogeneousPoly operator*(double s, HomogeneousPoly p) { return p *= s; }
  friend HomogeneousPoly operator*(HomogeneousPoly p, double s) { return p *= s; }

  bool operator==(const HomogeneousPoly& rhs) const;

 private:
  std::vector<Term>::iterator find(std::uint32_t key);
  int degree_;
  std::vector<Term> terms_;  // sorted by packed index, nonzero coefficients
};

// --- evaluation -------------------------------------------------------------

double evaluate_homogeneous(const HomogeneousPoly& p, const Vec3& x);
std::complex<double> evaluate_homogeneous(const HomogeneousPoly& p,
                                          const std::array<std::complex<double>, 3>& x);
/// Values at many points at once, vectorized across points. Agrees with
/// the pointwise overload up to rounding. Throws std::invalid_argument on
/// a size mismatch.
void evaluate_homogeneous(const HomogeneousPoly& p, std::span<const Vec3> xs, std::span<double> out);
std::vector<double> evaluate_homogeneous(const HomogeneousPoly& p, std::span<const Vec3> xs);

/// P(1, z1, z2).
double evaluate_affine(const HomogeneousPoly& p, double z1, double z2);
std::complex<double> evaluate_affine(const HomogeneousPoly& p, std::complex<double> z1,
                                     std::complex<double> z2);

/// Pointwise Fubini-Study norm squared |P(1,z)|^2 / (1 + |z|^2)^d.
/// Evaluated as |P(x)|^2 at the unit representative x = (1,z)/sqrt(1+|z|^2),
/// which equals the quotient exactly and cannot overflow for large d.
double fs_norm_sq_at(const HomogeneousPoly& p, double z1, double z2);
double fs_norm_sq_at(const HomogeneousPoly& p, std::complex<double> z1, std::complex<double> z2);
/// Same quantity at an arbitrary (nonzero) homogeneous representative.
double fs_norm_sq_at_point(const HomogeneousPoly& p, const Vec3& x);

/// Values of P(1, x, y) on the tensor grid xs (fast) by ys (slow), scaled
/// by (1 + x^2 + y^2)^(-d/2). Row-major: out[iy * xs.size() + ix].
std::vector<double> evaluate_affine_grid_fs(const HomogeneousPoly& p, std::span<const double> xs,
                                            std::span<const double> ys);

// --- L^2 structure ---------------------------------------------------------

/// ||X^i||_2^2 = i0! i1! i2! 2! / (d+2)!. Exact big-integer ratio for
/// d <= kExactNormDegree, long-double log-factorials above.
double monomial_l2_norm_sq(const MultiIndex& m);
/// ||X^i||_2; representable where the square underflows (d >~ 600).
double monomial_l2_norm(const MultiIndex& m);
inline constexpr int kExactNormDegree = 300;

/// Cached dense table of ||X^i||_2 for one degree, indexed by pack_index.
std::span<const double> monomial_norm_table(int d);

/// Orthonormal-basis coordinates: coefficient times ||X^i||_2.
std::vector<double> orthonormal_coords(const HomogeneousPoly& p);
HomogeneousPoly from_orthonormal_coords(int d, std::span<const double> coords);

/// <P, Q>_2 for real coefficients. Throws std::invalid_argument on degree mismatch.
double l2_inner(const HomogeneousPoly& p, const HomogeneousPoly& q);
double l2_norm_sq(const HomogeneousPoly& p);
double l2_norm(const HomogeneousPoly& p);
/// Throws std::domain_error for the zero polynomial.
HomogeneousPoly normalize_l2(const HomogeneousPoly& p);

// --- rotation ----------------------------------------------------------------

/// Pullback x -> P(R^T x): the zero set of the result is R applied to the
/// zero set of P, and all L^2 / pointwise FS quantities are preserved.
/// Expands by multiplying linear forms; sparse inputs use per-term powers,
/// dense inputs a nested Horner scheme (O(N_d d^2)).
HomogeneousPoly rotate_poly(const HomogeneousPoly& p, const Rotation& r);

// --- text format -------------------------------------------------------------

/// "degree d" header, then one "i0 i1 i2 coefficient" line per term with
/// shortest round-trip decimal coefficients.
std::string to_text(const HomogeneousPoly& p);
HomogeneousPoly from_text(const std::string& text);
void write_text(std::ostream& os, const HomogeneousPoly& p);
HomogeneousPoly read_text(std::istream& is);

}  // namespace klab
