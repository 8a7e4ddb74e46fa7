#pragma once

// Real projective plane RP^2 inside CP^2 with the Fubini-Study metric:
// points, distances, ball volumes, rotations, ball packings and a
// triangulated sphere grid with exact antipodal pairing.

#include <array>
#include <cstddef>
#include <vector>

namespace klab {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;  // row-major

inline double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
Vec3 cross(const Vec3& a, const Vec3& b);
double norm(const Vec3& a);
Vec3 normalized(const Vec3& a);

/// A point of RP^2, stored as a unit vector whose first nonzero
/// coordinate is positive. Two representatives of the same point compare
/// equal exactly.
class ProjectivePoint {
 public:
  ProjectivePoint(double x0, double x1, double x2);
  explicit ProjectivePoint(const Vec3& x);

  /// [1 : z1 : z2] in the affine chart X0 != 0.
  static ProjectivePoint affine(double z1, double z2);

  const Vec3& coords() const { return c_; }
  double operator[](std::size_t i) const { return c_[i]; }
  bool operator==(const ProjectivePoint&) const = default;

 private:
  Vec3 c_;
};

/// Real orthogonal 3x3 matrix with determinant +1.
class Rotation {
 public:
  Rotation();  // identity
  /// Validates orthogonality (1e-12 per entry) and det = +1.
  explicit Rotation(const Mat3& m);

  static Rotation identity() { return Rotation(); }
  /// Rotation by `angle` about the (normalized) `axis`.
  static Rotation about_axis(const Vec3& axis, double angle);

  const Mat3& matrix() const { return m_; }
  double operator()(int r, int c) const { return m_[r][c]; }

  Vec3 apply(const Vec3& x) const;
  Vec3 apply_transpose(const Vec3& x) const;
  ProjectivePoint apply(const ProjectivePoint& p) const;
  Rotation transpose() const;
  Rotation operator*(const Rotation& rhs) const;

  /// max_ij |R^T R - I|_ij
  double orthogonality_defect() const;

 private:
  struct Unchecked {};
  Rotation(const Mat3& m, Unchecked) : m_(m) {}
  Mat3 m_;
};

/// Fubini-Study distance on RP^2 in [0, pi/2]: arccos |<p, q>| for unit
/// representatives, evaluated as atan2(|p x q|, |p . q|) for accuracy near 0.
double fs_distance(const ProjectivePoint& p, const ProjectivePoint& q);

/// Fubini-Study 4-volume of a ball of radius `rho` in CP^2, computed by
/// radial quadrature of r^3 / (1 + r^2)^3 over [0, tan rho] times |S^3|.
/// Throws QuadratureError when the error estimate exceeds 1e-12 relative.
double fs_ball_volume(double rho);

/// Deterministic rotation taking (1,0,0) to the representative of `p`:
/// Rodrigues rotation about e0 x p. Identity for p = [1:0:0].
Rotation rotation_to(const ProjectivePoint& p);

/// Centers of pairwise disjoint Fubini-Study balls of radius `rho` in
/// RP^2 (pairwise distance >= 2 rho). Greedy rejection over a Fibonacci
/// hemisphere candidate set. The count satisfies count >= kPackingConstant / rho^2.
std::vector<ProjectivePoint> pack_fs_balls(double rho);
inline constexpr double kPackingConstant = 0.2;

/// Triangulation of S^2 obtained by subdividing the octahedron
/// |x| + |y| + |z| = 1 into resolution^2 triangles per face and projecting
/// radially. Vertices are the integer points of L1 norm `resolution`, so the
/// antipodal map is exact: vertex v pairs with -v, cell c with the cell of
/// the opposite face at the same local position.
struct SphereGrid {
  int resolution = 0;
  std::vector<Vec3> vertices;                  // unit vectors
  std::vector<std::array<int, 3>> cells;       // vertex indices
  std::vector<Vec3> centers;                   // normalized centroids
  std::vector<std::array<int, 3>> neighbors;   // cell across each edge
  std::vector<std::array<int, 2>> edges;       // vertex pairs
  std::vector<int> antipodal_cell;
  std::vector<int> antipodal_vertex;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_cells() const { return cells.size(); }

  /// Cell containing the direction x (x != 0).
  int locate(const Vec3& x) const;
  /// Largest great-circle distance between two vertices of one cell.
  double max_cell_diameter() const;
  int euler_characteristic() const;

  // cell_lookup[((face * 2 + type) * resolution + i) * resolution + j],
  // type 0 = up triangle, 1 = down triangle; -1 where no such cell.
  std::vector<int> cell_lookup;
};

SphereGrid sphere_grid(int resolution);
/// Process-wide cache of sphere_grid(resolution); thread safe.
const SphereGrid& shared_sphere_grid(int resolution);

}  // namespace klab
