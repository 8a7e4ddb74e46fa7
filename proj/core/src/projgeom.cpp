#include "klab/projgeom.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "klab/error.hpp"

namespace klab {

const char* to_string(TopologyErrorKind kind) noexcept {
  switch (kind) {
    case TopologyErrorKind::boundary_degenerate: return "boundary-degenerate";
    case TopologyErrorKind::boundary_crossing: return "boundary-crossing";
    case TopologyErrorKind::resolution: return "resolution";
    case TopologyErrorKind::inconsistent: return "inconsistent";
    case TopologyErrorKind::zero_straddle: return "zero-straddle";
    case TopologyErrorKind::degenerate_point: return "degenerate-point";
  }
  return "unknown";
}

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}

double norm(const Vec3& a) { return std::hypot(a[0], a[1], a[2]); }

Vec3 normalized(const Vec3& a) {
  const double n = norm(a);
  return {a[0] / n, a[1] / n, a[2] / n};
}

// ---------------------------------------------------------------------------
// ProjectivePoint

ProjectivePoint::ProjectivePoint(double x0, double x1, double x2)
    : ProjectivePoint(Vec3{x0, x1, x2}) {}

ProjectivePoint::ProjectivePoint(const Vec3& x) {
  const double n = norm(x);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw std::invalid_argument("ProjectivePoint: coordinates must be finite and not all zero");
  }
  c_ = {x[0] / n, x[1] / n, x[2] / n};
  for (double& v : c_) {
    if (v == 0.0) v = 0.0;  // drop negative zero
  }
  const auto first = std::find_if(c_.begin(), c_.end(), [](double v) { return v != 0.0; });
  if (*first < 0.0) {
    for (double& v : c_) v = (v == 0.0) ? 0.0 : -v;
  }
}

ProjectivePoint ProjectivePoint::affine(double z1, double z2) {
  return ProjectivePoint(1.0, z1, z2);
}

// ---------------------------------------------------------------------------
// Rotation

Rotation::Rotation() : m_{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}} {}

Rotation::Rotation(const Mat3& m) : m_(m) {
  if (orthogonality_defect() > 1e-12) {
    throw std::invalid_argument("Rotation: matrix is not orthogonal");
  }
  const double det = dot(m_[0], cross(m_[1], m_[2]));
  if (det < 0.0) throw std::invalid_argument("Rotation: determinant is -1");
}

Rotation Rotation::about_axis(const Vec3& axis, double angle) {
  const Vec3 k = normalized(axis);
  const double s = std::sin(angle);
  const double c = std::cos(angle);
  const double t = 1.0 - c;
  Mat3 m{};
  m[0] = {c + t * k[0] * k[0], t * k[0] * k[1] - s * k[2], t * k[0] * k[2] + s * k[1]};
  m[1] = {t * k[1] * k[0] + s * k[2], c + t * k[1] * k[1], t * k[1] * k[2] - s * k[0]};
  m[2] = {t * k[2] * k[0] - s * k[1], t * k[2] * k[1] + s * k[0], c + t * k[2] * k[2]};
  return Rotation(m, Unchecked{});
}

Vec3 Rotation::apply(const Vec3& x) const {
  return {dot(m_[0], x), dot(m_[1], x), dot(m_[2], x)};
}

Vec3 Rotation::apply_transpose(const Vec3& x) const {
  Vec3 r{};
  for (int c = 0; c < 3; ++c) {
    r[c] = m_[0][c] * x[0] + m_[1][c] * x[1] + m_[2][c] * x[2];
  }
  return r;
}

ProjectivePoint Rotation::apply(const ProjectivePoint& p) const {
  return ProjectivePoint(apply(p.coords()));
}

Rotation Rotation::transpose() const {
  Mat3 t{};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) t[r][c] = m_[c][r];
  return Rotation(t, Unchecked{});
}

Rotation Rotation::operator*(const Rotation& rhs) const {
  Mat3 out{};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += m_[r][k] * rhs.m_[k][c];
      out[r][c] = s;
    }
  return Rotation(out, Unchecked{});
}

double Rotation::orthogonality_defect() const {
  double worst = 0.0;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += m_[k][r] * m_[k][c];
      worst = std::max(worst, std::abs(s - (r == c ? 1.0 : 0.0)));
    }
  return worst;
}

// ---------------------------------------------------------------------------

double fs_distance(const ProjectivePoint& p, const ProjectivePoint& q) {
  const double c = std::abs(dot(p.coords(), q.coords()));
  const double s = norm(cross(p.coords(), q.coords()));
  return std::atan2(s, c);
}

double fs_ball_volume(double rho) {
  constexpr double half_pi = std::numbers::pi / 2;
  if (!(rho > 0.0) || rho > half_pi + 1e-15) {
    throw std::invalid_argument("fs_ball_volume: rho must lie in (0, pi/2]");
  }
  const double upper = rho >= half_pi - 1e-15 ? std::numeric_limits<double>::infinity()
                                              : std::tan(rho);
  auto radial = [](double r) {
    const double w = 1.0 + r * r;
    return r * r * r / (w * w * w);
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  double err = 0.0;
  const double integral = GK::integrate(radial, 0.0, upper, 15, 1e-15, &err);
  // Boost's Kronrod-Gauss error estimate is very pessimistic on short
  // intervals, so a finite range is also cross-checked against an
  // eight-panel composite of the same rule.
  if (std::isfinite(upper) && !(err <= 1e-12 * std::abs(integral))) {
    double panels = 0.0;
    for (int k = 0; k < 8; ++k) panels += GK::integrate(radial, upper * k / 8, upper * (k + 1) / 8, 0, 0.0);
    err = std::abs(panels - integral);
  }
  if (!(err <= 1e-12 * std::abs(integral) + 1e-300)) {
    throw QuadratureError("fs_ball_volume: quadrature did not converge (rho = " +
                              std::to_string(rho) + ")",
                          err);
  }
  constexpr double sphere3_area = 2.0 * std::numbers::pi * std::numbers::pi;
  return sphere3_area * integral;
}

Rotation rotation_to(const ProjectivePoint& p) {
  const Vec3& u = p.coords();
  const double s = std::hypot(u[1], u[2]);
  if (s == 0.0) return Rotation::identity();
  const Vec3 axis{0.0, -u[2] / s, u[1] / s};  // e0 x u, normalized
  return Rotation::about_axis(axis, std::atan2(s, u[0]));
}

std::vector<ProjectivePoint> pack_fs_balls(double rho) {
  if (!(rho > 0.0) || rho > std::numbers::pi / 4 + 1e-15) {
    throw std::invalid_argument("pack_fs_balls: rho must lie in (0, pi/4]");
  }
  const double min_sep = 2.0 * rho;
  const auto n = static_cast<std::size_t>(std::ceil(30.0 / (rho * rho)));
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));

  std::vector<ProjectivePoint> centers;
  // Hemisphere x0 >= 0, walked from the pole towards the equator.
  for (std::size_t i = 0; i < n; ++i) {
    const double h = 1.0 - (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    const double r = std::sqrt(std::max(0.0, 1.0 - h * h));
    const double phi = golden * static_cast<double>(i);
    const ProjectivePoint cand(h, r * std::cos(phi), r * std::sin(phi));
    const bool clear = std::all_of(centers.begin(), centers.end(), [&](const ProjectivePoint& c) {
      return fs_distance(c, cand) >= min_sep;
    });
    if (clear) centers.push_back(cand);
  }
  return centers;
}

// ---------------------------------------------------------------------------
// SphereGrid

namespace {

struct LatticeKey {
  int n;
  long long operator()(int a, int b, int c) const {
    const long long w = 2LL * n + 1;
    return ((a + n) * w + (b + n)) * w + (c + n);
  }
};

constexpr std::array<int, 3> face_signs(int face) {
  return {(face & 1) ? -1 : 1, (face & 2) ? -1 : 1, (face & 4) ? -1 : 1};
}

double angle_between(const Vec3& a, const Vec3& b) {
  return std::atan2(norm(cross(a, b)), dot(a, b));
}

}  // namespace

SphereGrid sphere_grid(int resolution) {
  if (resolution < 1) throw std::invalid_argument("sphere_grid: resolution must be >= 1");
  const int n = resolution;
  SphereGrid g;
  g.resolution = n;

  const LatticeKey key{n};
  std::unordered_map<long long, int> vertex_of;
  std::vector<std::array<int, 3>> lattice;
  vertex_of.reserve(static_cast<std::size_t>(4 * n * n + 2));

  auto vertex = [&](int a, int b, int c) {
    const long long k = key(a, b, c);
    auto [it, inserted] = vertex_of.try_emplace(k, static_cast<int>(lattice.size()));
    if (inserted) lattice.push_back({a, b, c});
    return it->second;
  };

  g.cell_lookup.assign(static_cast<std::size_t>(8 * 2 * n * n), -1);
  for (int face = 0; face < 8; ++face) {
    const auto s = face_signs(face);
    auto on_face = [&](int i, int j) { return vertex(s[0] * i, s[1] * j, s[2] * (n - i - j)); };
    for (int i = 0; i < n; ++i) {
      for (int j = 0; i + j < n; ++j) {
        g.cell_lookup[static_cast<std::size_t>(((face * 2 + 0) * n + i) * n + j)] =
            static_cast<int>(g.cells.size());
        g.cells.push_back({on_face(i, j), on_face(i + 1, j), on_face(i, j + 1)});
        if (i + j <= n - 2) {
          g.cell_lookup[static_cast<std::size_t>(((face * 2 + 1) * n + i) * n + j)] =
              static_cast<int>(g.cells.size());
          g.cells.push_back({on_face(i + 1, j), on_face(i + 1, j + 1), on_face(i, j + 1)});
        }
      }
    }
  }

  g.vertices.reserve(lattice.size());
  for (const auto& l : lattice) {
    g.vertices.push_back(normalized({double(l[0]), double(l[1]), double(l[2])}));
  }
  g.antipodal_vertex.resize(lattice.size());
  for (std::size_t v = 0; v < lattice.size(); ++v) {
    const auto& l = lattice[v];
    g.antipodal_vertex[v] = vertex_of.at(key(-l[0], -l[1], -l[2]));
  }

  const std::size_t per_face = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  g.antipodal_cell.resize(g.cells.size());
  for (std::size_t c = 0; c < g.cells.size(); ++c) {
    const std::size_t face = c / per_face;
    g.antipodal_cell[c] = static_cast<int>((face ^ 7U) * per_face + c % per_face);
  }

  g.centers.reserve(g.cells.size());
  for (const auto& cell : g.cells) {
    const auto& a = lattice[cell[0]];
    const auto& b = lattice[cell[1]];
    const auto& c = lattice[cell[2]];
    g.centers.push_back(normalized({double(a[0] + b[0] + c[0]), double(a[1] + b[1] + c[1]),
                                    double(a[2] + b[2] + c[2])}));
  }

  // Edges and cell adjacency.
  std::unordered_map<long long, std::pair<int, int>> edge_cells;  // edge -> (cell, slot)
  edge_cells.reserve(g.cells.size() * 2);
  g.neighbors.assign(g.cells.size(), {-1, -1, -1});
  const long long nv = static_cast<long long>(lattice.size());
  for (std::size_t c = 0; c < g.cells.size(); ++c) {
    for (int e = 0; e < 3; ++e) {
      const int a = g.cells[c][e];
      const int b = g.cells[c][(e + 1) % 3];
      const long long ek = std::min(a, b) * nv + std::max(a, b);
      auto it = edge_cells.find(ek);
      if (it == edge_cells.end()) {
        edge_cells.emplace(ek, std::make_pair(static_cast<int>(c), e));
        g.edges.push_back({std::min(a, b), std::max(a, b)});
      } else {
        const auto [other, slot] = it->second;
        g.neighbors[c][e] = other;
        g.neighbors[other][slot] = static_cast<int>(c);
      }
    }
  }
  return g;
}

int SphereGrid::locate(const Vec3& x) const {
  const int n = resolution;
  const int face = (x[0] < 0 ? 1 : 0) | (x[1] < 0 ? 2 : 0) | (x[2] < 0 ? 4 : 0);
  const double l1 = std::abs(x[0]) + std::abs(x[1]) + std::abs(x[2]);
  if (!(l1 > 0.0)) throw std::invalid_argument("SphereGrid::locate: zero vector");
  const double a0 = std::abs(x[0]) / l1 * n;
  const double a1 = std::abs(x[1]) / l1 * n;
  int i = std::clamp(static_cast<int>(std::floor(a0)), 0, n - 1);
  int j = std::clamp(static_cast<int>(std::floor(a1)), 0, n - 1);
  while (i + j > n - 1) {
    if (i > 0) --i; else --j;
  }
  const double u = a0 - i;
  const double v = a1 - j;
  const int type = (u + v <= 1.0 || i + j == n - 1) ? 0 : 1;
  return cell_lookup[static_cast<std::size_t>(((face * 2 + type) * n + i) * n + j)];
}

double SphereGrid::max_cell_diameter() const {
  double worst = 0.0;
  for (const auto& c : cells) {
    for (int e = 0; e < 3; ++e) {
      worst = std::max(worst, angle_between(vertices[c[e]], vertices[c[(e + 1) % 3]]));
    }
  }
  return worst;
}

int SphereGrid::euler_characteristic() const {
  return static_cast<int>(vertices.size()) - static_cast<int>(edges.size()) +
         static_cast<int>(cells.size());
}

const SphereGrid& shared_sphere_grid(int resolution) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<const SphereGrid>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[resolution];
  if (!slot) slot = std::make_unique<const SphereGrid>(sphere_grid(resolution));
  return *slot;
}

}  // namespace klab
