#include "klab/topology.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numbers>
#include <numeric>
#include <ostream>
#include <string>

#include "klab/error.hpp"

namespace klab {

namespace {

constexpr double kPi = std::numbers::pi;

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

bool is_identity(const Rotation& r) {
  const auto& m = r.matrix();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (m[i][j] != (i == j ? 1.0 : 0.0)) return false;
  return true;
}

}  // namespace

AnnulusSpec AnnulusSpec::centered(const ProjectivePoint& center, double r1, double r2) {
  AnnulusSpec a{rotation_to(center), r1, r2};
  a.validate();
  return a;
}

void AnnulusSpec::validate() const {
  if (!(r1 >= 0.0) || !(r2 > r1) || !(r2 < 1e6)) {
    throw ConfigError("annulus radii must satisfy 0 <= r1 < r2");
  }
}

const char* to_string(AnnulusClass c) noexcept {
  return c == AnnulusClass::trivial ? "trivial" : "nontrivial";
}

double fs_value(const HomogeneousPoly& f, const Vec3& x) {
  return evaluate_homogeneous(f, normalized(x));
}

// ---------------------------------------------------------------------------
// Ray parity

namespace {

// FS-normalized values at many chart points in one batched pass.
void fs_values(const HomogeneousPoly& f, std::vector<Vec3>& pts, std::vector<double>& out) {
  for (auto& x : pts) x = normalized(x);
  out.resize(pts.size());
  evaluate_homogeneous(f, std::span<const Vec3>(pts), std::span<double>(out));
}

RayScan scan_ray(const HomogeneousPoly& f, const AnnulusSpec& a, double u1, double u2,
                 int resolution, double tol) {
  const int n = std::max(resolution, 2);
  thread_local std::vector<Vec3> pts;
  thread_local std::vector<double> vals;
  pts.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double s = k == n - 1 ? a.r2 : a.r1 + (a.r2 - a.r1) * k / (n - 1);
    pts[k] = a.chart_point(s * u1, s * u2);
  }
  fs_values(f, pts, vals);
  RayScan out;
  double prev = vals[0];
  if (std::abs(prev) < tol) {
    throw TopologyError(TopologyErrorKind::boundary_degenerate,
                        "F vanishes at the inner endpoint of a ray");
  }
  const double first = prev;
  for (int k = 1; k < n; ++k) {
    const double v = vals[k];
    if (k == n - 1 && std::abs(v) < tol) {
      throw TopologyError(TopologyErrorKind::boundary_degenerate,
                          "F vanishes at the outer endpoint of a ray");
    }
    if (v == 0.0) {
      throw TopologyError(TopologyErrorKind::resolution, "ray sample hit an exact zero");
    }
    if ((v < 0) != (prev < 0)) ++out.crossings;
    prev = v;
  }
  out.parity = ((first < 0) != (prev < 0)) ? 1 : 0;
  return out;
}

}  // namespace

RayScan ray_scan(const HomogeneousPoly& f, const AnnulusSpec& annulus,
                 const std::array<double, 2>& direction, int resolution) {
  annulus.validate();
  const double len = std::hypot(direction[0], direction[1]);
  if (!(len > 0.0)) throw ConfigError("ray direction must be nonzero");
  const double tol = kDegenerateRelTol * l2_norm(f);
  return scan_ray(f, annulus, direction[0] / len, direction[1] / len, resolution, tol);
}

int ray_parity(const HomogeneousPoly& f, const AnnulusSpec& annulus,
               const std::array<double, 2>& direction, int resolution) {
  return ray_scan(f, annulus, direction, resolution).parity;
}

AnnulusClass annulus_class(const HomogeneousPoly& f, const AnnulusSpec& annulus, int n_directions,
                           int boundary_samples) {
  annulus.validate();
  if (n_directions < 8) throw ConfigError("annulus_class needs at least 8 directions");
  const double tol = kDegenerateRelTol * l2_norm(f);
  const int nb = boundary_samples > 0 ? boundary_samples : std::max(2 * n_directions, 256);
  // A crossing is usually found within the first few coarse samples.
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(nb));
  constexpr int stride = 16;
  for (int k = 0; k < nb; k += stride) order.push_back(k);
  for (int k = 0; k < nb; ++k)
    if (k % stride != 0) order.push_back(k);
  // Coarse samples form the first batch, the rest the second.
  const std::size_t n_coarse = static_cast<std::size_t>((nb + stride - 1) / stride);
  std::vector<Vec3> pts;
  std::vector<double> vals;
  for (double r : {annulus.r2, annulus.r1}) {
    const std::size_t count = r == 0.0 ? 1 : static_cast<std::size_t>(nb);
    double first = 0.0;
    for (std::size_t lo = 0; lo < count;) {
      const std::size_t hi = lo == 0 ? std::min(count, n_coarse) : count;
      pts.clear();
      for (std::size_t i = lo; i < hi; ++i) {
        const double t = 2 * kPi * order[i] / nb;
        pts.push_back(annulus.chart_point(r * std::cos(t), r * std::sin(t)));
      }
      fs_values(f, pts, vals);
      for (std::size_t i = lo; i < hi; ++i) {
        const double v = vals[i - lo];
        if (std::abs(v) < tol) {
          throw TopologyError(TopologyErrorKind::boundary_degenerate,
                              "F is numerically zero on a boundary circle");
        }
        if (i == 0) {
          first = v;
        } else if ((v < 0) != (first < 0)) {
          throw TopologyError(TopologyErrorKind::boundary_crossing, "zero set meets a boundary circle");
        }
      }
      lo = hi;
    }
  }
  int parity = -1;
  for (int k = 0; k < n_directions; ++k) {
    const double t = 2 * kPi * k / n_directions;
    const int p = scan_ray(f, annulus, std::cos(t), std::sin(t), 64, tol).parity;
    if (parity < 0) {
      parity = p;
    } else if (p != parity) {
      throw TopologyError(TopologyErrorKind::inconsistent, "ray parities disagree");
    }
  }
  return parity == 1 ? AnnulusClass::nontrivial : AnnulusClass::trivial;
}

// ---------------------------------------------------------------------------
// Marching squares

ChartWindow ChartWindow::centered(const ProjectivePoint& center, double half_width) {
  if (!(half_width > 0.0)) throw ConfigError("chart window half-width must be positive");
  return {rotation_to(center), half_width};
}

int default_resolution(int d, double half_width) {
  const int n = std::max(256, static_cast<int>(std::ceil(16.0 * half_width * std::sqrt(d))));
  return n | 1;
}

std::vector<CurveComponent> extract_components(const HomogeneousPoly& f, const ChartWindow& window,
                                               int resolution) {
  const int n = resolution > 0 ? resolution : default_resolution(f.degree(), window.half_width);
  if (n < 64) throw ConfigError("extract_components: resolution must be at least 64");
  const HomogeneousPoly q = is_identity(window.frame) ? f : rotate_poly(f, window.frame.transpose());
  const double h = window.half_width;

  std::vector<double> xs(static_cast<std::size_t>(n + 1));
  for (int k = 0; k <= n; ++k) xs[k] = -h + 2.0 * h * k / n;
  const std::vector<double> v = evaluate_affine_grid_fs(q, xs, xs);
  const auto stride = static_cast<std::size_t>(n + 1);
  auto val = [&](int ix, int iy) { return v[static_cast<std::size_t>(iy) * stride + ix]; };
  auto pos = [](double x) { return x > 0.0; };

  const std::size_t n_h = static_cast<std::size_t>(n) * (n + 1);
  const std::size_t n_edges = 2 * n_h;
  auto h_edge = [&](int ix, int iy) { return static_cast<std::size_t>(iy) * n + ix; };
  auto v_edge = [&](int ix, int iy) { return n_h + static_cast<std::size_t>(iy) * (n + 1) + ix; };

  std::vector<std::array<int, 2>> adj(n_edges, {-1, -1});
  auto link = [&](std::size_t a, std::size_t b) {
    auto add = [&](std::size_t from, std::size_t to) {
      auto& slot = adj[from];
      (slot[0] < 0 ? slot[0] : slot[1]) = static_cast<int>(to);
    };
    add(a, b);
    add(b, a);
  };

  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const bool b0 = pos(val(ix, iy));
      const bool b1 = pos(val(ix + 1, iy));
      const bool b2 = pos(val(ix + 1, iy + 1));
      const bool b3 = pos(val(ix, iy + 1));
      const std::size_t bottom = h_edge(ix, iy);
      const std::size_t right = v_edge(ix + 1, iy);
      const std::size_t top = h_edge(ix, iy + 1);
      const std::size_t left = v_edge(ix, iy);
      std::array<std::size_t, 4> crossed{};
      int nc = 0;
      if (b0 != b1) crossed[nc++] = bottom;
      if (b1 != b2) crossed[nc++] = right;
      if (b2 != b3) crossed[nc++] = top;
      if (b3 != b0) crossed[nc++] = left;
      if (nc == 2) {
        link(crossed[0], crossed[1]);
      } else if (nc == 4) {
        const double cx = (xs[ix] + xs[ix + 1]) / 2;
        const double cy = (xs[iy] + xs[iy + 1]) / 2;
        const bool center = pos(evaluate_homogeneous(q, Vec3{1.0, cx, cy}));
        if (center == b0) {
          link(bottom, right);
          link(top, left);
        } else {
          link(left, bottom);
          link(right, top);
        }
      }
    }
  }

  auto point_of = [&](std::size_t e) -> std::array<double, 2> {
    if (e < n_h) {
      const int iy = static_cast<int>(e / n);
      const int ix = static_cast<int>(e % n);
      const double a = val(ix, iy);
      const double b = val(ix + 1, iy);
      const double t = a / (a - b);
      return {xs[ix] + t * (xs[ix + 1] - xs[ix]), xs[iy]};
    }
    const std::size_t k = e - n_h;
    const int iy = static_cast<int>(k / (n + 1));
    const int ix = static_cast<int>(k % (n + 1));
    const double a = val(ix, iy);
    const double b = val(ix, iy + 1);
    const double t = a / (a - b);
    return {xs[ix], xs[iy] + t * (xs[iy + 1] - xs[iy])};
  };

  std::vector<CurveComponent> out;
  std::vector<char> seen(n_edges, 0);
  auto walk = [&](std::size_t start, bool closed) {
    CurveComponent c;
    c.closed = closed;
    std::size_t cur = start;
    int prev = -1;
    while (true) {
      seen[cur] = 1;
      c.polyline.push_back(point_of(cur));
      const auto& nb = adj[cur];
      int next = nb[0] != prev ? nb[0] : nb[1];
      if (nb[0] == nb[1]) next = nb[0];  // two-point loop
      if (next < 0 || seen[static_cast<std::size_t>(next)]) break;
      prev = static_cast<int>(cur);
      cur = static_cast<std::size_t>(next);
    }
    out.push_back(std::move(c));
  };
  for (std::size_t e = 0; e < n_edges; ++e) {
    if (!seen[e] && adj[e][0] >= 0 && adj[e][1] < 0) walk(e, false);
  }
  for (std::size_t e = 0; e < n_edges; ++e) {
    if (!seen[e] && adj[e][0] >= 0) walk(e, true);
  }

  // Containment tree among closed components.
  struct Box {
    double x0, x1, y0, y1, area;
  };
  std::vector<Box> boxes(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& pl = out[i].polyline;
    Box b{pl[0][0], pl[0][0], pl[0][1], pl[0][1], 0.0};
    for (std::size_t k = 0; k < pl.size(); ++k) {
      const auto& p = pl[k];
      const auto& q2 = pl[(k + 1) % pl.size()];
      b.x0 = std::min(b.x0, p[0]);
      b.x1 = std::max(b.x1, p[0]);
      b.y0 = std::min(b.y0, p[1]);
      b.y1 = std::max(b.y1, p[1]);
      b.area += p[0] * q2[1] - q2[0] * p[1];
    }
    b.area = std::abs(b.area) / 2;
    boxes[i] = b;
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& probe = out[i].polyline[0];
    double best = 0.0;
    for (std::size_t j = 0; j < out.size(); ++j) {
      if (j == i || !out[j].closed) continue;
      const Box& b = boxes[j];
      if (probe[0] < b.x0 || probe[0] > b.x1 || probe[1] < b.y0 || probe[1] > b.y1) continue;
      if (out[i].parent >= 0 && b.area >= best) continue;
      if (encloses(out[j], probe[0], probe[1])) {
        out[i].parent = static_cast<int>(j);
        best = b.area;
      }
    }
  }
  return out;
}

bool encloses(const CurveComponent& c, double x, double y) {
  if (!c.closed) return false;
  bool inside = false;
  const auto& pl = c.polyline;
  for (std::size_t i = 0, j = pl.size() - 1; i < pl.size(); j = i++) {
    const auto& a = pl[i];
    const auto& b = pl[j];
    if ((a[1] > y) != (b[1] > y)) {
      const double xc = a[0] + (y - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
      if (x < xc) inside = !inside;
    }
  }
  return inside;
}

double component_length(const CurveComponent& c, LengthMetric metric) {
  if (!c.closed) throw std::invalid_argument("component_length: open component");
  const auto& pl = c.polyline;
  double total = 0.0;
  for (std::size_t i = 0; i < pl.size(); ++i) {
    const auto& a = pl[i];
    const auto& b = pl[(i + 1) % pl.size()];
    const double dx = b[0] - a[0];
    const double dy = b[1] - a[1];
    if (metric == LengthMetric::euclidean) {
      total += std::hypot(dx, dy);
    } else {
      // FS line element on the real affine chart, evaluated at the midpoint.
      const double mx = (a[0] + b[0]) / 2;
      const double my = (a[1] + b[1]) / 2;
      const double w = 1.0 + mx * mx + my * my;
      const double dot_md = mx * dx + my * dy;
      const double q = (dx * dx + dy * dy) * w - dot_md * dot_md;
      total += std::sqrt(std::max(q, 0.0)) / w;
    }
  }
  return total;
}

NestDepth nest_depth_at(const HomogeneousPoly& f, const ProjectivePoint& p, double r_max,
                        int resolution) {
  if (std::abs(fs_value(f, p.coords())) < 1e-8 * l2_norm(f)) {
    throw TopologyError(TopologyErrorKind::degenerate_point, "F vanishes at the nest center");
  }
  const auto comps = extract_components(f, ChartWindow::centered(p, r_max), resolution);
  NestDepth out;
  for (const auto& c : comps) {
    if (c.closed) {
      ++out.closed_components;
      if (encloses(c, 0.0, 0.0)) ++out.depth;
    } else {
      ++out.open_components;
    }
  }
  out.lower_bound = out.open_components > 0;
  return out;
}

void write_components_csv(std::ostream& os, const std::vector<CurveComponent>& components) {
  os << "component_id,vertex_index,z1,z2\n";
  char buf[64];
  auto put = [&](double x) {
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    os.write(buf, r.ptr - buf);
  };
  for (std::size_t i = 0; i < components.size(); ++i) {
    const auto& pl = components[i].polyline;
    for (std::size_t k = 0; k < pl.size(); ++k) {
      os << i << ',' << k << ',';
      put(pl[k][0]);
      os << ',';
      put(pl[k][1]);
      os << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Complement components on RP^2

SignField sign_field(const HomogeneousPoly& f, const SphereGrid& grid) {
  SignField field;
  field.degree = f.degree();
  field.values.assign(grid.num_vertices(), 0.0);
  const double parity = (f.degree() % 2 == 0) ? 1.0 : -1.0;
  std::vector<std::size_t> half;
  std::vector<Vec3> pts;
  for (std::size_t v = 0; v < grid.num_vertices(); ++v) {
    if (static_cast<std::size_t>(grid.antipodal_vertex[v]) < v) continue;
    half.push_back(v);
    pts.push_back(grid.vertices[v]);
  }
  const std::vector<double> vals = evaluate_homogeneous(f, std::span<const Vec3>(pts));
  for (std::size_t i = 0; i < half.size(); ++i) {
    const std::size_t v = half[i];
    const auto w = static_cast<std::size_t>(grid.antipodal_vertex[v]);
    field.values[v] = vals[i];
    if (w != v) field.values[w] = parity * vals[i];
  }
  return field;
}

int separation_grid_resolution(int d) {
  return std::max(16, static_cast<int>(std::ceil(12.0 * std::sqrt(static_cast<double>(d)))));
}

std::vector<std::vector<int>> separation_classes(const HomogeneousPoly& f,
                                                 const std::vector<ProjectivePoint>& points,
                                                 const SphereGrid& grid) {
  const SignField field = sign_field(f, grid);
  auto pos = [&](int v) { return field.values[static_cast<std::size_t>(v)] > 0.0; };
  UnionFind uf(grid.num_vertices());
  for (const auto& e : grid.edges) {
    if (pos(e[0]) == pos(e[1])) uf.unite(static_cast<std::size_t>(e[0]), static_cast<std::size_t>(e[1]));
  }
  for (std::size_t v = 0; v < grid.num_vertices(); ++v) {
    uf.unite(v, static_cast<std::size_t>(grid.antipodal_vertex[v]));
  }

  std::vector<std::size_t> roots(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& cell = grid.cells[static_cast<std::size_t>(grid.locate(points[i].coords()))];
    if (pos(cell[0]) != pos(cell[1]) || pos(cell[0]) != pos(cell[2])) {
      throw TopologyError(TopologyErrorKind::zero_straddle,
                          "point " + std::to_string(i) + " lies in a cell crossed by the zero set");
    }
    roots[i] = uf.find(static_cast<std::size_t>(cell[0]));
  }
  std::vector<std::vector<int>> groups;
  std::vector<std::size_t> group_root;
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto it = std::find(group_root.begin(), group_root.end(), roots[i]);
    if (it == group_root.end()) {
      group_root.push_back(roots[i]);
      groups.push_back({static_cast<int>(i)});
    } else {
      groups[static_cast<std::size_t>(it - group_root.begin())].push_back(static_cast<int>(i));
    }
  }
  return groups;
}

std::string partition_to_json(const std::vector<std::vector<int>>& groups) {
  return nlohmann::json(groups).dump();
}

}  // namespace klab
