#include <doctest.h>

#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "klab/error.hpp"
#include "klab/kostlan.hpp"
#include "klab/reference.hpp"
#include "klab/topology.hpp"
#include "oracles.hpp"

using namespace klab;

namespace {

// X1^2 / a^2 + X2^2 / b^2 - X0^2
HomogeneousPoly ellipse(double a, double b) {
  HomogeneousPoly p(2);
  p.set({0, 2, 0}, 1.0 / (a * a));
  p.set({0, 0, 2}, 1.0 / (b * b));
  p.set({2, 0, 0}, -1.0);
  return p;
}

// Connected regions of {F != 0} in the square window by a union-find over
// grid vertices: horizontal and vertical neighbours join when their signs
// agree, and a saddle cell joins the diagonal whose sign matches the cell
// centre. This is the planar dual of marching squares with the same saddle
// rule, so regions = 1 + closed + open curve components.
int complement_regions(const HomogeneousPoly& f, double h, int n) {
  std::vector<double> xs(static_cast<std::size_t>(n + 1));
  for (int k = 0; k <= n; ++k) xs[k] = -h + 2.0 * h * k / n;
  const auto v = evaluate_affine_grid_fs(f, xs, xs);
  const int w = n + 1;
  std::vector<int> parent(static_cast<std::size_t>(w * w));
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int a) { return parent[a] == a ? a : parent[a] = find(parent[a]); };
  auto unite = [&](int a, int b) { parent[find(a)] = find(b); };
  auto pos = [&](int ix, int iy) { return v[static_cast<std::size_t>(iy * w + ix)] > 0.0; };
  for (int iy = 0; iy <= n; ++iy)
    for (int ix = 0; ix <= n; ++ix) {
      if (ix < n && pos(ix, iy) == pos(ix + 1, iy)) unite(iy * w + ix, iy * w + ix + 1);
      if (iy < n && pos(ix, iy) == pos(ix, iy + 1)) unite(iy * w + ix, (iy + 1) * w + ix);
    }
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const bool b0 = pos(ix, iy), b1 = pos(ix + 1, iy), b2 = pos(ix + 1, iy + 1), b3 = pos(ix, iy + 1);
      if (b0 == b2 && b1 == b3 && b0 != b1) {
        const bool c = evaluate_homogeneous(f, Vec3{1.0, (xs[ix] + xs[ix + 1]) / 2, (xs[iy] + xs[iy + 1]) / 2}) > 0.0;
        if (c == b0) unite(iy * w + ix, (iy + 1) * w + ix + 1);
        else unite(iy * w + ix + 1, (iy + 1) * w + ix);
      }
    }
  int regions = 0;
  for (int k = 0; k < w * w; ++k) regions += find(k) == k;
  return regions;
}

}  // namespace

TEST_SUITE("topology") {

TEST_CASE("annulus validation") {
  CHECK_NOTHROW((AnnulusSpec{Rotation::identity(), 0.0, 0.5}.validate()));
  CHECK_THROWS_AS((AnnulusSpec{Rotation::identity(), 0.5, 0.5}.validate()), ConfigError);
  CHECK_THROWS_AS((AnnulusSpec{Rotation::identity(), -0.1, 0.5}.validate()), ConfigError);
  const AnnulusSpec a = AnnulusSpec::centered(ProjectivePoint(0.2, 0.3, 1.0), 0.1, 0.2);
  CHECK(fs_distance(a.center(), ProjectivePoint(0.2, 0.3, 1.0)) < 1e-12);
}

TEST_CASE("ray parity") {
  const int d = 30;
  const Reference p0 = build_p0(d, 1.0);
  const AnnulusSpec& a = p0.annuli.front();
  for (int k = 0; k < 12; ++k) {
    const double t = 0.5 * k;
    CHECK(ray_parity(p0.poly, a, {std::cos(t), std::sin(t)}) == 1);
    const RayScan s = ray_scan(p0.poly, a, {std::cos(t), std::sin(t)}, 200);
    CHECK(s.crossings == 1);
  }
  CHECK(ray_parity(HomogeneousPoly::monomial({d, 0, 0}), a, {1.0, 0.0}) == 0);

  const Reference p1 = build_p1(200, 6.0, 0.9);
  // r_2 < R_1 < R_0 < r_0: two crossings
  const AnnulusSpec wide{Rotation::identity(), p1.extremal_radii[2], p1.extremal_radii[0]};
  const RayScan s = ray_scan(p1.poly, wide, {0.6, 0.8}, 256);
  CHECK(s.parity == 0);
  CHECK(s.crossings == 2);

  const AnnulusSpec on_zero{Rotation::identity(), p0.zero_radii[0], 2 * p0.zero_radii[0]};
  CHECK_THROWS_AS(ray_parity(p0.poly, on_zero, {1.0, 0.0}), TopologyError);
  CHECK_THROWS_AS(ray_parity(p0.poly, a, {0.0, 0.0}), ConfigError);
}

TEST_CASE("annulus classes") {
  const Reference p0 = build_p0(60, 2.0);
  CHECK(annulus_class(p0.normalized(), p0.annuli.front()) == AnnulusClass::nontrivial);
  CHECK(std::string(to_string(AnnulusClass::trivial)) == "trivial");
  const AnnulusSpec empty{Rotation::identity(), 0.5, 0.8};
  CHECK(annulus_class(p0.poly, empty) == AnnulusClass::trivial);

  const int d = 100;
  const Reference p2 = build_p2(d, separated_points(d, 0.3, 3), 0.3);
  const HomogeneousPoly n2 = p2.normalized();
  for (const auto& ann : p2.annuli) CHECK(annulus_class(n2, ann) == AnnulusClass::nontrivial);

  const Reference p1 = build_p1(200, 6.0, 0.9);
  for (const auto& ann : p1.annuli) CHECK(annulus_class(p1.poly, ann) == AnnulusClass::nontrivial);

  // the zero circle runs through the outer boundary of an off-centre annulus
  const double rho = p0.zero_radii[0];
  const AnnulusSpec off{rotation_to(ProjectivePoint::affine(0.5 * rho, 0.0)), 0.1 * rho, 0.9 * rho};
  try {
    annulus_class(p0.poly, off);
    FAIL("expected a boundary crossing");
  } catch (const TopologyError& e) {
    CHECK(e.kind() == TopologyErrorKind::boundary_crossing);
  }
  CHECK_THROWS_AS(annulus_class(p0.poly, p0.annuli.front(), 4), ConfigError);
}

TEST_CASE("contours of reference curves") {
  const Reference p0 = build_p0(40, 1.0);
  const double rho = p0.zero_radii[0];
  const auto c0 = extract_components(p0.poly, ChartWindow::centered(ProjectivePoint(1, 0, 0), 2 * rho), 256);
  REQUIRE(c0.size() == 1);
  CHECK(c0[0].closed);
  for (const auto& q : c0[0].polyline) CHECK(std::hypot(q[0], q[1]) == doctest::Approx(rho).epsilon(0.01));
  CHECK(encloses(c0[0], 0.0, 0.0));
  CHECK_FALSE(encloses(c0[0], 1.5 * rho, 0.0));

  const Reference p1 = build_p1(200, 6.0, 0.9);
  const auto c1 = extract_components(p1.poly, ChartWindow::centered(ProjectivePoint(1, 0, 0), 1.3 * p1.extremal_radii[0]), 512);
  REQUIRE(c1.size() == static_cast<std::size_t>(p1.N / 2));
  int roots = 0;
  for (const auto& c : c1) {
    CHECK(c.closed);
    roots += c.parent < 0;
  }
  CHECK(roots == 1);
  CHECK_THROWS_AS(extract_components(p0.poly, ChartWindow::centered(ProjectivePoint(1, 0, 0), 1.0), 32), ConfigError);
  CHECK(default_resolution(100, 2.0) % 2 == 1);
  CHECK(default_resolution(100, 2.0) >= 320);
}

TEST_CASE("component counts agree with a complement flood fill") {
  const int d = 20;
  const SamplerConfig sc{d, VarianceConvention::half, 2024};
  const double h = 1.5;
  const int n = 301;
  for (std::uint64_t t = 0; t < 50; ++t) {
    const HomogeneousPoly f = sample_kostlan(sc, t);
    const auto comps = extract_components(f, ChartWindow{Rotation::identity(), h}, n);
    CHECK(complement_regions(f, h, n) == 1 + static_cast<int>(comps.size()));
  }
}

TEST_CASE("lengths") {
  const double r = 0.1;
  const auto c = extract_components(ellipse(r, r), ChartWindow{Rotation::identity(), 2 * r}, 512);
  REQUIRE(c.size() == 1);
  CHECK(component_length(c[0]) == doctest::Approx(2 * oracle::pi * r).epsilon(0.01));
  CHECK(component_length(c[0], LengthMetric::fubini_study) == doctest::Approx(oracle::fs_circle_length(r)).epsilon(0.01));
  const double big = 0.8;
  const auto cb = extract_components(ellipse(big, big), ChartWindow{Rotation::identity(), 1.2}, 512);
  REQUIRE(cb.size() == 1);
  CHECK(component_length(cb[0], LengthMetric::fubini_study) == doctest::Approx(oracle::fs_circle_length(big)).epsilon(0.01));
  CHECK(component_length(cb[0], LengthMetric::fubini_study) < component_length(cb[0]));

  const auto ce = extract_components(ellipse(1.0, 0.5), ChartWindow{Rotation::identity(), 1.25}, 512);
  REQUIRE(ce.size() == 1);
  CHECK(component_length(ce[0]) == doctest::Approx(oracle::ellipse_perimeter(1.0, 0.5)).epsilon(0.01));

  CurveComponent open;
  open.polyline = {{0, 0}, {1, 0}};
  CHECK_THROWS_AS(component_length(open), std::invalid_argument);
}

TEST_CASE("nest depth") {
  const Reference p0 = build_p0(40, 1.0);
  const NestDepth n0 = nest_depth_at(p0.poly, ProjectivePoint(1, 0, 0), 0.5);
  CHECK(n0.depth == 1);
  CHECK_FALSE(n0.lower_bound);
  const Reference p1 = build_p1(400, 6.0, 0.9);
  CHECK(nest_depth_at(p1.poly, ProjectivePoint(1, 0, 0), 2.0).depth == p1.N / 2);
  try {
    nest_depth_at(p0.poly, ProjectivePoint::affine(p0.zero_radii[0], 0.0));
    FAIL("expected a degenerate point");
  } catch (const TopologyError& e) {
    CHECK(e.kind() == TopologyErrorKind::degenerate_point);
  }
}

TEST_CASE("components CSV") {
  const Reference p0 = build_p0(40, 1.0);
  const auto c = extract_components(p0.poly, ChartWindow::centered(ProjectivePoint(1, 0, 0), 0.4), 128);
  std::ostringstream os;
  write_components_csv(os, c);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "component_id,vertex_index,z1,z2");
  std::size_t rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == c[0].polyline.size());
}

TEST_CASE("sign field antipodal consistency") {
  const SphereGrid& g = shared_sphere_grid(10);
  for (int d : {3, 4}) {
    const SamplerConfig sc{d, VarianceConvention::half, 1};
    const HomogeneousPoly f = sample_kostlan(sc, 0);
    const SignField s = sign_field(f, g);
    const double sgn = d % 2 ? -1.0 : 1.0;
    for (std::size_t v = 0; v < g.num_vertices(); ++v) {
      CHECK(s.values[static_cast<std::size_t>(g.antipodal_vertex[v])] == sgn * s.values[v]);
      CHECK(s.values[v] == doctest::Approx(static_cast<double>(oracle::naive_eval(f, g.vertices[v]))).epsilon(1e-10).scale(1e-12));
    }
  }
}

TEST_CASE("separation classes") {
  const SphereGrid& g = shared_sphere_grid(64);
  HomogeneousPoly definite(2);
  definite.set({2, 0, 0}, 1.0);
  definite.set({0, 2, 0}, 1.0);
  definite.set({0, 0, 2}, 1.0);
  const std::vector<ProjectivePoint> pts{ProjectivePoint(1, 0, 0), ProjectivePoint(0, 1, 0), ProjectivePoint(0.3, 0.2, 1)};
  CHECK(separation_classes(definite, pts, g) == std::vector<std::vector<int>>{{0, 1, 2}});

  const double r = 0.5;
  const HomogeneousPoly circle = ellipse(r, r);
  const std::vector<ProjectivePoint> io{ProjectivePoint(1, 0, 0), ProjectivePoint(0, 1, 0),
                                        ProjectivePoint::affine(0.2, 0.1), ProjectivePoint::affine(1.5, -0.3)};
  const auto groups = separation_classes(circle, io, g);
  CHECK(groups == std::vector<std::vector<int>>{{0, 2}, {1, 3}});
  CHECK(partition_to_json(groups) == "[[0,2],[1,3]]");
  CHECK_THROWS_AS(separation_classes(circle, {ProjectivePoint::affine(r, 0.0)}, g), TopologyError);

  // odd degree: a line splits nothing in RP^2
  HomogeneousPoly line(1);
  line.set({0, 1, 0}, 1.0);
  const auto lg = separation_classes(line, {ProjectivePoint::affine(0.5, 0.1), ProjectivePoint::affine(-0.5, 0.1)}, g);
  CHECK(lg.size() == 1);

  const int d = 60;
  const auto centers = separated_points(d, 0.3, 3);
  const Reference p2 = build_p2(d, centers, 0.3);
  const auto sep = separation_classes(p2.normalized(), centers, shared_sphere_grid(separation_grid_resolution(d)));
  CHECK(sep.size() == centers.size());
  CHECK(separation_grid_resolution(d) >= 1);
}

}  // TEST_SUITE
