#pragma once

// Topology of real zero sets: Z/2 annulus classes by ray parity, contour
// extraction by marching squares, nest depth, and complement components
// on RP^2 via a flood fill on the sphere grid.

#include <array>
#include <iosfwd>
#include <vector>

#include "klab/poly.hpp"
#include "klab/projgeom.hpp"

namespace klab {

/// Annulus r1 <= |z| <= r2 in the affine chart z -> frame * (1, z1, z2),
/// whose origin is the point frame * e0.
struct AnnulusSpec {
  Rotation frame;
  double r1 = 0.0;
  double r2 = 0.0;

  static AnnulusSpec centered(const ProjectivePoint& center, double r1, double r2);
  ProjectivePoint center() const { return frame.apply(ProjectivePoint(1.0, 0.0, 0.0)); }
  Vec3 chart_point(double z1, double z2) const { return frame.apply(Vec3{1.0, z1, z2}); }
  /// Requires 0 <= r1 < r2 < 1e6; throws ConfigError.
  void validate() const;
};

enum class AnnulusClass { trivial, nontrivial };
const char* to_string(AnnulusClass c) noexcept;

/// Endpoint values below this fraction of ||F||_2 count as vanishing.
inline constexpr double kDegenerateRelTol = 1e-12;

/// FS-normalized value F(x / |x|), whose sign and modulus are chart free.
double fs_value(const HomogeneousPoly& f, const Vec3& x);

struct RayScan {
  int parity = 0;     // sign(F(r1)) != sign(F(r2))
  int crossings = 0;  // sign changes seen by the scan, same parity
};

/// Scan of s -> F(center + s u) on [r1, r2] with `resolution` samples.
/// Throws TopologyError(boundary_degenerate) when an endpoint vanishes and
/// TopologyError(resolution) when a sample hits an exact zero.
RayScan ray_scan(const HomogeneousPoly& f, const AnnulusSpec& annulus,
                 const std::array<double, 2>& direction, int resolution = 64);
int ray_parity(const HomogeneousPoly& f, const AnnulusSpec& annulus,
               const std::array<double, 2>& direction, int resolution = 64);

/// Common ray parity over n_directions equally spaced rays. Both boundary
/// circles are sampled at max(2 n_directions, 256) angles first (outer
/// circle first, coarse samples first). A sign change there throws
/// TopologyError(boundary_crossing), a near-zero value
/// TopologyError(boundary_degenerate); disagreeing parities throw
/// TopologyError(inconsistent).
/// `boundary_samples` overrides the per-circle sample count when positive.
AnnulusClass annulus_class(const HomogeneousPoly& f, const AnnulusSpec& annulus,
                           int n_directions = 8, int boundary_samples = 0);

// --- contours ------------------------------------------------------------------

/// Square [-half_width, half_width]^2 of the affine chart centered at frame * e0.
struct ChartWindow {
  Rotation frame;
  double half_width = 1.0;
  static ChartWindow centered(const ProjectivePoint& center, double half_width);
};

struct CurveComponent {
  std::vector<std::array<double, 2>> polyline;  // chart coordinates
  bool closed = false;
  int parent = -1;  // innermost closed component containing this one
};

/// max(256, ceil(16 * half_width * sqrt(d))) cells per side, forced odd so
/// the window center never lies on a grid line.
int default_resolution(int d, double half_width);

/// Marching squares on a resolution x resolution grid of the window.
/// Saddle cells are resolved by sampling F at the cell center. Chains
/// reaching the window boundary are returned as open components.
std::vector<CurveComponent> extract_components(const HomogeneousPoly& f, const ChartWindow& window,
                                               int resolution = 0);

/// Even-odd containment of a chart point in a closed component.
bool encloses(const CurveComponent& c, double x, double y);

enum class LengthMetric { euclidean, fubini_study };
/// Polyline length; throws std::invalid_argument for open components.
double component_length(const CurveComponent& c, LengthMetric metric = LengthMetric::euclidean);

struct NestDepth {
  int depth = 0;
  bool lower_bound = false;  // open components present: depth may be larger
  int closed_components = 0;
  int open_components = 0;
};

/// Closed components enclosing p inside the chart window of half-width
/// r_max centered at p. Throws TopologyError(degenerate_point) when
/// |F(p)| < 1e-8 ||F||_2.
NestDepth nest_depth_at(const HomogeneousPoly& f, const ProjectivePoint& p, double r_max = 2.0,
                        int resolution = 0);

/// CSV rows "component_id,vertex_index,z1,z2".
void write_components_csv(std::ostream& os, const std::vector<CurveComponent>& components);

// --- complement components on RP^2 ---------------------------------------------

/// Values of F at the grid vertices. Half the vertices are evaluated and
/// the antipodes filled in by (-1)^d, so antipodal consistency is exact.
struct SignField {
  int degree = 0;
  std::vector<double> values;
};
SignField sign_field(const HomogeneousPoly& f, const SphereGrid& grid);

/// Grid resolution whose edges are at most d^{-1/2} / 6.
int separation_grid_resolution(int d);

/// Partition of the point indices by connected component of the complement
/// of {F = 0} in RP^2. Components come from a flood fill over same-sign grid
/// edges (exact for the piecewise-linear interpolant) followed by the
/// antipodal quotient. Groups are ordered by their smallest index. Throws
/// TopologyError(zero_straddle) if a point lies in a sign-changing cell.
std::vector<std::vector<int>> separation_classes(const HomogeneousPoly& f,
                                                 const std::vector<ProjectivePoint>& points,
                                                 const SphereGrid& grid);
/// JSON array of groups, e.g. [[0,2],[1]].
std::string partition_to_json(const std::vector<std::vector<int>>& groups);

}  // namespace klab
