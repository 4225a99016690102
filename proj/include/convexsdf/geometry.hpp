#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "convexsdf/grid.hpp"

namespace convexsdf {

using GridPoint = std::array<Index, 3>;

/// Integer grid points in 2D (third coordinate zero) or 3D.
struct PointSet {
  int dim = 2;
  std::vector<GridPoint> points;
};

/// Half-space normal . x <= offset with exact integer coefficients.
struct HullPlane {
  std::array<std::int64_t, 3> normal{};
  std::int64_t offset = 0;

  auto operator<=>(const HullPlane&) const = default;
};

/// Convex hull of a point set.
///
/// For a full-dimensional 2D hull, `vertices` is the counter-clockwise cycle
/// starting at the smallest point and `planes` holds one outward half-plane
/// per edge. For 3D, `vertices` is sorted, `triangles` fans each planar face
/// with outward orientation and `planes` holds one entry per face. Hulls of
/// collinear or coplanar input report `affine_dim < dim`; their `planes`
/// still describe the flat hull as an intersection of half-spaces.
struct HullFacets {
  int dim = 2;
  int affine_dim = 2;
  std::vector<GridPoint> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<HullPlane> planes;

  bool degenerate() const { return affine_dim < dim; }
  /// Inside-or-on test for an integer point, exact.
  bool contains(const GridPoint& x) const;
  /// Inside-or-on test with `slack` tolerance on each plane.
  bool contains(const std::array<double, 3>& x, double slack = 1e-9) const;
  /// True when x lies on the hull boundary (every point of a degenerate hull does).
  bool on_boundary(const GridPoint& x) const;

  bool operator==(const HullFacets&) const = default;
};

PointSet mask_points(const MaskField& m);
MaskField points_mask(const PointSet& ps, const GridShape& shape);

/// Monotone chain in 2D, incremental hull with exact integer predicates in 3D.
/// The result is canonical: equal input sets give identical hulls.
HullFacets exact_hull(const PointSet& ps);

/// Cells whose centers lie inside or on the hull.
MaskField rasterize_hull(const HullFacets& hull, const GridShape& shape);

/// Peels hull-boundary points (vertices and points on faces) until at least
/// k points were removed, then returns the hull of the remainder.
/// Throws if the peeling consumes every point.
HullFacets convex_layers_approx(const PointSet& ps, Index k);

/// Radius of the disc (2D) or ball (3D) with the same measure as the mask.
double equivalent_radius(const MaskField& reference);

/// Symmetric Hausdorff distance between the cell centers of the two masks,
/// divided by the equivalent radius of `reference`. Returns +inf when the
/// candidate is empty.
double hull_error(const MaskField& candidate, const MaskField& reference);

/// Symmetric Hausdorff distance between the two masks' cell centers.
double hausdorff_distance(const MaskField& a, const MaskField& b);

}  // namespace convexsdf
