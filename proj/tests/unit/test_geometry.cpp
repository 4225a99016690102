#include <cmath>
#include <limits>

#include "convexsdf/geometry.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace convexsdf;
using namespace testing;

namespace {

using I64 = std::int64_t;

I64 orient2(const GridPoint& a, const GridPoint& b, const GridPoint& c) {
  return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
}

I64 orient3(const GridPoint& a, const GridPoint& b, const GridPoint& c, const GridPoint& d) {
  const I64 u[3] = {b[0] - a[0], b[1] - a[1], b[2] - a[2]};
  const I64 v[3] = {c[0] - a[0], c[1] - a[1], c[2] - a[2]};
  const I64 w[3] = {d[0] - a[0], d[1] - a[1], d[2] - a[2]};
  return u[0] * (v[1] * w[2] - v[2] * w[1]) - u[1] * (v[0] * w[2] - v[2] * w[0]) + u[2] * (v[0] * w[1] - v[1] * w[0]);
}

bool same_side_or_on(I64 a, I64 b) { return a == 0 || b == 0 || (a > 0) == (b > 0); }

// Carathéodory oracle: x is in the hull of a full-dimensional set iff it lies
// in one of the non-degenerate simplices spanned by the points.
bool in_hull_oracle(const std::vector<GridPoint>& pts, const GridPoint& x, int dim) {
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t k = j + 1; k < n; ++k) {
        if (dim == 2) {
          const I64 o = orient2(pts[i], pts[j], pts[k]);
          if (o == 0) continue;
          if (same_side_or_on(o, orient2(pts[i], pts[j], x)) && same_side_or_on(o, orient2(pts[j], pts[k], x)) &&
              same_side_or_on(o, orient2(pts[k], pts[i], x))) {
            return true;
          }
          continue;
        }
        for (std::size_t l = k + 1; l < n; ++l) {
          const GridPoint& a = pts[i];
          const GridPoint& b = pts[j];
          const GridPoint& c = pts[k];
          const GridPoint& d = pts[l];
          const I64 o = orient3(a, b, c, d);
          if (o == 0) continue;
          if (same_side_or_on(o, orient3(x, b, c, d)) && same_side_or_on(o, orient3(a, x, c, d)) &&
              same_side_or_on(o, orient3(a, b, x, d)) && same_side_or_on(o, orient3(a, b, c, x))) {
            return true;
          }
        }
      }
    }
  }
  return false;
}

PointSet random_points(const GridShape& s, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  PointSet ps;
  ps.dim = s.ndim();
  for (int k = 0; k < count; ++k) {
    GridPoint p{};
    for (int a = 0; a < s.ndim(); ++a) p[static_cast<std::size_t>(a)] = static_cast<Index>(rng() % static_cast<std::uint64_t>(s.dim(a)));
    ps.points.push_back(p);
  }
  return ps;
}

double hausdorff_oracle(const MaskField& a, const MaskField& b) {
  const GridShape& s = a.shape();
  const auto one_side = [&](const MaskField& from, const MaskField& to) {
    double worst = 0.0;
    for (Index i = 0; i < s.size(); ++i) {
      if (!from[i]) continue;
      double best = std::numeric_limits<double>::infinity();
      const auto ci = s.coord(i);
      for (Index j = 0; j < s.size(); ++j) {
        if (!to[j]) continue;
        const auto cj = s.coord(j);
        double d2 = 0.0;
        for (std::size_t k = 0; k < 3; ++k) d2 += static_cast<double>((ci[k] - cj[k]) * (ci[k] - cj[k]));
        best = std::min(best, d2);
      }
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::sqrt(std::max(one_side(a, b), one_side(b, a)));
}

}  // namespace

TEST_SUITE("geometry_oracle") {
  TEST_CASE("2D hull agrees with a brute-force oracle") {
    const GridShape s{20, 17};
    for (std::uint64_t seed = 1; seed <= 15; ++seed) {
      const PointSet ps = random_points(s, 4 + static_cast<int>(seed), seed);
      const HullFacets h = exact_hull(ps);
      REQUIRE(!h.degenerate());
      const MaskField r = rasterize_hull(h, s);
      for_each_point(s, [&](Index i, Index a, Index b, Index) {
        const GridPoint x{a, b, 0};
        REQUIRE(r[i] == in_hull_oracle(ps.points, x, 2));
        REQUIRE(h.contains(x) == r[i]);
      });
      // Vertices are exactly the extreme input points, in counter-clockwise order.
      for (std::size_t k = 0; k < h.vertices.size(); ++k) {
        const auto& a = h.vertices[k];
        const auto& b = h.vertices[(k + 1) % h.vertices.size()];
        const auto& c = h.vertices[(k + 2) % h.vertices.size()];
        CHECK(orient2(a, b, c) > 0);
      }
      CHECK(h.planes.size() == h.vertices.size());
      for (const auto& p : ps.points) CHECK(h.contains(p));
    }
  }

  TEST_CASE("3D hull agrees with a brute-force oracle") {
    const GridShape s{9, 8, 7};
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      const PointSet ps = random_points(s, 6 + static_cast<int>(seed), 100 + seed);
      const HullFacets h = exact_hull(ps);
      REQUIRE(!h.degenerate());
      const MaskField r = rasterize_hull(h, s);
      for_each_point(s, [&](Index i, Index a, Index b, Index c) {
        REQUIRE(r[i] == in_hull_oracle(ps.points, GridPoint{a, b, c}, 3));
      });
      // Every triangle is outward: all vertices on the inner side or on it.
      for (const auto& t : h.triangles) {
        for (const auto& v : h.vertices) {
          CHECK(orient3(h.vertices[static_cast<std::size_t>(t[0])], h.vertices[static_cast<std::size_t>(t[1])],
                        h.vertices[static_cast<std::size_t>(t[2])], v) <= 0);
        }
      }
      // Euler characteristic of the closed triangulated surface.
      CHECK(static_cast<Index>(h.vertices.size()) - static_cast<Index>(h.triangles.size()) / 2 == 2);
    }
  }

  TEST_CASE("hull is canonical under input order and duplicates") {
    const GridShape s{30, 30, 30};
    PointSet ps = random_points(s, 40, 7);
    const HullFacets h = exact_hull(ps);
    PointSet shuffled = ps;
    std::mt19937_64 rng(3);
    std::shuffle(shuffled.points.begin(), shuffled.points.end(), rng);
    shuffled.points.push_back(ps.points[5]);
    CHECK(exact_hull(shuffled) == h);
  }

  TEST_CASE("degenerate hulls") {
    PointSet one{2, {{3, 4, 0}}};
    const HullFacets h0 = exact_hull(one);
    CHECK(h0.affine_dim == 0);
    CHECK(h0.contains(GridPoint{3, 4, 0}));
    CHECK(!h0.contains(GridPoint{3, 5, 0}));
    PointSet line{2, {{0, 0, 0}, {2, 1, 0}, {6, 3, 0}}};
    const HullFacets h1 = exact_hull(line);
    CHECK(h1.affine_dim == 1);
    CHECK(h1.contains(GridPoint{4, 2, 0}));
    CHECK(!h1.contains(GridPoint{4, 3, 0}));
    CHECK(!h1.contains(GridPoint{8, 4, 0}));
    CHECK(h1.on_boundary(GridPoint{2, 1, 0}));
    PointSet plane{3, {{0, 0, 1}, {4, 0, 1}, {0, 4, 1}, {4, 4, 1}, {2, 2, 1}}};
    const HullFacets h2 = exact_hull(plane);
    CHECK(h2.affine_dim == 2);
    CHECK(h2.degenerate());
    CHECK(h2.contains(GridPoint{1, 3, 1}));
    CHECK(!h2.contains(GridPoint{1, 3, 2}));
    CHECK(rasterize_hull(h2, GridShape{6, 6, 4}).count() == 25);
    CHECK_THROWS_AS(exact_hull(PointSet{2, {}}), std::invalid_argument);
  }

  TEST_CASE("mask and point conversions") {
    const GridShape s{5, 6};
    const MaskField m = random_mask(s, 9);
    const PointSet ps = mask_points(m);
    CHECK(static_cast<Index>(ps.points.size()) == m.count());
    CHECK(points_mask(ps, s) == m);
    CHECK_THROWS_AS(points_mask(PointSet{2, {{9, 0, 0}}}, s), std::out_of_range);
  }

  TEST_CASE("convex layers peel boundary points") {
    PointSet grid{2, {}};
    for (Index a = 0; a < 5; ++a) {
      for (Index b = 0; b < 5; ++b) grid.points.push_back({a, b, 0});
    }
    CHECK(convex_layers_approx(grid, 0) == exact_hull(grid));
    // The outer ring holds 16 points, so any k in 1..16 leaves the 3x3 core.
    const HullFacets core = convex_layers_approx(grid, 10);
    CHECK(core.contains(GridPoint{1, 1, 0}));
    CHECK(core.contains(GridPoint{3, 3, 0}));
    CHECK(!core.contains(GridPoint{0, 2, 0}));
    CHECK(convex_layers_approx(grid, 17).vertices.size() == 1);
    CHECK_THROWS_AS(convex_layers_approx(grid, 26), std::runtime_error);
    CHECK_THROWS_AS(convex_layers_approx(grid, -1), std::invalid_argument);
  }

  TEST_CASE("Hausdorff distance against brute force") {
    const GridShape s{14, 11};
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const MaskField a = random_mask(s, seed, 0.1);
      const MaskField b = random_mask(s, seed + 50, 0.2);
      CHECK(hausdorff_distance(a, b) == doctest::Approx(hausdorff_oracle(a, b)).epsilon(1e-14));
    }
    const GridShape s3{6, 5, 7};
    const MaskField a = random_mask(s3, 1, 0.05);
    const MaskField b = random_mask(s3, 2, 0.1);
    CHECK(hausdorff_distance(a, b) == doctest::Approx(hausdorff_oracle(a, b)).epsilon(1e-14));
  }

  TEST_CASE("hull error") {
    const GridShape s{64, 64};
    const MaskField ref = disc_mask(s, 31.5, 31.5, 10.0);
    CHECK(hull_error(ref, ref) == 0.0);
    CHECK(equivalent_radius(ref) == doctest::Approx(std::sqrt(ref.count() / 3.141592653589793)));
    const MaskField big = disc_mask(s, 31.5, 31.5, 13.0);
    CHECK(hull_error(big, ref) == doctest::Approx(hausdorff_oracle(big, ref) / equivalent_radius(ref)));
    CHECK(std::isinf(hull_error(MaskField(s), ref)));
    CHECK_THROWS_AS(equivalent_radius(MaskField(s)), std::invalid_argument);
    const MaskField ball(GridShape{4, 4, 4}, true);
    CHECK(equivalent_radius(ball) == doctest::Approx(std::cbrt(3.0 * 64.0 / (4.0 * 3.141592653589793))));
  }
}
