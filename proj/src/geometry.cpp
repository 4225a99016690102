#include "convexsdf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <numeric>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include "convexsdf/transforms.hpp"

namespace convexsdf {

namespace {

using I64 = std::int64_t;
using Vec = std::array<I64, 3>;

Vec to_vec(const GridPoint& p) { return {p[0], p[1], p[2]}; }
Vec sub(const Vec& a, const Vec& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
Vec neg(const Vec& a) { return {-a[0], -a[1], -a[2]}; }
I64 dot(const Vec& a, const Vec& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
Vec cross(const Vec& a, const Vec& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
bool is_zero(const Vec& a) { return a[0] == 0 && a[1] == 0 && a[2] == 0; }

HullPlane make_plane(Vec n, I64 offset) {
  const I64 g = std::gcd(std::gcd(std::abs(n[0]), std::abs(n[1])), std::abs(n[2]));
  if (g > 1) {
    for (auto& c : n) c /= g;
    offset /= g;
  }
  return {n, offset};
}

HullPlane plane_through(const Vec& n, const Vec& p) { return make_plane(n, dot(n, p)); }

I64 cross2(const GridPoint& o, const GridPoint& a, const GridPoint& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Strict monotone chain on the first two coordinates; returns the
// counter-clockwise cycle starting at the smallest point. Input must be
// sorted and unique.
std::vector<GridPoint> monotone_chain(const std::vector<GridPoint>& pts) {
  if (pts.size() < 3) return pts;
  std::vector<GridPoint> h(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross2(h[k - 2], h[k - 1], p) <= 0) --k;
    h[k++] = p;
  }
  const std::size_t lower = k + 1;
  for (std::size_t i = pts.size() - 1; i-- > 0;) {
    while (k >= lower && cross2(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

// Half-spaces bounding a single point or a segment a-b, in any dimension.
void add_point_planes(std::vector<HullPlane>& planes, const Vec& p, int dim) {
  for (int a = 0; a < dim; ++a) {
    Vec e{};
    e[static_cast<std::size_t>(a)] = 1;
    planes.push_back(plane_through(e, p));
    planes.push_back(plane_through(neg(e), p));
  }
}

void add_segment_planes(std::vector<HullPlane>& planes, const Vec& a, const Vec& b, int dim) {
  const Vec e = sub(b, a);
  planes.push_back(plane_through(e, b));
  planes.push_back(plane_through(neg(e), a));
  if (dim == 2) {
    const Vec n{e[1], -e[0], 0};
    planes.push_back(plane_through(n, a));
    planes.push_back(plane_through(neg(n), a));
    return;
  }
  Vec u{};
  for (int k = 0; k < 3 && is_zero(u); ++k) {
    Vec axis{};
    axis[static_cast<std::size_t>(k)] = 1;
    u = cross(e, axis);
  }
  const Vec w = cross(e, u);
  for (const Vec& n : {u, w}) {
    planes.push_back(plane_through(n, a));
    planes.push_back(plane_through(neg(n), a));
  }
}

void finalize_planes(std::vector<HullPlane>& planes) {
  std::sort(planes.begin(), planes.end());
  planes.erase(std::unique(planes.begin(), planes.end()), planes.end());
}

std::vector<GridPoint> sorted_unique(std::vector<GridPoint> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

// Drops points lying strictly between two other points of an axis-parallel line.
std::vector<GridPoint> line_extremes(const std::vector<GridPoint>& pts, int dim) {
  std::vector<std::uint8_t> keep(pts.size(), 1);
  std::vector<std::size_t> order(pts.size());
  for (int axis = 0; axis < dim; ++axis) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto key = [&](std::size_t i) {
      GridPoint k = pts[i];
      std::rotate(k.begin(), k.begin() + axis + 1, k.begin() + dim);
      return k;
    };
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
    for (std::size_t s = 0; s < order.size();) {
      std::size_t e = s + 1;
      const auto ks = key(order[s]);
      while (e < order.size()) {
        const auto ke = key(order[e]);
        if (!std::equal(ks.begin(), ks.begin() + dim - 1, ke.begin())) break;
        ++e;
      }
      for (std::size_t m = s + 1; m + 1 < e; ++m) keep[order[m]] = 0;
      s = e;
    }
  }
  std::vector<GridPoint> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (keep[i]) out.push_back(pts[i]);
  }
  return out;
}

HullFacets hull_2d(const std::vector<GridPoint>& pts) {
  HullFacets h;
  h.dim = 2;
  const std::vector<GridPoint> cyc = monotone_chain(pts);
  if (cyc.size() == 1) {
    h.affine_dim = 0;
    h.vertices = cyc;
    add_point_planes(h.planes, to_vec(cyc[0]), 2);
  } else if (cyc.size() == 2) {
    h.affine_dim = 1;
    h.vertices = cyc;
    add_segment_planes(h.planes, to_vec(cyc[0]), to_vec(cyc[1]), 2);
  } else {
    h.affine_dim = 2;
    h.vertices = cyc;
    for (std::size_t i = 0; i < cyc.size(); ++i) {
      const Vec a = to_vec(cyc[i]);
      const Vec e = sub(to_vec(cyc[(i + 1) % cyc.size()]), a);
      h.planes.push_back(plane_through({e[1], -e[0], 0}, a));
    }
  }
  finalize_planes(h.planes);
  return h;
}

// Counter-clockwise polygon (seen from the tip of n) of coplanar points.
std::vector<GridPoint> planar_polygon(const std::vector<GridPoint>& pts, const Vec& n) {
  int drop = 0;
  for (int a = 1; a < 3; ++a) {
    if (std::abs(n[static_cast<std::size_t>(a)]) > std::abs(n[static_cast<std::size_t>(drop)])) drop = a;
  }
  const int u = (drop + 1) % 3;
  const int v = (drop + 2) % 3;
  std::vector<std::pair<GridPoint, GridPoint>> proj;
  proj.reserve(pts.size());
  for (const auto& p : pts) {
    proj.push_back({{p[static_cast<std::size_t>(u)], p[static_cast<std::size_t>(v)], 0}, p});
  }
  std::sort(proj.begin(), proj.end());
  std::vector<GridPoint> flat;
  flat.reserve(proj.size());
  for (const auto& pr : proj) flat.push_back(pr.first);
  flat.erase(std::unique(flat.begin(), flat.end()), flat.end());
  const std::vector<GridPoint> cyc = monotone_chain(flat);
  std::vector<GridPoint> out;
  out.reserve(cyc.size());
  for (const auto& c : cyc) {
    const auto it = std::lower_bound(proj.begin(), proj.end(), std::make_pair(c, GridPoint{}),
                                     [](const auto& x, const auto& y) { return x.first < y.first; });
    out.push_back(it->second);
  }
  if (n[static_cast<std::size_t>(drop)] < 0) std::reverse(out.begin() + 1, out.end());
  return out;
}

int normal_rank(const std::vector<Vec>& normals) {
  if (normals.empty()) return 0;
  const Vec& n1 = normals[0];
  for (std::size_t i = 1; i < normals.size(); ++i) {
    const Vec c = cross(n1, normals[i]);
    if (is_zero(c)) continue;
    for (std::size_t j = i + 1; j < normals.size(); ++j) {
      if (dot(c, normals[j]) != 0) return 3;
    }
    return 2;
  }
  return 1;
}

struct Face {
  std::array<int, 3> v;
  Vec n;
  I64 off;
  bool alive;
};

std::uint64_t edge_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

HullFacets hull_3d(const std::vector<GridPoint>& pts) {
  HullFacets h;
  h.dim = 3;
  std::vector<Vec> P;
  P.reserve(pts.size());
  for (const auto& p : pts) P.push_back(to_vec(p));

  const std::size_t i0 = 0;
  std::size_t i1 = i0;
  I64 best = 0;
  for (std::size_t i = 0; i < P.size(); ++i) {
    const Vec d = sub(P[i], P[i0]);
    if (dot(d, d) > best) best = dot(d, d), i1 = i;
  }
  if (best == 0) {
    h.affine_dim = 0;
    h.vertices = {pts[i0]};
    add_point_planes(h.planes, P[i0], 3);
    finalize_planes(h.planes);
    return h;
  }
  const Vec e1 = sub(P[i1], P[i0]);
  std::size_t i2 = i0;
  best = 0;
  for (std::size_t i = 0; i < P.size(); ++i) {
    const Vec c = cross(e1, sub(P[i], P[i0]));
    if (dot(c, c) > best) best = dot(c, c), i2 = i;
  }
  if (best == 0) {
    h.affine_dim = 1;
    const auto [lo, hi] = std::minmax_element(pts.begin(), pts.end());
    h.vertices = {*lo, *hi};
    add_segment_planes(h.planes, to_vec(*lo), to_vec(*hi), 3);
    finalize_planes(h.planes);
    return h;
  }
  const Vec nrm = cross(e1, sub(P[i2], P[i0]));
  std::size_t i3 = i0;
  best = 0;
  for (std::size_t i = 0; i < P.size(); ++i) {
    const I64 d = std::abs(dot(nrm, sub(P[i], P[i0])));
    if (d > best) best = d, i3 = i;
  }
  if (best == 0) {
    h.affine_dim = 2;
    std::vector<GridPoint> poly = planar_polygon(pts, nrm);
    const HullPlane support = plane_through(nrm, P[i0]);
    h.planes.push_back(support);
    h.planes.push_back({neg(support.normal), -support.offset});
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Vec a = to_vec(poly[i]);
      const Vec e = sub(to_vec(poly[(i + 1) % poly.size()]), a);
      h.planes.push_back(plane_through(cross(e, nrm), a));
    }
    finalize_planes(h.planes);
    std::sort(poly.begin(), poly.end());
    h.vertices = std::move(poly);
    return h;
  }

  // Incremental hull with strict visibility; coplanar points are never inserted.
  const Vec centroid4 = {P[i0][0] + P[i1][0] + P[i2][0] + P[i3][0], P[i0][1] + P[i1][1] + P[i2][1] + P[i3][1],
                         P[i0][2] + P[i1][2] + P[i2][2] + P[i3][2]};
  std::vector<Face> faces;
  const auto add_face = [&](int a, int b, int c) {
    Vec n = cross(sub(P[static_cast<std::size_t>(b)], P[static_cast<std::size_t>(a)]),
                  sub(P[static_cast<std::size_t>(c)], P[static_cast<std::size_t>(a)]));
    I64 off = dot(n, P[static_cast<std::size_t>(a)]);
    if (dot(n, centroid4) - 4 * off > 0) {
      std::swap(b, c);
      n = neg(n);
      off = -off;
    }
    faces.push_back({{a, b, c}, n, off, true});
  };
  const int t[4] = {static_cast<int>(i0), static_cast<int>(i1), static_cast<int>(i2), static_cast<int>(i3)};
  add_face(t[0], t[1], t[2]);
  add_face(t[0], t[1], t[3]);
  add_face(t[0], t[2], t[3]);
  add_face(t[1], t[2], t[3]);

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < P.size(); ++i) {
    if (i != i0 && i != i1 && i != i2 && i != i3) order.push_back(i);
  }
  const auto far2 = [&](std::size_t i) {
    const Vec d = {4 * P[i][0] - centroid4[0], 4 * P[i][1] - centroid4[1], 4 * P[i][2] - centroid4[2]};
    return dot(d, d);
  };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const I64 fa = far2(a);
    const I64 fb = far2(b);
    return fa != fb ? fa > fb : a < b;
  });

  std::vector<std::size_t> visible;
  std::unordered_set<std::uint64_t> vis_edges;
  std::size_t alive = 4;
  for (const std::size_t pi : order) {
    const Vec& p = P[pi];
    visible.clear();
    for (std::size_t f = 0; f < faces.size(); ++f) {
      if (faces[f].alive && dot(faces[f].n, p) > faces[f].off) visible.push_back(f);
    }
    if (visible.empty()) continue;
    vis_edges.clear();
    for (const std::size_t f : visible) {
      const auto& v = faces[f].v;
      for (int k = 0; k < 3; ++k) vis_edges.insert(edge_key(v[static_cast<std::size_t>(k)], v[static_cast<std::size_t>((k + 1) % 3)]));
    }
    std::vector<std::array<int, 2>> horizon;
    for (const std::size_t f : visible) {
      const auto& v = faces[f].v;
      for (int k = 0; k < 3; ++k) {
        const int a = v[static_cast<std::size_t>(k)];
        const int b = v[static_cast<std::size_t>((k + 1) % 3)];
        if (!vis_edges.count(edge_key(b, a))) horizon.push_back({a, b});
      }
      faces[f].alive = false;
    }
    alive -= visible.size();
    for (const auto& e : horizon) {
      const int a = e[0];
      const int b = e[1];
      const int c = static_cast<int>(pi);
      const Vec n = cross(sub(P[static_cast<std::size_t>(b)], P[static_cast<std::size_t>(a)]),
                          sub(P[pi], P[static_cast<std::size_t>(a)]));
      faces.push_back({{a, b, c}, n, dot(n, P[static_cast<std::size_t>(a)]), true});
    }
    alive += horizon.size();
    if (faces.size() > 2 * alive + 64) {
      std::erase_if(faces, [](const Face& f) { return !f.alive; });
    }
  }

  // Canonical form: distinct face planes, extreme vertices, fanned polygons.
  std::set<HullPlane> plane_set;
  std::set<int> vertex_ids;
  for (const auto& f : faces) {
    if (!f.alive) continue;
    plane_set.insert(make_plane(f.n, f.off));
    for (int v : f.v) vertex_ids.insert(v);
  }
  h.planes.assign(plane_set.begin(), plane_set.end());
  std::vector<Vec> incident;
  for (const int id : vertex_ids) {
    const Vec& v = P[static_cast<std::size_t>(id)];
    incident.clear();
    for (const auto& pl : h.planes) {
      if (dot(pl.normal, v) == pl.offset) incident.push_back(pl.normal);
    }
    if (normal_rank(incident) == 3) h.vertices.push_back(pts[static_cast<std::size_t>(id)]);
  }
  std::sort(h.vertices.begin(), h.vertices.end());
  std::vector<GridPoint> on_face;
  for (const auto& pl : h.planes) {
    on_face.clear();
    for (const auto& v : h.vertices) {
      if (dot(pl.normal, to_vec(v)) == pl.offset) on_face.push_back(v);
    }
    const std::vector<GridPoint> poly = planar_polygon(on_face, pl.normal);
    const auto id = [&](const GridPoint& g) {
      return static_cast<int>(std::lower_bound(h.vertices.begin(), h.vertices.end(), g) - h.vertices.begin());
    };
    for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
      h.triangles.push_back({id(poly[0]), id(poly[i]), id(poly[i + 1])});
    }
  }
  h.affine_dim = 3;
  return h;
}

HullFacets hull_of(std::vector<GridPoint> pts, int dim) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("PointSet dimension must be 2 or 3");
  if (pts.empty()) throw std::invalid_argument("convex hull of an empty point set");
  for (auto& p : pts) {
    if (dim == 2 && p[2] != 0) throw std::invalid_argument("2D PointSet with nonzero third coordinate");
  }
  pts = sorted_unique(std::move(pts));
  return dim == 2 ? hull_2d(pts) : hull_3d(line_extremes(pts, 3));
}

I64 floor_div(I64 a, I64 b) {
  I64 q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

bool HullFacets::contains(const GridPoint& x) const {
  const Vec v = to_vec(x);
  return std::all_of(planes.begin(), planes.end(), [&](const HullPlane& p) { return dot(p.normal, v) <= p.offset; });
}

bool HullFacets::contains(const std::array<double, 3>& x, double slack) const {
  for (const auto& p : planes) {
    double s = -static_cast<double>(p.offset);
    double n2 = 0.0;
    for (std::size_t a = 0; a < 3; ++a) {
      s += static_cast<double>(p.normal[a]) * x[a];
      n2 += static_cast<double>(p.normal[a]) * static_cast<double>(p.normal[a]);
    }
    if (s > slack * std::sqrt(n2)) return false;
  }
  return true;
}

bool HullFacets::on_boundary(const GridPoint& x) const {
  if (!contains(x)) return false;
  if (degenerate()) return true;
  const Vec v = to_vec(x);
  return std::any_of(planes.begin(), planes.end(), [&](const HullPlane& p) { return dot(p.normal, v) == p.offset; });
}

PointSet mask_points(const MaskField& m) {
  PointSet ps;
  ps.dim = m.shape().ndim();
  for (Index i = 0; i < m.point_count(); ++i) {
    if (m[i]) ps.points.push_back(m.shape().coord(i));
  }
  return ps;
}

MaskField points_mask(const PointSet& ps, const GridShape& shape) {
  if (ps.dim != shape.ndim()) throw std::invalid_argument("points_mask: dimension mismatch");
  MaskField m(shape);
  for (const auto& p : ps.points) {
    for (int a = 0; a < shape.ndim(); ++a) {
      if (p[static_cast<std::size_t>(a)] < 0 || p[static_cast<std::size_t>(a)] >= shape.dim(a)) {
        throw std::out_of_range("points_mask: point outside the grid");
      }
    }
    m.set(shape.index(std::span<const Index>(p.data(), static_cast<std::size_t>(shape.ndim()))), true);
  }
  return m;
}

HullFacets exact_hull(const PointSet& ps) { return hull_of(ps.points, ps.dim); }

MaskField rasterize_hull(const HullFacets& hull, const GridShape& shape) {
  if (hull.dim != shape.ndim()) throw std::invalid_argument("rasterize_hull: dimension mismatch");
  MaskField m(shape);
  const int d = shape.ndim();
  const int last = d - 1;
  const Index n_last = shape.dim(last);
  const Index lines = shape.size() / n_last;
  for (Index line = 0; line < lines; ++line) {
    const auto c = shape.coord(line * n_last);
    I64 lo = 0;
    I64 hi = n_last - 1;
    for (const auto& p : hull.planes) {
      I64 rhs = p.offset;
      for (int a = 0; a < last; ++a) rhs -= p.normal[static_cast<std::size_t>(a)] * c[static_cast<std::size_t>(a)];
      const I64 nl = p.normal[static_cast<std::size_t>(last)];
      if (nl > 0) {
        hi = std::min(hi, floor_div(rhs, nl));
      } else if (nl < 0) {
        lo = std::max(lo, -floor_div(rhs, -nl));
      } else if (rhs < 0) {
        hi = -1;
      }
      if (lo > hi) break;
    }
    for (I64 t = lo; t <= hi; ++t) m.set(line * n_last + t, true);
  }
  return m;
}

HullFacets convex_layers_approx(const PointSet& ps, Index k) {
  if (k < 0) throw std::invalid_argument("convex_layers_approx: k must be >= 0");
  std::vector<GridPoint> remaining = sorted_unique(ps.points);
  if (remaining.empty()) throw std::invalid_argument("convex_layers_approx: empty point set");
  Index count = 0;
  while (count < k) {
    const HullFacets h = hull_of(remaining, ps.dim);
    const auto before = remaining.size();
    std::erase_if(remaining, [&](const GridPoint& p) { return h.on_boundary(p); });
    count += static_cast<Index>(before - remaining.size());
    if (remaining.empty()) {
      throw std::runtime_error("convex_layers_approx: all points consumed after removing " +
                               std::to_string(count) + " of k=" + std::to_string(k));
    }
  }
  return hull_of(std::move(remaining), ps.dim);
}

double equivalent_radius(const MaskField& reference) {
  const double measure = static_cast<double>(reference.count());
  if (measure == 0.0) throw std::invalid_argument("equivalent_radius: empty reference");
  if (reference.shape().ndim() == 2) return std::sqrt(measure / std::numbers::pi);
  return std::cbrt(3.0 * measure / (4.0 * std::numbers::pi));
}

double hausdorff_distance(const MaskField& a, const MaskField& b) {
  require_same_shape(a.shape(), b.shape(), "hausdorff_distance");
  if (a.count() == 0 || b.count() == 0) return std::numeric_limits<double>::infinity();
  const std::vector<double> to_b = squared_distance_to(b);
  const std::vector<double> to_a = squared_distance_to(a);
  double worst = 0.0;
  for (Index i = 0; i < a.point_count(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (a[i]) worst = std::max(worst, to_b[k]);
    if (b[i]) worst = std::max(worst, to_a[k]);
  }
  return std::sqrt(worst);
}

double hull_error(const MaskField& candidate, const MaskField& reference) {
  const double r = equivalent_radius(reference);
  return hausdorff_distance(candidate, reference) / r;
}

}  // namespace convexsdf
