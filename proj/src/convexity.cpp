#include "convexsdf/convexity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

namespace convexsdf {

namespace {

using Vec3 = std::array<double, 3>;

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double dot3(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 normalized(const Vec3& v) {
  const double n = std::sqrt(dot3(v, v));
  return {v[0] / n, v[1] / n, v[2] / n};
}

template <std::size_t D>
SymMatrix<D> symmetrized_upper(const SymMatrix<D>& a) {
  SymMatrix<D> s{};
  for (std::size_t i = 0; i < D; ++i) {
    for (std::size_t j = i; j < D; ++j) {
      if (!std::isfinite(a[i][j])) throw std::invalid_argument("psd_project: non-finite entry");
      s[i][j] = a[i][j];
      s[j][i] = a[i][j];
    }
  }
  return s;
}

template <std::size_t D>
double max_abs_entry(const SymMatrix<D>& a) {
  double m = 0.0;
  for (const auto& row : a) {
    for (double v : row) m = std::max(m, std::abs(v));
  }
  return m;
}

double rayleigh(const SymMatrix<3>& a, const Vec3& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) s += v[i] * a[i][j] * v[j];
  }
  return s;
}

// Unit vector along the null direction of (a - lambda I), from the largest
// cross product of its rows.
Vec3 null_vector(const SymMatrix<3>& a, double lambda) {
  const Vec3 r0 = {a[0][0] - lambda, a[0][1], a[0][2]};
  const Vec3 r1 = {a[1][0], a[1][1] - lambda, a[1][2]};
  const Vec3 r2 = {a[2][0], a[2][1], a[2][2] - lambda};
  const Vec3 c[3] = {cross(r0, r1), cross(r0, r2), cross(r1, r2)};
  std::size_t best = 0;
  double best_n = dot3(c[0], c[0]);
  for (std::size_t k = 1; k < 3; ++k) {
    const double n = dot3(c[k], c[k]);
    if (n > best_n) {
      best_n = n;
      best = k;
    }
  }
  if (best_n == 0.0) return {1.0, 0.0, 0.0};
  return normalized(c[best]);
}

// Any orthonormal pair spanning the complement of unit vector v.
void complement_basis(const Vec3& v, Vec3& u, Vec3& w) {
  if (std::abs(v[0]) > std::abs(v[1])) {
    const double inv = 1.0 / std::sqrt(v[0] * v[0] + v[2] * v[2]);
    u = {-v[2] * inv, 0.0, v[0] * inv};
  } else {
    const double inv = 1.0 / std::sqrt(v[1] * v[1] + v[2] * v[2]);
    u = {0.0, v[2] * inv, -v[1] * inv};
  }
  w = cross(v, u);
}

SymEigen<3> sorted(SymEigen<3> e) {
  std::array<std::size_t, 3> order = {0, 1, 2};
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return e.values[x] < e.values[y]; });
  SymEigen<3> out;
  for (std::size_t k = 0; k < 3; ++k) {
    out.values[k] = e.values[order[k]];
    out.vectors[k] = e.vectors[order[k]];
  }
  return out;
}

}  // namespace

SymEigen<2> symmetric_eigen(const SymMatrix<2>& a) {
  const double xx = a[0][0];
  const double xy = a[0][1];
  const double yy = a[1][1];
  const double mean = 0.5 * (xx + yy);
  const double half_diff = 0.5 * (xx - yy);
  const double radius = std::hypot(half_diff, xy);
  SymEigen<2> e;
  e.values = {mean - radius, mean + radius};
  // Rotation angle of the principal axis.
  const double theta = 0.5 * std::atan2(xy, half_diff);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  e.vectors[1] = {c, s};
  e.vectors[0] = {-s, c};
  return e;
}

SymEigen<3> symmetric_eigen_jacobi(const SymMatrix<3>& input) {
  SymMatrix<3> a = symmetrized_upper(input);
  SymMatrix<3> v{};
  for (std::size_t i = 0; i < 3; ++i) v[i][i] = 1.0;

  for (int sweep = 0; sweep < 64; ++sweep) {
    const double off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    const double diag = a[0][0] * a[0][0] + a[1][1] * a[1][1] + a[2][2] * a[2][2];
    if (off <= 1e-36 * diag || off == 0.0) break;
    for (std::size_t p = 0; p < 2; ++p) {
      for (std::size_t q = p + 1; q < 3; ++q) {
        if (a[p][q] == 0.0) continue;
        const double tau = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = std::copysign(1.0, tau) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t k = 0; k < 3; ++k) {
          const double akp = a[k][p];
          const double akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < 3; ++k) {
          const double apk = a[p][k];
          const double aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < 3; ++k) {
          const double vkp = v[k][p];
          const double vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  SymEigen<3> e;
  for (std::size_t k = 0; k < 3; ++k) {
    e.values[k] = a[k][k];
    e.vectors[k] = {v[0][k], v[1][k], v[2][k]};
  }
  return sorted(e);
}

SymEigen<3> symmetric_eigen(const SymMatrix<3>& input) {
  SymMatrix<3> a = symmetrized_upper(input);
  const double scale = max_abs_entry(a);
  if (scale == 0.0) {
    SymEigen<3> e;
    e.vectors = {{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};
    return e;
  }
  for (auto& row : a) {
    for (double& x : row) x /= scale;
  }

  const double q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
  const double b00 = a[0][0] - q;
  const double b11 = a[1][1] - q;
  const double b22 = a[2][2] - q;
  const double off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
  const double p = std::sqrt((b00 * b00 + b11 * b11 + b22 * b22 + 2.0 * off) / 6.0);
  if (p == 0.0) {
    SymEigen<3> e;
    e.values = {q * scale, q * scale, q * scale};
    e.vectors = {{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};
    return e;
  }
  const double det = b00 * (b11 * b22 - a[1][2] * a[1][2]) -
                     a[0][1] * (a[0][1] * b22 - a[1][2] * a[0][2]) +
                     a[0][2] * (a[0][1] * a[1][2] - b11 * a[0][2]);
  const double r = std::clamp(det / (2.0 * p * p * p), -1.0, 1.0);
  const double angle = std::acos(r) / 3.0;
  const double hi = q + 2.0 * p * std::cos(angle);
  const double lo = q + 2.0 * p * std::cos(angle + 2.0 * std::numbers::pi / 3.0);
  const double mid = 3.0 * q - hi - lo;

  const double magnitude = std::max({std::abs(hi), std::abs(lo), 1e-300});
  const double gap = std::min(hi - mid, mid - lo) / magnitude;
  if (!(gap >= kDegenerateGap)) {
    return symmetric_eigen_jacobi(input);
  }

  // Anchor on the extreme eigenvalue farther from the middle one, then solve
  // the remaining 2x2 problem in its orthogonal complement.
  const double anchor = (hi - mid >= mid - lo) ? hi : lo;
  const Vec3 v0 = null_vector(a, anchor);
  Vec3 u;
  Vec3 w;
  complement_basis(v0, u, w);
  Vec3 au{};
  Vec3 aw{};
  for (std::size_t i = 0; i < 3; ++i) {
    au[i] = a[i][0] * u[0] + a[i][1] * u[1] + a[i][2] * u[2];
    aw[i] = a[i][0] * w[0] + a[i][1] * w[1] + a[i][2] * w[2];
  }
  SymMatrix<2> sub{};
  sub[0][0] = dot3(u, au);
  sub[0][1] = dot3(u, aw);
  sub[1][0] = sub[0][1];
  sub[1][1] = dot3(w, aw);
  const auto e2 = symmetric_eigen(sub);

  SymEigen<3> e;
  e.vectors[0] = v0;
  for (std::size_t k = 0; k < 2; ++k) {
    const auto& c = e2.vectors[k];
    e.vectors[k + 1] = normalized({c[0] * u[0] + c[1] * w[0], c[0] * u[1] + c[1] * w[1],
                                   c[0] * u[2] + c[1] * w[2]});
  }
  for (std::size_t k = 0; k < 3; ++k) e.values[k] = rayleigh(a, e.vectors[k]) * scale;
  return sorted(e);
}

SymMatrix<2> psd_project(const SymMatrix<2>& input) {
  const SymMatrix<2> a = symmetrized_upper(input);
  const double mean = 0.5 * (a[0][0] + a[1][1]);
  const double radius = std::hypot(0.5 * (a[0][0] - a[1][1]), a[0][1]);
  const double hi = mean + radius;
  const double lo = mean - radius;
  if (lo >= 0.0) return a;
  if (hi <= 0.0) return SymMatrix<2>{};
  // hi * (A - lo I) / (hi - lo) is hi times the spectral projector of hi.
  const double s = hi / (2.0 * radius);
  SymMatrix<2> out{};
  out[0][0] = s * (a[0][0] - lo);
  out[1][1] = s * (a[1][1] - lo);
  out[0][1] = s * a[0][1];
  out[1][0] = out[0][1];
  return out;
}

SymMatrix<3> psd_project(const SymMatrix<3>& input) {
  const SymMatrix<3> a = symmetrized_upper(input);
  const auto e = symmetric_eigen(a);
  if (e.values[0] >= 0.0) return a;
  if (e.values[2] <= 0.0) return SymMatrix<3>{};
  SymMatrix<3> out{};
  for (std::size_t k = 0; k < 3; ++k) {
    const double lam = e.values[k];
    if (lam <= 0.0) continue;
    const auto& v = e.vectors[k];
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) out[i][j] += lam * v[i] * v[j];
    }
  }
  // Exact symmetry.
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = i + 1; j < 3; ++j) {
      const double m = 0.5 * (out[i][j] + out[j][i]);
      out[i][j] = m;
      out[j][i] = m;
    }
  }
  return out;
}

MaskField band_mask(const ScalarField& phi, const BandSpec& band) {
  MaskField out(phi.shape());
  for (Index i = 0; i < phi.point_count(); ++i) out.set(i, std::abs(phi[i]) <= band.epsilon);
  return out;
}

void project_hessian_field_inplace(SymMatField& m, const MaskField& band) {
  require_same_shape(m.shape(), band.shape(), "project_hessian_field");
  const int d = m.shape().ndim();
  if (d == 2) {
    auto xx = m.entry(0, 0);
    auto xy = m.entry(0, 1);
    auto yy = m.entry(1, 1);
    for (Index i = 0; i < m.point_count(); ++i) {
      if (!band[i]) continue;
      const auto k = static_cast<std::size_t>(i);
      const auto p = psd_project(SymMatrix<2>{{{xx[k], xy[k]}, {xy[k], yy[k]}}});
      xx[k] = p[0][0];
      xy[k] = p[0][1];
      yy[k] = p[1][1];
    }
    return;
  }
  std::array<std::span<double>, 6> slot;
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) slot[static_cast<std::size_t>(sym_slot(3, i, j))] = m.entry(i, j);
  }
  for (Index i = 0; i < m.point_count(); ++i) {
    if (!band[i]) continue;
    const auto k = static_cast<std::size_t>(i);
    SymMatrix<3> a{};
    for (std::size_t r = 0; r < 3; ++r) {
      for (std::size_t c = r; c < 3; ++c) {
        a[r][c] = slot[static_cast<std::size_t>(sym_slot(3, static_cast<int>(r), static_cast<int>(c)))][k];
        a[c][r] = a[r][c];
      }
    }
    const auto p = psd_project(a);
    for (std::size_t r = 0; r < 3; ++r) {
      for (std::size_t c = r; c < 3; ++c) {
        slot[static_cast<std::size_t>(sym_slot(3, static_cast<int>(r), static_cast<int>(c)))][k] = p[r][c];
      }
    }
  }
}

SymMatField project_hessian_field(const SymMatField& m, const MaskField& band) {
  SymMatField out = m;
  project_hessian_field_inplace(out, band);
  return out;
}

double min_eigenvalue_at(const SymMatField& m, Index point) {
  const auto k = static_cast<std::size_t>(point);
  if (m.shape().ndim() == 2) {
    const SymMatrix<2> a{{{m.entry(0, 0)[k], m.entry(0, 1)[k]}, {m.entry(0, 1)[k], m.entry(1, 1)[k]}}};
    return symmetric_eigen(a).values[0];
  }
  SymMatrix<3> a{};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = m.entry(r, c)[k];
    }
  }
  return symmetric_eigen(a).values[0];
}

double interpolate(const ScalarField& phi, std::span<const double> point) {
  const GridShape& shape = phi.shape();
  const int d = shape.ndim();
  std::array<Index, 3> base{};
  std::array<double, 3> frac{};
  for (int a = 0; a < d; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    const double x = std::clamp(point[ua], 0.0, static_cast<double>(shape.dim(a) - 1));
    Index b = static_cast<Index>(std::floor(x));
    if (b >= shape.dim(a) - 1) b = shape.dim(a) - 2;
    base[ua] = b;
    frac[ua] = x - static_cast<double>(b);
  }
  double value = 0.0;
  for (int corner = 0; corner < (1 << d); ++corner) {
    double w = 1.0;
    Index flat = 0;
    for (int a = 0; a < d; ++a) {
      const auto ua = static_cast<std::size_t>(a);
      const bool hi = (corner >> a) & 1;
      w *= hi ? frac[ua] : 1.0 - frac[ua];
      flat += (base[ua] + (hi ? 1 : 0)) * shape.stride(a);
    }
    if (w != 0.0) value += w * phi[flat];
  }
  return value;
}

double convexity_violation(const ScalarField& phi, int samples, std::uint64_t rng_seed,
                           const MaskField* restrict_to) {
  if (samples < 1) throw std::invalid_argument("convexity_violation: samples must be >= 1");
  const GridShape& shape = phi.shape();
  std::vector<Index> pool;
  if (restrict_to != nullptr) {
    require_same_shape(shape, restrict_to->shape(), "convexity_violation");
    for (Index i = 0; i < shape.size(); ++i) {
      if ((*restrict_to)[i]) pool.push_back(i);
    }
    if (pool.empty()) return 0.0;
  }
  std::mt19937_64 rng(rng_seed);
  const Index range = pool.empty() ? shape.size() : static_cast<Index>(pool.size());
  std::uniform_int_distribution<Index> pick(0, range - 1);
  std::uniform_int_distribution<int> pick_theta(1, 3);

  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    Index i1 = pick(rng);
    Index i2 = pick(rng);
    if (!pool.empty()) {
      i1 = pool[static_cast<std::size_t>(i1)];
      i2 = pool[static_cast<std::size_t>(i2)];
    }
    const double theta = 0.25 * pick_theta(rng);
    const auto c1 = shape.coord(i1);
    const auto c2 = shape.coord(i2);
    std::array<double, 3> mix{};
    for (std::size_t a = 0; a < 3; ++a) {
      mix[a] = theta * static_cast<double>(c1[a]) + (1.0 - theta) * static_cast<double>(c2[a]);
    }
    const double defect = (interpolate(phi, mix) - phi[i2]) - theta * (phi[i1] - phi[i2]);
    worst = std::max(worst, defect);
  }
  return worst;
}

}  // namespace convexsdf
