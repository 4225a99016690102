#include "convexsdf/transforms.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace convexsdf {

namespace {

// The FFTW planner is not thread-safe; plan execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct ComplexBuffer {
  explicit ComplexBuffer(Index n) : data(fftw_alloc_complex(static_cast<std::size_t>(n))) {
    if (data == nullptr) throw std::bad_alloc();
  }
  ~ComplexBuffer() { fftw_free(data); }
  ComplexBuffer(const ComplexBuffer&) = delete;
  ComplexBuffer& operator=(const ComplexBuffer&) = delete;
  fftw_complex* data;
};

}  // namespace

void SpectralSolveParams::validate() const {
  if (!(rho3 > 0.0) || !std::isfinite(rho3)) {
    throw std::invalid_argument("rho3 must be positive and finite");
  }
  if (!(rho1 >= 0.0) || !(rho2 >= 0.0) || !std::isfinite(rho1) || !std::isfinite(rho2)) {
    throw std::invalid_argument("rho1 and rho2 must be non-negative and finite");
  }
}

struct PhiPdeSolver::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  ~Plans() {
    std::lock_guard lock(planner_mutex());
    if (forward != nullptr) fftw_destroy_plan(forward);
    if (backward != nullptr) fftw_destroy_plan(backward);
  }
};

double laplacian_symbol(const GridShape& shape, std::span<const Index> mode) {
  double lambda = 0.0;
  for (int a = 0; a < shape.ndim(); ++a) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(mode[static_cast<std::size_t>(a)]) /
                         static_cast<double>(shape.dim(a));
    lambda += 2.0 * std::cos(theta) - 2.0;
  }
  return lambda;
}

PhiPdeSolver::PhiPdeSolver(const GridShape& shape, const SpectralSolveParams& params)
    : shape_(shape), params_(params), plans_(std::make_unique<Plans>()) {
  params_.validate();
  const Index n = shape.size();
  inv_symbol_.resize(static_cast<std::size_t>(n));
  const double norm = 1.0 / static_cast<double>(n);
  for (Index i = 0; i < n; ++i) {
    const auto c = shape.coord(i);
    const double lambda = laplacian_symbol(shape, std::span<const Index>(c.data(), 3));
    const double denom = params_.rho2 * lambda * lambda - params_.rho1 * lambda + params_.rho3;
    inv_symbol_[static_cast<std::size_t>(i)] = norm / denom;
  }

  int dims[3];
  for (int a = 0; a < shape.ndim(); ++a) dims[a] = static_cast<int>(shape.dim(a));
  ComplexBuffer scratch(n);
  std::lock_guard lock(planner_mutex());
  plans_->forward = fftw_plan_dft(shape.ndim(), dims, scratch.data, scratch.data, FFTW_FORWARD,
                                  FFTW_ESTIMATE);
  plans_->backward = fftw_plan_dft(shape.ndim(), dims, scratch.data, scratch.data,
                                   FFTW_BACKWARD, FFTW_ESTIMATE);
  if (plans_->forward == nullptr || plans_->backward == nullptr) {
    throw std::runtime_error("failed to create FFT plans");
  }
}

PhiPdeSolver::~PhiPdeSolver() = default;
PhiPdeSolver::PhiPdeSolver(PhiPdeSolver&&) noexcept = default;
PhiPdeSolver& PhiPdeSolver::operator=(PhiPdeSolver&&) noexcept = default;

ScalarField PhiPdeSolver::solve(const ScalarField& rhs) const {
  require_same_shape(rhs.shape(), shape_, "solve_phi_pde");
  if (!all_finite(rhs.values())) throw std::invalid_argument("solve_phi_pde: non-finite rhs");

  const Index n = shape_.size();
  ComplexBuffer buf(n);
  for (Index i = 0; i < n; ++i) {
    buf.data[i][0] = rhs[i];
    buf.data[i][1] = 0.0;
  }
  fftw_execute_dft(plans_->forward, buf.data, buf.data);
  for (Index i = 0; i < n; ++i) {
    const double s = inv_symbol_[static_cast<std::size_t>(i)];
    buf.data[i][0] *= s;
    buf.data[i][1] *= s;
  }
  fftw_execute_dft(plans_->backward, buf.data, buf.data);

  ScalarField phi(shape_);
  double max_re = 0.0;
  double max_im = 0.0;
  for (Index i = 0; i < n; ++i) {
    phi[i] = buf.data[i][0];
    max_re = std::max(max_re, std::abs(buf.data[i][0]));
    max_im = std::max(max_im, std::abs(buf.data[i][1]));
  }
  if (max_im > kImaginaryResidueLimit * std::max(1.0, max_re)) {
    throw std::runtime_error("solve_phi_pde: imaginary residue " + std::to_string(max_im) +
                             " exceeds limit");
  }
  return phi;
}

ScalarField solve_phi_pde(const ScalarField& rhs, const SpectralSolveParams& params) {
  return PhiPdeSolver(rhs.shape(), params).solve(rhs);
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian sigma must be positive");
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    const double w = std::exp(-0.5 * k * k / (sigma * sigma));
    taps[static_cast<std::size_t>(k + radius)] = w;
    sum += w;
  }
  for (double& w : taps) w /= sum;
  return taps;
}

ScalarField gaussian_convolve(const ScalarField& u, double sigma) {
  const auto taps = gaussian_kernel(sigma);
  const Index radius = static_cast<Index>(taps.size() / 2);
  const GridShape& shape = u.shape();
  std::vector<double> cur(u.values().begin(), u.values().end());
  std::vector<double> next(cur.size());
  std::vector<double> line;
  for (int a = 0; a < shape.ndim(); ++a) {
    const Index n = shape.dim(a);
    const Index stride = shape.stride(a);
    const Index outer = shape.size() / (n * stride);
    line.resize(static_cast<std::size_t>(n));
    for (Index o = 0; o < outer; ++o) {
      for (Index r = 0; r < stride; ++r) {
        const Index base = o * n * stride + r;
        for (Index k = 0; k < n; ++k) line[static_cast<std::size_t>(k)] = cur[static_cast<std::size_t>(base + k * stride)];
        for (Index k = 0; k < n; ++k) {
          double acc = 0.0;
          for (Index t = -radius; t <= radius; ++t) {
            Index src = (k + t) % n;
            if (src < 0) src += n;
            acc += taps[static_cast<std::size_t>(t + radius)] * line[static_cast<std::size_t>(src)];
          }
          next[static_cast<std::size_t>(base + k * stride)] = acc;
        }
      }
    }
    std::swap(cur, next);
  }
  return ScalarField(shape, std::move(cur));
}

namespace {

// Exact 1D squared distance transform by the lower envelope of parabolas.
// `f` holds squared distances (or infinity) along one line; result in `d`.
void distance_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<Index>& v,
                 std::vector<double>& z) {
  const Index n = static_cast<Index>(f.size());
  constexpr double inf = std::numeric_limits<double>::infinity();
  Index k = -1;
  for (Index q = 0; q < n; ++q) {
    const double fq = f[static_cast<std::size_t>(q)];
    if (fq == inf) continue;
    double s = -inf;
    while (k >= 0) {
      const Index p = v[static_cast<std::size_t>(k)];
      const double fp = f[static_cast<std::size_t>(p)];
      s = ((fq + static_cast<double>(q * q)) - (fp + static_cast<double>(p * p))) /
          (2.0 * static_cast<double>(q - p));
      if (s > z[static_cast<std::size_t>(k)]) break;
      --k;
    }
    ++k;
    v[static_cast<std::size_t>(k)] = q;
    z[static_cast<std::size_t>(k)] = (k == 0) ? -inf : s;
    z[static_cast<std::size_t>(k + 1)] = inf;
  }
  if (k < 0) {
    std::fill(d.begin(), d.end(), inf);
    return;
  }
  Index j = 0;
  for (Index q = 0; q < n; ++q) {
    while (z[static_cast<std::size_t>(j + 1)] < static_cast<double>(q)) ++j;
    const Index p = v[static_cast<std::size_t>(j)];
    d[static_cast<std::size_t>(q)] =
        static_cast<double>((q - p) * (q - p)) + f[static_cast<std::size_t>(p)];
  }
}

}  // namespace

std::vector<double> squared_distance_to(const MaskField& target) {
  const GridShape& shape = target.shape();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(static_cast<std::size_t>(shape.size()));
  for (Index i = 0; i < shape.size(); ++i) dist[static_cast<std::size_t>(i)] = target[i] ? 0.0 : inf;

  std::vector<double> f;
  std::vector<double> d;
  std::vector<Index> v;
  std::vector<double> z;
  for (int a = 0; a < shape.ndim(); ++a) {
    const Index n = shape.dim(a);
    const Index stride = shape.stride(a);
    const Index outer = shape.size() / (n * stride);
    f.resize(static_cast<std::size_t>(n));
    d.resize(static_cast<std::size_t>(n));
    v.resize(static_cast<std::size_t>(n));
    z.resize(static_cast<std::size_t>(n + 1));
    for (Index o = 0; o < outer; ++o) {
      for (Index r = 0; r < stride; ++r) {
        const Index base = o * n * stride + r;
        for (Index k = 0; k < n; ++k) f[static_cast<std::size_t>(k)] = dist[static_cast<std::size_t>(base + k * stride)];
        distance_1d(f, d, v, z);
        for (Index k = 0; k < n; ++k) dist[static_cast<std::size_t>(base + k * stride)] = d[static_cast<std::size_t>(k)];
      }
    }
  }
  return dist;
}

ScalarField signed_distance_transform(const MaskField& inside) {
  const Index n_in = inside.count();
  if (n_in == 0 || n_in == inside.point_count()) {
    throw std::invalid_argument("signed_distance_transform: mask must contain both phases");
  }
  const auto to_inside = squared_distance_to(inside);
  const auto to_outside = squared_distance_to(mask_not(inside));
  ScalarField phi(inside.shape());
  for (Index i = 0; i < phi.point_count(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    phi[i] = inside[i] ? -(std::sqrt(to_outside[k]) - 0.5) : std::sqrt(to_inside[k]) - 0.5;
  }
  return phi;
}

MaskField dilate(const MaskField& m, double radius) {
  const auto dist = squared_distance_to(m);
  MaskField out(m.shape());
  const double r2 = radius * radius;
  for (Index i = 0; i < m.point_count(); ++i) out.set(i, dist[static_cast<std::size_t>(i)] <= r2);
  return out;
}

}  // namespace convexsdf
