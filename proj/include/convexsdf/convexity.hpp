#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "convexsdf/grid.hpp"

namespace convexsdf {

template <std::size_t D>
using SymMatrix = std::array<std::array<double, D>, D>;

/// Eigenvalues in ascending order; vectors[k] is the unit eigenvector of values[k].
template <std::size_t D>
struct SymEigen {
  std::array<double, D> values{};
  std::array<std::array<double, D>, D> vectors{};
};

/// Closed-form eigen-decomposition of a symmetric 2x2 matrix (upper triangle read).
SymEigen<2> symmetric_eigen(const SymMatrix<2>& a);
/// Trigonometric eigenvalues with cross-product eigenvectors; falls back to
/// cyclic Jacobi when two eigenvalues are within kDegenerateGap (relative).
SymEigen<3> symmetric_eigen(const SymMatrix<3>& a);
/// Cyclic Jacobi rotations; slower but unconditionally stable.
SymEigen<3> symmetric_eigen_jacobi(const SymMatrix<3>& a);

inline constexpr double kDegenerateGap = 1e-8;

/// Frobenius-nearest positive semi-definite matrix: negative eigenvalues
/// clamped to zero. PSD inputs are returned unchanged. Throws on non-finite input.
SymMatrix<2> psd_project(const SymMatrix<2>& a);
SymMatrix<3> psd_project(const SymMatrix<3>& a);

/// Half-width of the band around the zero level set where convexity is imposed.
struct BandSpec {
  double epsilon = 1.0;
};

/// True where |phi| <= epsilon.
MaskField band_mask(const ScalarField& phi, const BandSpec& band);

/// Applies psd_project at every point where `band` is true.
SymMatField project_hessian_field(const SymMatField& m, const MaskField& band);
/// In-place variant used by the solver.
void project_hessian_field_inplace(SymMatField& m, const MaskField& band);

/// Smallest eigenvalue of the matrix stored at one grid point.
double min_eigenvalue_at(const SymMatField& m, Index point);

/// Sampled midpoint-convexity defect of phi.
///
/// Draws `samples` triples (x1, x2, theta) with grid points x1, x2 and
/// theta in {0.25, 0.5, 0.75}, evaluates phi at theta x1 + (1 - theta) x2 by
/// multilinear interpolation, and returns the largest
/// phi(mix) - theta phi(x1) - (1 - theta) phi(x2), floored at zero.
/// When `restrict_to` is given, x1 and x2 are drawn from its true cells.
double convexity_violation(const ScalarField& phi, int samples, std::uint64_t rng_seed,
                           const MaskField* restrict_to = nullptr);

/// Multilinear interpolation of phi at a point inside the grid box.
double interpolate(const ScalarField& phi, std::span<const double> point);

}  // namespace convexsdf
