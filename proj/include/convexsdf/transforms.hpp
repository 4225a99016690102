#pragma once

#include <memory>
#include <vector>

#include "convexsdf/grid.hpp"

namespace convexsdf {

/// Penalty weights of the operator rho2 * lap^2 - rho1 * lap + rho3.
struct SpectralSolveParams {
  double rho1 = 0.0;
  double rho2 = 0.0;
  double rho3 = 1.0;

  void validate() const;
};

/// Solves rho2 * lap^2(phi) - rho1 * lap(phi) + rho3 * phi = rhs on a periodic
/// grid by diagonalizing the discrete Laplacian with a DFT.
///
/// The transform plan and the per-mode denominators are built once; solve()
/// is const and may be called concurrently.
class PhiPdeSolver {
 public:
  PhiPdeSolver(const GridShape& shape, const SpectralSolveParams& params);
  ~PhiPdeSolver();
  PhiPdeSolver(PhiPdeSolver&&) noexcept;
  PhiPdeSolver& operator=(PhiPdeSolver&&) noexcept;
  PhiPdeSolver(const PhiPdeSolver&) = delete;
  PhiPdeSolver& operator=(const PhiPdeSolver&) = delete;

  ScalarField solve(const ScalarField& rhs) const;

  const GridShape& shape() const { return shape_; }
  const SpectralSolveParams& params() const { return params_; }

  /// Largest imaginary part (relative to the real scale) tolerated after the
  /// inverse transform before the solve is declared broken.
  static constexpr double kImaginaryResidueLimit = 1e-9;

 private:
  struct Plans;
  GridShape shape_;
  SpectralSolveParams params_;
  std::vector<double> inv_symbol_;
  std::unique_ptr<Plans> plans_;
};

/// One-shot convenience wrapper around PhiPdeSolver.
ScalarField solve_phi_pde(const ScalarField& rhs, const SpectralSolveParams& params);

/// Eigenvalue of the periodic discrete Laplacian for the Fourier mode k.
double laplacian_symbol(const GridShape& shape, std::span<const Index> mode);

/// Normalized 1D Gaussian taps for offsets -r..r with r = ceil(3 sigma).
std::vector<double> gaussian_kernel(double sigma);

/// Periodic isotropic Gaussian blur, applied as one 1D pass per axis.
ScalarField gaussian_convolve(const ScalarField& u, double sigma);

/// Squared Euclidean distance from every cell center to the nearest true
/// cell (non-periodic). Cells of an empty mask get +infinity.
std::vector<double> squared_distance_to(const MaskField& target);

/// Signed distance with the interface half a cell between opposite phases:
/// negative inside, positive outside, |phi| = distance to the nearest cell of
/// the other phase minus 0.5.
ScalarField signed_distance_transform(const MaskField& inside);

/// Cells within Euclidean distance `radius` of a true cell (non-periodic).
MaskField dilate(const MaskField& m, double radius);

}  // namespace convexsdf
