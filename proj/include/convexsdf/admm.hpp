#pragma once

#include <functional>
#include <vector>

#include "convexsdf/grid.hpp"
#include "convexsdf/models.hpp"
#include "convexsdf/transforms.hpp"

namespace convexsdf {

struct AdmmParams {
  double rho1 = 0.0;
  double rho2 = 2000.0;
  double rho3 = 10.0;
  double epsilon = 10.0;  // band half-width
  int max_iters = 500;
  double tol = 1e-4;      // relative sup-norm change of phi
  int band_refresh = 1;   // iterations between band recomputations
  /// Start p, Q and z from phi0 instead of zero.
  bool warm_start = true;

  /// rho2 = 2000, rho3 = 10, rho1 = 2 sqrt(rho2 rho3), epsilon = 10.
  static AdmmParams exact_hull_defaults();
  /// rho2 = 2000, rho3 = 400, rho1 = 2 sqrt(rho2 rho3), epsilon = 5.
  static AdmmParams approx_hull_defaults();
  static AdmmParams segmentation_defaults();

  /// 2 sqrt(rho2 rho3).
  double balanced_rho1() const;
  SpectralSolveParams spectral() const { return {rho1, rho2, rho3}; }
  void validate() const;
  bool operator==(const AdmmParams&) const = default;
};

struct IterationRecord {
  int iter = 0;
  double objective = 0.0;
  double res_p = 0.0;  // max |grad phi - p|
  double res_q = 0.0;  // max |H phi - Q| over entries
  double res_z = 0.0;  // max |phi - z|
  double dphi = 0.0;   // |phi_new - phi_old|_inf / max(1, |phi_old|_inf)
};

/// Primal and dual variables of the splitting p = grad phi, Q = H phi, z = phi.
struct SolverState {
  ScalarField phi;
  VectorField p;
  VectorField gamma1;
  SymMatField q;
  SymMatField gamma2;
  ScalarField z;
  ScalarField gamma3;
  MaskField band;
  int iter = 0;
  std::vector<IterationRecord> history;
};

/// phi0 = signed distance of `init_mask`; the remaining variables are zero
/// unless params.warm_start is set, in which case p, Q and z are the
/// constraint projections of grad phi0, H phi0 and phi0.
SolverState initialize(const ModelSpec& spec, const MaskField& init_mask, const AdmmParams& params);

/// Default initial shape of the hull models: X dilated by one cell.
MaskField default_hull_init(const ModelSpec& spec);
/// Default initial shape of segmentation: cells the region force labels
/// inside, or the inside scribbles dilated by two cells if that is one phase.
MaskField default_segmentation_init(const ModelSpec& spec);
/// Cells where the Gaussian-blurred indicator of `m` is at least 1/2.
MaskField smoothed_init(const MaskField& m, double sigma);
/// Dispatches on spec.kind.
MaskField default_init(const ModelSpec& spec);

/// Right-hand side of the phi sub-problem for the current state.
ScalarField phi_rhs(const SolverState& state, const ModelSpec& spec, const AdmmParams& params);
ScalarField phi_update(const SolverState& state, const ModelSpec& spec, const AdmmParams& params,
                       const PhiPdeSolver& solver);
ScalarField phi_update(const SolverState& state, const ModelSpec& spec, const AdmmParams& params);

/// Pointwise unit normalization of gamma1 / rho1 + grad phi.
VectorField p_update(const SolverState& state, const AdmmParams& params);
/// PSD projection of gamma2 / rho2 + H phi inside the band, identity elsewhere.
SymMatField q_update(const SolverState& state, const AdmmParams& params);
/// Sign clamp of gamma3 / rho3 + phi on the labelled cells.
ScalarField z_update(const SolverState& state, const ModelSpec& spec, const AdmmParams& params);

struct Multipliers {
  VectorField gamma1;
  SymMatField gamma2;
  ScalarField gamma3;
};
/// Dual ascent with step equal to the penalty.
Multipliers multiplier_update(const SolverState& state, const AdmmParams& params);

struct SolveResult {
  ScalarField phi;
  MaskField mask;  // phi < 0
  std::vector<IterationRecord> history;
  int iterations = 0;
  bool converged = false;
};

using IterationCallback = std::function<void(const IterationRecord&)>;

/// Runs one full iteration (phi, p, Q, z, multipliers) in place.
IterationRecord admm_step(SolverState& state, const ModelSpec& spec, const AdmmParams& params,
                          const PhiPdeSolver& solver);

/// Iterates until the relative change of phi drops below params.tol or
/// params.max_iters is reached. Throws std::runtime_error if |phi|_inf
/// exceeds ten grid diameters.
SolveResult solve(const ModelSpec& spec, const MaskField& init_mask, const AdmmParams& params,
                  const IterationCallback& on_iteration = {});

}  // namespace convexsdf
