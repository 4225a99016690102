#include "convexsdf/admm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "convexsdf/convexity.hpp"
#include "convexsdf/diff_ops.hpp"

namespace convexsdf {

AdmmParams AdmmParams::exact_hull_defaults() {
  AdmmParams p;
  p.rho2 = 2000.0;
  p.rho3 = 10.0;
  p.rho1 = p.balanced_rho1();
  p.epsilon = 10.0;
  return p;
}

AdmmParams AdmmParams::approx_hull_defaults() {
  AdmmParams p;
  p.rho2 = 2000.0;
  p.rho3 = 400.0;
  p.rho1 = p.balanced_rho1();
  p.epsilon = 5.0;
  return p;
}

AdmmParams AdmmParams::segmentation_defaults() { return exact_hull_defaults(); }

double AdmmParams::balanced_rho1() const { return 2.0 * std::sqrt(rho2 * rho3); }

void AdmmParams::validate() const {
  if (!(rho1 > 0.0) || !(rho2 > 0.0) || !(rho3 > 0.0)) {
    throw std::invalid_argument("ADMM penalties must be positive");
  }
  if (!(epsilon >= 0.0)) throw std::invalid_argument("band half-width must be >= 0");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
  if (band_refresh < 1) throw std::invalid_argument("band_refresh must be >= 1");
}

namespace {

void normalize_into(const VectorField& v, const VectorField* previous, VectorField& out) {
  const GridShape& shape = v.shape();
  const int d = shape.ndim();
  for (Index i = 0; i < shape.size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    double n2 = 0.0;
    for (int a = 0; a < d; ++a) n2 += v.component(a)[k] * v.component(a)[k];
    const double n = std::sqrt(n2);
    if (n >= 1e-12) {
      for (int a = 0; a < d; ++a) out.component(a)[k] = v.component(a)[k] / n;
      continue;
    }
    bool keep = false;
    if (previous != nullptr) {
      double p2 = 0.0;
      for (int a = 0; a < d; ++a) p2 += previous->component(a)[k] * previous->component(a)[k];
      keep = std::abs(p2 - 1.0) <= 1e-12;
    }
    for (int a = 0; a < d; ++a) {
      out.component(a)[k] = keep ? previous->component(a)[k] : (a == 0 ? 1.0 : 0.0);
    }
  }
}

void clamp_labels(ScalarField& z, const ModelSpec& spec) {
  for (Index i = 0; i < z.point_count(); ++i) {
    if (spec.inside_labels[i]) {
      z[i] = std::min(0.0, z[i]);
    } else if (spec.outside_labels[i]) {
      z[i] = std::max(0.0, z[i]);
    }
  }
}

}  // namespace

MaskField default_hull_init(const ModelSpec& spec) { return dilate(spec.input_set, 1.0); }

MaskField default_segmentation_init(const ModelSpec& spec) {
  if (!spec.region_force) throw std::invalid_argument("segmentation init needs a region force");
  const MaskField m = sublevel_mask(*spec.region_force);
  if (m.count() > 0 && m.count() < m.point_count()) return m;
  return dilate(spec.inside_labels, 2.0);
}

MaskField smoothed_init(const MaskField& m, double sigma) {
  ScalarField u(m.shape());
  for (Index i = 0; i < m.point_count(); ++i) u[i] = m[i] ? 1.0 : 0.0;
  const ScalarField blurred = gaussian_convolve(u, sigma);
  MaskField out(m.shape());
  for (Index i = 0; i < m.point_count(); ++i) out.set(i, blurred[i] >= 0.5);
  return out;
}

MaskField default_init(const ModelSpec& spec) {
  return spec.kind == ModelKind::Segmentation ? default_segmentation_init(spec) : default_hull_init(spec);
}

SolverState initialize(const ModelSpec& spec, const MaskField& init_mask, const AdmmParams& params) {
  params.validate();
  require_same_shape(spec.shape(), init_mask.shape(), "initialize");
  const GridShape& shape = spec.shape();
  SolverState s;
  s.phi = signed_distance_transform(init_mask);
  s.p = VectorField(shape);
  s.gamma1 = VectorField(shape);
  s.q = SymMatField(shape);
  s.gamma2 = SymMatField(shape);
  s.z = ScalarField(shape);
  s.gamma3 = ScalarField(shape);
  s.band = band_mask(s.phi, BandSpec{params.epsilon});
  if (params.warm_start) {
    normalize_into(gradient(s.phi), nullptr, s.p);
    s.q = project_hessian_field(hessian(s.phi), s.band);
    s.z = s.phi;
    clamp_labels(s.z, spec);
  }
  return s;
}

ScalarField phi_rhs(const SolverState& state, const ModelSpec& spec, const AdmmParams& params) {
  const GridShape& shape = state.phi.shape();
  // rhs = -dF/dphi - div*(gamma1 - rho1 p) - H*(gamma2 - rho2 Q) + rho3 z - gamma3
  ScalarField rhs = objective_gradient(state.phi, spec);
  for (double& v : rhs.values()) v = -v;

  VectorField v1(shape);
  for (std::size_t k = 0; k < v1.values().size(); ++k) {
    v1.values()[k] = state.gamma1.values()[k] - params.rho1 * state.p.values()[k];
  }
  SymMatField m2(shape);
  for (std::size_t k = 0; k < m2.values().size(); ++k) {
    m2.values()[k] = state.gamma2.values()[k] - params.rho2 * state.q.values()[k];
  }
  const ScalarField div = divergence_adjoint(v1);
  const ScalarField hadj = hessian_adjoint(m2);
  for (Index i = 0; i < shape.size(); ++i) {
    rhs[i] += -div[i] - hadj[i] + params.rho3 * state.z[i] - state.gamma3[i];
  }
  return rhs;
}

ScalarField phi_update(const SolverState& state, const ModelSpec& spec, const AdmmParams& params,
                       const PhiPdeSolver& solver) {
  return solver.solve(phi_rhs(state, spec, params));
}

ScalarField phi_update(const SolverState& state, const ModelSpec& spec, const AdmmParams& params) {
  return phi_update(state, spec, params, PhiPdeSolver(state.phi.shape(), params.spectral()));
}

VectorField p_update(const SolverState& state, const AdmmParams& params) {
  VectorField v = gradient(state.phi);
  for (std::size_t k = 0; k < v.values().size(); ++k) {
    v.values()[k] += state.gamma1.values()[k] / params.rho1;
  }
  VectorField out(state.phi.shape());
  normalize_into(v, &state.p, out);
  return out;
}

SymMatField q_update(const SolverState& state, const AdmmParams& params) {
  SymMatField m = hessian(state.phi);
  for (std::size_t k = 0; k < m.values().size(); ++k) {
    m.values()[k] += state.gamma2.values()[k] / params.rho2;
  }
  project_hessian_field_inplace(m, state.band);
  return m;
}

ScalarField z_update(const SolverState& state, const ModelSpec& spec, const AdmmParams& params) {
  ScalarField z(state.phi.shape());
  for (Index i = 0; i < z.point_count(); ++i) z[i] = state.gamma3[i] / params.rho3 + state.phi[i];
  clamp_labels(z, spec);
  return z;
}

Multipliers multiplier_update(const SolverState& state, const AdmmParams& params) {
  Multipliers m{state.gamma1, state.gamma2, state.gamma3};
  const VectorField grad = gradient(state.phi);
  for (std::size_t k = 0; k < grad.values().size(); ++k) {
    m.gamma1.values()[k] += params.rho1 * (grad.values()[k] - state.p.values()[k]);
  }
  const SymMatField hess = hessian(state.phi);
  for (std::size_t k = 0; k < hess.values().size(); ++k) {
    m.gamma2.values()[k] += params.rho2 * (hess.values()[k] - state.q.values()[k]);
  }
  for (Index i = 0; i < state.phi.point_count(); ++i) {
    m.gamma3[i] += params.rho3 * (state.phi[i] - state.z[i]);
  }
  return m;
}

IterationRecord admm_step(SolverState& state, const ModelSpec& spec, const AdmmParams& params,
                          const PhiPdeSolver& solver) {
  const GridShape& shape = state.phi.shape();
  ScalarField phi_new = phi_update(state, spec, params, solver);

  double change = 0.0;
  for (Index i = 0; i < shape.size(); ++i) change = std::max(change, std::abs(phi_new[i] - state.phi[i]));
  const double scale = std::max(1.0, max_abs(state.phi.values()));
  state.phi = std::move(phi_new);

  if (state.iter % params.band_refresh == 0) {
    state.band = band_mask(state.phi, BandSpec{params.epsilon});
  }

  // Gradient and Hessian are shared by the p/Q updates and the dual step.
  const VectorField grad = gradient(state.phi);
  const SymMatField hess = hessian(state.phi);

  VectorField v = grad;
  for (std::size_t k = 0; k < v.values().size(); ++k) v.values()[k] += state.gamma1.values()[k] / params.rho1;
  VectorField p_new(shape);
  normalize_into(v, &state.p, p_new);
  state.p = std::move(p_new);

  SymMatField m = hess;
  for (std::size_t k = 0; k < m.values().size(); ++k) m.values()[k] += state.gamma2.values()[k] / params.rho2;
  project_hessian_field_inplace(m, state.band);
  state.q = std::move(m);

  state.z = z_update(state, spec, params);

  IterationRecord rec;
  rec.iter = state.iter + 1;
  for (std::size_t k = 0; k < grad.values().size(); ++k) {
    const double r = grad.values()[k] - state.p.values()[k];
    rec.res_p = std::max(rec.res_p, std::abs(r));
    state.gamma1.values()[k] += params.rho1 * r;
  }
  for (std::size_t k = 0; k < hess.values().size(); ++k) {
    const double r = hess.values()[k] - state.q.values()[k];
    rec.res_q = std::max(rec.res_q, std::abs(r));
    state.gamma2.values()[k] += params.rho2 * r;
  }
  for (Index i = 0; i < shape.size(); ++i) {
    const double r = state.phi[i] - state.z[i];
    rec.res_z = std::max(rec.res_z, std::abs(r));
    state.gamma3[i] += params.rho3 * r;
  }
  rec.dphi = change / scale;
  rec.objective = objective_value(state.phi, spec);
  ++state.iter;
  state.history.push_back(rec);
  return rec;
}

SolveResult solve(const ModelSpec& spec, const MaskField& init_mask, const AdmmParams& params,
                  const IterationCallback& on_iteration) {
  spec.validate();
  SolverState state = initialize(spec, init_mask, params);
  const PhiPdeSolver solver(spec.shape(), params.spectral());
  const double blowup = 10.0 * spec.shape().diameter();

  SolveResult result;
  while (state.iter < params.max_iters) {
    const IterationRecord rec = admm_step(state, spec, params, solver);
    if (on_iteration) on_iteration(rec);
    if (!all_finite(state.phi.values()) || max_abs(state.phi.values()) > blowup) {
      throw std::runtime_error("ADMM diverged at iteration " + std::to_string(rec.iter));
    }
    if (rec.dphi < params.tol) {
      result.converged = true;
      break;
    }
  }
  result.iterations = state.iter;
  result.mask = sublevel_mask(state.phi);
  result.history = std::move(state.history);
  result.phi = std::move(state.phi);
  return result;
}

}  // namespace convexsdf
