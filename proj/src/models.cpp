#include "convexsdf/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "convexsdf/diff_ops.hpp"
#include "convexsdf/transforms.hpp"

namespace convexsdf {

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Segmentation:
      return "segmentation";
    case ModelKind::ExactHull:
      return "exact_hull";
    case ModelKind::ApproxHull:
      return "approx_hull";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "segmentation") return ModelKind::Segmentation;
  if (name == "exact_hull") return ModelKind::ExactHull;
  if (name == "approx_hull") return ModelKind::ApproxHull;
  throw std::invalid_argument("unknown model kind '" + name + "'");
}

void SegParams::validate() const {
  if (!(a >= 0.0) || !(b >= 0.0)) throw std::invalid_argument("similarity weights must be >= 0");
  if (!(mu >= 0.0)) throw std::invalid_argument("mu must be >= 0");
  if (!(alpha_h > 0.0)) throw std::invalid_argument("alpha_h must be > 0");
  if (!(g_alpha > 0.0)) throw std::invalid_argument("g_alpha must be > 0");
  if (!(g_beta >= 0.0)) throw std::invalid_argument("g_beta must be >= 0");
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
}

void HullParams::validate() const {
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  if (!exact_positive_part && !(softplus_t > 0.0)) {
    throw std::invalid_argument("softplus_t must be > 0");
  }
}

ModelSpec ModelSpec::segmentation(ScalarField image, MaskField outside_labels,
                                  MaskField inside_labels, const SegParams& params) {
  params.validate();
  ModelSpec spec;
  spec.kind = ModelKind::Segmentation;
  spec.seg = params;
  spec.input_set = MaskField(image.shape());
  spec.outside_labels = std::move(outside_labels);
  spec.inside_labels = std::move(inside_labels);
  spec.region_force = convexsdf::region_force(image, spec.outside_labels, spec.inside_labels, params);
  spec.edge = edge_detector(image, params);
  spec.image = std::move(image);
  spec.validate();
  return spec;
}

ModelSpec ModelSpec::exact_hull(MaskField input_set) {
  ModelSpec spec;
  spec.kind = ModelKind::ExactHull;
  spec.outside_labels = MaskField(input_set.shape());
  // The hull must enclose X, so X carries the inside (phi <= 0) constraint.
  spec.inside_labels = input_set;
  spec.input_set = std::move(input_set);
  spec.validate();
  return spec;
}

ModelSpec ModelSpec::approx_hull(MaskField input_set, const HullParams& params) {
  ModelSpec spec;
  spec.kind = ModelKind::ApproxHull;
  spec.hull = params;
  spec.outside_labels = MaskField(input_set.shape());
  spec.inside_labels = MaskField(input_set.shape());
  spec.input_set = std::move(input_set);
  spec.validate();
  return spec;
}

void ModelSpec::validate() const {
  const GridShape& s = input_set.shape();
  require_same_shape(s, outside_labels.shape(), "ModelSpec outside labels");
  require_same_shape(s, inside_labels.shape(), "ModelSpec inside labels");
  for (Index i = 0; i < s.size(); ++i) {
    if (outside_labels[i] && inside_labels[i]) {
      throw std::invalid_argument("ModelSpec: label sets overlap");
    }
  }
  switch (kind) {
    case ModelKind::Segmentation:
      seg.validate();
      if (!image || !region_force || !edge) {
        throw std::invalid_argument("segmentation model requires an image");
      }
      require_same_shape(s, image->shape(), "ModelSpec image");
      if (outside_labels.count() + inside_labels.count() == 0) {
        throw std::invalid_argument("segmentation model requires labels");
      }
      break;
    case ModelKind::ExactHull:
      if (input_set.count() == 0) throw std::invalid_argument("exact hull requires a nonempty X");
      break;
    case ModelKind::ApproxHull:
      hull.validate();
      break;
  }
}

double position_scale(const GridShape& shape) {
  Index n = 1;
  for (int a = 0; a < shape.ndim(); ++a) n = std::max(n, shape.dim(a));
  return 1.0 / static_cast<double>(n);
}

double similarity(const ScalarField& u, Index x, Index y, const SegParams& params) {
  const GridShape& shape = u.shape();
  const auto cx = shape.coord(x);
  const auto cy = shape.coord(y);
  const double h = position_scale(shape);
  double dist2 = 0.0;
  for (std::size_t a = 0; a < 3; ++a) {
    const double d = h * static_cast<double>(cx[a] - cy[a]);
    dist2 += d * d;
  }
  const double du = u[x] - u[y];
  return std::exp(-params.a * dist2 - params.b * du * du);
}

namespace {

struct Label {
  std::array<double, 3> pos;
  double value;
};

std::vector<Label> collect_labels(const ScalarField& u, const MaskField& m) {
  std::vector<Label> out;
  const double h = position_scale(u.shape());
  for (Index i = 0; i < m.point_count(); ++i) {
    if (!m[i]) continue;
    const auto c = u.shape().coord(i);
    out.push_back({{h * static_cast<double>(c[0]), h * static_cast<double>(c[1]), h * static_cast<double>(c[2])},
                   u[i]});
  }
  return out;
}

// log sum_y S(x, y), evaluated stably.
double log_similarity_sum(const std::array<double, 3>& pos, double value,
                          const std::vector<Label>& labels, const SegParams& params,
                          std::vector<double>& scratch) {
  scratch.resize(labels.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const auto& l = labels[k];
    double dist2 = 0.0;
    for (std::size_t a = 0; a < 3; ++a) dist2 += (pos[a] - l.pos[a]) * (pos[a] - l.pos[a]);
    const double du = value - l.value;
    scratch[k] = -params.a * dist2 - params.b * du * du;
    top = std::max(top, scratch[k]);
  }
  double sum = 0.0;
  for (double e : scratch) sum += std::exp(e - top);
  return top + std::log(sum);
}

}  // namespace

ScalarField region_force(const ScalarField& u, const MaskField& outside_labels,
                         const MaskField& inside_labels, const SegParams& params) {
  require_same_shape(u.shape(), outside_labels.shape(), "region_force");
  require_same_shape(u.shape(), inside_labels.shape(), "region_force");
  const auto l0 = collect_labels(u, outside_labels);
  const auto l1 = collect_labels(u, inside_labels);
  if (l0.empty() || l1.empty()) throw std::invalid_argument("region_force: empty label set");

  ScalarField force(u.shape());
  std::vector<double> scratch;
  const double h = position_scale(u.shape());
  for (Index i = 0; i < u.point_count(); ++i) {
    const auto c = u.shape().coord(i);
    const std::array<double, 3> pos = {h * static_cast<double>(c[0]), h * static_cast<double>(c[1]),
                                       h * static_cast<double>(c[2])};
    const double log0 = log_similarity_sum(pos, u[i], l0, params, scratch);
    const double log1 = log_similarity_sum(pos, u[i], l1, params, scratch);
    // p1 = S1 / (S0 + S1) as a logistic of the log ratio.
    double p1 = 1.0 / (1.0 + std::exp(log0 - log1));
    p1 = std::clamp(p1, kProbabilityClamp, 1.0 - kProbabilityClamp);
    const double p0 = 1.0 - p1;
    force[i] = -std::log(p1) + std::log(p0);
  }
  return force;
}

ScalarField edge_detector(const ScalarField& u, const SegParams& params) {
  const ScalarField smooth = gaussian_convolve(u, params.sigma);
  const VectorField grad = gradient(smooth);
  ScalarField g(u.shape());
  const int d = u.shape().ndim();
  for (Index i = 0; i < u.point_count(); ++i) {
    double m2 = 0.0;
    for (int a = 0; a < d; ++a) {
      const double v = grad.component(a)[static_cast<std::size_t>(i)];
      m2 += v * v;
    }
    g[i] = params.g_alpha / (1.0 + params.g_beta * std::sqrt(m2));
  }
  return g;
}

double smoothed_heaviside(double y, double alpha_h) {
  return 0.5 + std::atan(y / alpha_h) / std::numbers::pi;
}

double smoothed_delta(double y, double alpha_h) {
  return alpha_h / (std::numbers::pi * (y * y + alpha_h * alpha_h));
}

double smoothed_delta_derivative(double y, double alpha_h) {
  const double s = y * y + alpha_h * alpha_h;
  return -2.0 * alpha_h * y / (std::numbers::pi * s * s);
}

double hull_penalty(double s, const HullParams& params) {
  if (params.exact_positive_part) return s > 0.0 ? s : 0.0;
  const double ts = params.softplus_t * s;
  // log(1 + e^ts) = max(ts, 0) + log1p(e^-|ts|)
  return (std::max(ts, 0.0) + std::log1p(std::exp(-std::abs(ts)))) / params.softplus_t;
}

double hull_penalty_derivative(double s, const HullParams& params) {
  if (params.exact_positive_part) return s > 0.0 ? 1.0 : 0.0;
  const double ts = params.softplus_t * s;
  if (ts >= 0.0) return 1.0 / (1.0 + std::exp(-ts));
  const double e = std::exp(ts);
  return e / (1.0 + e);
}

double objective_value(const ScalarField& phi, const ModelSpec& spec) {
  require_same_shape(phi.shape(), spec.shape(), "objective_value");
  double total = 0.0;
  switch (spec.kind) {
    case ModelKind::ExactHull:
      for (Index i = 0; i < phi.point_count(); ++i) total -= phi[i];
      break;
    case ModelKind::ApproxHull:
      for (Index i = 0; i < phi.point_count(); ++i) {
        total -= phi[i];
        if (spec.input_set[i]) total += spec.hull.lambda * hull_penalty(phi[i], spec.hull);
      }
      break;
    case ModelKind::Segmentation: {
      const auto& force = *spec.region_force;
      const auto& g = *spec.edge;
      const double alpha = spec.seg.alpha_h;
      for (Index i = 0; i < phi.point_count(); ++i) {
        // 1 - h(phi) is the smoothed indicator of the inside phase.
        total += force[i] * (1.0 - smoothed_heaviside(phi[i], alpha)) +
                 spec.seg.mu * g[i] * smoothed_delta(phi[i], alpha);
      }
      break;
    }
  }
  return total;
}

ScalarField objective_gradient(const ScalarField& phi, const ModelSpec& spec) {
  require_same_shape(phi.shape(), spec.shape(), "objective_gradient");
  ScalarField grad(phi.shape(), -1.0);
  switch (spec.kind) {
    case ModelKind::ExactHull:
      break;
    case ModelKind::ApproxHull:
      for (Index i = 0; i < phi.point_count(); ++i) {
        if (spec.input_set[i]) grad[i] += spec.hull.lambda * hull_penalty_derivative(phi[i], spec.hull);
      }
      break;
    case ModelKind::Segmentation: {
      const auto& force = *spec.region_force;
      const auto& g = *spec.edge;
      const double alpha = spec.seg.alpha_h;
      for (Index i = 0; i < phi.point_count(); ++i) {
        grad[i] = -force[i] * smoothed_delta(phi[i], alpha) +
                  spec.seg.mu * g[i] * smoothed_delta_derivative(phi[i], alpha);
      }
      break;
    }
  }
  return grad;
}

ScalarField normalize_intensity(const ScalarField& u) {
  const auto vals = u.values();
  const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
  ScalarField out(u.shape());
  const double range = *hi - *lo;
  if (range <= 0.0) return out;
  for (Index i = 0; i < u.point_count(); ++i) out[i] = (u[i] - *lo) / range;
  return out;
}

}  // namespace convexsdf
