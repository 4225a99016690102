#pragma once

#include <optional>
#include <string>

#include "convexsdf/grid.hpp"

namespace convexsdf {

enum class ModelKind { Segmentation, ExactHull, ApproxHull };

const char* to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

/// Weights of the two-phase segmentation model. Image intensities are
/// expected in [0, 1].
struct SegParams {
  double a = 1.0;        // spatial weight of the similarity
  double b = 10.0;       // intensity weight of the similarity
  double mu = 1.0;       // boundary term weight
  double alpha_h = 1.5;  // Heaviside smoothing width
  double g_alpha = 1.0;  // edge detector numerator
  double g_beta = 10.0;  // edge detector gradient gain
  double sigma = 1.5;    // Gaussian pre-smoothing width

  void validate() const;
  bool operator==(const SegParams&) const = default;
};

struct HullParams {
  double lambda = 800.0;
  /// Sharpness of the softplus penalty; ignored when exact_positive_part is set.
  double softplus_t = 5.0;
  bool exact_positive_part = false;

  void validate() const;
  bool operator==(const HullParams&) const = default;
};

/// One of the three objectives together with its data and sign constraints.
///
/// Labels follow the sign convention of the level set: phi <= 0 is enforced
/// on `inside_labels` and phi >= 0 on `outside_labels`.
struct ModelSpec {
  ModelKind kind = ModelKind::ExactHull;
  std::optional<ScalarField> image;
  MaskField input_set;       // X, also the indicator m(x) of the penalty term
  MaskField outside_labels;  // I0
  MaskField inside_labels;   // I1
  SegParams seg;
  HullParams hull;

  // Data terms of the segmentation model; they do not depend on phi.
  std::optional<ScalarField> region_force;
  std::optional<ScalarField> edge;

  static ModelSpec segmentation(ScalarField image, MaskField outside_labels,
                                MaskField inside_labels, const SegParams& params = {});
  static ModelSpec exact_hull(MaskField input_set);
  static ModelSpec approx_hull(MaskField input_set, const HullParams& params = {});

  const GridShape& shape() const { return input_set.shape(); }
  void validate() const;
};

/// Factor mapping cell coordinates into [0, 1]: one over the largest extent.
double position_scale(const GridShape& shape);

/// exp(-a |x - y|^2 - b (u(x) - u(y))^2) for flat indices x and y, with
/// positions scaled by position_scale.
double similarity(const ScalarField& u, Index x, Index y, const SegParams& params);

/// -log p1 + log p0 with p1 the label-similarity probability of phase 1
/// (inside). Probabilities are clamped to [1e-6, 1 - 1e-6].
ScalarField region_force(const ScalarField& u, const MaskField& outside_labels,
                         const MaskField& inside_labels, const SegParams& params);

inline constexpr double kProbabilityClamp = 1e-6;

/// g_alpha / (1 + g_beta |grad (K * u)|) with forward differences.
ScalarField edge_detector(const ScalarField& u, const SegParams& params);

double smoothed_heaviside(double y, double alpha_h);
double smoothed_delta(double y, double alpha_h);
double smoothed_delta_derivative(double y, double alpha_h);

/// Softplus or positive-part penalty and its derivative.
double hull_penalty(double s, const HullParams& params);
double hull_penalty_derivative(double s, const HullParams& params);

double objective_value(const ScalarField& phi, const ModelSpec& spec);
/// dF/dphi at phi; for segmentation the data terms are frozen at phi.
ScalarField objective_gradient(const ScalarField& phi, const ModelSpec& spec);

/// Rescales an image linearly to [0, 1]; constant images map to zero.
ScalarField normalize_intensity(const ScalarField& u);

}  // namespace convexsdf
