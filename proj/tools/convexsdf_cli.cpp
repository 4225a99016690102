#include <cmath>
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "convexsdf/admm.hpp"
#include "convexsdf/geometry.hpp"
#include "convexsdf/io.hpp"
#include "convexsdf/models.hpp"

using namespace convexsdf;

namespace {

struct SolverFlags {
  AdmmParams admm;
  std::optional<double> rho1;
  std::string init;
  std::optional<double> init_smooth;
  std::string out;
  std::string diag;
  std::string phi;
  bool cold = false;

  void add(CLI::App* cmd) {
    cmd->add_option("--epsilon", admm.epsilon, "band half-width")->check(CLI::NonNegativeNumber);
    cmd->add_option("--rho1", rho1, "gradient penalty (default 2 sqrt(rho2 rho3))")->check(CLI::PositiveNumber);
    cmd->add_option("--rho2", admm.rho2, "Hessian penalty")->check(CLI::PositiveNumber);
    cmd->add_option("--rho3", admm.rho3, "identity penalty")->check(CLI::PositiveNumber);
    cmd->add_option("--max-iters", admm.max_iters)->check(CLI::PositiveNumber);
    cmd->add_option("--tol", admm.tol, "relative phi change stopping threshold")->check(CLI::PositiveNumber);
    cmd->add_option("--band-refresh", admm.band_refresh)->check(CLI::PositiveNumber);
    cmd->add_flag("--cold-start", cold, "start p, Q, z and multipliers from zero");
    cmd->add_option("--init", init, "initial shape mask");
    cmd->add_option("--init-smooth", init_smooth, "start from the blurred input thresholded at 1/2")
        ->check(CLI::PositiveNumber)
        ->excludes("--init");
    cmd->add_option("--out", out, "output mask")->required();
    cmd->add_option("--diag", diag, "diagnostics CSV");
    cmd->add_option("--phi", phi, "final level-set function (f64)");
  }

  AdmmParams finish() {
    admm.rho1 = rho1 ? *rho1 : admm.balanced_rho1();
    admm.warm_start = !cold;
    admm.validate();
    return admm;
  }
};

void run_solver(const ModelSpec& spec, SolverFlags& flags) {
  const AdmmParams params = flags.finish();
  MaskField init;
  if (!flags.init.empty()) {
    init = load_mask(flags.init, spec.shape());
  } else if (flags.init_smooth) {
    if (spec.kind == ModelKind::Segmentation) throw std::invalid_argument("--init-smooth needs a hull model");
    init = smoothed_init(spec.input_set, *flags.init_smooth);
  } else {
    init = default_init(spec);
  }
  const SolveResult r = solve(spec, init, params);
  save_mask(flags.out, r.mask);
  if (!flags.diag.empty()) write_diagnostics(flags.diag, r.history);
  if (!flags.phi.empty()) save_field(flags.phi, r.phi);
  std::cerr << r.iterations << " iterations" << (r.converged ? ", converged" : "") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convex shape priors on signed distance functions"};
  app.require_subcommand(1);

  std::string input;

  SolverFlags hull_flags;
  hull_flags.admm = AdmmParams::exact_hull_defaults();
  auto* hull = app.add_subcommand("hull", "exact convex hull of a point mask");
  hull->add_option("--input", input, "input mask")->required();
  hull_flags.add(hull);

  SolverFlags approx_flags;
  approx_flags.admm = AdmmParams::approx_hull_defaults();
  HullParams hp;
  auto* approx = app.add_subcommand("hull-approx", "outlier-robust approximate hull");
  approx->add_option("--input", input, "input mask")->required();
  approx_flags.add(approx);
  approx->add_option("--lambda", hp.lambda, "penalty weight")->check(CLI::NonNegativeNumber);
  approx->add_option("--softplus-t", hp.softplus_t, "softplus sharpness")->check(CLI::PositiveNumber);
  approx->add_flag("--exact-positive-part", hp.exact_positive_part, "use max(s, 0) instead of softplus");

  SolverFlags seg_flags;
  seg_flags.admm = AdmmParams::segmentation_defaults();
  SegParams sp;
  std::string image;
  std::string labels;
  auto* seg = app.add_subcommand("segment", "two-phase segmentation with a convexity prior");
  seg->add_option("--image", image, "greymap or raw 2D image")->required();
  seg->add_option("--labels", labels, "label raster: 0 none, 1 background, 2 foreground")->required();
  seg->add_option("--mu", sp.mu)->check(CLI::NonNegativeNumber);
  seg->add_option("--alpha-h", sp.alpha_h)->check(CLI::PositiveNumber);
  seg->add_option("--a", sp.a)->check(CLI::NonNegativeNumber);
  seg->add_option("--b", sp.b)->check(CLI::NonNegativeNumber);
  seg->add_option("--g-alpha", sp.g_alpha)->check(CLI::PositiveNumber);
  seg->add_option("--g-beta", sp.g_beta)->check(CLI::NonNegativeNumber);
  seg->add_option("--sigma", sp.sigma)->check(CLI::NonNegativeNumber);
  seg_flags.add(seg);

  std::string shape_name;
  std::string dims;
  double outliers = 0.0;
  std::uint64_t seed = 0;
  std::string synth_out;
  SynthParams synth_params;
  auto* syn = app.add_subcommand("synth", "synthetic shape with uniform outliers");
  syn->add_option("--shape", shape_name)->required()->check(CLI::IsMember(synth_shape_names()));
  syn->add_option("--dims", dims, "e.g. 128x128 or 64x64x64")->required();
  syn->add_option("--outliers", outliers, "outlier fraction in [0, 1)")->required();
  syn->add_option("--seed", seed)->required();
  syn->add_option("--out", synth_out)->required();
  syn->add_option("--gap", synth_params.gap, "two-discs boundary gap")->check(CLI::PositiveNumber);
  syn->add_option("--radius", synth_params.radius)->check(CLI::PositiveNumber);
  syn->add_option("--extent", synth_params.extent, "reference length")->check(CLI::PositiveNumber);

  std::string candidate;
  std::string reference;
  auto* cmp = app.add_subcommand("compare", "Hausdorff hull error in percent of the equivalent radius");
  cmp->add_option("--candidate", candidate)->required();
  cmp->add_option("--reference", reference)->required();

  std::string oracle_out;
  std::optional<Index> layers;
  auto* oracle = app.add_subcommand("oracle-hull", "rasterized exact hull or convex-layers hull");
  oracle->add_option("--input", input, "input mask")->required();
  oracle->add_option("--out", oracle_out)->required();
  oracle->add_option("--layers", layers, "peel at least K boundary points first")->check(CLI::NonNegativeNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*hull) {
      run_solver(ModelSpec::exact_hull(load_mask(input)), hull_flags);
    } else if (*approx) {
      run_solver(ModelSpec::approx_hull(load_mask(input), hp), approx_flags);
    } else if (*seg) {
      ScalarField u = normalize_intensity(load_image(image));
      LabelMasks lm = load_labels(labels, u.shape());
      run_solver(ModelSpec::segmentation(std::move(u), std::move(lm.outside), std::move(lm.inside), sp), seg_flags);
    } else if (*syn) {
      save_mask(synth_out, synth(shape_name, parse_dims(dims), outliers, seed, synth_params));
    } else if (*cmp) {
      const MaskField ref = load_mask(reference);
      const MaskField cand = load_mask(candidate, ref.shape());
      std::printf("%.2f\n", 100.0 * hull_error(cand, ref));
    } else if (*oracle) {
      const MaskField m = load_mask(input);
      const PointSet ps = mask_points(m);
      const HullFacets h = layers ? convex_layers_approx(ps, *layers) : exact_hull(ps);
      save_mask(oracle_out, rasterize_hull(h, m.shape()));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
