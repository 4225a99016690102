#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "convexsdf/admm.hpp"
#include "convexsdf/convexity.hpp"
#include "convexsdf/geometry.hpp"
#include "convexsdf/io.hpp"
#include "convexsdf/models.hpp"
#include "convexsdf/transforms.hpp"

namespace py = pybind11;
using namespace convexsdf;

namespace {

using F64Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using BoolArray = py::array_t<bool, py::array::c_style | py::array::forcecast>;

GridShape shape_of(const py::array& a) {
  if (a.ndim() != 2 && a.ndim() != 3) throw py::value_error("expected a 2D or 3D array");
  std::vector<Index> dims(a.shape(), a.shape() + a.ndim());
  return GridShape(std::span<const Index>(dims));
}

std::vector<py::ssize_t> dims_of(const GridShape& s) { return {s.dims().begin(), s.dims().end()}; }

ScalarField to_field(const F64Array& a) {
  const GridShape s = shape_of(a);
  return ScalarField(s, std::vector<double>(a.data(), a.data() + s.size()));
}

MaskField to_mask(const BoolArray& a) {
  const GridShape s = shape_of(a);
  MaskField m(s);
  for (Index i = 0; i < s.size(); ++i) m.set(i, a.data()[i]);
  return m;
}

py::array_t<double> from_field(const ScalarField& f) {
  py::array_t<double> out(dims_of(f.shape()));
  std::copy(f.values().begin(), f.values().end(), out.mutable_data());
  return out;
}

py::array_t<bool> from_mask(const MaskField& m) {
  py::array_t<bool> out(dims_of(m.shape()));
  for (Index i = 0; i < m.point_count(); ++i) out.mutable_data()[i] = m[i];
  return out;
}

AdmmParams admm_params(AdmmParams p, std::optional<double> epsilon, std::optional<double> rho1, std::optional<double> rho2,
                       std::optional<double> rho3, std::optional<int> max_iters, std::optional<double> tol, bool warm_start) {
  if (epsilon) p.epsilon = *epsilon;
  if (rho2) p.rho2 = *rho2;
  if (rho3) p.rho3 = *rho3;
  p.rho1 = rho1 ? *rho1 : p.balanced_rho1();
  if (max_iters) p.max_iters = *max_iters;
  if (tol) p.tol = *tol;
  p.warm_start = warm_start;
  p.validate();
  return p;
}

py::dict run(const ModelSpec& spec, const MaskField& init, const AdmmParams& p) {
  SolveResult r;
  {
    py::gil_scoped_release release;
    r = solve(spec, init, p);
  }
  py::list history;
  for (const auto& h : r.history) {
    py::dict d;
    d["iter"] = h.iter;
    d["objective"] = h.objective;
    d["res_p"] = h.res_p;
    d["res_Q"] = h.res_q;
    d["res_z"] = h.res_z;
    d["dphi"] = h.dphi;
    history.append(d);
  }
  py::dict out;
  out["mask"] = from_mask(r.mask);
  out["phi"] = from_field(r.phi);
  out["iterations"] = r.iterations;
  out["converged"] = r.converged;
  out["history"] = history;
  return out;
}

MaskField pick_init(const ModelSpec& spec, const std::optional<BoolArray>& init) {
  if (!init) return default_init(spec);
  MaskField m = to_mask(*init);
  require_same_shape(spec.shape(), m.shape(), "init");
  return m;
}

#define SOLVER_ARGS                                                                                          \
  py::arg("epsilon") = py::none(), py::arg("rho1") = py::none(), py::arg("rho2") = py::none(),              \
  py::arg("rho3") = py::none(), py::arg("max_iters") = py::none(), py::arg("tol") = py::none(),             \
  py::arg("warm_start") = true, py::arg("init") = py::none()

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Convex shape priors on signed distance functions";

  m.def("signed_distance", [](const BoolArray& mask) { return from_field(signed_distance_transform(to_mask(mask))); },
        py::arg("mask"), "Negative inside, positive outside, interface half a cell between phases.");

  m.def(
      "exact_hull",
      [](const BoolArray& x, std::optional<double> eps, std::optional<double> r1, std::optional<double> r2,
         std::optional<double> r3, std::optional<int> it, std::optional<double> tol, bool warm,
         const std::optional<BoolArray>& init) {
        const ModelSpec spec = ModelSpec::exact_hull(to_mask(x));
        return run(spec, pick_init(spec, init),
                   admm_params(AdmmParams::exact_hull_defaults(), eps, r1, r2, r3, it, tol, warm));
      },
      py::arg("points"), SOLVER_ARGS);

  m.def(
      "approx_hull",
      [](const BoolArray& x, double lambda, double softplus_t, bool exact_positive_part, std::optional<double> eps,
         std::optional<double> r1, std::optional<double> r2, std::optional<double> r3, std::optional<int> it,
         std::optional<double> tol, bool warm, const std::optional<BoolArray>& init) {
        HullParams hp{lambda, softplus_t, exact_positive_part};
        const ModelSpec spec = ModelSpec::approx_hull(to_mask(x), hp);
        return run(spec, pick_init(spec, init),
                   admm_params(AdmmParams::approx_hull_defaults(), eps, r1, r2, r3, it, tol, warm));
      },
      py::arg("points"), py::arg("lambda_") = 800.0, py::arg("softplus_t") = 5.0,
      py::arg("exact_positive_part") = false, SOLVER_ARGS);

  m.def(
      "segment",
      [](const F64Array& image, const py::array_t<int, py::array::c_style | py::array::forcecast>& labels, double mu,
         std::optional<double> eps, std::optional<double> r1, std::optional<double> r2, std::optional<double> r3,
         std::optional<int> it, std::optional<double> tol, bool warm, const std::optional<BoolArray>& init) {
        ScalarField u = normalize_intensity(to_field(image));
        const GridShape s = shape_of(labels);
        require_same_shape(u.shape(), s, "labels");
        MaskField out(s), in(s);
        for (Index i = 0; i < s.size(); ++i) {
          const int v = labels.data()[i];
          if (v != 0 && v != 1 && v != 2) throw py::value_error("labels must be 0, 1 or 2");
          out.set(i, v == 1);
          in.set(i, v == 2);
        }
        SegParams sp;
        sp.mu = mu;
        const ModelSpec spec = ModelSpec::segmentation(std::move(u), std::move(out), std::move(in), sp);
        return run(spec, pick_init(spec, init),
                   admm_params(AdmmParams::segmentation_defaults(), eps, r1, r2, r3, it, tol, warm));
      },
      py::arg("image"), py::arg("labels"), py::arg("mu") = 1.0, SOLVER_ARGS);

  m.def(
      "oracle_hull",
      [](const BoolArray& x, std::optional<Index> layers) {
        const MaskField mask = to_mask(x);
        const PointSet ps = mask_points(mask);
        return from_mask(rasterize_hull(layers ? convex_layers_approx(ps, *layers) : exact_hull(ps), mask.shape()));
      },
      py::arg("points"), py::arg("layers") = py::none(), "Rasterized exact hull, or convex-layers hull after peeling.");

  m.def(
      "hull_error",
      [](const BoolArray& candidate, const BoolArray& reference) { return hull_error(to_mask(candidate), to_mask(reference)); },
      py::arg("candidate"), py::arg("reference"), "Hausdorff distance over the equivalent radius of the reference.");

  m.def(
      "convexity_violation",
      [](const F64Array& phi, int samples, std::uint64_t seed) { return convexity_violation(to_field(phi), samples, seed); },
      py::arg("phi"), py::arg("samples") = 20000, py::arg("seed") = 0);

  m.def(
      "psd_project",
      [](const F64Array& a) {
        if (a.ndim() != 2 || a.shape(0) != a.shape(1) || (a.shape(0) != 2 && a.shape(0) != 3)) {
          throw py::value_error("expected a 2x2 or 3x3 matrix");
        }
        const auto n = static_cast<std::size_t>(a.shape(0));
        py::array_t<double> out({a.shape(0), a.shape(1)});
        const auto fill = [&](const auto& p) {
          for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) out.mutable_data()[i * n + j] = p[i][j];
          }
        };
        if (n == 2) {
          fill(psd_project(SymMatrix<2>{{{a.at(0, 0), a.at(0, 1)}, {a.at(0, 1), a.at(1, 1)}}}));
        } else {
          fill(psd_project(SymMatrix<3>{{{a.at(0, 0), a.at(0, 1), a.at(0, 2)},
                                         {a.at(0, 1), a.at(1, 1), a.at(1, 2)},
                                         {a.at(0, 2), a.at(1, 2), a.at(2, 2)}}}));
        }
        return out;
      },
      py::arg("matrix"), "Nearest PSD matrix in the Frobenius norm; reads the upper triangle.");

  m.def(
      "synth",
      [](const std::string& name, const std::vector<Index>& dims, double outliers, std::uint64_t seed, double extent,
         double radius, double gap) {
        return from_mask(synth(name, GridShape(std::span<const Index>(dims)), outliers, seed, SynthParams{extent, radius, gap}));
      },
      py::arg("shape"), py::arg("dims"), py::arg("outliers") = 0.0, py::arg("seed") = 0, py::arg("extent") = 0.0,
      py::arg("radius") = 0.0, py::arg("gap") = 12.0);
}
