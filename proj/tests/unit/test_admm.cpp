#include <cmath>

#include "convexsdf/admm.hpp"
#include "convexsdf/convexity.hpp"
#include "convexsdf/diff_ops.hpp"
#include "convexsdf/geometry.hpp"
#include "convexsdf/transforms.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace convexsdf;
using namespace testing;

namespace {

AdmmParams small_params() {
  AdmmParams p = AdmmParams::exact_hull_defaults();
  p.epsilon = 1.5;
  return p;
}

SolverState random_state(const GridShape& s, std::uint64_t seed, const AdmmParams& params) {
  SolverState st;
  st.phi = random_field<ScalarField>(s, seed, -3.0, 3.0);
  st.p = random_field<VectorField>(s, seed + 1);
  st.gamma1 = random_field<VectorField>(s, seed + 2);
  st.q = random_field<SymMatField>(s, seed + 3);
  st.gamma2 = random_field<SymMatField>(s, seed + 4);
  st.z = random_field<ScalarField>(s, seed + 5);
  st.gamma3 = random_field<ScalarField>(s, seed + 6);
  st.band = band_mask(st.phi, BandSpec{params.epsilon});
  return st;
}

ModelSpec ring_hull(const GridShape& s, double r, int points) {
  MaskField x(s);
  const double c = 0.5 * static_cast<double>(s.dim(0) - 1);
  for (int k = 0; k < points; ++k) {
    const double t = 2.0 * 3.141592653589793 * k / points;
    const Index a = static_cast<Index>(std::lround(c + r * std::cos(t)));
    const Index b = static_cast<Index>(std::lround(c + r * std::sin(t)));
    x.set(flat(s, a, b), true);
  }
  return ModelSpec::exact_hull(x);
}

}  // namespace

TEST_SUITE("admm_solver") {
  TEST_CASE("parameter defaults and validation") {
    const AdmmParams e = AdmmParams::exact_hull_defaults();
    CHECK(e.rho2 == 2000.0);
    CHECK(e.rho3 == 10.0);
    CHECK(e.epsilon == 10.0);
    CHECK(e.rho1 == doctest::Approx(2.0 * std::sqrt(20000.0)));
    const AdmmParams a = AdmmParams::approx_hull_defaults();
    CHECK(a.rho3 == 400.0);
    CHECK(a.epsilon == 5.0);
    CHECK(e.max_iters == 500);
    CHECK(e.tol == 1e-4);
    AdmmParams bad = e;
    bad.rho1 = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = e;
    bad.band_refresh = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  }

  TEST_CASE("initialize cold and warm") {
    const GridShape s{32, 32};
    const ModelSpec spec = ModelSpec::exact_hull(disc_mask(s, 15.5, 15.5, 6.0));
    const MaskField init = default_init(spec);
    AdmmParams p = small_params();
    p.warm_start = false;
    const SolverState cold = initialize(spec, init, p);
    CHECK(cold.phi == signed_distance_transform(init));
    CHECK(max_abs(cold.p.values()) == 0.0);
    CHECK(max_abs(cold.q.values()) == 0.0);
    CHECK(max_abs(cold.z.values()) == 0.0);
    CHECK(max_abs(cold.gamma1.values()) == 0.0);
    CHECK(cold.band == band_mask(cold.phi, BandSpec{p.epsilon}));
    p.warm_start = true;
    const SolverState warm = initialize(spec, init, p);
    for (Index i = 0; i < s.size(); ++i) {
      const double n = std::hypot(warm.p.component(0)[static_cast<std::size_t>(i)],
                                  warm.p.component(1)[static_cast<std::size_t>(i)]);
      CHECK(n == doctest::Approx(1.0));
      if (spec.inside_labels[i]) CHECK(warm.z[i] <= 0.0);
      if (warm.band[i]) CHECK(min_eigenvalue_at(warm.q, i) >= -1e-12);
    }
    CHECK(max_abs(warm.gamma2.values()) == 0.0);
  }

  TEST_CASE("default inits") {
    const GridShape s{20, 20};
    MaskField x(s);
    x.set(flat(s, 10, 10), true);
    const ModelSpec spec = ModelSpec::exact_hull(x);
    CHECK(default_init(spec).count() == 5);
    CHECK(smoothed_init(disc_mask(s, 9.5, 9.5, 5.0), 1.0).count() > 50);
    CHECK(smoothed_init(x, 1.5).count() == 0);
  }

  TEST_CASE("p update normalizes gamma1 / rho1 + grad phi") {
    const GridShape s{9, 7};
    const AdmmParams params = small_params();
    SolverState st = random_state(s, 10, params);
    const VectorField p = p_update(st, params);
    const VectorField g = gradient(st.phi);
    for (Index i = 0; i < s.size(); ++i) {
      const auto k = static_cast<std::size_t>(i);
      const double v0 = g.component(0)[k] + st.gamma1.component(0)[k] / params.rho1;
      const double v1 = g.component(1)[k] + st.gamma1.component(1)[k] / params.rho1;
      const double n = std::hypot(v0, v1);
      CHECK(p.component(0)[k] == doctest::Approx(v0 / n));
      CHECK(p.component(1)[k] == doctest::Approx(v1 / n));
    }
    // A zero argument keeps a previous unit vector.
    st.phi = ScalarField(s, 0.0);
    st.gamma1 = VectorField(s);
    st.p = VectorField(s);
    for (double& v : st.p.component(1)) v = 1.0;
    const VectorField kept = p_update(st, params);
    for (double v : kept.component(1)) CHECK(v == 1.0);
  }

  TEST_CASE("Q update projects only inside the band") {
    const GridShape s{8, 6, 5};
    const AdmmParams params = small_params();
    const SolverState st = random_state(s, 20, params);
    const SymMatField q = q_update(st, params);
    SymMatField m = hessian(st.phi);
    for (std::size_t k = 0; k < m.values().size(); ++k) m.values()[k] += st.gamma2.values()[k] / params.rho2;
    const SymMatField want = project_hessian_field(m, st.band);
    CHECK(q == want);
    CHECK(st.band.count() > 0);
    CHECK(st.band.count() < s.size());
  }

  TEST_CASE("z update clamps on labels only") {
    const GridShape s{10, 10};
    const ModelSpec spec = ModelSpec::exact_hull(random_mask(s, 3, 0.3));
    const AdmmParams params = small_params();
    const SolverState st = random_state(s, 30, params);
    const ScalarField z = z_update(st, spec, params);
    for (Index i = 0; i < s.size(); ++i) {
      const double v = st.gamma3[i] / params.rho3 + st.phi[i];
      CHECK(z[i] == doctest::Approx(spec.inside_labels[i] ? std::min(v, 0.0) : v));
    }
  }

  TEST_CASE("multiplier update adds rho times the residual") {
    const GridShape s{6, 6};
    const AdmmParams params = small_params();
    SolverState st = random_state(s, 40, params);
    st.phi = ScalarField(s, 0.0);
    st.phi[flat(s, 2, 3)] = 1.0;
    const Multipliers m = multiplier_update(st, params);
    // grad phi at (2,3) along axis 0 is -1; at (1,3) it is +1.
    const auto k = static_cast<std::size_t>(flat(s, 2, 3));
    CHECK(m.gamma1.component(0)[k] == doctest::Approx(st.gamma1.component(0)[k] + params.rho1 * (-1.0 - st.p.component(0)[k])));
    const auto k2 = static_cast<std::size_t>(flat(s, 1, 3));
    CHECK(m.gamma1.component(0)[k2] == doctest::Approx(st.gamma1.component(0)[k2] + params.rho1 * (1.0 - st.p.component(0)[k2])));
    // Diagonal Hessian entry at the spike is -2.
    CHECK(m.gamma2.entry(0, 0)[k] == doctest::Approx(st.gamma2.entry(0, 0)[k] + params.rho2 * (-2.0 - st.q.entry(0, 0)[k])));
    CHECK(m.gamma3[flat(s, 2, 3)] == doctest::Approx(st.gamma3[flat(s, 2, 3)] + params.rho3 * (1.0 - st.z[flat(s, 2, 3)])));
  }

  TEST_CASE("phi update solves the normal equation") {
    const GridShape s{16, 12};
    const AdmmParams params = small_params();
    const ModelSpec spec = ModelSpec::approx_hull(random_mask(s, 5, 0.2));
    const SolverState st = random_state(s, 50, params);
    const ScalarField phi = phi_update(st, spec, params);
    const ScalarField rhs = phi_rhs(st, spec, params);
    const ScalarField lap = laplacian(phi);
    const ScalarField lap2 = laplacian(lap);
    for (Index i = 0; i < s.size(); ++i) {
      const double lhs = params.rho2 * lap2[i] - params.rho1 * lap[i] + params.rho3 * phi[i];
      CHECK(lhs == doctest::Approx(rhs[i]).epsilon(1e-9).scale(max_abs(rhs.values())));
    }
  }

  TEST_CASE("zero state of the exact hull gives phi = 1 / rho3") {
    const GridShape s{8, 8};
    MaskField x(s);
    x.set(3, true);
    const ModelSpec spec = ModelSpec::exact_hull(x);
    const AdmmParams params = small_params();
    SolverState st;
    st.phi = ScalarField(s);
    st.p = VectorField(s);
    st.gamma1 = VectorField(s);
    st.q = SymMatField(s);
    st.gamma2 = SymMatField(s);
    st.z = ScalarField(s);
    st.gamma3 = ScalarField(s);
    st.band = MaskField(s);
    for (double v : vals(phi_update(st, spec, params))) CHECK(v == doctest::Approx(1.0 / params.rho3));
  }

  TEST_CASE("exact hull of points on a circle") {
    const GridShape s{64, 64};
    const ModelSpec spec = ring_hull(s, 15.0, 32);
    const MaskField ref = rasterize_hull(exact_hull(mask_points(spec.input_set)), s);
    const SolveResult r = solve(spec, default_init(spec), AdmmParams::exact_hull_defaults());
    // At this scale the discrete eikonal constraint biases the boundary by about a cell.
    CHECK(hausdorff_distance(r.mask, ref) <= 2.0);
    // The sign constraint on X holds up to the splitting residual.
    for (Index i = 0; i < s.size(); ++i) {
      if (spec.input_set[i]) CHECK(r.phi[i] <= 0.1);
    }
    CHECK(r.history.size() == static_cast<std::size_t>(r.iterations));
  }

  TEST_CASE("gradient residual falls tenfold over a disc hull run") {
    const GridShape s{64, 64};
    const ModelSpec spec = ModelSpec::exact_hull(disc_mask(s, 31.5, 31.5, 15.0));
    const SolveResult r = solve(spec, default_init(spec), AdmmParams::exact_hull_defaults());
    MESSAGE("max |grad phi - p|: first " << r.history.front().res_p << ", last " << r.history.back().res_p);
    CHECK(r.history.back().res_p * 10.0 <= r.history.front().res_p);
  }

  TEST_CASE("exact hull fills a plus sign") {
    const GridShape s{64, 64};
    MaskField plus(s);
    for_each_point(s, [&](Index i, Index a, Index b, Index) {
      const double x = a - 31.5, y = b - 31.5;
      plus.set(i, (std::abs(x) <= 14 && std::abs(y) <= 4) || (std::abs(y) <= 14 && std::abs(x) <= 4));
    });
    const ModelSpec spec = ModelSpec::exact_hull(plus);
    const MaskField ref = rasterize_hull(exact_hull(mask_points(plus)), s);
    const SolveResult r = solve(spec, default_init(spec), AdmmParams::exact_hull_defaults());
    CHECK(hausdorff_distance(r.mask, ref) <= 2.0);
    CHECK(connected_components(r.mask) == 1);
  }

  TEST_CASE("iteration callback and stopping rule") {
    const GridShape s{32, 32};
    const ModelSpec spec = ModelSpec::exact_hull(disc_mask(s, 15.5, 15.5, 8.0));
    AdmmParams p = AdmmParams::exact_hull_defaults();
    p.max_iters = 7;
    int calls = 0;
    const SolveResult r = solve(spec, default_init(spec), p, [&](const IterationRecord& rec) {
      ++calls;
      CHECK(rec.iter == calls);
    });
    CHECK(calls == r.iterations);
    CHECK(r.iterations <= 7);
    if (!r.converged) CHECK(r.iterations == 7);
    CHECK(r.mask == sublevel_mask(r.phi));
  }

  TEST_CASE("divergence guard") {
    const GridShape s{16, 16};
    HullParams hp;
    hp.lambda = 0.0;
    const ModelSpec spec = ModelSpec::approx_hull(MaskField(s), hp);
    AdmmParams p = AdmmParams::approx_hull_defaults();
    p.rho3 = 1e-9;
    p.rho1 = 1e-9;
    p.rho2 = 1e-9;
    CHECK_THROWS_AS(solve(spec, disc_mask(s, 7.5, 7.5, 4.0), p), std::runtime_error);
  }
}
