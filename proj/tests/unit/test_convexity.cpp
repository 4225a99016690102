#include <Eigen/Eigenvalues>
#include <cmath>

#include "convexsdf/convexity.hpp"
#include "convexsdf/diff_ops.hpp"
#include "convexsdf/transforms.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace convexsdf;
using namespace testing;

namespace {

template <std::size_t D>
SymMatrix<D> random_sym(std::mt19937_64& rng, double scale = 1.0) {
  SymMatrix<D> a{};
  for (std::size_t i = 0; i < D; ++i) {
    for (std::size_t j = i; j < D; ++j) a[i][j] = a[j][i] = uniform(rng, -scale, scale);
  }
  return a;
}

template <std::size_t D>
Eigen::Matrix<double, D, D> to_eigen(const SymMatrix<D>& a) {
  Eigen::Matrix<double, D, D> m;
  for (std::size_t i = 0; i < D; ++i) {
    for (std::size_t j = 0; j < D; ++j) m(static_cast<int>(i), static_cast<int>(j)) = a[i][j];
  }
  return m;
}

template <std::size_t D>
double min_eig(const SymMatrix<D>& a) {
  return Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, D, D>>(to_eigen(a), Eigen::EigenvaluesOnly).eigenvalues()(0);
}

template <std::size_t D>
double frob(const SymMatrix<D>& a, const SymMatrix<D>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < D; ++i) {
    for (std::size_t j = 0; j < D; ++j) s += (a[i][j] - b[i][j]) * (a[i][j] - b[i][j]);
  }
  return std::sqrt(s);
}

template <std::size_t D>
void check_eigen_against_oracle(std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  for (int t = 0; t < count; ++t) {
    const SymMatrix<D> a = random_sym<D>(rng, t % 3 == 0 ? 100.0 : 1.0);
    const SymEigen<D> e = symmetric_eigen(a);
    const auto want = Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, D, D>>(to_eigen(a)).eigenvalues();
    const double scale = std::max(1.0, to_eigen(a).norm());
    for (std::size_t k = 0; k < D; ++k) {
      REQUIRE(std::abs(e.values[k] - want(static_cast<int>(k))) <= 1e-12 * scale);
      // A v = lambda v, |v| = 1
      double n2 = 0.0;
      for (std::size_t i = 0; i < D; ++i) {
        double av = 0.0;
        for (std::size_t j = 0; j < D; ++j) av += a[i][j] * e.vectors[k][j];
        REQUIRE(std::abs(av - e.values[k] * e.vectors[k][i]) <= 1e-10 * scale);
        n2 += e.vectors[k][i] * e.vectors[k][i];
      }
      REQUIRE(std::abs(n2 - 1.0) <= 1e-12);
    }
  }
}

}  // namespace

TEST_SUITE("convexity") {
  TEST_CASE("closed-form eigenvalues agree with a library eigensolver") {
    check_eigen_against_oracle<2>(1, 2000);
    check_eigen_against_oracle<3>(2, 2000);
  }

  TEST_CASE("3x3 eigen handles repeated eigenvalues") {
    const SymMatrix<3> id{{{2, 0, 0}, {0, 2, 0}, {0, 0, 2}}};
    const auto e = symmetric_eigen(id);
    for (double v : e.values) CHECK(v == doctest::Approx(2.0));
    // rank-one plus identity: eigenvalues 1, 1, 4
    const SymMatrix<3> r{{{2, 1, 1}, {1, 2, 1}, {1, 1, 2}}};
    const auto f = symmetric_eigen(r);
    CHECK(f.values[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.values[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.values[2] == doctest::Approx(4.0).epsilon(1e-12));
    const auto j = symmetric_eigen_jacobi(r);
    CHECK(j.values[2] == doctest::Approx(4.0).epsilon(1e-12));
  }

  TEST_CASE("psd_project examples") {
    const SymMatrix<2> id{{{1, 0}, {0, 1}}};
    CHECK(psd_project(id) == id);
    const auto d = psd_project(SymMatrix<2>{{{2, 0}, {0, -3}}});
    CHECK(d[0][0] == doctest::Approx(2.0));
    CHECK(std::abs(d[1][1]) < 1e-15);
    CHECK(std::abs(d[0][1]) < 1e-15);
    const auto s = psd_project(SymMatrix<2>{{{0, 1}, {1, 0}}});
    for (const auto& row : s) {
      for (double v : row) CHECK(v == doctest::Approx(0.5).epsilon(1e-14));
    }
    CHECK_THROWS_AS(psd_project(SymMatrix<3>{{{NAN, 0, 0}, {0, 1, 0}, {0, 0, 1}}}), std::invalid_argument);
  }

  TEST_CASE("psd_project output is PSD, idempotent and Frobenius-nearest") {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 300; ++t) {
      const auto a = random_sym<3>(rng);
      const auto p = psd_project(a);
      CHECK(min_eig<3>(p) >= -1e-12);
      CHECK(frob<3>(psd_project(p), p) <= 1e-12);
      // Nearest PSD: the residual is the negative part, orthogonal to the output.
      for (int k = 0; k < 100; ++k) {
        SymMatrix<3> b = random_sym<3>(rng);
        SymMatrix<3> c{};
        for (std::size_t i = 0; i < 3; ++i) {
          for (std::size_t j = 0; j < 3; ++j) {
            for (std::size_t l = 0; l < 3; ++l) c[i][j] += b[i][l] * b[j][l];
          }
        }
        CHECK(frob<3>(a, p) <= frob<3>(a, c) + 1e-12);
      }
    }
    for (int t = 0; t < 300; ++t) {
      auto a = random_sym<2>(rng);
      a[0][0] += 2.5;
      a[1][1] += 2.5;
      REQUIRE(min_eig<2>(a) >= 0.0);
      CHECK(frob<2>(psd_project(a), a) <= 1e-10 * std::max(1.0, to_eigen(a).norm()));
    }
  }

  TEST_CASE("band mask thresholds |phi|") {
    const GridShape s{12, 6};
    for (bool v : vals(band_mask(ScalarField(s, 5.0), BandSpec{10.0}))) CHECK(v);
    for (bool v : vals(band_mask(ScalarField(s, 5.0), BandSpec{1.0}))) CHECK(!v);
    ScalarField plane(s);
    for_each_point(s, [&](Index i, Index a, Index, Index) { plane[i] = static_cast<double>(a) - 5.0; });
    const MaskField b = band_mask(plane, BandSpec{3.0});
    CHECK(b.count() == 7 * 6);
    for_each_point(s, [&](Index i, Index a, Index, Index) { CHECK(b[i] == (a >= 2 && a <= 8)); });
  }

  TEST_CASE("project_hessian_field applies the projection only in the band") {
    const GridShape s{6, 5, 4};
    const auto m = random_field<SymMatField>(s, 3);
    const MaskField band = random_mask(s, 4);
    const SymMatField out = project_hessian_field(m, band);
    for (Index k = 0; k < s.size(); ++k) {
      SymMatrix<3> a{};
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m.entry(i, j)[static_cast<std::size_t>(k)];
      }
      const SymMatrix<3> want = band[k] ? psd_project(a) : a;
      for (int i = 0; i < 3; ++i) {
        for (int j = i; j < 3; ++j) {
          CHECK(out.entry(i, j)[static_cast<std::size_t>(k)] == want[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
        }
      }
      if (band[k]) CHECK(min_eigenvalue_at(out, k) >= -1e-12);
    }
    CHECK(project_hessian_field(m, MaskField(s)) == m);
  }

  TEST_CASE("interpolation reproduces multilinear functions") {
    const GridShape s{7, 6, 5};
    ScalarField f(s);
    for_each_point(s, [&](Index i, Index a, Index b, Index c) { f[i] = 1.0 + 2.0 * a - b + 0.5 * c + 0.25 * a * b * c; });
    const double pt[3] = {2.25, 3.5, 1.75};
    CHECK(interpolate(f, pt) == doctest::Approx(1.0 + 4.5 - 3.5 + 0.875 + 0.25 * 2.25 * 3.5 * 1.75));
  }

  TEST_CASE("convexity violation of convex and non-convex functions") {
    const GridShape s{64, 64};
    ScalarField cone(s);
    for_each_point(s, [&](Index i, Index a, Index b, Index) { cone[i] = std::hypot(a - 31.5, b - 30.2); });
    CHECK(convexity_violation(cone, 20000, 1) <= 0.5);
    ScalarField plane(s, 0.0);
    CHECK(convexity_violation(plane, 1000, 2) == 0.0);
    ScalarField concave(s);
    for_each_point(s, [&](Index i, Index a, Index, Index) { concave[i] = -0.01 * (a - 32.0) * (a - 32.0); });
    CHECK(convexity_violation(concave, 5000, 3) > 1.0);
    CHECK(convexity_violation(cone, 20000, 1) == convexity_violation(cone, 20000, 1));
    CHECK_THROWS_AS(convexity_violation(cone, 0, 1), std::invalid_argument);
  }

  TEST_CASE("signed distance of a plus-sign is detectably non-convex") {
    const GridShape s{64, 64};
    MaskField plus(s);
    for_each_point(s, [&](Index i, Index a, Index b, Index) {
      const double x = a - 31.5, y = b - 31.5;
      plus.set(i, (std::abs(x) <= 22 && std::abs(y) <= 6) || (std::abs(y) <= 22 && std::abs(x) <= 6));
    });
    const ScalarField phi = signed_distance_transform(plus);
    // Brute-force defect at the re-entrant corner: the midpoint of two arm tips.
    const double tip1[2] = {31.5 + 20.0, 31.5 + 5.0};
    const double tip2[2] = {31.5 + 5.0, 31.5 + 20.0};
    const double mid[2] = {31.5 + 12.5, 31.5 + 12.5};
    const double defect = interpolate(phi, mid) - 0.5 * interpolate(phi, tip1) - 0.5 * interpolate(phi, tip2);
    CHECK(defect > 1.0);
    CHECK(convexity_violation(phi, 20000, 5) > 1.0);
  }
}
