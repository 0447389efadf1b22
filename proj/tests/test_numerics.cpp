#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qscat/grid.hpp"
#include "qscat/linalg.hpp"

using namespace qscat;

TEST_CASE("segmented grid layout") {
  SpatialGrid g = make_grid(-10, 0, 1, 10, {401, 101, 401});
  CHECK(g.size() == 903);
  CHECK(g.x[0] == doctest::Approx(-10));
  CHECK(g.x[g.size() - 1] == doctest::Approx(10));
  // duplicated interface nodes
  CHECK(g.x[g.ia_minus()] == doctest::Approx(0));
  CHECK(g.x[g.ia_plus()] == doctest::Approx(0));
  CHECK(g.x[g.ib_minus()] == doctest::Approx(1));
  CHECK(g.x[g.ib_plus()] == doctest::Approx(1));
  CHECK(g.h[0] == doctest::Approx(0.025));
  CHECK(g.h[1] == doctest::Approx(0.01));
  CHECK(g.h[2] == doctest::Approx(0.0225));

  CHECK_THROWS_AS(make_grid(0, 0, 1, 10, {5, 5, 5}), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(-1, 0, 1, 10, {4, 5, 5}), std::invalid_argument);
}

TEST_CASE("quadrature is exact on cubics and 4th order on smooth data") {
  SpatialGrid g = make_grid(-2, 0, 1, 3, {41, 21, 41});
  CVec f(g.size());
  for (int i = 0; i < g.size(); ++i) {
    double x = g.x[i];
    f[i] = x * x * x - 2 * x + 1;
  }
  // int_{-2}^{3} (x^3 - 2x + 1) dx = 65/4 - 5 + 5 = 16.25
  CHECK(std::abs(quadrature(g, f) - Complex(16.25, 0)) < 1e-12);

  auto err_for = [](int m) {
    SpatialGrid gg = make_grid(-2, 0, 1, 3, {4 * m + 1, 2 * m + 1, 4 * m + 1});
    CVec ff(gg.size());
    for (int i = 0; i < gg.size(); ++i) ff[i] = std::sin(3 * gg.x[i]);
    double exact = (std::cos(-6.0) - std::cos(9.0)) / 3.0;
    return std::abs(quadrature(gg, ff).real() - exact);
  };
  double e1 = err_for(10), e2 = err_for(20);
  CHECK(e1 / e2 > 12);  // ~16 for 4th order
}

TEST_CASE("quadrature handles jumps at duplicated interface nodes") {
  SpatialGrid g = make_grid(-1, 0, 1, 2, {41, 41, 41});
  CVec f(g.size());
  for (int i = 0; i < g.size(); ++i) f[i] = (i >= g.ia_plus() && i <= g.ib_minus()) ? 1.0 : 0.0;
  CHECK(std::abs(quadrature(g, f) - Complex(1, 0)) < 1e-13);
}

TEST_CASE("derivatives are 4th order and exact on quartics") {
  SpatialGrid g = make_grid(-2, 0, 1, 3, {41, 21, 41});
  CVec f(g.size());
  for (int i = 0; i < g.size(); ++i) {
    double x = g.x[i];
    f[i] = std::pow(x, 4) - x * x;
  }
  CVec d1 = derivative(g, f), d2 = second_derivative(g, f);
  for (int i = 0; i < g.size(); ++i) {
    double x = g.x[i];
    CHECK(std::abs(d1[i] - Complex(4 * x * x * x - 2 * x, 0)) < 1e-9);
    CHECK(std::abs(d2[i] - Complex(12 * x * x - 2, 0)) < 1e-7);
  }
}

TEST_CASE("operator norm: diagonal and constructed SVD") {
  CMat D = CMat::Zero(5, 5);
  for (int i = 0; i < 5; ++i) D(i, i) = Complex(0.1 * (i + 1), 0.05 * i);
  double expect = std::abs(D(4, 4));
  CHECK(op_norm_estimate(D) == doctest::Approx(expect).epsilon(1e-7));

  // A = U S V* with Householder reflectors as unitaries
  int n = 40;
  CVec u1 = norm_seed(n), v1 = norm_seed(n);
  u1 /= u1.norm(); v1 /= v1.norm();
  CMat U = CMat::Identity(n, n) - 2.0 * u1 * u1.adjoint();
  CMat Vh = CMat::Identity(n, n) - 2.0 * v1 * v1.adjoint();
  Eigen::VectorXd sv(n);
  for (int i = 0; i < n; ++i) sv[i] = 1.0 / (1 + i);
  sv[7] = 3.5;  // known top singular value off the ordered pattern
  CMat A = U * sv.cast<Complex>().asDiagonal() * Vh;
  CHECK(op_norm_estimate(A) == doctest::Approx(3.5).epsilon(1e-6));
  CHECK(op_norm_factored(U, CMat(sv.cast<Complex>().asDiagonal() * Vh)) ==
        doctest::Approx(3.5).epsilon(1e-6));
}

TEST_CASE("loglog slope fit") {
  std::vector<double> xs = {1e-1, 1e-2, 1e-3, 1e-4};
  std::vector<double> ys;
  for (double x : xs) ys.push_back(2.7 * std::pow(x, 1.02));
  CHECK(loglog_slope(xs, ys) == doctest::Approx(1.02).epsilon(1e-10));
}

TEST_CASE("spectral grid symmetric and zero-free") {
  SpectralGrid s = make_spectral_grid(8.0, 1024, 0.05);
  CHECK(s.size() == 1024);
  for (int j = 0; j < 512; ++j) {
    CHECK(s.k[j] == doctest::Approx(-s.k[1023 - j]));
    CHECK(std::abs(s.k[j]) >= 0.05);
  }
  // weights integrate k^2 over the window to 4th... midpoint rule: 2nd order, exact on linears per cell
  double acc = 0;
  for (int j = 0; j < s.size(); ++j) acc += s.w[j] * s.k[j] * s.k[j];
  double exact = 2.0 / 3 * (std::pow(8.0, 3) - std::pow(0.05, 3));
  CHECK(acc == doctest::Approx(exact).epsilon(1e-4));
  CHECK_THROWS_AS(make_spectral_grid(8.0, 1023, 0.05), std::invalid_argument);
}
