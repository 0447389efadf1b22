#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qscat/krein.hpp"
#include "oracles.hpp"

using namespace qscat;

static SpatialGrid grid() { return make_grid(-4, 0, 1, 4, {161, 101, 161}); }

// smooth window vanishing to third order at the outer ends of [-4, 4]
static double window(double x) {
  double t = (16.0 - x * x) / 16.0;
  return t * t * t;
}
static double window_d(double x) {
  double t = (16.0 - x * x) / 16.0;
  return 3.0 * t * t * (-2.0 * x / 16.0);
}

TEST_CASE("boundary maps recover jumps and averages of piecewise cubics") {
  SpatialGrid g = grid();
  CVec u(g.size());
  auto p = [](double x, int s) {
    Complex c = (s == 0) ? Complex(1, 2) : (s == 1) ? Complex(-0.5, 1.3) : Complex(2, -0.7);
    return c * (x * x * x - 2.0 * x) + Complex(s, 0.5);
  };
  auto pd = [](double x, int s) {
    Complex c = (s == 0) ? Complex(1, 2) : (s == 1) ? Complex(-0.5, 1.3) : Complex(2, -0.7);
    return c * (3.0 * x * x - 2.0);
  };
  for (int i = 0; i < g.size(); ++i) u[i] = p(g.x[i], g.segment_of(i));
  BoundaryData bd = boundary_maps(g, u);
  Vec4 g0, g1;
  g0 << pd(g.b, 1) - pd(g.b, 2), p(g.b, 2) - p(g.b, 1),
        pd(g.a, 0) - pd(g.a, 1), p(g.a, 1) - p(g.a, 0);
  g1 << 0.5 * (p(g.b, 2) + p(g.b, 1)), 0.5 * (pd(g.b, 2) + pd(g.b, 1)),
        0.5 * (p(g.a, 0) + p(g.a, 1)), 0.5 * (pd(g.a, 0) + pd(g.a, 1));
  CHECK((bd.gamma0 - g0).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((bd.gamma1 - g1).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("second green identity holds for piecewise smooth functions") {
  SpatialGrid g = grid();
  Potential V = make_barrier(g, 4.0);
  CVec phi(g.size()), psi(g.size());
  for (int i = 0; i < g.size(); ++i) {
    double x = g.x[i];
    int s = g.segment_of(i);
    Complex cphi = (s == 0) ? Complex(1, 0.4) : (s == 1) ? Complex(0.3, -1) : Complex(-0.8, 0.2);
    Complex cpsi = (s == 0) ? Complex(0.5, -0.6) : (s == 1) ? Complex(1.1, 0.9) : Complex(0.2, 1);
    phi[i] = cphi * window(x) * std::exp(Complex(0, 1) * x);
    psi[i] = cpsi * window(x) * (x * x - 1.0);
  }
  auto apply_q = [&](const CVec& u) {
    CVec r = -second_derivative(g, u);
    for (int i = 0; i < g.size(); ++i) r[i] += V.v[i] * u[i];
    return r;
  };
  Complex lhs = inner_product(g, psi, apply_q(phi)) - inner_product(g, apply_q(psi), phi);
  BoundaryData bphi = boundary_maps(g, phi), bpsi = boundary_maps(g, psi);
  Complex rhs = bpsi.gamma0.dot(bphi.gamma1) - bpsi.gamma1.dot(bphi.gamma0);
  CHECK(std::abs(lhs - rhs) < 2e-5);
  CHECK(std::abs(rhs) > 0.05);   // the pairing is genuinely nonzero here
}

TEST_CASE("free resolvent kernels match closed forms") {
  SpatialGrid g = grid();
  Potential V = make_zero_potential(g);
  const Complex I(0, 1);

  // z = 1 on the upper rim: G = (i/2) e^{i|x-y|}
  SpectralData d1 = build_spectral_data(g, V, Complex(1, 0));
  for (double x : {-3.2, -0.55, 0.4, 2.7}) {
    for (double y : {-2.1, 0.15, 1.9}) {
      Complex expect = 0.5 * I * std::exp(I * std::abs(x - y));
      CHECK(std::abs(green_G(d1, x, y) - expect) < 1e-10);
    }
  }

  // z = -1: G = e^{-|x-y|}/2 and H = sign(x-y) e^{-|x-y|}/2
  SpectralData dm = build_spectral_data(g, V, Complex(0, 1));
  for (double x : {-2.6, -0.35, 0.6, 3.1}) {
    for (double y : {-1.4, 0.5, 2.2}) {
      CHECK(std::abs(green_G(dm, x, y) - oracles::free_resolvent_kernel_zm1(x, y)) < 1e-10);
      double sgn = (x >= y) ? 1.0 : -1.0;
      CHECK(std::abs(green_H(dm, x, y) - sgn * oracles::free_resolvent_kernel_zm1(x, y)) < 1e-10);
    }
  }
}

TEST_CASE("defect columns satisfy the jump normalization gamma0 = e_i") {
  SpatialGrid g = grid();
  Potential V = make_barrier(g, 4.0);
  SpectralData d = build_spectral_data(g, V, Complex(1.3, 0.4));
  DefectBasis db = defect_basis(d);
  for (int c = 0; c < 4; ++c) {
    CVec col = db.val.col(c);
    BoundaryData bd = boundary_maps(g, col);
    Vec4 e = Vec4::Zero();
    e[c] = 1;
    CHECK((bd.gamma0 - e).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("weyl matrix: free values, symmetry and the trace definition") {
  SpatialGrid g = grid();
  Potential V0 = make_zero_potential(g);
  SpectralData dfree = build_spectral_data(g, V0, Complex(0, 1));
  Mat4 qf = weyl_matrix(dfree);
  // closed free values at z = -1 with a = 0, b = 1
  CHECK(std::abs(qf(0, 0) - 0.5) < 1e-10);
  CHECK(std::abs(qf(0, 1)) < 1e-10);
  CHECK(std::abs(qf(2, 3)) < 1e-10);
  CHECK(std::abs(qf(1, 1) + 0.5) < 1e-10);
  CHECK(std::abs(qf(2, 2) - 0.5) < 1e-10);
  CHECK(std::abs(qf(0, 2) - 0.5 * std::exp(-1.0)) < 1e-10);

  Potential V = make_barrier(g, 4.0);
  SpectralData d = build_spectral_data(g, V, Complex(0.9, 0.7));
  Mat4 q = weyl_matrix(d);
  CHECK((q - q.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  // q(:, i) = Gamma1 applied to the i-th defect column
  DefectBasis db = defect_basis(d);
  for (int c = 0; c < 4; ++c) {
    CVec col = db.val.col(c);
    BoundaryData bd = boundary_maps(g, col);
    CHECK((bd.gamma1 - q.col(c)).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("interface matrices encode the scaled matching conditions") {
  Complex t1(0.3, -0.1), t2(-0.2, 0.25);
  InterfaceMatrices im = interface_matrices(t1, t2);
  // build traces satisfying the scaled conditions exactly
  Complex ubm(1.1, -0.4), dbm(0.7, 0.9), uap(-0.6, 1.3), dap(0.2, -1.1);
  Complex ubp = std::exp(t1 / 2.0) * ubm;
  Complex dbp = std::exp(t2 / 2.0) * dbm;
  Complex uam = std::exp(t1 / 2.0) * uap;
  Complex dam = std::exp(t2 / 2.0) * dap;
  Vec4 g0, g1;
  g0 << dbm - dbp, ubp - ubm, dam - dap, uap - uam;
  g1 << 0.5 * (ubp + ubm), 0.5 * (dbp + dbm), 0.5 * (uap + uam), 0.5 * (dap + dam);
  CHECK((im.A * g0 - im.B * g1).cwiseAbs().maxCoeff() < 1e-12);

  // theta = 0 is the transparent case: A = 2 I, B = 0, det M = 16
  InterfaceMatrices im0 = interface_matrices(0, 0);
  CHECK((im0.A - 2.0 * Mat4::Identity()).cwiseAbs().maxCoeff() == 0);
  CHECK(im0.B.cwiseAbs().maxCoeff() == 0);
  SpatialGrid g = grid();
  Potential V = make_barrier(g, 4.0);
  SpectralData d = build_spectral_data(g, V, Complex(1.2, 0.3));
  CHECK(std::abs(spectral_determinant(d, 0, 0) - 16.0) < 1e-10);

  // leading behaviour of M^{-1} for small theta: M^{-1} -> -A^{-1} = -I/2
  double dev1 = (m_matrix(d, 0.1, 0.1).inverse() + 0.5 * Mat4::Identity()).cwiseAbs().maxCoeff();
  double dev2 = (m_matrix(d, 0.05, 0.05).inverse() + 0.5 * Mat4::Identity()).cwiseAbs().maxCoeff();
  CHECK(dev1 < 0.2);
  CHECK(dev2 < 0.6 * dev1);
}

TEST_CASE("perturbed resolvent reduces to the free kernel at theta = 0") {
  SpatialGrid g = grid();
  Potential V = make_barrier(g, 4.0);
  SpectralData d = build_spectral_data(g, V, sqrt_upper(Complex(-1.3, 0.6)));
  for (double x : {-2.5, 0.3, 1.7}) {
    for (double y : {-1.1, 0.6, 2.9}) {
      CHECK(std::abs(perturbed_resolvent_kernel(d, 0, 0, x, y) - green_G(d, x, y)) < 1e-12);
    }
  }
  CMat K = perturbed_resolvent_matrix(d, 0, 0);
  const CVec& cp = d.plus.chi;
  const CVec& cm = d.minus.chi;
  double dev = 0;
  for (int i = 0; i < g.size(); i += 17)
    for (int j = 0; j < g.size(); j += 13) {
      Complex g0 = (i >= j ? cp[i] * cm[j] : cm[i] * cp[j]) / d.w;
      dev = std::max(dev, std::abs(K(i, j) - g0));
    }
  CHECK(dev < 1e-12);
}

TEST_CASE("perturbed resolvent columns solve the equation and the interface conditions") {
  SpatialGrid g = grid();
  Potential V = make_barrier(g, 4.0);
  Complex z(-1.2, 0.8);
  Complex t1 = 0.25, t2 = -0.15;
  SpectralData d = build_spectral_data(g, V, sqrt_upper(z));
  CMat K = perturbed_resolvent_matrix(d, t1, t2);

  // kernel symmetry inherited from the formula
  double sym = 0;
  for (int i = 0; i < g.size(); i += 29)
    for (int j = 0; j < g.size(); j += 31)
      sym = std::max(sym, std::abs(K(i, j) - K(j, i)));
  INFO("kernel transpose deviation " << sym);

  int j = g.seg_begin(0) + g.n[0] / 2;   // source well inside the left segment
  CVec u = K.col(j);

  // scaled interface conditions
  Complex ubm = u[g.ib_minus()], ubp = u[g.ib_plus()];
  Complex uam = u[g.ia_minus()], uap = u[g.ia_plus()];
  Complex dbm = fd_backward(u, g.ib_minus(), g.h[1]);
  Complex dbp = fd_forward(u, g.ib_plus(), g.h[2]);
  Complex dam = fd_backward(u, g.ia_minus(), g.h[0]);
  Complex dap = fd_forward(u, g.ia_plus(), g.h[1]);
  double scale = u.cwiseAbs().maxCoeff();
  CHECK(std::abs(std::exp(-t1 / 2.0) * ubp - ubm) < 1e-6 * scale);
  CHECK(std::abs(std::exp(-t2 / 2.0) * dbp - dbm) < 1e-5 * scale);
  CHECK(std::abs(std::exp(-t1 / 2.0) * uam - uap) < 1e-6 * scale);
  CHECK(std::abs(std::exp(-t2 / 2.0) * dam - dap) < 1e-5 * scale);

  // homogeneous equation away from the source point
  CVec upp = second_derivative(g, u);
  double res = 0;
  for (int i = g.seg_begin(1) + 4; i < g.seg_end(1) - 4; ++i)
    res = std::max(res, std::abs(-upp[i] + V.v[i] * u[i] - z * u[i]));
  CHECK(res < 1e-5 * scale);
}

TEST_CASE("resolvent application solves the inhomogeneous equation") {
  for (int lev = 0; lev < 2; ++lev) {
    SpatialGrid g = (lev == 0) ? grid() : make_grid(-4, 0, 1, 4, {321, 201, 321});
    Potential V = make_barrier(g, 4.0);
    Complex z(-1.0, 0.5);
    SpectralData d = build_spectral_data(g, V, sqrt_upper(z));
    CVec f(g.size());
    for (int i = 0; i < g.size(); ++i)
      f[i] = std::exp(-0.5 * std::pow((g.x[i] + 2.0) / 0.3, 2)) * Complex(1, 0.5);
    CVec u = apply_resolvent_free(d, f);
    CVec upp = second_derivative(g, u);
    double res = 0;
    for (int s = 0; s < 3; ++s)
      for (int i = g.seg_begin(s) + 4; i < g.seg_end(s) - 4; ++i)
        res = std::max(res, std::abs(-upp[i] + V.v[i] * u[i] - z * u[i] - f[i]));
    double scale = std::max(1e-30, u.cwiseAbs().maxCoeff());
    INFO("level " << lev << " residual " << res / scale);
    CHECK(res < ((lev == 0) ? 1e-4 : 1e-5) * scale);
  }
}

TEST_CASE("spectral scan flags the well bound states and nothing for a barrier") {
  SpatialGrid g = make_grid(-3, 0, 1, 3, {81, 61, 81});
  std::vector<double> truth = oracles::well_bound_states(0, 1, 12.0);
  REQUIRE(truth.size() >= 2);

  Potential W = make_well(g, 12.0);
  Complex zlo(-11.5, -0.35), zhi(-0.2, 0.35);
  auto cands = spectral_scan(g, W, 0, 0, zlo, zhi, 24, 7);
  double cell = std::hypot((zhi.real() - zlo.real()) / 24, (zhi.imag() - zlo.imag()) / 7);
  for (double e : truth) {
    bool found = false;
    for (const auto& c : cands)
      if (std::abs(c.z - Complex(e, 0)) < cell && c.source == "jost") found = true;
    CHECK(found);
  }

  Potential B = make_barrier(g, 4.0);
  CHECK(spectral_scan(g, B, 0, 0, zlo, zhi, 24, 7).empty());

  // with the interfaces switched on the candidates come from the determinant
  // (theta1 = theta2 leaves the spectrum invariant, so move off the diagonal)
  auto cth = spectral_scan(g, W, 0.8, 0, zlo, zhi, 24, 7);
  bool det_found = false;
  for (const auto& c : cth)
    if (c.source == "determinant") det_found = true;
  CHECK(det_found);
}

TEST_CASE("eigenvalue tracking matches the square-well oracle") {
  SpatialGrid g = grid();
  std::vector<double> truth = oracles::well_bound_states(0, 1, 4.0);
  REQUIRE(truth.size() == 1);
  double e0 = truth[0];
  Potential V = make_well(g, 4.0);

  CHECK(std::abs(eigen_mismatch(g, V, 0, 0, Complex(e0, 0))) < 1e-7);
  CHECK(std::abs(eigen_mismatch(g, V, 0, 0, Complex(1.3 * e0, 0))) > 1e-3);

  Complex z = eigenvalue_track(g, V, 0, 0, Complex(1.05 * e0, 0));
  CHECK(std::abs(z - Complex(e0, 0)) < 1e-8);

  // theta1 = theta2 rescales the middle solution uniformly, so the
  // eigenvalue is exactly invariant along that diagonal
  Complex zdiag = eigenvalue_track(g, V, 0.3, 0.3, Complex(e0, 0));
  CHECK(std::abs(zdiag - Complex(e0, 0)) < 1e-10);

  // off the diagonal the eigenvalue moves, continuously in theta
  Complex zs[3];
  double ts[3] = {0.2, 0.1, 0.05};
  for (int m = 0; m < 3; ++m) {
    zs[m] = eigenvalue_track(g, V, ts[m], 0, Complex(e0, 0));
    CHECK(std::abs(eigen_mismatch(g, V, ts[m], 0, zs[m])) < 1e-9);
  }
  double s1 = std::abs(zs[0] - Complex(e0, 0));
  double s2 = std::abs(zs[1] - Complex(e0, 0));
  double s3 = std::abs(zs[2] - Complex(e0, 0));
  CHECK(s1 > 1e-6);
  CHECK(s2 < 0.8 * s1);
  CHECK(s3 < 0.8 * s2);
}
