#pragma once

// Boundary triple for the interface points, Green kernels of the reference
// operator, Weyl matrix, interface coupling matrices and the resolvent
// difference formula for the non-selfadjoint family Q_{theta1,theta2}.
//
// Conventions.  The sign of the kernel H is normalized so that, at fixed y,
// x -> H(x, y) has value jump +1 across x = y with continuous derivative,
// while x -> G(x, y) is continuous with derivative jump -1.  With this
// normalization d1 G(y+-, y) = H(y-+, y) and the defect family
//   g(e1) = G(., b),  g(e2) = H(., b),  g(e3) = G(., a),  g(e4) = H(., a)
// satisfies Gamma0 g(e_i) = e_i exactly.

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qscat/grid.hpp"
#include "qscat/jost.hpp"
#include "qscat/potential.hpp"

namespace qscat {

using Mat4 = Eigen::Matrix4cd;
using Vec4 = Eigen::Vector4cd;

struct BoundaryData {
  Vec4 gamma0, gamma1;
};

// Interface traces by one-sided 4th-order stencils within each segment.
// Gamma0 collects the jumps, Gamma1 the averaged values.
inline BoundaryData boundary_maps(const SpatialGrid& g, const CVec& u) {
  if (u.size() != g.size()) throw std::invalid_argument("boundary_maps: size mismatch");
  Complex ubm = u[g.ib_minus()], ubp = u[g.ib_plus()];
  Complex uam = u[g.ia_minus()], uap = u[g.ia_plus()];
  Complex dbm = fd_backward(u, g.ib_minus(), g.h[1]);
  Complex dbp = fd_forward(u, g.ib_plus(), g.h[2]);
  Complex dam = fd_backward(u, g.ia_minus(), g.h[0]);
  Complex dap = fd_forward(u, g.ia_plus(), g.h[1]);
  BoundaryData bd;
  bd.gamma0 << dbm - dbp, ubp - ubm, dam - dap, uap - uam;
  bd.gamma1 << 0.5 * (ubp + ubm), 0.5 * (dbp + dbm), 0.5 * (uap + uam), 0.5 * (dap + dam);
  return bd;
}

// Branch of sqrt(z) with nonnegative imaginary part (resolvent variable).
inline Complex sqrt_upper(Complex z) {
  Complex s = std::sqrt(z);
  return s.imag() < 0 ? -s : s;
}

// Free-side kernels from the Jost bundle.  Branch selection by position:
// x >= y uses chi+(x) chi-(y) / w, x < y the transpose.
inline Complex green_G(const SpectralData& d, double x, double y) {
  Complex cpx, cpd, cmx, cmd;
  if (x >= y) {
    eval_jost(*d.grid, d.plus, x, cpx, cpd);
    eval_jost(*d.grid, d.minus, y, cmx, cmd);
    return cpx * cmx / d.w;
  }
  eval_jost(*d.grid, d.minus, x, cmx, cmd);
  eval_jost(*d.grid, d.plus, y, cpx, cpd);
  return cmx * cpx / d.w;
}

inline Complex green_H(const SpectralData& d, double x, double y) {
  Complex cpx, cpd, cmy, cmd;
  if (x >= y) {
    eval_jost(*d.grid, d.plus, x, cpx, cpd);
    eval_jost(*d.grid, d.minus, y, cmy, cmd);
    return cpx * cmd / d.w;
  }
  eval_jost(*d.grid, d.minus, x, cpx, cpd);
  eval_jost(*d.grid, d.plus, y, cmy, cmd);
  return cpx * cmd / d.w;
}

// Defect family at one spectral point: values and derivatives of the four
// columns g(e_i) on the grid.  The duplicated interface nodes realize the
// one-sided limits, so the jump normalization is exact by construction.
struct DefectBasis {
  Complex zeta;
  CMat val;   // size() x 4
  CMat der;
};

inline DefectBasis defect_basis(const SpectralData& d) {
  const SpatialGrid& g = *d.grid;
  DefectBasis db;
  db.zeta = d.zeta;
  int N = g.size();
  db.val.resize(N, 4);
  db.der.resize(N, 4);
  const CVec& cp = d.plus.chi;
  const CVec& cpd = d.plus.chi_prime;
  const CVec& cm = d.minus.chi;
  const CVec& cmd = d.minus.chi_prime;
  int ib = g.ib_plus(), ia = g.ia_plus();
  Complex cb_p = cp[ib], cb_pd = cpd[ib], cb_m = cm[g.ib_minus()], cb_md = cmd[g.ib_minus()];
  Complex ca_p = cp[ia], ca_pd = cpd[ia], ca_m = cm[g.ia_minus()], ca_md = cmd[g.ia_minus()];
  for (int i = 0; i < N; ++i) {
    bool right_of_b = i >= ib;
    bool right_of_a = i >= ia;
    // columns about y = b
    if (right_of_b) {
      db.val(i, 0) = cp[i] * cb_m / d.w;  db.der(i, 0) = cpd[i] * cb_m / d.w;
      db.val(i, 1) = cp[i] * cb_md / d.w; db.der(i, 1) = cpd[i] * cb_md / d.w;
    } else {
      db.val(i, 0) = cm[i] * cb_p / d.w;  db.der(i, 0) = cmd[i] * cb_p / d.w;
      db.val(i, 1) = cm[i] * cb_pd / d.w; db.der(i, 1) = cmd[i] * cb_pd / d.w;
    }
    // columns about y = a
    if (right_of_a) {
      db.val(i, 2) = cp[i] * ca_m / d.w;  db.der(i, 2) = cpd[i] * ca_m / d.w;
      db.val(i, 3) = cp[i] * ca_md / d.w; db.der(i, 3) = cpd[i] * ca_md / d.w;
    } else {
      db.val(i, 2) = cm[i] * ca_p / d.w;  db.der(i, 2) = cmd[i] * ca_p / d.w;
      db.val(i, 3) = cm[i] * ca_pd / d.w; db.der(i, 3) = cmd[i] * ca_pd / d.w;
    }
  }
  return db;
}

// Weyl matrix q(z) = Gamma1 applied to the defect family, in closed form
// through interface traces of the Jost solutions.  Symmetric.
inline Mat4 weyl_matrix(const SpectralData& d) {
  const SpatialGrid& g = *d.grid;
  int ib = g.ib_plus(), ia = g.ia_plus();
  Complex cbp = d.plus.chi[ib], cbpd = d.plus.chi_prime[ib];
  Complex cbm = d.minus.chi[g.ib_minus()], cbmd = d.minus.chi_prime[g.ib_minus()];
  Complex cap = d.plus.chi[ia], capd = d.plus.chi_prime[ia];
  Complex cam = d.minus.chi[g.ia_minus()], camd = d.minus.chi_prime[g.ia_minus()];
  Complex w = d.w;
  Complex G_bb = cbp * cbm / w, G_ab = cam * cbp / w, G_aa = cap * cam / w;
  Complex Hp_b = cbp * cbmd / w;          // H(b+, b)
  Complex Hm_a = cam * capd / w;          // H(a-, a)
  Complex H_ab = cam * cbpd / w;          // H(a, b)
  Complex H_ba = cbp * camd / w;          // H(b, a)
  Complex dH_bb = cbpd * cbmd / w;
  Complex dH_aa = capd * camd / w;
  Complex dH_ba = cbpd * camd / w;        // = d1 H(a, b)
  Mat4 q;
  q << G_bb,       Hp_b - 0.5, G_ab,       H_ba,
       Hp_b - 0.5, dH_bb,      H_ab,       dH_ba,
       G_ab,       H_ab,       G_aa,       Hm_a + 0.5,
       H_ba,       dH_ba,      Hm_a + 0.5, dH_aa;
  return q;
}

// Interface coupling matrices of the boundary conditions A Gamma0 = B Gamma1.
struct InterfaceMatrices {
  Mat4 A, B;
};

inline InterfaceMatrices interface_matrices(Complex theta1, Complex theta2) {
  auto alpha = [](Complex t) { return 1.0 + std::exp(t / 2.0); };
  auto beta = [](Complex t) { return 1.0 - std::exp(t / 2.0); };
  InterfaceMatrices m;
  m.A = Mat4::Zero();
  m.B = Mat4::Zero();
  m.A(0, 0) = alpha(theta2);
  m.A(1, 1) = alpha(theta1);
  m.A(2, 2) = alpha(-theta2);
  m.A(3, 3) = alpha(-theta1);
  m.B(0, 1) = 2.0 * beta(theta2);
  m.B(1, 0) = -2.0 * beta(theta1);
  m.B(2, 3) = 2.0 * beta(-theta2);
  m.B(3, 2) = -2.0 * beta(-theta1);
  return m;
}

// Krein coefficient matrix M = B q - A and its determinant.
inline Mat4 m_matrix(const SpectralData& d, Complex theta1, Complex theta2) {
  InterfaceMatrices im = interface_matrices(theta1, theta2);
  return im.B * weyl_matrix(d) - im.A;
}

inline Complex spectral_determinant(const SpectralData& d, Complex theta1, Complex theta2) {
  return m_matrix(d, theta1, theta2).determinant();
}

namespace detail {

// Running integral C_j = int_{x_0}^{x_j} f by integrating the local
// degree-4 interpolant one interval at a time.  Fourth order, and --
// unlike per-row composite rules -- the error drifts smoothly with j, so
// finite differences of the result stay clean.
inline CVec cumulative_integral(const CVec& y, double h) {
  int n = static_cast<int>(y.size());
  CVec C(n);
  C[0] = 0;
  if (n < 5) {
    for (int j = 1; j < n; ++j) C[j] = C[j - 1] + 0.5 * h * (y[j - 1] + y[j]);
    return C;
  }
  // weights for integrating the interpolant on nodes {0..4} over [m, m+1]
  Eigen::Matrix<double, 5, 4> panel;
  for (int m = 0; m < 4; ++m) {
    Eigen::Matrix<double, 5, 5> vand;
    Eigen::Matrix<double, 5, 1> rhs;
    for (int p = 0; p < 5; ++p) {
      for (int j = 0; j < 5; ++j) vand(p, j) = std::pow(double(j), p);
      rhs[p] = (std::pow(double(m + 1), p + 1) - std::pow(double(m), p + 1)) / (p + 1);
    }
    panel.col(m) = vand.partialPivLu().solve(rhs);
  }
  for (int j = 1; j < n; ++j) {
    int s0 = std::min(std::max(j - 2, 0), n - 5);
    int m = j - 1 - s0;
    Complex acc = 0;
    for (int t = 0; t < 5; ++t) acc += panel(t, m) * y[s0 + t];
    C[j] = C[j - 1] + h * acc;
  }
  return C;
}

}  // namespace detail

// Resolvent of the reference operator applied to f.  The kernel kink on the
// diagonal is handled with per-segment running integrals of the two kernel
// branches, which keeps the cost linear in the grid size and the quadrature
// error smooth along the diagonal.
inline CVec apply_resolvent_free(const SpectralData& d, const CVec& f) {
  const SpatialGrid& g = *d.grid;
  int N = g.size();
  if (f.size() != N) throw std::invalid_argument("apply_resolvent_free: size mismatch");
  const CVec& cp = d.plus.chi;
  const CVec& cm = d.minus.chi;
  CVec clow[3], chigh[3];
  for (int s = 0; s < 3; ++s) {
    int o = g.seg_begin(s), n = g.n[s];
    CVec ylow(n), yhigh(n);
    for (int j = 0; j < n; ++j) {
      ylow[j] = cm[o + j] * f[o + j];
      yhigh[j] = cp[o + j] * f[o + j];
    }
    clow[s] = detail::cumulative_integral(ylow, g.h[s]);
    chigh[s] = detail::cumulative_integral(yhigh, g.h[s]);
  }
  CVec u = CVec::Zero(N);
  for (int i = 0; i < N; ++i) {
    int si = g.segment_of(i);
    int li = i - g.seg_begin(si);
    Complex below = clow[si][li];
    Complex above = chigh[si][g.n[si] - 1] - chigh[si][li];
    for (int s = 0; s < si; ++s) below += clow[s][g.n[s] - 1];
    for (int s = si + 1; s < 3; ++s) above += chigh[s][g.n[s] - 1];
    u[i] = (cp[i] * below + cm[i] * above) / d.w;
  }
  return u;
}

// Kernel of the perturbed resolvent via the resolvent difference formula.
inline Complex perturbed_resolvent_kernel(const SpectralData& d, Complex theta1, Complex theta2,
                                          double x, double y) {
  InterfaceMatrices im = interface_matrices(theta1, theta2);
  Mat4 M = im.B * weyl_matrix(d) - im.A;
  Mat4 C = M.partialPivLu().solve(im.B);
  DefectBasis db = defect_basis(d);
  const SpatialGrid& g = *d.grid;
  // evaluate the defect columns at arbitrary x, y through the Jost bundle
  auto gval = [&](int p, double t) -> Complex {
    double yy = (p < 2) ? g.b : g.a;
    if (p % 2 == 0) return green_G(d, t, yy);
    return green_H(d, t, yy);
  };
  Complex corr = 0;
  for (int p = 0; p < 4; ++p)
    for (int qq = 0; qq < 4; ++qq)
      corr += C(p, qq) * gval(p, x) * gval(qq, y);
  return green_G(d, x, y) - corr;
}

// Full-grid kernel matrix of the perturbed resolvent (tests, diagnostics).
inline CMat perturbed_resolvent_matrix(const SpectralData& d, Complex theta1, Complex theta2) {
  const SpatialGrid& g = *d.grid;
  int N = g.size();
  InterfaceMatrices im = interface_matrices(theta1, theta2);
  Mat4 M = im.B * weyl_matrix(d) - im.A;
  Mat4 C = M.partialPivLu().solve(im.B);
  DefectBasis db = defect_basis(d);
  CMat G0(N, N);
  const CVec& cp = d.plus.chi;
  const CVec& cm = d.minus.chi;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      G0(i, j) = (i >= j ? cp[i] * cm[j] : cm[i] * cp[j]) / d.w;
  return G0 - db.val * C * db.val.transpose();
}

struct ScanCandidate {
  Complex z;
  std::string source;   // "determinant" or "jost"
};

namespace detail {

// winding number of f around a rectangle via refined edge sampling
template <class F>
inline int winding_number(F&& f, Complex lo, Complex hi, int per_edge = 16) {
  std::vector<Complex> path;
  auto edge = [&](Complex p, Complex q) {
    for (int i = 0; i < per_edge; ++i) path.push_back(p + (q - p) * (double(i) / per_edge));
  };
  Complex c1(hi.real(), lo.imag()), c2 = hi, c3(lo.real(), hi.imag());
  edge(lo, c1); edge(c1, c2); edge(c2, c3); edge(c3, lo);
  path.push_back(lo);
  double total = 0;
  Complex prev = f(path[0]);
  for (size_t i = 1; i < path.size(); ++i) {
    Complex cur = f(path[i]);
    if (std::abs(cur) == 0 || std::abs(prev) == 0) return 0;
    total += std::arg(cur / prev);
    prev = cur;
  }
  return static_cast<int>(std::lround(total / (2 * pi)));
}

// Winding number of every cell of an nx x ny partition at once: f is
// evaluated on the grid refined by `refine` in each direction, and each
// cell's perimeter argument sum is assembled from the shared samples.
template <class F>
inline Eigen::MatrixXi cell_windings(F&& f, Complex z_lo, Complex z_hi,
                                     int nx, int ny, int refine) {
  int mx = nx * refine, my = ny * refine;
  double dx = (z_hi.real() - z_lo.real()) / mx;
  double dy = (z_hi.imag() - z_lo.imag()) / my;
  Eigen::MatrixXcd val(mx + 1, my + 1);
  for (int i = 0; i <= mx; ++i)
    for (int j = 0; j <= my; ++j)
      val(i, j) = f(Complex(z_lo.real() + i * dx, z_lo.imag() + j * dy));
  Eigen::MatrixXi wind = Eigen::MatrixXi::Zero(nx, ny);
  for (int I = 0; I < nx; ++I)
    for (int J = 0; J < ny; ++J) {
      int i0 = I * refine, i1 = (I + 1) * refine;
      int j0 = J * refine, j1 = (J + 1) * refine;
      double total = 0;
      bool degenerate = false;
      auto step = [&](Complex prev, Complex cur) {
        if (std::abs(prev) == 0 || std::abs(cur) == 0) degenerate = true;
        else total += std::arg(cur / prev);
      };
      for (int i = i0; i < i1; ++i) step(val(i, j0), val(i + 1, j0));
      for (int j = j0; j < j1; ++j) step(val(i1, j), val(i1, j + 1));
      for (int i = i1; i > i0; --i) step(val(i, j1), val(i - 1, j1));
      for (int j = j1; j > j0; --j) step(val(i0, j), val(i0, j - 1));
      if (!degenerate) wind(I, J) = static_cast<int>(std::lround(total / (2 * pi)));
    }
  return wind;
}

}  // namespace detail

// Scan a rectangle of the z plane for singular points of the perturbed
// resolvent: zeros of det M (theta-induced spectrum) and zeros of the Jost
// function w (spectrum of the reference operator, which the resolvent
// difference formula leaves in place).  Every cell of the nx x ny partition
// gets an argument-principle winding count assembled from a shared sample
// grid refined by `refine`; cells with nonzero winding become candidates.
inline std::vector<ScanCandidate> spectral_scan(const SpatialGrid& g, const Potential& V,
                                                Complex theta1, Complex theta2,
                                                Complex z_lo, Complex z_hi,
                                                int nx = 32, int ny = 16,
                                                int refine = 3) {
  // The Weyl matrix carries 1/w poles at the spectrum of the reference
  // operator, which would cancel the winding count when an interface
  // eigenvalue sits nearby.  Scanning w^4 det M removes the poles while
  // keeping every singular point of the perturbed resolvent as a zero.
  // Both functions are divided by their value in the free transparent case
  // (w = -2 i zeta, det M = 16) so that the magnitudes stay O(1) across the
  // window and the median dip detector is meaningful.
  auto fdet = [&](Complex z) {
    SpectralData d = build_spectral_data(g, V, sqrt_upper(z));
    Complex w4 = d.w * d.w * d.w * d.w;
    Complex trend = 256.0 * z * z;
    Complex val = w4 * spectral_determinant(d, theta1, theta2);
    return std::abs(trend) > 1e-12 ? val / trend : val;
  };
  auto fw = [&](Complex z) {
    Complex zeta = sqrt_upper(z);
    Complex w = build_spectral_data(g, V, zeta).w;
    Complex trend = -2.0 * Complex(0, 1) * zeta;
    return std::abs(trend) > 1e-12 ? w / trend : w;
  };
  std::vector<ScanCandidate> out;
  double dx = (z_hi.real() - z_lo.real()) / nx;
  double dy = (z_hi.imag() - z_lo.imag()) / ny;
  for (int which = 0; which < 2; ++which) {
    auto f = [&](Complex z) { return which == 0 ? fdet(z) : fw(z); };
    Eigen::MatrixXi wind = detail::cell_windings(f, z_lo, z_hi, nx, ny, refine);
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ny; ++j) {
        if (wind(i, j) == 0) continue;
        Complex c(z_lo.real() + (i + 0.5) * dx, z_lo.imag() + (j + 0.5) * dy);
        out.push_back({c, which == 0 ? "determinant" : "jost"});
      }
  }
  return out;
}

// Matching determinant for the interface eigenvalue problem: decaying
// solutions continued from both sides through the interface scalings, their
// Wronskian evaluated at b-.
inline Complex eigen_mismatch(const SpatialGrid& g, const Potential& V,
                              Complex theta1, Complex theta2, Complex z) {
  const Complex I(0, 1);
  Complex zeta = sqrt_upper(z);
  Complex e1 = std::exp(-theta1 / 2.0), e2 = std::exp(-theta2 / 2.0);
  // from the left: chi- data at a-, scaled into the middle domain
  Complex ula = std::exp(-I * zeta * g.a), dula = -I * zeta * ula;
  Complex ul, dul;
  integrate_interior(g, V, z, -1, e1 * ula, e2 * dula, &ul, &dul);
  // from the right: chi+ data at b+, scaled to b-
  Complex urb = std::exp(I * zeta * g.b), durb = I * zeta * urb;
  Complex ur = e1 * urb, dur = e2 * durb;
  Complex scale = std::max({std::abs(ul), std::abs(dul), 1.0}) *
                  std::max({std::abs(ur), std::abs(dur), 1.0});
  return (ul * dur - dul * ur) / scale;
}

// Secant iteration on the matching determinant starting from z0.
inline Complex eigenvalue_track(const SpatialGrid& g, const Potential& V,
                                Complex theta1, Complex theta2, Complex z0,
                                double tol = 1e-12, int max_iter = 60) {
  Complex za = z0, zb = z0 * (1.0 + 1e-5) + Complex(0, 1e-8);
  Complex fa = eigen_mismatch(g, V, theta1, theta2, za);
  Complex fb = eigen_mismatch(g, V, theta1, theta2, zb);
  for (int it = 0; it < max_iter; ++it) {
    if (std::abs(fb - fa) == 0) break;
    Complex zc = zb - fb * (zb - za) / (fb - fa);
    za = zb; fa = fb;
    zb = zc; fb = eigen_mismatch(g, V, theta1, theta2, zb);
    if (std::abs(zb - za) < tol * (1 + std::abs(zb))) return zb;
  }
  throw std::runtime_error("eigenvalue_track: secant iteration did not converge");
}

}  // namespace qscat
