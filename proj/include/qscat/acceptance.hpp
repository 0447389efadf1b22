#pragma once

// Acceptance gate: twelve quantitative checks covering the Jost solver, the
// resolvent formulas, the spectral scan, the generalized eigenfunctions, the
// wave operator and the conjugated propagator.  Every tolerance is pinned
// here; each criterion reports one pass/fail line with the measured numbers.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "qscat/eigenfun.hpp"
#include "qscat/evolve.hpp"
#include "qscat/grid.hpp"
#include "qscat/jost.hpp"
#include "qscat/krein.hpp"
#include "qscat/linalg.hpp"
#include "qscat/potential.hpp"

namespace qscat {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace acceptance {

inline std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Transcendental bound states of the square well of depth v0 on [0, L]:
// energies -kappa^2 with sin(qL)(q^2 - kappa^2) = 2 kappa q cos(qL),
// q = sqrt(v0 - kappa^2).  Bisection on a sign-change sweep.
inline std::vector<double> well_levels(double L, double v0) {
  auto f = [&](double kap) {
    double q = std::sqrt(v0 - kap * kap);
    return std::sin(q * L) * (q * q - kap * kap) - 2 * kap * q * std::cos(q * L);
  };
  std::vector<double> levels;
  const int n = 20000;
  double lo = 1e-9, hi = std::sqrt(v0) - 1e-9;
  double prev = f(lo);
  for (int i = 1; i <= n; ++i) {
    double x = lo + (hi - lo) * i / n;
    double cur = f(x);
    if (prev * cur < 0) {
      double xa = lo + (hi - lo) * (i - 1) / n, xb = x;
      for (int it = 0; it < 200; ++it) {
        double xm = 0.5 * (xa + xb);
        if (f(xa) * f(xm) <= 0) xb = xm; else xa = xm;
      }
      levels.push_back(-0.25 * (xa + xb) * (xa + xb));
    }
    prev = cur;
  }
  return levels;
}

inline CVec gaussian_packet(const SpatialGrid& g, double x0, double wdt, double k0) {
  CVec u(g.size());
  for (int i = 0; i < g.size(); ++i) {
    double x = g.x[i];
    u[i] = std::exp(-(x - x0) * (x - x0) / (2 * wdt * wdt)) * std::exp(Complex(0, k0 * x));
  }
  return u;
}

inline double pde_sup_residual(const SpatialGrid& g, const Potential& V,
                               const CVec& u, Complex z) {
  CVec upp = second_derivative(g, u);
  double r = 0;
  for (int s = 0; s < 3; ++s)
    for (int i = g.seg_begin(s) + 2; i < g.seg_end(s) - 2; ++i)
      r = std::max(r, std::abs(-upp[i] + V.v[i] * u[i] - z * u[i]));
  return r;
}

// 1. Free Jost function w = -2 i zeta across the closed upper half-plane.
inline CriterionResult c1_free_jost() {
  CriterionResult r{1, "free-jost-function"};
  auto t0 = std::chrono::steady_clock::now();
  SpatialGrid g = make_grid(-4, 0, 1, 4, {161, 101, 161});
  Potential V = make_zero_potential(g);
  double worst = 0;
  int count = 0;
  for (double rad : {0.2, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0})
    for (double phi : {0.0, pi / 4, pi / 2, 3 * pi / 4, pi}) {
      Complex zeta = rad * std::exp(Complex(0, phi));
      SpectralData d = build_spectral_data(g, V, zeta);
      Complex wref = -2.0 * Complex(0, 1) * zeta;
      worst = std::max(worst, std::abs(d.w - wref) / std::abs(wref));
      ++count;
    }
  double dt = seconds_since(t0);
  r.pass = worst < 1e-10 && dt < 1.0 && count == 50;
  r.detail = fmt("rel err %.3e (tol 1e-10) over 50 zeta, %.2f s (limit 1 s)", worst, dt);
  return r;
}

// 2. Picard solver against the RK4 oracle for the square barrier.
inline CriterionResult c2_picard_vs_ode() {
  CriterionResult r{2, "picard-vs-ode-oracle"};
  SpatialGrid g = make_grid(-4, 0, 1, 4, {161, 101, 161});
  Potential V = make_barrier(g, 4.0);
  double worst = 0;
  for (Complex zeta : {Complex(0.5, 0), Complex(1, 0), Complex(2, 0), Complex(4, 0),
                       Complex(0, 1), Complex(1, 1)})
    for (int side : {+1, -1}) {
      JostSolution p = picard_jost(g, V, zeta, side);
      JostSolution o = ode_jost_oracle(g, V, zeta, side);
      worst = std::max(worst, (p.chi - o.chi).cwiseAbs().maxCoeff());
    }
  r.pass = worst < 1e-6;
  r.detail = fmt("sup disagreement %.3e (tol 1e-6)", worst);
  return r;
}

// 3. |w(k)|^2 - |w0(k)|^2 = 4 k^2 on the real axis.
inline CriterionResult c3_wronskian_identity() {
  CriterionResult r{3, "wronskian-identity"};
  SpatialGrid g = make_grid(-4, 0, 1, 4, {161, 101, 161});
  Potential V = make_barrier(g, 4.0);
  double worst = 0;
  for (int j = 0; j < 20; ++j) {
    double k = 0.3 + 0.25 * j;
    SpectralData d = build_spectral_data(g, V, Complex(k, 0));
    JostSolution plus_neg = picard_jost(g, V, Complex(-k, 0), +1);
    Complex w0 = jost_wronskian_w0(g, plus_neg, d.minus);
    worst = std::max(worst,
                     std::abs(std::norm(d.w) - std::norm(w0) - 4 * k * k) / (4 * k * k));
  }
  r.pass = worst < 1e-8;
  r.detail = fmt("rel err %.3e (tol 1e-8) over 20 real k", worst);
  return r;
}

// 4. Jump normalization of the Green kernels at both interface points.
inline CriterionResult c4_green_jumps() {
  CriterionResult r{4, "green-kernel-jumps"};
  SpatialGrid g = make_grid(-4, 0, 1, 4, {161, 101, 161});
  Potential V = make_barrier(g, 4.0);
  double worst = 0;
  for (Complex z : {Complex(-1, 0), Complex(-2.5, 0), Complex(0.5, 1.0),
                    Complex(-0.7, 0.3), Complex(2.2, 1.5)}) {
    SpectralData d = build_spectral_data(g, V, sqrt_upper(z));
    for (int y = 0; y < 2; ++y) {
      int ip = y == 0 ? g.ib_plus() : g.ia_plus();
      int im = y == 0 ? g.ib_minus() : g.ia_minus();
      Complex pv = d.plus.chi[ip], pd = d.plus.chi_prime[ip];
      Complex mv = d.minus.chi[im], md = d.minus.chi_prime[im];
      Complex pv2 = d.plus.chi[im], pd2 = d.plus.chi_prime[im];
      Complex mv2 = d.minus.chi[ip], md2 = d.minus.chi_prime[ip];
      worst = std::max(worst, std::abs((pv * mv2 - mv * pv2) / d.w));            // G continuous
      worst = std::max(worst, std::abs((pd * mv2 - md * pv2) / d.w + 1.0));      // d1 G jump -1
      worst = std::max(worst, std::abs((pv * md2 - mv * pd2) / d.w - 1.0));      // H jump +1
      worst = std::max(worst, std::abs((pd * md2 - md * pd2) / d.w));            // d1 H continuous
    }
  }
  r.pass = worst < 1e-6;
  r.detail = fmt("jump residual %.3e (tol 1e-6) at 5 z, y in {a, b}", worst);
  return r;
}

// 5. Resolvent application residual with grid-refinement contraction.
inline CriterionResult c5_resolvent_residual() {
  CriterionResult r{5, "resolvent-residual"};
  double res[2] = {0, 0};
  for (int lev = 0; lev < 2; ++lev) {
    int m = 1 << lev;
    SpatialGrid g = make_grid(-6, 0, 1, 6, {240 * m + 1, 100 * m + 1, 240 * m + 1});
    Potential V = make_barrier(g, 4.0);
    SpectralData d = build_spectral_data(g, V, sqrt_upper(Complex(-1, 0)));
    CVec f(g.size());
    for (int i = 0; i < g.size(); ++i) f[i] = std::exp(-g.x[i] * g.x[i]);
    CVec u = apply_resolvent_free(d, f);
    CVec upp = second_derivative(g, u);
    for (int s = 0; s < 3; ++s)
      for (int i = g.seg_begin(s) + 2; i < g.seg_end(s) - 2; ++i)
        res[lev] = std::max(res[lev],
                            std::abs(-upp[i] + V.v[i] * u[i] + u[i] - f[i]));
  }
  r.pass = res[0] < 1e-3 && res[1] <= res[0] / 4;
  r.detail = fmt("sup residual %.3e (tol 1e-3), refined %.3e (contraction %.1fx, need >= 4x)",
                 res[0], res[1], res[0] / res[1]);
  return r;
}

// 6. det M(z, 0, 0) = 16 and the diagonal main term of M^{-1}.
inline CriterionResult c6_krein_structure() {
  CriterionResult r{6, "krein-matrix-structure"};
  SpatialGrid g = make_grid(-4, 0, 1, 4, {161, 101, 161});
  Potential V = make_barrier(g, 4.0);
  double worst_det = 0;
  for (Complex z : {Complex(-1, 0), Complex(-2, 0), Complex(-0.5, 0.5), Complex(1, 1),
                    Complex(2, 0.7), Complex(-1.5, 0.4), Complex(0.3, 2), Complex(-3, 1),
                    Complex(4, 1.5), Complex(-0.2, 0.9)}) {
    SpectralData d = build_spectral_data(g, V, sqrt_upper(z));
    worst_det = std::max(worst_det, std::abs(spectral_determinant(d, 0, 0) - 16.0) / 16.0);
  }
  SpectralData d = build_spectral_data(g, V, sqrt_upper(Complex(-1.5, 0.4)));
  bool ladder_ok = true;
  double prev = 1e300, worst_ratio = 0;
  for (double t : {1e-1, 1e-2, 1e-3}) {
    Mat4 M = m_matrix(d, t, 0.6 * t);
    double err = (M.inverse() + 0.5 * Mat4::Identity()).norm();
    ladder_ok = ladder_ok && err < prev && err <= 1.0 * t;
    worst_ratio = std::max(worst_ratio, err / t);
    prev = err;
  }
  r.pass = worst_det < 1e-10 && ladder_ok;
  r.detail = fmt("det rel err %.3e (tol 1e-10); ||M^-1 + I/2|| <= %.2f |theta| (bound 1.0)",
                 worst_det, worst_ratio);
  return r;
}

// 7. Spectrum: no spurious eigenvalues for positive V, square-well level
// reproduced against the transcendental oracle and tracked in theta.
inline CriterionResult c7_spectrum() {
  CriterionResult r{7, "spectrum-scan-and-tracking"};
  SpatialGrid g = make_grid(-3, 0, 1, 3, {81, 61, 81});
  Potential Vb = make_barrier(g, 4.0);
  auto cand = spectral_scan(g, Vb, 0.05, -0.03, Complex(-5, -1), Complex(-0.1, 1), 24, 7, 2);
  Potential Vw = make_well(g, 12.0);
  std::vector<double> oracle = well_levels(1.0, 12.0);
  double worst_e = 0;
  for (double e : oracle) {
    Complex tracked = eigenvalue_track(g, Vw, 0, 0, Complex(e + 1e-3, 0));
    worst_e = std::max(worst_e, std::abs(tracked - e));
  }
  Complex e0 = eigenvalue_track(g, Vw, 0, 0, Complex(oracle.back(), 0));
  std::vector<double> ts = {0.1, 0.05, 0.025}, shifts;
  for (double t : ts)
    shifts.push_back(std::abs(eigenvalue_track(g, Vw, t, 0, e0) - e0));
  double slope = loglog_slope(ts, shifts);
  r.pass = cand.empty() && worst_e < 1e-8 && slope >= 0.9;
  r.detail = fmt("scan candidates %d (need 0); well level err %.3e (tol 1e-8, %d levels); "
                 "shift slope %.3f (need >= 0.9)",
                 static_cast<int>(cand.size()), worst_e, static_cast<int>(oracle.size()), slope);
  return r;
}

// 8. Generalized eigenfunctions over a (k, theta) grid; flux conservation.
inline CriterionResult c8_eigenfunctions() {
  CriterionResult r{8, "generalized-eigenfunctions"};
  SpatialGrid g = make_grid(-4, 0, 1, 4, {1281, 801, 1281});
  Potential V = make_bumps(g, {0.35, 0.65}, {0.05, 0.04}, {2.5, 1.5});
  const std::vector<std::pair<Complex, Complex>> thetas = {
      {Complex(0.03, 0), Complex(0, 0)},
      {Complex(0, 0), Complex(0, 0.02)},
      {Complex(0.05, 0), Complex(-0.02, 0)},
      {Complex(0.01, 0.01), Complex(0.03, 0)},
      {Complex(-0.04, 0), Complex(0.02, -0.01)}};
  double worst_if = 0, worst_pde = 0, worst_flux = 0;
  int points = 0;
  for (double ka : {0.6, 1.3, 2.2, 3.8}) {
    SpectralData d = build_spectral_data(g, V, Complex(ka, 0));
    GeneralizedEigenfunction ef = psi_minus_free(d, ka);
    worst_flux = std::max(worst_flux, std::abs(std::norm(ef.R) + std::norm(ef.T) - 1.0));
    for (double sgn : {1.0, -1.0})
      for (const auto& [t1, t2] : thetas) {
        double k = sgn * ka;
        GeneralizedEigenfunction e = psi_minus_theta(d, k, t1, t2);
        double sc = e.psi.cwiseAbs().maxCoeff();
        worst_if = std::max(worst_if,
                            interface_residual(g, e.psi, e.psi_prime, t1, t2) / sc);
        worst_pde = std::max(worst_pde, pde_sup_residual(g, V, e.psi, k * k) / sc);
        ++points;
      }
  }
  r.pass = worst_if < 1e-6 && worst_pde < 1e-4 && worst_flux < 1e-8 && points >= 40;
  r.detail = fmt("interface %.3e (tol 1e-6), pde %.3e (tol 1e-4) over %d points; "
                 "|R|^2+|T|^2-1 = %.3e (tol 1e-8)",
                 worst_if, worst_pde, points, worst_flux);
  return r;
}

// 9. Wave operator: linear theta-ladder and intertwining with refinement.
inline CriterionResult c9_wave_operator() {
  CriterionResult r{9, "wave-operator"};
  std::vector<double> ss = {1e-1, 1e-2, 1e-3, 1e-4}, devs;
  double res[2] = {0, 0};
  for (int lev = 0; lev < 2; ++lev) {
    int m = 1 << lev;
    SpatialGrid g = make_grid(-10, 0, 1, 10, {400 * m + 1, 100 * m + 1, 400 * m + 1});
    Potential V = make_bumps(g, {0.35, 0.65}, {0.05, 0.04}, {2.5, 1.5});
    SpectralGrid sg = make_spectral_grid(8.0, 256 * m, 0.05);
    KTable t = build_ktable(g, V, sg);
    if (lev == 0)
      for (double s : ss)
        devs.push_back(build_wave_operator(t, 0.6 * s, 0.4 * s, false).deviation);
    WaveOperator w = build_wave_operator(t, Complex(0.03, 0), Complex(0.01, 0.005), false);
    CVec f(sg.size());
    for (int j = 0; j < sg.size(); ++j) {
      double k = sg.k[j], kap = std::abs(k);
      double taper = (kap < 0.5 || kap > 7.0) ? 0.0 : 1.0;
      if (kap >= 0.5 && kap < 1.0) { double s = std::sin(pi * (kap - 0.5)); taper = s * s; }
      if (kap > 6.5 && kap <= 7.0) { double s = std::sin(pi * (7.0 - kap)); taper = s * s; }
      f[j] = taper * 1.2 * std::exp(-1.44 * (k - 2.0) * (k - 2.0) / 2)
             * std::exp(Complex(0, (k - 2.0) * 5.0));
    }
    res[lev] = intertwining_residual(w, V, f);
  }
  double slope = loglog_slope(ss, devs);
  r.pass = slope >= 0.9 && slope <= 1.1 && res[0] < 1e-2 && res[1] <= res[0] / 4;
  r.detail = fmt("||W-I|| slope %.3f (need 1.0 +- 0.1); intertwining %.3e (tol 1e-2), "
                 "refined %.3e (contraction %.1fx, need >= 4x)",
                 slope, res[0], res[1], res[0] / res[1]);
  return r;
}

// 10. Uniform-in-time propagator remainder with the default 1024-point window.
inline CriterionResult c10_uniform_remainder() {
  CriterionResult r{10, "uniform-in-time-remainder"};
  auto t0 = std::chrono::steady_clock::now();
  // The domain must be large enough that the outgoing defect corrections
  // stay on the grid over the whole time sweep; on short domains they leave
  // and the late-time remainder is artificially depressed.  All operator
  // applications run matrix-free (Neumann inverse), which keeps the large
  // grid affordable.
  SpatialGrid g = make_grid(-40, 0, 1, 40, {1601, 101, 1601});
  Potential V = make_bumps(g, {0.35, 0.65}, {0.05, 0.04}, {2.5, 1.5});
  KTable t = build_ktable(g, V, make_spectral_grid(8.0, 1024, 0.05));
  WaveOperator w = build_wave_operator(t, 0.01, 0.01, false);
  double r_lo = 1e300, r_hi = 0;
  for (double tt : {0.0, 1.0, 5.0, 20.0, 100.0}) {
    double rem = remainder_norm(w, tt, 1e-6);
    r_lo = std::min(r_lo, rem);
    r_hi = std::max(r_hi, rem);
  }
  std::vector<double> ss = {1e-1, 1e-2, 1e-3, 1e-4}, rems;
  for (double s : ss) {
    WaveOperator ws = build_wave_operator(t, s / 2, s / 2, false);
    rems.push_back(remainder_norm(ws, 10.0, 1e-7));
  }
  double slope = loglog_slope(ss, rems);
  double dt = seconds_since(t0);
  r.pass = r_hi <= 10 * 0.02 && r_hi < 3 * r_lo &&
           slope >= 0.9 && slope <= 1.1 && dt < 300.0;
  r.detail = fmt("max %.3e <= 10 (|t1|+|t2|) = 0.2; max/min %.2f (need < 3); "
                 "theta-ladder slope %.3f (need 1.0 +- 0.1); %.0f s (limit 300 s)",
                 r_hi, r_hi / r_lo, slope, dt);
  return r;
}

// 11. Wave-operator limit: deviation decays along t -> -infinity.
inline CriterionResult c11_wave_limit() {
  CriterionResult r{11, "wave-operator-limit"};
  SpatialGrid g = make_grid(-10, 0, 1, 10, {401, 101, 401});
  Potential V = make_bumps(g, {0.35, 0.65}, {0.05, 0.04}, {2.5, 1.5});
  KTable t = build_ktable(g, V, make_spectral_grid(6.0, 2048, 0.05));
  WaveOperator w = build_wave_operator(t, 0.02, 0.0, false);
  CVec u = gaussian_packet(g, -5, 1.2, 2.0);
  double d2 = wave_limit_deviation(w, u, -2.0);
  double d8 = wave_limit_deviation(w, u, -8.0);
  double d32 = wave_limit_deviation(w, u, -32.0);
  r.pass = d2 > d8 && d8 > d32;
  r.detail = fmt("deviation %.3e > %.3e > %.3e at t = -2, -8, -32 (strictly decreasing)",
                 d2, d8, d32);
  return r;
}

// 12. Adjoint pairing for compliant parameter pairs and on the
// selfadjointness locus.
inline CriterionResult c12_adjoint_relation() {
  CriterionResult r{12, "adjoint-relation"};
  SpatialGrid g = make_grid(-9, 0, 1, 9, {361, 101, 361});
  Potential V = make_barrier(g, 4.0);
  double k1 = 1.2, k2 = 0.8;
  SpectralData d1 = build_spectral_data(g, V, Complex(k1, 0));
  SpectralData d2 = build_spectral_data(g, V, Complex(k2, 0));
  auto windowed = [&](const CVec& u) {
    CVec wv = u;
    for (int i = 0; i < g.size(); ++i) {
      double ax = std::abs(g.x[i]);
      double f = 1.0;
      if (ax >= 8.5) f = 0.0;
      else if (ax > 5.5) { double c = std::cos(0.5 * pi * (ax - 5.5) / 3.0); f = c * c; }
      wv[i] *= f;
    }
    return wv;
  };
  Complex t1(0.03, 0), t2(0, 0.01);
  Complex t1p = -std::conj(t2), t2p = -std::conj(t1);
  CVec phi = windowed(psi_minus_theta(d1, k1, t1, t2).psi);
  CVec psi = windowed(psi_minus_theta(d2, k2, t1p, t2p).psi);
  double generic = adjoint_pairing_check(g, V, phi, psi, t1, t2);
  Complex s1 = 0.02 * std::exp(Complex(0, 0.7));
  Complex s2 = 0.02 * std::exp(Complex(0, pi - 0.7));
  CVec phis = windowed(psi_minus_theta(d1, k1, s1, s2).psi);
  CVec psis = windowed(psi_minus_theta(d2, k2, s1, s2).psi);
  double locus = adjoint_pairing_check(g, V, phis, psis, s1, s2);
  r.pass = generic < 1e-4 && locus < 1e-4;
  r.detail = fmt("pairing residual %.3e (compliant pair), %.3e (selfadjoint locus), tol 1e-4",
                 generic, locus);
  return r;
}

inline std::vector<CriterionResult> run_all(std::ostream& os) {
  std::vector<CriterionResult (*)()> criteria = {
      c1_free_jost, c2_picard_vs_ode, c3_wronskian_identity, c4_green_jumps,
      c5_resolvent_residual, c6_krein_structure, c7_spectrum, c8_eigenfunctions,
      c9_wave_operator, c10_uniform_remainder, c11_wave_limit, c12_adjoint_relation};
  std::vector<CriterionResult> out;
  for (auto* fn : criteria) {
    CriterionResult cr;
    try {
      cr = fn();
    } catch (const std::exception& e) {
      cr.id = static_cast<int>(out.size()) + 1;
      cr.name = "exception";
      cr.pass = false;
      cr.detail = e.what();
    }
    os << (cr.pass ? "[PASS] " : "[FAIL] ") << cr.id << " " << cr.name
       << ": " << cr.detail << "\n";
    os.flush();
    out.push_back(cr);
  }
  return out;
}

}  // namespace acceptance
}  // namespace qscat
