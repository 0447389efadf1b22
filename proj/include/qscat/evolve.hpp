#pragma once

// Generalized Fourier transform over the spectral window, stationary wave
// operator W = I + V_theta built from the eigenfunction difference, the
// conjugated propagator and the long-time diagnostics.
//
// All operator algebra runs in the weighted representation u~ = Wx^{1/2} u,
// where the discrete L2 norm is the plain Euclidean norm and the transform
// pair is adjoint to itself.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "qscat/eigenfun.hpp"
#include "qscat/grid.hpp"
#include "qscat/jost.hpp"
#include "qscat/krein.hpp"
#include "qscat/linalg.hpp"
#include "qscat/potential.hpp"

namespace qscat {

// Per-k Jost data reduced to what the evolution operators need.
struct KTable {
  const SpatialGrid* grid = nullptr;
  SpectralGrid sg;
  CMat Psi0;                       // N x n_k eigenfunction values
  CMat Psi0_prime;
  std::vector<CMat> basis;         // n_k defect tables, N x 4, at zeta = |k|
  std::vector<Mat4> weyl;          // q(|k|)
  std::vector<Vec4> gamma1;        // Gamma1 of the free eigenfunction
  Vec wx;                          // spatial quadrature weights
};

inline KTable build_ktable(const SpatialGrid& g, const Potential& V, const SpectralGrid& sg) {
  KTable t;
  t.grid = &g;
  t.sg = sg;
  int N = g.size(), nk = sg.size();
  t.Psi0.resize(N, nk);
  t.Psi0_prime.resize(N, nk);
  t.basis.resize(nk);
  t.weyl.resize(nk);
  t.gamma1.resize(nk);
  t.wx = quadrature_weights(g);
  int half = nk / 2;
  for (int j = 0; j < half; ++j) {
    double kp = sg.k[half + j];
    SpectralData dp = build_spectral_data(g, V, Complex(kp, 0));
    // Defect corrections live at zeta = |k| for both signs of k, so the
    // basis and Weyl tables are shared between the +k and -k columns.
    CMat bval = defect_basis(dp).val;
    Mat4 q = weyl_matrix(dp);
    for (int sgn = 0; sgn < 2; ++sgn) {
      int col = sgn == 0 ? half + j : half - 1 - j;
      double k = sg.k[col];
      GeneralizedEigenfunction e = psi_minus_free(dp, k);
      t.Psi0.col(col) = e.psi;
      t.Psi0_prime.col(col) = e.psi_prime;
      t.basis[col] = bval;
      t.weyl[col] = q;
      t.gamma1[col] << e.psi[g.ib_plus()], e.psi_prime[g.ib_plus()],
                       e.psi[g.ia_plus()], e.psi_prime[g.ia_plus()];
    }
  }
  return t;
}

// Forward transform f(k) = (2 pi)^{-1/2} int conj(psi0(x,k)) u(x) dx.
inline CVec forward_transform(const KTable& t, const CVec& u) {
  CVec wu = u.cwiseProduct(t.wx.cast<Complex>());
  return (1.0 / std::sqrt(2 * pi)) * (t.Psi0.adjoint() * wu);
}

// Inverse transform u(x) = (2 pi)^{-1/2} int psi0(x,k) f(k) dk.
inline CVec inverse_transform(const KTable& t, const CVec& f) {
  CVec wf = f.cwiseProduct(t.sg.w.cast<Complex>());
  return (1.0 / std::sqrt(2 * pi)) * (t.Psi0 * wf);
}

// Eigenfunction difference psi_theta - psi0, one column per k node.
inline CMat delta_psi(const KTable& t, Complex theta1, Complex theta2) {
  int N = t.grid->size(), nk = t.sg.size();
  InterfaceMatrices im = interface_matrices(theta1, theta2);
  CMat d(N, nk);
  for (int j = 0; j < nk; ++j) {
    Mat4 M = im.B * t.weyl[j] - im.A;
    Vec4 c = M.partialPivLu().solve(Vec4(im.B * t.gamma1[j]));
    d.col(j) = -(t.basis[j] * c);
  }
  return d;
}

struct WaveOperator {
  const KTable* table = nullptr;
  Complex theta1 = 0, theta2 = 0;
  // V_theta = Afac * Bfac in the weighted representation
  CMat Afac;   // N x n_k
  CMat Bfac;   // n_k x N
  double deviation = 0;            // ||W - I||
  bool dense_ready = false;
  CMat Wdense;
  Eigen::PartialPivLU<CMat> lu;
  double neumann_gap = -1;         // inverse cross-check, -1 when skipped
};

namespace detail {

inline CVec half_weights(const Vec& w) {
  return w.array().sqrt().matrix().cast<Complex>();
}

}  // namespace detail

// Assemble W = I + V_theta.  When dense is true the matrix form and its LU
// factorization are built and, for small theta, the inverse is cross-checked
// against the Neumann series of (I + V)^{-1}.
inline WaveOperator build_wave_operator(const KTable& t, Complex theta1, Complex theta2,
                                        bool dense = true) {
  WaveOperator w;
  w.table = &t;
  w.theta1 = theta1; w.theta2 = theta2;
  int N = t.grid->size(), nk = t.sg.size();
  CVec sx = detail::half_weights(t.wx);
  CVec sk = detail::half_weights(t.sg.w);
  CMat dpsi = delta_psi(t, theta1, theta2);
  w.Afac = (1.0 / (2 * pi)) * sx.asDiagonal() * dpsi * sk.asDiagonal();
  w.Bfac = sk.asDiagonal() * t.Psi0.adjoint() * sx.asDiagonal();
  w.deviation = op_norm_factored(w.Afac, w.Bfac, 1e-8);
  if (dense) {
    w.Wdense = CMat::Identity(N, N) + w.Afac * w.Bfac;
    w.lu.compute(w.Wdense);
    w.dense_ready = true;
    if (std::abs(theta1) + std::abs(theta2) <= 0.02 && w.deviation < 0.5) {
      // Neumann series sum_{n<=8} (I - W)^n applied to a probe vector
      CVec probe = norm_seed(N);
      probe /= probe.norm();
      CVec acc = probe, term = probe;
      for (int n = 1; n <= 8; ++n) {
        term = -(w.Afac * (w.Bfac * term));
        acc += term;
      }
      CVec viaLU = w.lu.solve(probe);
      w.neumann_gap = (acc - viaLU).norm();
      if (w.neumann_gap > 1e-6)
        throw std::runtime_error("build_wave_operator: LU inverse disagrees with Neumann series");
    }
  }
  return w;
}

inline CVec wave_apply_w(const WaveOperator& w, const CVec& ut) {
  return ut + w.Afac * (w.Bfac * ut);
}

inline CVec wave_solve_w(const WaveOperator& w, const CVec& ut) {
  if (w.dense_ready) return w.lu.solve(ut);
  if (w.deviation >= 0.5)
    throw std::runtime_error("wave_solve_w: Neumann fallback needs ||W - I|| < 1/2");
  CVec acc = ut, term = ut;
  for (int n = 1; n <= 40; ++n) {
    term = -(w.Afac * (w.Bfac * term));
    acc += term;
    if (term.norm() < 1e-14 * acc.norm()) break;
  }
  return acc;
}

// Free propagator on the weighted representation: F~* e^{-i t k^2} F~.
inline CVec propagate_free_weighted(const KTable& t, const CVec& ut, double time) {
  if (time == 0) return ut;
  CVec sx = detail::half_weights(t.wx);
  CVec sk = detail::half_weights(t.sg.w);
  CVec f = (1.0 / std::sqrt(2 * pi)) * (sk.asDiagonal() * (t.Psi0.adjoint() * (sx.asDiagonal() * ut)));
  for (int j = 0; j < t.sg.size(); ++j)
    f[j] *= std::exp(Complex(0, -time * t.sg.k[j] * t.sg.k[j]));
  return (1.0 / std::sqrt(2 * pi)) * (sx.asDiagonal() * (t.Psi0 * (sk.asDiagonal() * f)));
}

inline CVec to_weighted(const KTable& t, const CVec& u) {
  return detail::half_weights(t.wx).asDiagonal() * u;
}
inline CVec from_weighted(const KTable& t, const CVec& ut) {
  CVec sx = detail::half_weights(t.wx);
  CVec u(ut.size());
  for (int i = 0; i < ut.size(); ++i) u[i] = ut[i] / sx[i];
  return u;
}

inline CVec propagate_free(const KTable& t, const CVec& u, double time) {
  if (time == 0) return u;
  return from_weighted(t, propagate_free_weighted(t, to_weighted(t, u), time));
}

// Conjugated propagator U_theta(t) = W U_0(t) W^{-1}.
inline CVec propagate_theta(const WaveOperator& w, const CVec& u, double time) {
  const KTable& t = *w.table;
  CVec ut = to_weighted(t, u);
  CVec x = wave_solve_w(w, ut);
  if (time != 0) x = propagate_free_weighted(t, x, time);
  x = wave_apply_w(w, x);
  return from_weighted(t, x);
}

// ||U_theta(t) - U_0(t)|| on the window compression, by power iteration with
// matrix-free applications.
inline double remainder_norm(const WaveOperator& w, double time, double tol = 1e-4) {
  const KTable& t = *w.table;
  int N = t.grid->size();
  CVec sx = detail::half_weights(t.wx);
  CVec sk = detail::half_weights(t.sg.w);
  CVec phase(t.sg.size()), phase_c(t.sg.size());
  for (int j = 0; j < t.sg.size(); ++j) {
    phase[j] = std::exp(Complex(0, -time * t.sg.k[j] * t.sg.k[j]));
    phase_c[j] = std::conj(phase[j]);
  }
  auto u0 = [&](const CVec& v, bool adj) {
    CVec f = (1.0 / std::sqrt(2 * pi)) * (sk.asDiagonal() * (t.Psi0.adjoint() * (sx.asDiagonal() * v)));
    for (int j = 0; j < f.size(); ++j) f[j] *= adj ? phase_c[j] : phase[j];
    return CVec((1.0 / std::sqrt(2 * pi)) * (sx.asDiagonal() * (t.Psi0 * (sk.asDiagonal() * f))));
  };
  auto apply = [&](const CVec& v) {
    CVec x = wave_solve_w(w, v);
    x = u0(x, false);
    x = wave_apply_w(w, x);
    return CVec(x - u0(v, false));
  };
  auto apply_h = [&](const CVec& v) {
    CVec x = v + w.Bfac.adjoint() * (w.Afac.adjoint() * v);
    x = u0(x, true);
    if (w.dense_ready) x = w.lu.adjoint().solve(x);
    else {
      CVec acc = x, term = x;
      for (int n = 1; n <= 40; ++n) {
        term = -(w.Bfac.adjoint() * (w.Afac.adjoint() * term));
        acc += term;
        if (term.norm() < 1e-14 * acc.norm()) break;
      }
      x = acc;
    }
    return CVec(x - u0(v, true));
  };
  return op_norm_estimate_fn(apply, apply_h, N, tol, 300);
}

namespace detail {

// W applied to the state with spectral profile f: the finite-rank term acts
// on f directly instead of re-deriving it through the discrete F F^{-1}
// composition, whose finite-interval leakage would otherwise dominate.
inline CVec wave_apply_profile(const WaveOperator& w, const CVec& f) {
  const KTable& t = *w.table;
  CVec u = inverse_transform(t, f);
  CVec sk = half_weights(t.sg.w);
  CVec corr = std::sqrt(2 * pi) * (w.Afac * CVec(sk.cwiseProduct(f)));
  return u + from_weighted(t, corr);
}

}  // namespace detail

// Relative intertwining residual ||Q_theta W u - W Q_0 u|| / ||u|| for the
// state u = F^{-1} f with a given spectral profile f.  Everything is
// synthesized from f (Q_0 multiplies the profile by k^2, W acts through
// wave_apply_profile), so the residual isolates the intertwining defect;
// Q_theta acts by finite differences plus V.
inline double intertwining_residual(const WaveOperator& w, const Potential& V, const CVec& f) {
  const KTable& t = *w.table;
  const SpatialGrid& g = *t.grid;
  CVec fk2 = f;
  for (int j = 0; j < t.sg.size(); ++j) fk2[j] *= t.sg.k[j] * t.sg.k[j];
  CVec wu = detail::wave_apply_profile(w, f);
  CVec qwu = -second_derivative(g, wu);
  for (int i = 0; i < g.size(); ++i) qwu[i] += V.v[i] * wu[i];
  CVec wq0u = detail::wave_apply_profile(w, fk2);
  return l2_norm(g, CVec(qwu - wq0u)) / l2_norm(g, CVec(inverse_transform(t, f)));
}

// || e^{i t Q_theta} e^{-i t Q_0} u - W u || for t <= 0, realized through
//   e^{i t Q_theta} (F^{-1} - F_theta^{-1}) e^{-i t k^2} (F u)
// so the free evolution never leaves the grid.
inline double wave_limit_deviation(const WaveOperator& w, const CVec& u, double time) {
  const KTable& t = *w.table;
  CVec gk = forward_transform(t, u);
  for (int j = 0; j < t.sg.size(); ++j)
    gk[j] *= std::exp(Complex(0, -time * t.sg.k[j] * t.sg.k[j]));
  // (F^{-1} - F_theta^{-1}) applied to the propagated spectral data
  CVec m = CVec::Zero(t.grid->size());
  {
    CVec wk = gk.cwiseProduct(t.sg.w.cast<Complex>());
    // delta psi columns reconstructed from the factored V_theta:
    // Afac = Wx^{1/2} dpsi Wk^{1/2} / (2 pi)
    CVec sk = detail::half_weights(t.sg.w);
    CVec y(t.sg.size());
    for (int j = 0; j < t.sg.size(); ++j) y[j] = wk[j] / sk[j];
    CVec mw = -(2 * pi / std::sqrt(2 * pi)) * (w.Afac * y);
    m = from_weighted(t, mw);
  }
  CVec v = propagate_theta(w, m, -time);
  return l2_norm(*t.grid, v);
}

}  // namespace qscat
