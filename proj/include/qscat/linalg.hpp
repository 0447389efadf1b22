#pragma once

// Operator norm estimation by power iteration on M*M and small fitting
// helpers shared by the diagnostics.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "qscat/grid.hpp"

namespace qscat {

// Deterministic pseudo-random start vector (fixed LCG, no global RNG state).
inline CVec norm_seed(Eigen::Index n) {
  CVec v(n);
  std::uint64_t s = 0x9e3779b97f4a7c15ull;
  for (Eigen::Index i = 0; i < n; ++i) {
    s = s * 6364136223846793005ull + 1442695040888963407ull;
    double re = static_cast<double>(s >> 11) / 9007199254740992.0 - 0.5;
    s = s * 6364136223846793005ull + 1442695040888963407ull;
    double im = static_cast<double>(s >> 11) / 9007199254740992.0 - 0.5;
    v[i] = Complex(re, im);
  }
  return v;
}

// Largest singular value of the operator v -> apply(v) with adjoint applies,
// via power iteration on A*A.  apply_h must implement the conjugate
// transpose.  Deterministic; returns the best estimate after convergence of
// the Rayleigh quotient to rel. tolerance tol.
inline double op_norm_estimate_fn(const std::function<CVec(const CVec&)>& apply,
                                  const std::function<CVec(const CVec&)>& apply_h,
                                  Eigen::Index n, double tol = 1e-6, int max_iter = 500) {
  CVec v = norm_seed(n);
  v /= v.norm();
  double prev = 0;
  for (int it = 0; it < max_iter; ++it) {
    CVec w = apply_h(apply(v));
    double lam = w.norm();
    if (lam == 0) return 0;
    v = w / lam;
    double sigma = std::sqrt(lam);
    if (it > 2 && std::abs(sigma - prev) <= tol * (1 + sigma)) return sigma;
    prev = sigma;
  }
  return prev;
}

inline double op_norm_estimate(const CMat& M, double tol = 1e-8, int max_iter = 1000) {
  return op_norm_estimate_fn(
      [&](const CVec& v) { return CVec(M * v); },
      [&](const CVec& v) { return CVec(M.adjoint() * v); },
      M.cols(), tol, max_iter);
}

// Norm of the product A * B without forming it (A: m x k, B: k x n).
inline double op_norm_factored(const CMat& A, const CMat& B,
                               double tol = 1e-8, int max_iter = 1000) {
  return op_norm_estimate_fn(
      [&](const CVec& v) { return CVec(A * (B * v)); },
      [&](const CVec& v) { return CVec(B.adjoint() * (A.adjoint() * v)); },
      B.cols(), tol, max_iter);
}

// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("loglog_slope: need >= 2 samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = static_cast<int>(xs.size());
  for (int i = 0; i < n; ++i) {
    double lx = std::log(xs[i]), ly = std::log(ys[i]);
    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace qscat
