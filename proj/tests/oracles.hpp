#pragma once

// Independent reference solutions used to pin expected values:
//  - closed-form Jost solution and Jost function for piecewise-constant
//    potentials by exponential matching (transfer matrix),
//  - bound-state energies of the finite square well by bisection on the
//    matching condition,
//  - free-resolvent convolution closed forms.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace oracles {

using Complex = std::complex<double>;

// chi+ for V = v0 on [a, b], zero outside, with chi+ = e^{i zeta x} beyond b.
struct StepJost {
  double a, b, v0;
  Complex zeta, kappa;     // interior momentum
  Complex A, B;            // interior coefficients of e^{+i kappa x}, e^{-i kappa x}
  Complex C, D;            // exterior x < a coefficients of e^{+i zeta x}, e^{-i zeta x}

  StepJost(double a_, double b_, double v0_, Complex zeta_) : a(a_), b(b_), v0(v0_), zeta(zeta_) {
    const Complex I(0, 1);
    kappa = std::sqrt(zeta * zeta - v0);
    if (std::abs(kappa) < 1e-12) throw std::invalid_argument("StepJost: zeta too close to the band edge");
    Complex eb = std::exp(I * zeta * b);
    A = 0.5 * eb * (1.0 + zeta / kappa) * std::exp(-I * kappa * b);
    B = 0.5 * eb * (1.0 - zeta / kappa) * std::exp(I * kappa * b);
    Complex ua = A * std::exp(I * kappa * a) + B * std::exp(-I * kappa * a);
    Complex dua = I * kappa * (A * std::exp(I * kappa * a) - B * std::exp(-I * kappa * a));
    if (std::abs(zeta) < 1e-12) throw std::invalid_argument("StepJost: zeta = 0 unsupported");
    C = 0.5 * (ua + dua / (I * zeta)) * std::exp(-I * zeta * a);
    D = 0.5 * (ua - dua / (I * zeta)) * std::exp(I * zeta * a);
  }

  void eval(double x, Complex& u, Complex& du) const {
    const Complex I(0, 1);
    if (x >= b) {
      u = std::exp(I * zeta * x);
      du = I * zeta * u;
    } else if (x >= a) {
      Complex ep = std::exp(I * kappa * x), em = std::exp(-I * kappa * x);
      u = A * ep + B * em;
      du = I * kappa * (A * ep - B * em);
    } else {
      Complex ep = std::exp(I * zeta * x), em = std::exp(-I * zeta * x);
      u = C * ep + D * em;
      du = I * zeta * (C * ep - D * em);
    }
  }

  // w = W(chi+, chi-) with chi- = e^{-i zeta x} below a
  Complex jost_function() const {
    const Complex I(0, 1);
    Complex u, du;
    eval(a, u, du);
    Complex em = std::exp(-I * zeta * a);
    return u * (-I * zeta) * em - du * em;
  }
};

// Bound states -kappa^2 of the well V = -v0 on [a, b]: roots of
// sin(qL)(q^2 - kappa^2) = 2 kappa q cos(qL), q = sqrt(v0 - kappa^2).
inline std::vector<double> well_bound_states(double a, double b, double v0) {
  double L = b - a;
  auto f = [&](double kap) {
    double q = std::sqrt(v0 - kap * kap);
    return std::sin(q * L) * (q * q - kap * kap) - 2 * kap * q * std::cos(q * L);
  };
  std::vector<double> roots;
  const int n = 20000;
  double lo = 1e-9, hi = std::sqrt(v0) - 1e-9;
  double prev = f(lo);
  for (int i = 1; i <= n; ++i) {
    double x = lo + (hi - lo) * i / n;
    double cur = f(x);
    if (prev == 0) prev = cur;
    else if (prev * cur < 0) {
      double xa = lo + (hi - lo) * (i - 1) / n, xb = x;
      for (int it = 0; it < 200; ++it) {
        double xm = 0.5 * (xa + xb);
        if (f(xa) * f(xm) <= 0) xb = xm; else xa = xm;
      }
      double kap = 0.5 * (xa + xb);
      roots.push_back(-kap * kap);
    }
    prev = cur;
  }
  return roots;
}

// (-d^2/dx^2 + 1)^{-1} f for f = e^{-x^2}: closed form via the kernel
// e^{-|x-y|}/2 is not elementary; instead provide the kernel itself for
// direct comparison at z = -1.
inline Complex free_resolvent_kernel_zm1(double x, double y) {
  return 0.5 * std::exp(-std::abs(x - y));
}

}  // namespace oracles
