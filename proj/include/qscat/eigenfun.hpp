#pragma once

// Generalized eigenfunctions of the reference and perturbed operators,
// scattering coefficients, the defect-expansion coefficients and the
// adjoint pairing diagnostic.

#include <cmath>
#include <complex>
#include <stdexcept>

#include "qscat/grid.hpp"
#include "qscat/jost.hpp"
#include "qscat/krein.hpp"
#include "qscat/potential.hpp"

namespace qscat {

struct GeneralizedEigenfunction {
  double k = 0;
  Complex theta1 = 0, theta2 = 0;
  CVec psi, psi_prime;
  Complex R = 0, T = 0;
  double fit_residual = 0;
};

namespace detail {

// Least-squares fit of u ~ c1 e^{ikx} + c2 e^{-ikx} on one exterior segment.
inline void fit_plane_waves(const SpatialGrid& g, const CVec& u, int seg, double k,
                            Complex& c1, Complex& c2, double& residual) {
  const Complex I(0, 1);
  int o = g.seg_begin(seg), n = g.n[seg];
  Complex a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
  for (int j = 0; j < n; ++j) {
    Complex e1 = std::exp(I * k * g.x[o + j]), e2 = std::exp(-I * k * g.x[o + j]);
    a11 += std::norm(e1); a22 += std::norm(e2);
    a12 += std::conj(e1) * e2;
    b1 += std::conj(e1) * u[o + j];
    b2 += std::conj(e2) * u[o + j];
  }
  Complex det = a11 * a22 - a12 * std::conj(a12);
  c1 = (a22 * b1 - a12 * b2) / det;
  c2 = (a11 * b2 - std::conj(a12) * b1) / det;
  residual = 0;
  for (int j = 0; j < n; ++j) {
    Complex e1 = std::exp(I * k * g.x[o + j]), e2 = std::exp(-I * k * g.x[o + j]);
    residual = std::max(residual, std::abs(u[o + j] - c1 * e1 - c2 * e2));
  }
}

}  // namespace detail

// Incoming-from-the-left (k > 0) / incoming-from-the-right (k < 0)
// eigenfunction of the reference operator, normalized to unit incident
// amplitude.  Built from Jost data at zeta = |k|.
inline GeneralizedEigenfunction psi_minus_free(const SpectralData& d, double k) {
  if (k == 0) throw std::invalid_argument("psi_minus_free: k = 0 excluded");
  const SpatialGrid& g = *d.grid;
  const Complex I(0, 1);
  if (std::abs(d.zeta - Complex(std::abs(k), 0)) > 1e-12 * (1 + std::abs(k)))
    throw std::invalid_argument("psi_minus_free: Jost data must be at zeta = |k|");
  GeneralizedEigenfunction e;
  e.k = k;
  Complex amp = -2.0 * I * k / d.w;
  if (k > 0) {
    e.psi = amp * d.plus.chi;
    e.psi_prime = amp * d.plus.chi_prime;
  } else {
    e.psi = -amp * d.minus.chi;
    e.psi_prime = -amp * d.minus.chi_prime;
  }
  // reflection on the incoming side, transmission on the far side
  Complex cin, cr, ct, cspur;
  double r1, r2;
  if (k > 0) {
    detail::fit_plane_waves(g, e.psi, 0, k, cin, cr, r1);
    detail::fit_plane_waves(g, e.psi, 2, k, ct, cspur, r2);
    e.R = cr; e.T = ct;
  } else {
    detail::fit_plane_waves(g, e.psi, 2, -k, cr, cin, r1);
    detail::fit_plane_waves(g, e.psi, 0, -k, cspur, ct, r2);
    e.R = cr; e.T = ct;
  }
  e.fit_residual = std::max({r1, r2, std::abs(cin - 1.0), std::abs(cspur)});
  return e;
}

// Defect-expansion coefficients c(k, theta) solving M c = B Gamma1 psi.
inline Vec4 expansion_coefficients(const SpectralData& d,
                                   const GeneralizedEigenfunction& free_ef,
                                   Complex theta1, Complex theta2) {
  const SpatialGrid& g = *d.grid;
  InterfaceMatrices im = interface_matrices(theta1, theta2);
  Mat4 M = im.B * weyl_matrix(d) - im.A;
  // psi is C^1 across the interfaces: interior traces read off the tables
  Vec4 g1;
  g1 << free_ef.psi[g.ib_plus()], free_ef.psi_prime[g.ib_plus()],
        free_ef.psi[g.ia_plus()], free_ef.psi_prime[g.ia_plus()];
  return M.partialPivLu().solve(Vec4(im.B * g1));
}

// Eigenfunction of Q_theta: the free eigenfunction corrected by the defect
// family at the boundary value zeta = |k|, whose tails are outgoing on both
// exterior segments for either sign of k.
inline GeneralizedEigenfunction psi_minus_theta(const SpectralData& d, double k,
                                                Complex theta1, Complex theta2) {
  GeneralizedEigenfunction e0 = psi_minus_free(d, k);
  Vec4 c = expansion_coefficients(d, e0, theta1, theta2);
  DefectBasis db = defect_basis(d);
  GeneralizedEigenfunction e = e0;
  e.theta1 = theta1; e.theta2 = theta2;
  e.psi = e0.psi - db.val * c;
  e.psi_prime = e0.psi_prime - db.der * c;
  const SpatialGrid& g = *d.grid;
  Complex cin, cr, ct, cspur;
  double r1, r2;
  double ka = std::abs(k);
  if (k > 0) {
    detail::fit_plane_waves(g, e.psi, 0, ka, cin, cr, r1);
    detail::fit_plane_waves(g, e.psi, 2, ka, ct, cspur, r2);
  } else {
    detail::fit_plane_waves(g, e.psi, 2, ka, cr, cin, r1);
    detail::fit_plane_waves(g, e.psi, 0, ka, cspur, ct, r2);
  }
  e.R = cr; e.T = ct;
  e.fit_residual = std::max({r1, r2, std::abs(cin - 1.0)});
  return e;
}

// Residual of the scaled interface conditions
//   e^{-theta1/2} u(b+) = u(b-),   e^{-theta2/2} u'(b+) = u'(b-),
//   e^{-theta1/2} u(a-) = u(a+),   e^{-theta2/2} u'(a-) = u'(a+)
// read from one-sided node values of (u, u').
inline double interface_residual(const SpatialGrid& g, const CVec& u, const CVec& du,
                                 Complex theta1, Complex theta2) {
  Complex e1 = std::exp(-theta1 / 2.0), e2 = std::exp(-theta2 / 2.0);
  double r = 0;
  r = std::max(r, std::abs(e1 * u[g.ib_plus()] - u[g.ib_minus()]));
  r = std::max(r, std::abs(e2 * du[g.ib_plus()] - du[g.ib_minus()]));
  r = std::max(r, std::abs(e1 * u[g.ia_minus()] - u[g.ia_plus()]));
  r = std::max(r, std::abs(e2 * du[g.ia_minus()] - du[g.ia_plus()]));
  return r;
}

// Pairing residual |<psi, Q_theta phi> - <Q_theta' psi, phi>| for the
// adjoint parameter pair theta' = (-conj(theta2), -conj(theta1)).  Both
// inputs must satisfy their interface conditions (checked via FD traces)
// and vanish near the outer grid ends.
inline double adjoint_pairing_check(const SpatialGrid& g, const Potential& V,
                                    const CVec& phi, const CVec& psi,
                                    Complex theta1, Complex theta2,
                                    double domain_tol = 1e-6) {
  Complex t1p = -std::conj(theta2), t2p = -std::conj(theta1);
  CVec dphi = derivative(g, phi);
  CVec dpsi = derivative(g, psi);
  double sphi = phi.cwiseAbs().maxCoeff(), spsi = psi.cwiseAbs().maxCoeff();
  if (interface_residual(g, phi, dphi, theta1, theta2) > domain_tol * (1 + sphi))
    throw std::invalid_argument("adjoint_pairing_check: phi violates the interface conditions");
  if (interface_residual(g, psi, dpsi, t1p, t2p) > domain_tol * (1 + spsi))
    throw std::invalid_argument("adjoint_pairing_check: psi violates the adjoint interface conditions");
  for (int i : {0, g.size() - 1}) {
    if (std::abs(phi[i]) > domain_tol * (1 + sphi) || std::abs(psi[i]) > domain_tol * (1 + spsi))
      throw std::invalid_argument("adjoint_pairing_check: inputs must vanish at the outer grid ends");
  }
  CVec qphi = -second_derivative(g, phi);
  CVec qpsi = -second_derivative(g, psi);
  for (int i = 0; i < g.size(); ++i) {
    qphi[i] += V.v[i] * phi[i];
    qpsi[i] += V.v[i] * psi[i];
  }
  Complex lhs = inner_product(g, psi, qphi);
  Complex rhs = inner_product(g, qpsi, phi);
  return std::abs(lhs - rhs);
}

}  // namespace qscat
