#pragma once

// Segmented 1D grids with duplicated interface nodes, composite quadrature
// and one-sided finite-difference traces.
//
// The spatial grid covers [x_min, x_max] split at two interface points a < b
// into three segments.  Each interface point is stored twice, once as the
// last node of the segment to its left and once as the first node of the
// segment to its right, so grid functions may jump across a and b and
// one-sided limits are plain node reads.

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace qscat {

using Complex = std::complex<double>;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

inline constexpr double pi = 3.14159265358979323846;

struct SpatialGrid {
  double x_min = 0, a = 0, b = 0, x_max = 0;
  std::array<int, 3> n{0, 0, 0};   // nodes per segment, each odd and >= 3
  std::array<double, 3> h{0, 0, 0};
  Vec x;                           // all nodes, segment by segment

  int size() const { return n[0] + n[1] + n[2]; }
  int seg_begin(int s) const { return s == 0 ? 0 : (s == 1 ? n[0] : n[0] + n[1]); }
  int seg_end(int s) const { return seg_begin(s) + n[s]; }   // one past last

  // one-sided interface node indices
  int ia_minus() const { return n[0] - 1; }
  int ia_plus() const { return n[0]; }
  int ib_minus() const { return n[0] + n[1] - 1; }
  int ib_plus() const { return n[0] + n[1]; }

  int segment_of(int i) const { return i < n[0] ? 0 : (i < n[0] + n[1] ? 1 : 2); }
};

inline SpatialGrid make_grid(double x_min, double a, double b, double x_max,
                             std::array<int, 3> counts) {
  if (!(x_min < a && a < b && b < x_max))
    throw std::invalid_argument("make_grid: need x_min < a < b < x_max");
  for (int c : counts)
    if (c < 3 || c % 2 == 0)
      throw std::invalid_argument("make_grid: segment counts must be odd and >= 3");
  SpatialGrid g;
  g.x_min = x_min; g.a = a; g.b = b; g.x_max = x_max;
  g.n = counts;
  const double lo[3] = {x_min, a, b};
  const double hi[3] = {a, b, x_max};
  g.x.resize(counts[0] + counts[1] + counts[2]);
  int p = 0;
  for (int s = 0; s < 3; ++s) {
    g.h[s] = (hi[s] - lo[s]) / (counts[s] - 1);
    for (int i = 0; i < counts[s]; ++i) g.x[p++] = lo[s] + i * g.h[s];
  }
  return g;
}

struct WaveFunction {
  const SpatialGrid* grid = nullptr;
  CVec v;
};

// Composite Newton-Cotes weights for the node range [i0, i1] of a uniform
// grid with spacing h.  Odd node counts get plain Simpson; even counts >= 4
// get a 3/8 block on the first three intervals; a 2-node range falls back to
// the trapezoid rule.
inline Vec newton_cotes_weights(int count, double h) {
  Vec w = Vec::Zero(count);
  if (count <= 1) return w;
  if (count == 2) { w[0] = w[1] = h / 2; return w; }
  int start = 0;
  if (count % 2 == 0) {
    w[0] += 3 * h / 8; w[1] += 9 * h / 8; w[2] += 9 * h / 8; w[3] += 3 * h / 8;
    start = 3;
  }
  for (int i = start; i + 2 < count; i += 2) {
    w[i] += h / 3; w[i + 1] += 4 * h / 3; w[i + 2] += h / 3;
  }
  return w;
}

// Quadrature weights for the whole segmented grid (each segment has odd count).
inline Vec quadrature_weights(const SpatialGrid& g) {
  Vec w = Vec::Zero(g.size());
  for (int s = 0; s < 3; ++s) {
    Vec ws = newton_cotes_weights(g.n[s], g.h[s]);
    w.segment(g.seg_begin(s), g.n[s]) += ws;
  }
  return w;
}

template <class Scalar>
inline Scalar quadrature(const SpatialGrid& g, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& f) {
  if (f.size() != g.size()) throw std::invalid_argument("quadrature: size mismatch");
  Vec w = quadrature_weights(g);
  Scalar acc{};
  for (int i = 0; i < f.size(); ++i) acc += w[i] * f[i];
  return acc;
}

inline Complex inner_product(const SpatialGrid& g, const CVec& f, const CVec& u) {
  Vec w = quadrature_weights(g);
  Complex acc{};
  for (int i = 0; i < f.size(); ++i) acc += w[i] * std::conj(f[i]) * u[i];
  return acc;
}

inline double l2_norm(const SpatialGrid& g, const CVec& f) {
  return std::sqrt(std::abs(inner_product(g, f, f)));
}

// One-sided first derivative at the first node of a 5-node window, 4th order.
template <class V>
inline auto fd_forward(const V& f, int i, double h) {
  return (-25.0 * f[i] + 48.0 * f[i + 1] - 36.0 * f[i + 2] + 16.0 * f[i + 3] - 3.0 * f[i + 4]) / (12 * h);
}
template <class V>
inline auto fd_backward(const V& f, int i, double h) {
  return (25.0 * f[i] - 48.0 * f[i - 1] + 36.0 * f[i - 2] - 16.0 * f[i - 3] + 3.0 * f[i - 4]) / (12 * h);
}

// Segment-wise first derivative, 4th order (central inside, one-sided at ends).
inline CVec derivative(const SpatialGrid& g, const CVec& f) {
  CVec d(g.size());
  for (int s = 0; s < 3; ++s) {
    int o = g.seg_begin(s), n = g.n[s];
    double h = g.h[s];
    d[o] = fd_forward(f, o, h);
    d[o + 1] = (-3.0 * f[o] - 10.0 * f[o + 1] + 18.0 * f[o + 2] - 6.0 * f[o + 3] + f[o + 4]) / (12 * h);
    for (int i = 2; i < n - 2; ++i)
      d[o + i] = (f[o + i - 2] - 8.0 * f[o + i - 1] + 8.0 * f[o + i + 1] - f[o + i + 2]) / (12 * h);
    d[o + n - 2] = (3.0 * f[o + n - 1] + 10.0 * f[o + n - 2] - 18.0 * f[o + n - 3] + 6.0 * f[o + n - 4] - f[o + n - 5]) / (12 * h);
    d[o + n - 1] = fd_backward(f, o + n - 1, h);
  }
  return d;
}

// Segment-wise second derivative, 4th order.
inline CVec second_derivative(const SpatialGrid& g, const CVec& f) {
  CVec d(g.size());
  for (int s = 0; s < 3; ++s) {
    int o = g.seg_begin(s), n = g.n[s];
    double h2 = g.h[s] * g.h[s];
    auto edge = [&](int i, int dir) {
      return (45.0 * f[i] - 154.0 * f[i + dir] + 214.0 * f[i + 2 * dir] - 156.0 * f[i + 3 * dir]
              + 61.0 * f[i + 4 * dir] - 10.0 * f[i + 5 * dir]) / (12 * h2);
    };
    auto near_edge = [&](int i, int dir) {
      return (10.0 * f[i - dir] - 15.0 * f[i] - 4.0 * f[i + dir] + 14.0 * f[i + 2 * dir]
              - 6.0 * f[i + 3 * dir] + f[i + 4 * dir]) / (12 * h2);
    };
    if (n >= 6) {
      d[o] = edge(o, 1);
      d[o + 1] = near_edge(o + 1, 1);
      d[o + n - 1] = edge(o + n - 1, -1);
      d[o + n - 2] = near_edge(o + n - 2, -1);
      for (int i = 2; i < n - 2; ++i)
        d[o + i] = (-f[o + i - 2] + 16.0 * f[o + i - 1] - 30.0 * f[o + i] + 16.0 * f[o + i + 1] - f[o + i + 2]) / (12 * h2);
    } else {
      for (int i = 0; i < n; ++i) {
        int c = std::min(std::max(o + i, o + 1), o + n - 2);
        d[o + i] = (f[c - 1] - 2.0 * f[c] + f[c + 1]) / h2;
      }
    }
  }
  return d;
}

struct SpectralGrid {
  double k_max = 0, k_exclusion = 0;
  Vec k;   // symmetric about 0, ascending, k = 0 never a node
  Vec w;   // quadrature weights
  int size() const { return static_cast<int>(k.size()); }
};

// Midpoint nodes on [-k_max, -excl] and [excl, k_max], mirror-symmetric.
inline SpectralGrid make_spectral_grid(double k_max, int n_k, double k_exclusion) {
  if (!(k_max > k_exclusion && k_exclusion > 0))
    throw std::invalid_argument("make_spectral_grid: need k_max > k_exclusion > 0");
  if (n_k < 2 || n_k % 2 != 0)
    throw std::invalid_argument("make_spectral_grid: n_k must be even and >= 2");
  SpectralGrid s;
  s.k_max = k_max; s.k_exclusion = k_exclusion;
  int half = n_k / 2;
  double dk = (k_max - k_exclusion) / half;
  s.k.resize(n_k); s.w.resize(n_k);
  for (int j = 0; j < half; ++j) {
    double kp = k_exclusion + (j + 0.5) * dk;
    s.k[half + j] = kp;
    s.k[half - 1 - j] = -kp;
    s.w[half + j] = dk;
    s.w[half - 1 - j] = dk;
  }
  return s;
}

}  // namespace qscat
