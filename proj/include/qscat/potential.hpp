#pragma once

// Compactly supported potentials on the middle grid segment, their builders
// and the JSON record format used by configs and result manifests.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qscat/grid.hpp"

namespace qscat {

// Real potential supported on [a, b].  Samples are stored for the whole grid;
// the exterior segments are identically zero.
struct Potential {
  const SpatialGrid* grid = nullptr;
  Vec v;
  std::string kind = "zero";
  nlohmann::json params = nlohmann::json::object();
  // pointwise evaluation inside [a, b]; analytic for the closed-form kinds,
  // cubic interpolation of the middle-segment samples otherwise
  std::function<double(double)> fn;

  double operator()(int i) const { return v[i]; }
};

inline Potential make_zero_potential(const SpatialGrid& g) {
  Potential p;
  p.grid = &g;
  p.v = Vec::Zero(g.size());
  p.fn = [](double) { return 0.0; };
  return p;
}

inline Potential make_barrier(const SpatialGrid& g, double height) {
  Potential p = make_zero_potential(g);
  p.kind = "barrier";
  p.params = {{"height", height}};
  p.v.segment(g.seg_begin(1), g.n[1]).setConstant(height);
  p.fn = [height](double) { return height; };
  return p;
}

inline Potential make_well(const SpatialGrid& g, double depth) {
  if (depth <= 0) throw std::invalid_argument("make_well: depth must be positive");
  Potential p = make_zero_potential(g);
  p.kind = "well";
  p.params = {{"depth", depth}};
  p.v.segment(g.seg_begin(1), g.n[1]).setConstant(-depth);
  p.fn = [depth](double) { return -depth; };
  return p;
}

// Sum of Gaussian bumps.  Each bump must decay below tail_tol at both
// interface points so the compact-support assumption holds on the grid.
inline Potential make_bumps(const SpatialGrid& g,
                            const std::vector<double>& centers,
                            const std::vector<double>& widths,
                            const std::vector<double>& amplitudes,
                            double tail_tol = 1e-10) {
  if (centers.size() != widths.size() || centers.size() != amplitudes.size())
    throw std::invalid_argument("make_bumps: parameter lists must have equal length");
  Potential p = make_zero_potential(g);
  p.kind = "bumps";
  p.params = {{"centers", centers}, {"widths", widths}, {"amplitudes", amplitudes}};
  for (size_t j = 0; j < centers.size(); ++j) {
    if (!(centers[j] > g.a && centers[j] < g.b) || widths[j] <= 0)
      throw std::invalid_argument("make_bumps: bump centers must lie in (a, b), widths > 0");
    auto bump = [&](double x) {
      double u = (x - centers[j]) / widths[j];
      return amplitudes[j] * std::exp(-0.5 * u * u);
    };
    if (std::abs(bump(g.a)) > tail_tol * (1 + std::abs(amplitudes[j])) ||
        std::abs(bump(g.b)) > tail_tol * (1 + std::abs(amplitudes[j])))
      throw std::invalid_argument("make_bumps: bump tail exceeds support tolerance at an interface");
    for (int i = g.seg_begin(1); i < g.seg_end(1); ++i) p.v[i] += bump(g.x[i]);
  }
  auto centers_c = centers; auto widths_c = widths; auto amps_c = amplitudes;
  p.fn = [centers_c, widths_c, amps_c](double x) {
    double acc = 0;
    for (size_t j = 0; j < centers_c.size(); ++j) {
      double u = (x - centers_c[j]) / widths_c[j];
      acc += amps_c[j] * std::exp(-0.5 * u * u);
    }
    return acc;
  };
  return p;
}

// Raw node samples for the middle segment.
inline Potential make_sampled(const SpatialGrid& g, const std::vector<double>& samples) {
  if (static_cast<int>(samples.size()) != g.n[1])
    throw std::invalid_argument("make_sampled: need one sample per middle-segment node");
  Potential p = make_zero_potential(g);
  p.kind = "samples";
  p.params = {{"values", samples}};
  for (int i = 0; i < g.n[1]; ++i) p.v[g.seg_begin(1) + i] = samples[i];
  // cubic Lagrange interpolation of the samples
  auto vals = samples;
  double a = g.a, h = g.h[1];
  int n = g.n[1];
  p.fn = [vals, a, h, n](double x) {
    double t = (x - a) / h;
    int j = std::min(std::max(static_cast<int>(std::floor(t)) - 1, 0), n - 4);
    double acc = 0;
    for (int m = 0; m < 4; ++m) {
      double lm = 1;
      for (int l = 0; l < 4; ++l)
        if (l != m) lm *= (t - (j + l)) / double(m - l);
      acc += lm * vals[j + m];
    }
    return acc;
  };
  return p;
}

inline bool is_nonnegative(const Potential& p) { return p.v.minCoeff() >= 0; }

inline double l1_norm(const Potential& p) {
  const SpatialGrid& g = *p.grid;
  Vec w = newton_cotes_weights(g.n[1], g.h[1]);
  double acc = 0;
  for (int i = 0; i < g.n[1]; ++i) acc += w[i] * std::abs(p.v[g.seg_begin(1) + i]);
  return acc;
}

inline nlohmann::json potential_record(const Potential& p) {
  return {{"kind", p.kind}, {"params", p.params}};
}

inline Potential build_potential(const SpatialGrid& g, const nlohmann::json& rec) {
  std::string kind = rec.value("kind", "zero");
  nlohmann::json params = rec.value("params", nlohmann::json::object());
  // accept flattened records too
  if (params.empty()) params = rec;
  if (kind == "zero") return make_zero_potential(g);
  if (kind == "barrier") return make_barrier(g, params.at("height").get<double>());
  if (kind == "well") return make_well(g, params.at("depth").get<double>());
  if (kind == "bumps")
    return make_bumps(g, params.at("centers").get<std::vector<double>>(),
                      params.at("widths").get<std::vector<double>>(),
                      params.at("amplitudes").get<std::vector<double>>());
  if (kind == "samples") return make_sampled(g, params.at("values").get<std::vector<double>>());
  throw std::invalid_argument("build_potential: unknown kind '" + kind + "'");
}

}  // namespace qscat
