#pragma once

// Configuration-driven experiment runner behind the CLI: JSON config in,
// deterministic CSV tables plus a JSON manifest out.
//
// Exit code contract: 0 success, 1 config validation failure, 2 numerical
// failure, 3 acceptance-suite failure.  Config problems surface as
// std::invalid_argument, numerical problems as std::runtime_error; the
// caller maps them to exit codes.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "qscat/acceptance.hpp"
#include "qscat/eigenfun.hpp"
#include "qscat/evolve.hpp"
#include "qscat/grid.hpp"
#include "qscat/jost.hpp"
#include "qscat/krein.hpp"
#include "qscat/linalg.hpp"
#include "qscat/potential.hpp"

namespace qscat {

struct RunConfig {
  nlohmann::json raw;
  std::string experiment;
  std::string out_dir = "out";
  SpatialGrid grid;
  nlohmann::json potential_rec;
  double k_max = 8.0, k_exclusion = 0.05;
  int n_k = 1024;
  Complex theta1 = 0, theta2 = 0;
};

namespace runner_detail {

inline Complex parse_complex(const nlohmann::json& j, const char* what) {
  if (j.is_number()) return Complex(j.get<double>(), 0);
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return Complex(j[0].get<double>(), j[1].get<double>());
  throw std::invalid_argument(std::string(what) + ": expected a number or [re, im]");
}

inline std::uint64_t config_hash(const nlohmann::json& j) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Chunk-free deterministic worker pool: results are written by index, so the
// emitted tables never depend on scheduling.
inline void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  for (auto& t : pool) t.join();
}

struct Emitter {
  std::filesystem::path dir;
  std::vector<std::string> files;

  void write(const std::string& name, const std::string& body) {
    std::filesystem::create_directories(dir);
    std::ofstream os(dir / name, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + (dir / name).string());
    os << body;
    files.push_back(name);
  }
};

}  // namespace runner_detail

inline RunConfig parse_config(const nlohmann::json& j) {
  using runner_detail::parse_complex;
  RunConfig c;
  c.raw = j;
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
  c.experiment = j.value("experiment", "");
  const std::vector<std::string> known = {"jost", "spectrum", "eigenfun", "waveop",
                                          "propagate", "sweep", "acceptance"};
  if (std::find(known.begin(), known.end(), c.experiment) == known.end())
    throw std::invalid_argument("config: unknown experiment '" + c.experiment + "'");
  c.out_dir = j.value("out", "out");
  if (c.experiment != "acceptance") {
    if (!j.contains("grid")) throw std::invalid_argument("config: missing grid block");
    const auto& g = j.at("grid");
    auto counts = g.at("counts").get<std::vector<int>>();
    if (counts.size() != 3) throw std::invalid_argument("config: grid counts must have 3 entries");
    c.grid = make_grid(g.at("x_min").get<double>(), g.at("a").get<double>(),
                       g.at("b").get<double>(), g.at("x_max").get<double>(),
                       {counts[0], counts[1], counts[2]});
    if (!j.contains("potential")) throw std::invalid_argument("config: missing potential block");
    c.potential_rec = j.at("potential");
  }
  if (j.contains("spectral")) {
    const auto& s = j.at("spectral");
    c.k_max = s.value("k_max", 8.0);
    c.n_k = s.value("n_k", 1024);
    c.k_exclusion = s.value("k_exclusion", 0.05);
    if (!(c.k_max > c.k_exclusion && c.k_exclusion > 0) || c.n_k < 2 || c.n_k % 2)
      throw std::invalid_argument("config: invalid spectral block");
  }
  if (j.contains("theta")) {
    c.theta1 = parse_complex(j.at("theta").at("theta1"), "theta1");
    c.theta2 = parse_complex(j.at("theta").at("theta2"), "theta2");
  }
  return c;
}

namespace runner_detail {

inline std::vector<double> k_samples(const RunConfig& c) {
  if (c.raw.contains("k_samples")) {
    auto v = c.raw.at("k_samples").get<std::vector<double>>();
    if (v.empty()) throw std::invalid_argument("config: k_samples must be nonempty");
    for (double k : v)
      if (k == 0) throw std::invalid_argument("config: k_samples must avoid k = 0");
    return v;
  }
  std::vector<double> v;
  for (int i = 0; i < 20; ++i) v.push_back(0.3 + 0.25 * i);
  return v;
}

struct LadderSpec {
  std::vector<double> scales;
  Complex dir1, dir2;
};

inline LadderSpec ladder_spec(const RunConfig& c) {
  LadderSpec l;
  if (!c.raw.contains("ladder"))
    throw std::invalid_argument("config: experiment needs a ladder block");
  const auto& j = c.raw.at("ladder");
  l.scales = j.at("scales").get<std::vector<double>>();
  if (l.scales.size() < 2) throw std::invalid_argument("config: ladder needs >= 2 scales");
  for (double s : l.scales)
    if (s <= 0) throw std::invalid_argument("config: ladder scales must be positive");
  l.dir1 = parse_complex(j.at("direction1"), "direction1");
  l.dir2 = parse_complex(j.at("direction2"), "direction2");
  return l;
}

inline int run_jost(const RunConfig& c, Emitter& em, int jobs) {
  Potential V = build_potential(c.grid, c.potential_rec);
  std::vector<double> ks = k_samples(c);
  int n = static_cast<int>(ks.size());
  std::vector<std::array<Complex, 2>> w(n);
  std::vector<double> resid(n);
  parallel_for(n, jobs, [&](int i) {
    double k = std::abs(ks[i]);
    SpectralData d = build_spectral_data(c.grid, V, Complex(k, 0));
    JostSolution plus_neg = picard_jost(c.grid, V, Complex(-k, 0), +1);
    Complex w0 = jost_wronskian_w0(c.grid, plus_neg, d.minus);
    w[i] = {d.w, w0};
    resid[i] = std::abs(std::norm(d.w) - std::norm(w0) - 4 * k * k) / (4 * k * k);
  });
  std::string body = "k,w_re,w_im,w0_re,w0_im,identity_rel_residual\n";
  for (int i = 0; i < n; ++i)
    body += num(std::abs(ks[i])) + "," + num(w[i][0].real()) + "," + num(w[i][0].imag()) +
            "," + num(w[i][1].real()) + "," + num(w[i][1].imag()) + "," + num(resid[i]) + "\n";
  em.write("jost.csv", body);
  return 0;
}

inline int run_spectrum(const RunConfig& c, Emitter& em, int) {
  Potential V = build_potential(c.grid, c.potential_rec);
  if (!c.raw.contains("scan")) throw std::invalid_argument("config: spectrum needs a scan block");
  const auto& s = c.raw.at("scan");
  Complex lo(s.at("re_min").get<double>(), s.at("im_min").get<double>());
  Complex hi(s.at("re_max").get<double>(), s.at("im_max").get<double>());
  if (!(lo.real() < hi.real() && lo.imag() < hi.imag()))
    throw std::invalid_argument("config: scan rectangle is empty");
  int nx = s.value("nx", 24), ny = s.value("ny", 7), refine = s.value("refine", 2);
  auto cand = spectral_scan(c.grid, V, c.theta1, c.theta2, lo, hi, nx, ny, refine);
  std::string body = "z_re,z_im,source\n";
  for (const auto& cd : cand)
    body += num(cd.z.real()) + "," + num(cd.z.imag()) + "," + cd.source + "\n";
  em.write("spectrum.csv", body);
  if (c.raw.contains("track_from")) {
    Complex z0 = parse_complex(c.raw.at("track_from"), "track_from");
    Complex z = eigenvalue_track(c.grid, V, c.theta1, c.theta2, z0);
    em.write("eigenvalue.csv", "z_re,z_im\n" + num(z.real()) + "," + num(z.imag()) + "\n");
  }
  return 0;
}

inline int run_eigenfun(const RunConfig& c, Emitter& em, int jobs) {
  Potential V = build_potential(c.grid, c.potential_rec);
  std::vector<double> ks = k_samples(c);
  int n = static_cast<int>(ks.size());
  std::vector<GeneralizedEigenfunction> es(n);
  std::vector<double> iface(n);
  parallel_for(n, jobs, [&](int i) {
    SpectralData d = build_spectral_data(c.grid, V, Complex(std::abs(ks[i]), 0));
    es[i] = psi_minus_theta(d, ks[i], c.theta1, c.theta2);
    iface[i] = interface_residual(c.grid, es[i].psi, es[i].psi_prime, c.theta1, c.theta2);
  });
  std::string body = "k,R_re,R_im,T_re,T_im,flux_defect,fit_residual,interface_residual\n";
  for (int i = 0; i < n; ++i) {
    const auto& e = es[i];
    body += num(ks[i]) + "," + num(e.R.real()) + "," + num(e.R.imag()) + "," +
            num(e.T.real()) + "," + num(e.T.imag()) + "," +
            num(std::norm(e.R) + std::norm(e.T) - 1.0) + "," +
            num(e.fit_residual) + "," + num(iface[i]) + "\n";
  }
  em.write("eigenfun.csv", body);
  return 0;
}

inline int run_waveop(const RunConfig& c, Emitter& em, int) {
  Potential V = build_potential(c.grid, c.potential_rec);
  KTable t = build_ktable(c.grid, V, make_spectral_grid(c.k_max, c.n_k, c.k_exclusion));
  WaveOperator w = build_wave_operator(t, c.theta1, c.theta2, false);
  em.write("waveop.csv",
           "theta1_re,theta1_im,theta2_re,theta2_im,deviation\n" +
               num(c.theta1.real()) + "," + num(c.theta1.imag()) + "," +
               num(c.theta2.real()) + "," + num(c.theta2.imag()) + "," +
               num(w.deviation) + "\n");
  if (c.raw.contains("ladder")) {
    LadderSpec l = ladder_spec(c);
    std::string body = "scale,deviation\n";
    std::vector<double> devs;
    for (double s : l.scales) {
      WaveOperator ws = build_wave_operator(t, s * l.dir1, s * l.dir2, false);
      devs.push_back(ws.deviation);
      body += num(s) + "," + num(ws.deviation) + "\n";
    }
    em.write("ladder.csv", body);
    nlohmann::json fit = {{"quantity", "wave_operator_deviation"},
                          {"slope", loglog_slope(l.scales, devs)}};
    em.write("ladder_fit.json", fit.dump(2) + "\n");
  }
  return 0;
}

inline int run_propagate(const RunConfig& c, Emitter& em, int) {
  Potential V = build_potential(c.grid, c.potential_rec);
  std::vector<double> times = c.raw.value("times", std::vector<double>{0, 1, 5, 20, 100});
  KTable t = build_ktable(c.grid, V, make_spectral_grid(c.k_max, c.n_k, c.k_exclusion));
  WaveOperator w = build_wave_operator(t, c.theta1, c.theta2, false);
  std::string body = "t,remainder_norm\n";
  for (double tt : times)
    body += num(tt) + "," + num(remainder_norm(w, tt, 1e-6)) + "\n";
  em.write("propagate.csv", body);
  return 0;
}

inline int run_sweep(const RunConfig& c, Emitter& em, int) {
  Potential V = build_potential(c.grid, c.potential_rec);
  LadderSpec l = ladder_spec(c);
  double time = c.raw.value("time", 10.0);
  KTable t = build_ktable(c.grid, V, make_spectral_grid(c.k_max, c.n_k, c.k_exclusion));
  std::string body = "scale,remainder_norm\n";
  std::vector<double> rems;
  for (double s : l.scales) {
    WaveOperator ws = build_wave_operator(t, s * l.dir1, s * l.dir2, false);
    rems.push_back(remainder_norm(ws, time, 1e-7));
    body += num(s) + "," + num(rems.back()) + "\n";
  }
  em.write("sweep.csv", body);
  nlohmann::json fit = {{"quantity", "remainder_norm"},
                        {"time", time},
                        {"slope", loglog_slope(l.scales, rems)}};
  em.write("sweep_fit.json", fit.dump(2) + "\n");
  return 0;
}

inline int run_acceptance(const RunConfig&, Emitter& em, int) {
  std::ostringstream report;
  auto results = acceptance::run_all(report);
  std::cout << report.str();
  em.write("acceptance_report.txt", report.str());
  for (const auto& r : results)
    if (!r.pass) return 3;
  return 0;
}

}  // namespace runner_detail

// Execute one experiment; returns the process exit code.
inline int run(const RunConfig& c, int jobs = 1) {
  using namespace runner_detail;
  Emitter em{std::filesystem::path(c.out_dir), {}};
  int rc = 0;
  if (c.experiment == "jost") rc = run_jost(c, em, jobs);
  else if (c.experiment == "spectrum") rc = run_spectrum(c, em, jobs);
  else if (c.experiment == "eigenfun") rc = run_eigenfun(c, em, jobs);
  else if (c.experiment == "waveop") rc = run_waveop(c, em, jobs);
  else if (c.experiment == "propagate") rc = run_propagate(c, em, jobs);
  else if (c.experiment == "sweep") rc = run_sweep(c, em, jobs);
  else if (c.experiment == "acceptance") rc = run_acceptance(c, em, jobs);
  else throw std::invalid_argument("run: unknown experiment '" + c.experiment + "'");
  char hash[24];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(config_hash(c.raw)));
  nlohmann::json manifest = {{"experiment", c.experiment},
                             {"config_hash", hash},
                             {"files", em.files}};
  em.write("manifest.json", manifest.dump(2) + "\n");
  return rc;
}

}  // namespace qscat
