#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qscat/potential.hpp"

using namespace qscat;

static SpatialGrid grid() { return make_grid(-4, 0, 1, 4, {81, 81, 81}); }

TEST_CASE("barrier and well samples and L1 norm") {
  SpatialGrid g = grid();
  Potential barrier = make_barrier(g, 4.0);
  CHECK(is_nonnegative(barrier));
  CHECK(l1_norm(barrier) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(barrier.v[0] == 0);
  CHECK(barrier.v[g.ia_plus()] == 4.0);
  CHECK(barrier.v[g.ib_minus()] == 4.0);
  CHECK(barrier.v[g.ib_plus()] == 0);

  Potential well = make_well(g, 2.5);
  CHECK(!is_nonnegative(well));
  CHECK(well.v[g.ia_plus()] == -2.5);
  CHECK(l1_norm(well) == doctest::Approx(2.5).epsilon(1e-12));
  CHECK_THROWS_AS(make_well(g, -1.0), std::invalid_argument);
}

TEST_CASE("gaussian bumps respect support") {
  SpatialGrid g = grid();
  Potential p = make_bumps(g, {0.5}, {0.04}, {3.0});
  CHECK(p.v[g.seg_begin(1) + g.n[1] / 2] == doctest::Approx(3.0));
  CHECK(p.v[g.ia_plus()] == doctest::Approx(0).epsilon(1e-12));
  // center outside (a, b)
  CHECK_THROWS_AS(make_bumps(g, {2.0}, {0.05}, {1.0}), std::invalid_argument);
  // tail too fat at the interface
  CHECK_THROWS_AS(make_bumps(g, {0.5}, {0.5}, {1.0}), std::invalid_argument);
}

TEST_CASE("sampled potential round-trips node values") {
  SpatialGrid g = grid();
  std::vector<double> vals(g.n[1]);
  for (int i = 0; i < g.n[1]; ++i) vals[i] = 0.1 * i;
  Potential p = make_sampled(g, vals);
  for (int i = 0; i < g.n[1]; ++i) CHECK(p.v[g.seg_begin(1) + i] == vals[i]);
  CHECK_THROWS_AS(make_sampled(g, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("json record round trip") {
  SpatialGrid g = grid();
  Potential p = make_bumps(g, {0.3, 0.7}, {0.03, 0.04}, {2.0, -1.0});
  nlohmann::json rec = potential_record(p);
  Potential q = build_potential(g, rec);
  CHECK(q.kind == "bumps");
  CHECK((q.v - p.v).cwiseAbs().maxCoeff() == 0.0);

  Potential b = build_potential(g, {{"kind", "barrier"}, {"params", {{"height", 1.5}}}});
  CHECK(b.v[g.ia_plus()] == 1.5);
  CHECK_THROWS_AS(build_potential(g, {{"kind", "mystery"}}), std::invalid_argument);
}
