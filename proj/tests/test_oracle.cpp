#include "support.hpp"

#include "dcc/oracle.hpp"
#include "dcc/sharp_bounds.hpp"

#include <doctest.h>

using namespace dcc;
using namespace testing;

TEST_CASE("grid oracle on the Hispanic scenario") {
  const auto grid = grid_enumerate_bounds(appendix_c(), 1, OracleConfig{});
  CHECK(std::abs(grid.lo - 0.0909) <= 2e-3);
  CHECK(std::abs(grid.hi - 0.3896) <= 2e-3);
  CHECK_FALSE(grid.sharp);
  CHECK(grid.method == Method::Oracle);
}

TEST_CASE("no contamination gives a point") {
  Mat<double> diag(2, 2);
  diag << 0.6, 0, 0, 0.4;
  const auto s = binary_scenario(diag, vec({0.3, 0.55}));
  OracleConfig cfg;
  cfg.step = 0.01;
  // default row tolerance admits neighbouring grid values
  const auto loose = grid_enumerate_bounds(s, 1, cfg);
  CHECK(loose.contains(0.55));
  CHECK(loose.width() <= 2 * oracle_slack(s, 1, cfg));
  cfg.constraint_tol = 1e-9;
  const auto b = grid_enumerate_bounds(s, 1, cfg);
  CHECK(b.width() <= 1e-12);
  CHECK(b.lo == doctest::Approx(0.55));
}

TEST_CASE("vacuous case spans the unit interval") {
  Mat<double> spread(2, 2);
  spread << 0.3, 0.2, 0.3, 0.2;
  OracleConfig cfg;
  cfg.step = 0.01;
  const auto b = grid_enumerate_bounds(binary_scenario(spread, vec({0.5, 0.5})), 1, cfg);
  CHECK(b.lo <= 0.02);
  CHECK(b.hi >= 0.98);
}

TEST_CASE("random_scenario is deterministic and covers its truth") {
  const auto a = random_scenario(1, 2, 2), b = random_scenario(1, 2, 2);
  CHECK(a.scenario.joint().table() == b.scenario.joint().table());
  CHECK(a.scenario.y_given_w == b.scenario.y_given_w);
  CHECK(a.truth == b.truth);
  CHECK(random_scenario(2, 2, 2).truth != a.truth);
  for (Index t = 0; t < 2; ++t) CHECK(sharp_event_bounds(a.scenario, t).contains(a.truth_event(t), 1e-12));

  const auto asian = random_scenario(1, 1, 4);
  CHECK(detect_aggregation(asian.scenario.joint()).kind == AggregationStructure::Kind::WAggregatesX);
}

TEST_CASE("property: oracle and LP agree within the combined slack") {
  OracleConfig cfg;
  cfg.step = 0.01;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const Index nw = 1 + static_cast<Index>(seed % 3), nx = 1 + static_cast<Index>((seed / 3) % 3);
    const auto g = random_scenario(seed, nw, nx);
    const Index t = static_cast<Index>(seed % static_cast<std::uint64_t>(nx));
    const auto lp = sharp_event_bounds(g.scenario, t);
    const auto grid = grid_enumerate_bounds(g.scenario, t, cfg);
    const double slack = oracle_slack(g.scenario, t, cfg);
    CHECK(lp.contains(grid, slack));
    // every grid survivor is within step of a feasible LP point, and every
    // LP vertex has a grid neighbour, so this direction needs no tolerance term
    CHECK(grid.contains(lp, cfg.step + 1e-12));
  }
}

TEST_CASE("halving the step does not shrink the oracle beyond slack") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto g = random_scenario(seed, 2, 3);
    OracleConfig coarse, fine;
    coarse.step = 0.02;
    fine.step = 0.01;
    const auto a = grid_enumerate_bounds(g.scenario, 0, coarse);
    const auto b = grid_enumerate_bounds(g.scenario, 0, fine);
    CHECK(b.contains(a, oracle_slack(g.scenario, 0, coarse)));
  }
}

TEST_CASE("oracle limits") {
  const auto g = random_scenario(1, 3, 3);
  OracleConfig tiny;
  tiny.step = 1e-4;
  tiny.budget = 1e5;
  try {
    grid_enumerate_bounds(g.scenario, 0, tiny);
    FAIL("expected TooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::TooLarge);
  }
  OracleConfig bad;
  bad.step = 0.7;
  CHECK_THROWS_AS(grid_enumerate_bounds(g.scenario, 0, bad), Error);
}

TEST_CASE("bounded-variation oracle tracks the LP") {
  const auto s = appendix_c();
  OracleConfig cfg;
  cfg.step = 2e-3;
  for (double d : {0.02, 0.05, 0.1}) {
    const BvSpec<double> bv{{{"Hispanic", d}}};
    const auto lp = with_bounded_variation(s, bv, 1);
    const auto grid = grid_enumerate_bounds(s, 1, cfg, bv);
    CHECK(grid.contains(lp, cfg.step + 1e-12));
    CHECK(lp.contains(grid, oracle_slack(s, 1, cfg) + cfg.tol_for(2)));
  }
}
