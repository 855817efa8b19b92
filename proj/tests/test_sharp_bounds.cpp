#include "support.hpp"

#include "dcc/closed_form.hpp"
#include "dcc/oracle.hpp"
#include "dcc/sharp_bounds.hpp"

#include <doctest.h>

using namespace dcc;
using namespace testing;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

ScenarioD marginals_of(const ScenarioD& s) {
  ScenarioD m = s;
  m.wx = MarginalsOnly<double>{s.joint().pw(), s.joint().px()};
  return m;
}
}  // namespace

TEST_CASE("Hispanic bound does not depend on the unreported non-Hispanic rate") {
  for (double v : {0.0522, 0.10, 0.50, 0.90, 0.9478}) {
    const auto b = sharp_event_bounds(appendix_c(v), 1);
    CHECK(b.lo == doctest::Approx(14.0 / 154).epsilon(1e-12));
    CHECK(b.hi == doctest::Approx(60.0 / 154).epsilon(1e-12));
    CHECK(b.sharp);
  }
}

TEST_CASE("vacuous and point cases") {
  Mat<double> spread(2, 2);
  spread << 0.3, 0.2, 0.3, 0.2;
  const auto v = sharp_event_bounds(binary_scenario(spread, vec({0.5, 0.5})), 1);
  CHECK(v.lo == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(v.hi == doctest::Approx(1.0).epsilon(1e-12));

  Mat<double> diag = Mat<double>::Zero(3, 3);
  diag.diagonal() = vec({0.2, 0.5, 0.3});
  const auto p = sharp_event_bounds(binary_scenario(diag, vec({0.1, 0.4, 0.8})), 2);
  CHECK(p.lo == doctest::Approx(0.8));
  CHECK(p.hi == doctest::Approx(0.8));
}

TEST_CASE("aggregation collapses the LP to the mixture") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto g = random_aggregation_scenario(seed, 4, 2);
    const auto mix = point_identify_aggregation(g.scenario);
    const auto e = build_lp_event(g.scenario, 0);
    CHECK(e.lp.n_vars == 4);  // one variable per w row
    for (Index t = 0; t < 2; ++t) {
      const auto b = sharp_event_bounds(g.scenario, t);
      CHECK(b.width() <= 1e-9);
      CHECK(std::abs(b.lo - mix[static_cast<std::size_t>(t)].prob_of(1.0)) <= 1e-9);
    }
  }
}

TEST_CASE("random 3x3 LP agrees with the grid oracle") {
  OracleConfig cfg;
  cfg.step = 0.02;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto g = random_scenario(seed, 3, 3);
    CHECK(build_lp_event(g.scenario, 0).lp.n_vars == 9);
    const auto lp = sharp_event_bounds(g.scenario, 0);
    const auto grid = grid_enumerate_bounds(g.scenario, 0, cfg);
    const double slack = oracle_slack(g.scenario, 0, cfg);
    CHECK(lp.contains(grid, slack));
    CHECK(grid.contains(lp, slack));
  }
}

TEST_CASE("contradictory bounded variation is an error") {
  // pinning both x rates to the w rates breaks P(y=1) adding up
  auto s = appendix_c();
  s.y_given_w = event_table(vec({0.95, 0.05}));
  BvSpec<double> bv{{{"Hispanic", 0.0}, {"Non-Hispanic", 0.0}}};
  try {
    with_bounded_variation(s, bv, 1);
    FAIL("expected BvTooTight");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::BvTooTight);
  }
}

TEST_CASE("bounded variation") {
  const auto s = appendix_c();
  const auto free = sharp_event_bounds(s, 1);

  const auto inf = with_bounded_variation(s, {{{"Hispanic", kInf}, {"Non-Hispanic", kInf}}}, 1);
  CHECK(inf.lo == free.lo);
  CHECK(inf.hi == free.hi);

  const auto tight = with_bounded_variation(s, {{{"Hispanic", 0.05}}}, 1);
  CHECK(tight.lo > free.lo);
  CHECK(tight.hi < free.hi);
  // |P(y=1|w=H) - P(y=1|x=H)| <= 0.05 caps the target directly
  CHECK(tight.lo >= 16.0 / 112 - 0.05 - 1e-9);
  CHECK(tight.hi <= 16.0 / 112 + 0.05 + 1e-9);
  OracleConfig cfg;
  cfg.step = 2e-3;
  const auto grid = grid_enumerate_bounds(s, 1, cfg, BvSpec<double>{{{"Hispanic", 0.05}}});
  CHECK(std::abs(grid.lo - tight.lo) <= 0.01);
  CHECK(std::abs(grid.hi - tight.hi) <= 0.01);

  const auto pin = with_bounded_variation(s, {{{"Hispanic", 0.0}}}, 1);
  CHECK(pin.lo == doctest::Approx(16.0 / 112).epsilon(1e-9));
  CHECK(pin.hi == doctest::Approx(16.0 / 112).epsilon(1e-9));

  CHECK_THROWS_AS(with_bounded_variation(s, {{{"Nowhere", 0.1}}}, 1), Error);
  CHECK_THROWS_AS(with_bounded_variation(s, {{{"Hispanic", -0.1}}}, 1), Error);
}

TEST_CASE("property: BV nesting") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 0.5);
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto g = random_scenario(seed, 3, 3);
    BvSpec<double> wide, narrow;
    for (const char* k : {"c0", "c1", "c2"}) {
      const double d = u(rng);
      wide.delta[k] = d;
      narrow.delta[k] = d * u(rng) * 2;
    }
    try {
      const auto a = with_bounded_variation(g.scenario, wide, 0);
      try {
        const auto b = with_bounded_variation(g.scenario, narrow, 0);
        CHECK(a.contains(b, 1e-9));
      } catch (const Error& e) {
        CHECK(e.code() == Errc::BvTooTight);
      }
    } catch (const Error& e) {
      CHECK(e.code() == Errc::BvTooTight);
    }
  }
}

TEST_CASE("marginals-only Frechet sweep") {
  CHECK(frechet_range(112.0 / 955, 154.0 / 955).first == 0.0);
  CHECK(frechet_range(112.0 / 955, 154.0 / 955).second == doctest::Approx(0.1173).epsilon(1e-3));
  const auto half = frechet_range(0.5, 0.5);
  CHECK(half.first == 0.0);
  CHECK(half.second == 0.5);

  const auto s = appendix_c();
  const auto m = marginals_of(s);
  const auto rep = partial_knowledge_bounds(m, 1);
  CHECK(rep.interval.contains(sharp_event_bounds(s, 1), 1e-12));
  CHECK(rep.grid_points >= 101);

  // one grid point at the comonotone joint
  PartialOptions<double> one;
  one.grid_n = 1;
  one.include_breakpoints = false;
  const auto r1 = partial_knowledge_bounds(m, 1, one);
  const auto [lo, hi] = frechet_range(s.joint().pw()[1], s.joint().px()[1]);
  const auto comonotone = detail::with_joint(m, frechet_joint(s.joint().pw()[1], s.joint().px()[1], hi));
  const auto full = sharp_event_bounds(comonotone, 1);
  CHECK(r1.interval.lo == doctest::Approx(full.lo).epsilon(1e-12));
  CHECK(r1.interval.hi == doctest::Approx(full.hi).epsilon(1e-12));
  (void)lo;
}

TEST_CASE("property: marginals-only contains full and grows with grid_n") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto g = random_scenario(seed, 2, 2);
    const auto m = marginals_of(g.scenario);
    for (bool kinks : {true, false}) {
      PartialOptions<double> popt;
      popt.include_breakpoints = kinks;
      Interval prev;
      for (Index n : {3, 6, 12, 24, 48}) {
        popt.grid_n = n;
        const auto rep = partial_knowledge_bounds(m, 1, popt);
        if (kinks) CHECK(rep.interval.contains(sharp_event_bounds(g.scenario, 1), 1e-9));
        if (n > 3) CHECK(rep.interval.contains(prev, 1e-12));
        prev = rep.interval;
      }
    }
  }
}

TEST_CASE("breakpoints make the sweep exact") {
  // a dense grid without kinks approaches the kinked sweep from inside
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto m = marginals_of(random_scenario(seed, 2, 2).scenario);
    const auto exact = partial_knowledge_bounds(m, 1);
    PartialOptions<double> dense;
    dense.grid_n = 20001;
    dense.include_breakpoints = false;
    const auto approx = partial_knowledge_bounds(m, 1, dense);
    CHECK(exact.interval.contains(approx.interval, 1e-12));
    CHECK(exact.interval.lo >= approx.interval.lo - 1e-3);
    CHECK(exact.interval.hi <= approx.interval.hi + 1e-3);
    CHECK(exact.interval.sharp);
    CHECK_FALSE(approx.interval.sharp);
  }
}

TEST_CASE("candidate sets") {
  const auto s = appendix_c();
  auto single = s;
  single.wx = CandidateSet<double>{{s.joint()}};
  const auto r = candidate_set_bounds(single, 1);
  CHECK(r.interval.lo == sharp_event_bounds(s, 1).lo);
  CHECK(r.interval.hi == sharp_event_bounds(s, 1).hi);
  CHECK_FALSE(r.gap);

  // diagonal joints give point bounds at different places
  Mat<double> a(2, 2), b(2, 2);
  a << 0.5, 0, 0, 0.5;
  b << 0, 0.5, 0.5, 0;
  auto two = binary_scenario(a, vec({0.2, 0.9}));
  two.wx = CandidateSet<double>{{Joint(a), Joint(b)}};
  const auto g = candidate_set_bounds(two, 1);
  CHECK(g.gap);
  CHECK(g.interval.lo == doctest::Approx(0.2));
  CHECK(g.interval.hi == doctest::Approx(0.9));
  CHECK_FALSE(g.interval.sharp);
  REQUIRE(g.per_point.size() == 2);
  OracleConfig cfg;
  cfg.step = 0.01;
  const auto oa = grid_enumerate_bounds(detail::with_joint(two, Joint(a)), 1, cfg);
  const auto ob = grid_enumerate_bounds(detail::with_joint(two, Joint(b)), 1, cfg);
  CHECK(g.per_point[0].contains(oa, 0.02));
  CHECK(g.per_point[1].contains(ob, 0.02));

  // a fine Frechet grid as candidates matches the sweep without kinks
  const auto m = marginals_of(s);
  PartialOptions<double> popt;
  popt.grid_n = 201;
  popt.include_breakpoints = false;
  auto cands = s;
  CandidateSet<double> set;
  for (double t : frechet_thetas(s, std::get<MarginalsOnly<double>>(m.wx), popt))
    set.members.push_back(frechet_joint(s.joint().pw()[1], s.joint().px()[1], t));
  cands.wx = set;
  const auto c = candidate_set_bounds(cands, 1);
  const auto sweep = partial_knowledge_bounds(m, 1, popt);
  CHECK(c.interval.lo == doctest::Approx(sweep.interval.lo).epsilon(1e-12));
  CHECK(c.interval.hi == doctest::Approx(sweep.interval.hi).epsilon(1e-12));
}

TEST_CASE("property: monotone information") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const auto g = random_scenario(seed, 2, 2);
    const auto full = sharp_event_bounds(g.scenario, 0);
    auto cs = g.scenario;
    const auto& j = g.scenario.joint();
    const auto [lo, hi] = frechet_range(j.pw()[1], j.px()[1]);
    cs.wx = CandidateSet<double>{{j, frechet_joint(j.pw()[1], j.px()[1], lo), frechet_joint(j.pw()[1], j.px()[1], hi)}};
    const auto cand = candidate_set_bounds(cs, 0);
    const auto marg = partial_knowledge_bounds(marginals_of(g.scenario), 0);
    CHECK(cand.interval.contains(full, 1e-12));
    CHECK(marg.interval.contains(cand.interval, 1e-9));
  }
}

TEST_CASE("unsupported shapes") {
  const auto g = random_scenario(3, 3, 2);
  const auto m = marginals_of(g.scenario);
  try {
    partial_knowledge_bounds(m, 0);
    FAIL("expected UnsupportedShape");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnsupportedShape);
  }
  auto nb = appendix_c();
  nb.y_support = vec({0, 1, 2});
  nb.y_given_w = Mat<double>::Constant(2, 3, 1.0 / 3);
  CHECK_THROWS_AS(sharp_event_bounds(nb, 1), Error);
}

TEST_CASE("long double LP bounds") {
  const auto g = random_scenario<long double>(4, 2, 3);
  const auto b = sharp_event_bounds(g.scenario, 1);
  const auto d = sharp_event_bounds(random_scenario(4, 2, 3).scenario, 1);
  CHECK(static_cast<double>(b.lo) == doctest::Approx(d.lo).epsilon(1e-12));
  CHECK(static_cast<double>(b.hi) == doctest::Approx(d.hi).epsilon(1e-12));
}
