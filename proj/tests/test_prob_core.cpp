#include "support.hpp"

#include "dcc/oracle.hpp"

#include <doctest.h>

using namespace dcc;
using namespace testing;

TEST_CASE("from_counts normalizes and keeps exact fractions") {
  CountMatrix c(2, 2);
  c << 2, 1, 1, 2;
  const auto j = Joint::from_counts(c);
  CHECK(j(0, 0) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(j(0, 1) == doctest::Approx(1.0 / 6).epsilon(1e-15));
  CHECK(*j.exact(0, 1) == Rational{1, 6});
  CHECK(*j.exact_x_given_w(0, 0) == Rational{2, 3});

  CountMatrix id(2, 2);
  id << 1, 0, 0, 1;
  const auto d = Joint::from_counts(id);
  CHECK(d(0, 0) == 0.5);
  CHECK(d(1, 1) == 0.5);
  CHECK(d(0, 1) == 0.0);
}

TEST_CASE("from_counts rejects bad input") {
  CountMatrix neg(1, 2);
  neg << 1, -1;
  CHECK_THROWS_AS(Joint::from_counts(neg), Error);
  CountMatrix zero_row(2, 2);
  zero_row << 1, 1, 0, 0;
  try {
    Joint::from_counts(zero_row);
    FAIL("expected DegenerateMargin");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DegenerateMargin);
  }
}

TEST_CASE("race/ethnicity cross-tabulation marginals and conditionals") {
  const auto j = Joint::from_counts(table1_counts());
  CHECK(j.counts()->sum() == 955);
  CHECK(*j.exact_x_given_w(2, 2) == Rational::make(110, 112));
  // the Hispanic w row has 2 respondents answering non-Hispanic under the new format
  const Mat<double> xw = condition_x_given_w(j);
  CHECK(1.0 - xw(2, 2) == doctest::Approx(2.0 / 112).epsilon(1e-12));
  const Mat<double> wx = condition_w_given_x(j);
  CHECK(wx(2, 2) == doctest::Approx(110.0 / 154).epsilon(1e-12));
  CHECK(j.pw()[2] == doctest::Approx(112.0 / 955).epsilon(1e-12));
  CHECK(j.px()[2] == doctest::Approx(154.0 / 955).epsilon(1e-12));
  const auto agg = detect_aggregation(j);
  CHECK(agg.kind == AggregationStructure::Kind::Neither);
  const double disc = discordant_mass(j, table1_labels(), table1_labels());
  CHECK(disc == doctest::Approx(114.0 / 955).epsilon(1e-12));
  CHECK(disc >= 0.115);
  CHECK(disc <= 0.125);
}

TEST_CASE("conditioning on diagonal and uniform joints") {
  Mat<double> diag(2, 2);
  diag << 0.3, 0, 0, 0.7;
  const Joint d(diag);
  CHECK(condition_x_given_w(d).isApprox(Mat<double>::Identity(2, 2)));
  CHECK(condition_w_given_x(d).isApprox(Mat<double>::Identity(2, 2)));
  const Joint u(Mat<double>::Constant(2, 2, 0.25));
  CHECK((condition_x_given_w(u).array() == 0.5).all());
  CHECK((condition_w_given_x(u).array() == 0.5).all());
}

TEST_CASE("property: Bayes identity and count round-trip") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const auto g = random_scenario(seed, 1 + seed % 3, 1 + (seed / 3) % 4);
    const auto& j = g.scenario.joint();
    const Mat<double> xw = condition_x_given_w(j), wx = condition_w_given_x(j);
    for (Index w = 0; w < j.rows(); ++w)
      for (Index x = 0; x < j.cols(); ++x)
        CHECK(std::abs(j.pw()[w] * xw(w, x) - j.px()[x] * wx(w, x)) <= 1e-12);
    CHECK(std::abs(xw.rowwise().sum().maxCoeff() - 1) <= 1e-12);
    CHECK(std::abs(wx.colwise().sum().minCoeff() - 1) <= 1e-12);
  }
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 40; ++rep) {
    CountMatrix c(3, 4);
    for (Index i = 0; i < c.size(); ++i) c.data()[i] = 1 + static_cast<std::int64_t>(rng() % 500);
    const auto j = Joint::from_counts(c);
    const double total = static_cast<double>(c.sum());
    for (Index w = 0; w < 3; ++w) {
      CHECK(std::abs(j.pw()[w] - static_cast<double>(c.row(w).sum()) / total) <= 1e-12);
      CHECK(*j.exact(w, 0) == Rational::make(c(w, 0), c.sum()));
    }
    for (Index x = 0; x < 4; ++x) CHECK(std::abs(j.px()[x] - static_cast<double>(c.col(x).sum()) / total) <= 1e-12);
  }
}

TEST_CASE("detect_aggregation recovers deterministic maps") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const Index nx = 1 + static_cast<Index>(seed % 3), nw = nx + static_cast<Index>(seed % 2);
    const auto g = random_aggregation_scenario(seed, nw, nx);
    const auto& j = g.scenario.joint();
    const auto agg = detect_aggregation(j);
    REQUIRE(agg.kind == AggregationStructure::Kind::XAggregatesW);
    for (Index w = 0; w < nw; ++w) CHECK(j(w, agg.map[static_cast<std::size_t>(w)]) > 0);
  }
  // one aggregate w over four subgroups
  Mat<double> asian(1, 4);
  asian << 0.2284, 0.1975, 0.2208, 0.3533;
  CHECK(detect_aggregation(Joint(asian)).kind == AggregationStructure::Kind::WAggregatesX);
}

TEST_CASE("validate_scenario messages") {
  CHECK(validate_scenario(appendix_c()).empty());

  auto s = appendix_c();
  s.y_given_w(0, 0) = 0.8;  // row sums to 0.9
  const auto v = validate_scenario(s);
  REQUIRE(v.size() == 1);
  CHECK(v[0] == "y_given_w[Non-Hispanic] not normalized");
  CHECK_THROWS_AS(require_valid(s), Error);

  auto b = appendix_c();
  b.bv_deltas["Martian"] = 0.1;
  const auto vb = validate_scenario(b);
  REQUIRE(vb.size() == 1);
  CHECK(vb[0].rfind("bv key not in label sets", 0) == 0);
}

TEST_CASE("labels and distributions") {
  CHECK_THROWS_AS(LabelSet({"a", "a"}), Error);
  CHECK_THROWS_AS(LabelSet(std::vector<std::string>{}), Error);
  const LabelSet l{"a", "b"};
  CHECK(l.index_of("b") == 1);
  CHECK_FALSE(l.find("c"));

  const Distribution d(vec({1, 2, 3}), vec({0.5, 0.3, 0.2}));
  CHECK(d.mean() == doctest::Approx(1.7));
  CHECK(d.quantile(0.5) == 1);
  CHECK(d.quantile(0.51) == 2);
  CHECK(d.quantile(1.0) == 3);
  CHECK_THROWS_AS(Distribution(vec({2, 1}), vec({0.5, 0.5})), Error);
  CHECK_THROWS_AS(Distribution(vec({1, 2}), vec({0.5, 0.4})), Error);
}

TEST_CASE("long double instantiation") {
  Mat<long double> t(2, 2);
  t << 0.25L, 0.25L, 0.1L, 0.4L;
  const JointWX<long double> j(t);
  const Mat<long double> xw = condition_x_given_w(j);
  CHECK(static_cast<double>(xw(1, 1)) == doctest::Approx(0.8));
  const DiscreteDistribution<long double> d(Vec<long double>::LinSpaced(3, 0, 2),
                                            Vec<long double>::Constant(3, 1.0L / 3));
  CHECK(static_cast<double>(d.mean()) == doctest::Approx(1.0));
}
