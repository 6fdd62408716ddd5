#include <cmath>

#include "doctest.h"
#include "ergolab/experiment.hpp"

using namespace ergolab;

TEST_CASE("config schema is enforced") {
  CHECK_THROWS_AS(parse_config("not json", "cover"), ConfigError);
  CHECK_THROWS_AS(parse_config("{\"typo\":1}", "cover"), ConfigError);
  CHECK_THROWS_AS(parse_config("{}", "launch-missiles"), ConfigError);
  CHECK_THROWS_AS(parse_config("{\"kind\":\"cover\"}", "decay-curve"), ConfigError);
  // empty N range is a schema violation
  CHECK_THROWS_AS(parse_config("{\"seed\":1,\"n_range\":[2,1]}", "decay-curve"),
                  ConfigError);
  // stochastic kinds demand a seed
  CHECK_THROWS_AS(parse_config("{}", "cover"), ConfigError);
  CHECK_THROWS_AS(parse_config("{}", "decay-curve"), ConfigError);
  CHECK_NOTHROW(parse_config("{}", "counterexample"));
  ExperimentConfig c = parse_config(
      "{\"seed\":3,\"gap\":{\"alpha\":\"2/5\",\"beta\":\"3/5\"},\"n_range\":[0,4]}",
      "decay-curve");
  CHECK(c.alpha == Rat(2, 5));
  CHECK(c.n_hi == 4);
  CHECK(*c.seed == 3);
}

TEST_CASE("exact decimal expansion") {
  CHECK(decimal_text(Rat(1, 4), 4) == "0.2500");
  CHECK(decimal_text(Rat(-7, 3), 3) == "-2.333");
  CHECK(decimal_text(Rat(5), 2) == "5.00");
}

TEST_CASE("decay fit recovers exact geometric input") {
  DecayFit f = fit_decay({{0, 1.0}, {1, 0.5}, {2, 0.25}, {3, 0.125}});
  CHECK(std::abs(f.c0 - 0.5) < 1e-12);
  CHECK(std::abs(f.c1 - 1.0) < 1e-12);
  CHECK(f.residual < 1e-12);
  DecayFit flat = fit_decay({{0, 0.3}, {1, 0.3}, {2, 0.3}});
  CHECK(std::abs(flat.c0 - 1.0) < 1e-12);
  CHECK_THROWS_AS(fit_decay({{0, 1.0}, {1, 0.5}, {2, 0.0}}), std::invalid_argument);
}

TEST_CASE("check-sequence on 1-d boxes certifies temperedness") {
  ExperimentConfig c = parse_config(
      "{\"sequence\":{\"kind\":\"boxes\",\"horizon\":32,\"dim_or_base\":1},"
      "\"tempered_c\":3}",
      "check-sequence");
  RunReport r = run(c);
  CHECK(r.pass);
  CHECK(r.rows.size() == 31);
  CHECK(r.rows[0][5] == "1");  // exact flag
}

TEST_CASE("decay-curve on the bernoulli shift decays monotonically") {
  ExperimentConfig c = parse_config(
      "{\"seed\":7,\"system\":{\"kind\":\"bernoulli\"},"
      "\"sequence\":{\"kind\":\"powers\",\"horizon\":6,\"dim_or_base\":4},"
      "\"n_range\":[0,3],\"samples\":2000}",
      "decay-curve");
  RunReport r = run(c);
  CHECK(r.pass);
  REQUIRE(r.rows.size() == 4);
  double prev = 2;
  for (auto& row : r.rows) {
    double est = std::stod(row[1]);
    CHECK(est <= prev);
    prev = est;
  }
  // reproducibility: identical seed, byte-identical csv
  CHECK(run(c).csv() == r.csv());
}

TEST_CASE("bound-constants reproduces the reference gap") {
  ExperimentConfig c = parse_config(
      "{\"bound\":{\"alpha\":1,\"beta\":2,\"s\":2}}", "bound-constants");
  RunReport r = run(c);
  CHECK(r.pass);
  REQUIRE(r.rows.size() == 6);
  CHECK(r.rows[0][1] == "1/2");    // delta
  CHECK(r.rows[1][1] == "1/32");   // eps
  CHECK(r.rows[2][1] == "81920");  // q
  CHECK(r.rows[5][1] == "125/64"); // c1
}

TEST_CASE("cover experiment certifies the dichotomy") {
  ExperimentConfig c = parse_config(
      "{\"seed\":11,\"sequence\":{\"kind\":\"powers\",\"horizon\":6},"
      "\"instances\":20,\"eps\":\"1/2\"}",
      "cover");
  RunReport r = run(c);
  CHECK(r.pass);
  CHECK(r.rows.size() == 20);
  CHECK(run(c).csv() == r.csv());
}

TEST_CASE("proof-step certifies one growth round") {
  ExperimentConfig c = parse_config("{}", "proof-step");
  RunReport r = run(c);
  CHECK(r.pass);
  CHECK(!r.rows.empty());
}

TEST_CASE("counterexample experiment passes and is deterministic") {
  ExperimentConfig c = parse_config("{\"construction\":{\"stages\":1}}",
                                    "counterexample");
  RunReport r = run(c);
  CHECK(r.pass);
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0][11] == "1");  // exact flag
  CHECK(run(c).csv() == r.csv());
}

TEST_CASE("budget is enforced") {
  ExperimentConfig c = parse_config(
      "{\"seed\":7,\"system\":{\"kind\":\"bernoulli\"},"
      "\"sequence\":{\"kind\":\"powers\",\"horizon\":6,\"dim_or_base\":4},"
      "\"n_range\":[0,3],\"samples\":100000}",
      "decay-curve");
  c.budget_seconds = 1e-9;
  CHECK_THROWS_AS(run(c), BudgetError);
}
