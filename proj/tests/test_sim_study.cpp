#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <vector>

#include "gridcs/sim_study.hpp"
#include "oracles.hpp"

using namespace gridcs;
using Catch::Approx;

namespace {

ScenarioSpec scenario(double gamma, double c, std::int64_t n) {
  ScenarioSpec s;
  s.gamma0 = gamma;
  s.c0 = c;
  s.n = n;
  return s;
}

const double kRegimes[6][2] = {{1.0 / 6, 1.0 / 6}, {0.25, 0.25}, {1.0 / 3, 0.5},
                               {0.5, 1.0},         {2.0 / 3, 2.0}, {0.75, 3.0}};

}  // namespace

TEST_CASE("build_grid", "[grid]") {
  const GridSpec g1 = build_grid(scenario(1.0 / 3.0, 0.5, 1000));
  CHECK(g1.delta() == Approx(0.05).epsilon(1e-14));
  CHECK(g1.size() == 20);

  const GridSpec g2 = build_grid(scenario(1.0, 1.0, 100));
  CHECK(g2.delta() == Approx(0.01).epsilon(1e-14));
  CHECK(g2.size() == 100);

  ScenarioSpec s3 = scenario(0.5, 1.0, 100);
  s3.b = 2.0;
  s3.x0 = 1.0;
  const GridSpec g3 = build_grid(s3);
  CHECK(g3.delta() == Approx(0.1).epsilon(1e-14));
  CHECK(g3.size() == 20);

  CHECK_THROWS_WITH(build_grid(scenario(0.1, 0.9, 10)), "grid too coarse");
  CHECK_THROWS(build_grid(scenario(0.0, 0.5, 100)));

  ScenarioSpec fixed = scenario(1.0 / 3.0, 0.5, 100);
  fixed.fixed_K = 5;
  CHECK(build_grid(fixed).size() == 5);
  CHECK(build_grid(fixed).point(4) == 1.0);
}

TEST_CASE("discretize_G", "[design]") {
  const GridSpec g = GridSpec::from_spacing(0.0, 1.0, 0.05);
  const auto p = discretize_G(g, Distribution::uniform(0.0, 1.0));
  REQUIRE(p.size() == 20);
  for (double v : p) CHECK(v == Approx(0.05).epsilon(1e-12));

  const GridSpec g2 = GridSpec::from_count(0.0, 1.0, 2);
  const Distribution e = Distribution::exponential(2.0);
  const auto p2 = discretize_G(g2, e);
  CHECK(p2[0] == e.cdf(0.5));
  CHECK(p2[1] == 1.0 - e.cdf(0.5));

  for (const std::size_t K : {2, 3, 17, 101}) {
    const auto pk = discretize_G(GridSpec::from_count(0.0, 3.0, K), Distribution::exponential(0.7));
    CHECK(std::accumulate(pk.begin(), pk.end(), 0.0) == Approx(1.0).margin(1e-12));
  }

  CHECK_THROWS_WITH(discretize_G(g, [](double t) { return 1.0 - t; }), "invalid CDF");
}

TEST_CASE("degenerate event times", "[generator]") {
  ScenarioSpec s = scenario(1.0 / 3.0, 0.5, 2000);
  s.F = Distribution::point(0.01);
  RandomStream r1(1);
  for (const Observation &o : generate_dataset(s, r1)) REQUIRE(o.y == 1);
  s.F = Distribution::point(1.5);
  RandomStream r2(1);
  for (const Observation &o : generate_dataset(s, r2)) REQUIRE(o.y == 0);
}

TEST_CASE("generated responses follow F at each grid point", "[generator][statistical]") {
  const ScenarioSpec s = scenario(1.0 / 3.0, 0.5, 100000);
  RandomStream rng(17);
  const GridSpec g = build_grid(s);
  const BinnedCounts b = bin(generate_dataset(s, rng), g);
  REQUIRE(b.total() == 100000);
  int outside = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double F = g.point(i);
    const double se = std::sqrt(F * (1 - F) / static_cast<double>(b.N[i]));
    const double mean = b.average(i);
    if (F >= 1.0) {
      CHECK(mean == 1.0);
      continue;
    }
    if (std::abs(mean - F) > 3.0 * se) ++outside;
  }
  // 91 checks at 3 standard errors: expect fewer than one miss.
  CHECK(outside <= 2);
}

TEST_CASE("exponential event times pass a goodness-of-fit test", "[generator][statistical]") {
  const Distribution e = Distribution::exponential(2.0);
  RandomStream rng(99);
  std::vector<double> t(100000);
  for (double &v : t) v = e.quantile(rng.uniform());
  const double d = ks_distance(t, [&](double x) { return e.cdf(x); });
  const double pvalue = oracle::kolmogorov_survival(std::sqrt(static_cast<double>(t.size())) * d);
  CHECK(pvalue > 0.001);
}

TEST_CASE("coverage study is reproducible and thread independent", "[coverage]") {
  ScenarioSpec s = scenario(0.5, 1.0, 200);
  s.reps = 40;
  s.sampler.B = 200;
  s.seed = 5;
  s.keep_per_rep = true;
  const CoverageReport a = run_coverage(s);
  s.threads = 3;
  const CoverageReport b = run_coverage(s);
  CHECK(a.CR_P == b.CR_P);
  CHECK(a.AL_P == b.AL_P);
  CHECK(a.CR_T == b.CR_T);
  CHECK(a.AL_T == b.AL_T);
  CHECK(a.AL_O == b.AL_O);
  REQUIRE(a.per_rep.size() == b.per_rep.size());
  for (std::size_t i = 0; i < a.per_rep.size(); ++i) CHECK(a.per_rep[i].length_P == b.per_rep[i].length_P);
  CHECK(a.successes + a.failures == s.reps);
  CHECK(a.CR_P >= 0.0);
  CHECK(a.CR_P <= 1.0);
  CHECK(a.AL_T >= 0.0);
}

TEST_CASE("extreme miscoverage gives tiny intervals", "[coverage]") {
  ScenarioSpec s = scenario(1.0 / 3.0, 0.5, 500);
  s.reps = 100;
  s.sampler.B = 500;
  s.eta = 0.999;
  const CoverageReport r = run_coverage(s);
  CHECK(r.AL_P < 0.01);
  CHECK(r.CR_P < 0.15);
}

TEST_CASE("adaptive intervals across the six regimes", "[coverage][statistical]") {
  for (const auto &rg : kRegimes) {
    ScenarioSpec small = scenario(rg[0], rg[1], 100);
    small.reps = 150;
    small.sampler.B = 400;
    small.seed = 61;
    ScenarioSpec large = small;
    large.n = 500;
    large.reps = 300;
    const CoverageReport r100 = run_coverage(small);
    const CoverageReport r500 = run_coverage(large);
    INFO("gamma = " << rg[0] << ", c = " << rg[1] << ", CR_P = " << r500.CR_P << ", CR_T = " << r500.CR_T
                    << ", AL_P(100) = " << r100.AL_P << ", AL_P(500) = " << r500.AL_P);
    CHECK(r500.AL_P < r100.AL_P);
    CHECK(r500.CR_T >= r500.CR_P - 0.02);
  }
}

TEST_CASE("ecdf comparison table", "[ecdf]") {
  SamplerConfig cfg;
  cfg.B = 1000;
  const double cs[] = {0.5, 2.0, 10.0};
  const auto rows = ecdf_compare(std::sqrt(2.0) / 4.0, 0.25, cs, cfg);
  REQUIRE(rows.size() == 3);
  for (const EcdfRow &r : rows) {
    CHECK(r.ks_gaussian >= 0.0);
    CHECK(r.ks_gaussian <= 1.0);
    CHECK(r.ks_chernoff >= 0.0);
    CHECK(r.ks_chernoff <= 1.0);
  }
  CHECK(rows[2].ks_gaussian < rows[0].ks_gaussian);
  cfg.B = 999;
  CHECK_THROWS(ecdf_compare(0.5, 0.5, cs, cfg));
}

TEST_CASE("ordering of naive averages", "[diagnostic][statistical]") {
  ScenarioSpec coarse = scenario(1.0 / 3.0, 0.5, 10000);
  coarse.fixed_K = 5;
  CHECK(naive_ordering_rate(coarse, 500) >= 0.99);

  ScenarioSpec two = coarse;
  two.fixed_K = 2;
  two.n = 100000;
  CHECK(naive_ordering_rate(two, 200) == 1.0);

  // One grid point per observation on average: violations are certain.
  const ScenarioSpec dense = scenario(1.0, 1.0, 200);
  CHECK(naive_ordering_rate(dense, 200) < 0.01);
}
