#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "gridcs/model.hpp"
#include "oracles.hpp"

using namespace gridcs;
using Catch::Approx;

namespace {

BinnedCounts counts(std::vector<std::int64_t> N, std::vector<std::int64_t> Z) {
  const GridSpec g = GridSpec::from_count(0.0, 1.0, N.size());
  return {g, std::move(N), std::move(Z)};
}

BinnedCounts random_counts(std::mt19937_64 &rng, std::size_t K, bool allow_empty) {
  std::uniform_int_distribution<std::int64_t> nd(allow_empty ? 0 : 1, 12);
  BinnedCounts b = counts(std::vector<std::int64_t>(K), std::vector<std::int64_t>(K));
  for (std::size_t i = 0; i < K; ++i) {
    b.N[i] = nd(rng);
    b.Z[i] = std::uniform_int_distribution<std::int64_t>(0, b.N[i])(rng);
  }
  if (b.total() == 0) b.N[0] = 1;
  return b;
}

}  // namespace

TEST_CASE("grid construction", "[grid]") {
  const GridSpec g = GridSpec::from_spacing(0.0, 1.0, 0.5 / 10.0);
  CHECK(g.size() == 20);
  CHECK(g.point(0) == Approx(0.05));
  CHECK(g.point(19) == Approx(1.0));

  // 0.1 does not divide 1 exactly in binary; the count must still be 10.
  CHECK(GridSpec::from_spacing(0.0, 1.0, 0.1).size() == 10);
  CHECK(GridSpec::from_spacing(0.0, 1.0, 0.3).size() == 3);

  CHECK_THROWS(GridSpec::from_spacing(1.0, 0.0, 0.1));
  CHECK_THROWS(GridSpec::from_spacing(0.0, 1.0, 0.0));
  CHECK_THROWS(GridSpec::from_spacing(0.0, 1.0, 2.0));

  CHECK(g.snap(0.35) == 6);
  CHECK(g.snap(0.35 + 1e-12) == 6);
  CHECK(g.snap(0.36) == GridSpec::npos);
  CHECK(g.snap(0.0) == GridSpec::npos);
}

TEST_CASE("bin counts records", "[bin]") {
  const GridSpec g = GridSpec::from_spacing(0.0, 0.5, 0.25);
  REQUIRE(g.size() == 2);
  const BinnedCounts b = bin({{0.25, 1}, {0.25, 0}, {0.5, 1}}, g);
  CHECK(b.N == std::vector<std::int64_t>{2, 1});
  CHECK(b.Z == std::vector<std::int64_t>{1, 1});
  CHECK(b.total() == 3);

  CHECK_THROWS_WITH(bin({}, g), "no observations");
  CHECK_THROWS_WITH(bin({{0.3, 1}}, g), "off-grid observation");

  const BinnedCounts zeros = bin({{0.25, 0}, {0.5, 0}, {0.5, 0}}, g);
  CHECK(zeros.Z == std::vector<std::int64_t>{0, 0});
}

TEST_CASE("npmle documented inputs", "[npmle]") {
  const auto e1 = npmle(counts({2, 2, 2}, {0, 2, 1}));
  CHECK(e1.levels[0] == 0.0);
  CHECK(e1.levels[1] == Approx(0.75).margin(1e-15));
  CHECK(e1.levels[2] == Approx(0.75).margin(1e-15));

  CHECK(npmle(counts({5, 5}, {1, 4})).levels == std::vector<double>{0.2, 0.8});
  CHECK(npmle(counts({3}, {3})).levels == std::vector<double>{1.0});

  const auto g1 = npmle_via_gcm(counts({2, 2, 2}, {0, 2, 1}));
  CHECK(g1.levels[0] == Approx(0.0).margin(1e-15));
  CHECK(g1.levels[1] == Approx(0.75).margin(1e-15));
  CHECK(g1.levels[2] == Approx(0.75).margin(1e-15));
  const auto g2 = npmle_via_gcm(counts({5, 5}, {1, 4}));
  CHECK(g2.levels[0] == Approx(0.2).margin(1e-15));
  CHECK(g2.levels[1] == Approx(0.8).margin(1e-15));
}

TEST_CASE("npmle carries levels across empty bins", "[npmle]") {
  const auto est = npmle(counts({0, 4, 0, 0, 2}, {0, 1, 0, 0, 2}));
  CHECK(est.empty_bins == 3);
  CHECK(est.levels == std::vector<double>{0.25, 0.25, 0.25, 0.25, 1.0});
  CHECK(npmle_via_gcm(counts({0, 4, 0, 0, 2}, {0, 1, 0, 0, 2})).levels == est.levels);

  CHECK_THROWS_WITH(npmle(counts({0, 0}, {0, 0})), "no observations");
}

TEST_CASE("npmle matches the minorant route and exhaustive search", "[npmle][property]") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t K = 1 + trial % 50;
    const BinnedCounts b = random_counts(rng, K, trial % 4 == 0);
    const auto a = npmle(b);
    const auto c = npmle_via_gcm(b);
    for (std::size_t i = 0; i < K; ++i) {
      REQUIRE(std::abs(a.levels[i] - c.levels[i]) <= 1e-12);
      REQUIRE(a.levels[i] >= 0.0);
      REQUIRE(a.levels[i] <= 1.0);
      if (i > 0) REQUIRE(a.levels[i - 1] <= a.levels[i]);
    }
    if (K <= 8 && b.total() > 0) {
      std::vector<double> v, w;
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < K; ++i)
        if (b.N[i] > 0) {
          v.push_back(b.average(i));
          w.push_back(static_cast<double>(b.N[i]));
          idx.push_back(i);
        }
      const auto ref = oracle::isotonic_brute_force(v, w);
      for (std::size_t j = 0; j < idx.size(); ++j) REQUIRE(std::abs(a.levels[idx[j]] - ref[j]) <= 1e-12);
    }
  }
}

TEST_CASE("npmle is the identity on ordered averages", "[npmle][property]") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const BinnedCounts b = random_counts(rng, 2 + trial % 20, false);
    if (!naive_is_monotone(b)) continue;
    const auto est = npmle(b);
    for (std::size_t i = 0; i < b.N.size(); ++i) REQUIRE(est.levels[i] == b.average(i));
  }
}

TEST_CASE("eval_step", "[step]") {
  const GridSpec g = GridSpec::from_spacing(0.0, 1.0, 0.25);
  const StepEstimate est{g, {0.1, 0.2, 0.6, 0.9}, 0};
  CHECK(eval_step(est, 0.0) == 0.0);
  CHECK(eval_step(est, 0.2) == 0.0);
  CHECK(eval_step(est, 0.25) == 0.1);
  CHECK(eval_step(est, 0.5) == 0.2);
  CHECK(eval_step(est, 0.75) == 0.6);
  CHECK(eval_step(est, 1.0) == 0.9);
  for (std::size_t i = 1; i < 4; ++i) {
    CHECK(eval_step(est, g.point(i)) == est.levels[i]);
    CHECK(eval_step(est, g.point(i) - 0.1) == est.levels[i - 1]);
  }
  CHECK_THROWS_WITH(eval_step(est, -0.01), "out of domain");
  CHECK_THROWS_WITH(eval_step(est, 1.01), "out of domain");
}

TEST_CASE("locate_anchor", "[anchor]") {
  const GridSpec g = GridSpec::from_spacing(0.0, 1.0, 0.1);
  const Anchor on = locate_anchor(g, 0.5);
  CHECK(g.point(on.l) == Approx(0.5));
  CHECK(g.point(on.r) == Approx(0.6));
  CHECK(on.rho == 0.0);

  const Anchor mid = locate_anchor(g, 0.55);
  CHECK(g.point(mid.l) == Approx(0.5));
  CHECK(mid.rho == Approx(0.5));

  CHECK_THROWS_WITH(locate_anchor(g, 1.0), "anchor outside grid");
  CHECK_THROWS_WITH(locate_anchor(g, 0.05), "anchor outside grid");
  CHECK_NOTHROW(locate_anchor(g, 0.1));
}

TEST_CASE("naive_is_monotone", "[diagnostic]") {
  CHECK(naive_is_monotone(counts({2, 2, 2, 2}, {0, 1, 1, 2})));
  CHECK_FALSE(naive_is_monotone(counts({5, 10, 2}, {0, 6, 1})));
  CHECK(naive_is_monotone(counts({0, 7, 0}, {0, 3, 0})));
  CHECK(naive_is_monotone(counts({4, 0, 2}, {2, 0, 1})));
}
