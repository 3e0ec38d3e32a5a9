#pragma once

// Simulation harness: discretized inspection designs, synthetic current
// status data, and the coverage / average-length study of the adaptive
// interval against its idealized (true-nuisance) counterpart and the
// known-regime oracle.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "gridcs/adaptive_ci.hpp"
#include "gridcs/ecdf.hpp"
#include "gridcs/error.hpp"
#include "gridcs/limits.hpp"
#include "gridcs/model.hpp"
#include "gridcs/nuisance.hpp"
#include "gridcs/parallel.hpp"
#include "gridcs/rng.hpp"

namespace gridcs {

/// Continuous distributions used for event and inspection times. `point`
/// is a degenerate law, kept for testing.
struct Distribution {
  enum class Kind { uniform, exponential, point };
  Kind kind = Kind::uniform;
  double p1 = 0.0;  // uniform: lower; exponential: rate; point: location
  double p2 = 1.0;  // uniform: upper

  static Distribution uniform(double lo, double hi) { return {Kind::uniform, lo, hi}; }
  static Distribution exponential(double rate) { return {Kind::exponential, rate, 0.0}; }
  static Distribution point(double at) { return {Kind::point, at, 0.0}; }

  void validate() const {
    switch (kind) {
      case Kind::uniform:
        if (!(p1 < p2)) fail(ErrorKind::invalid_argument, "uniform requires lower < upper");
        break;
      case Kind::exponential:
        if (!(p1 > 0.0)) fail(ErrorKind::invalid_argument, "exponential rate must be positive");
        break;
      case Kind::point: break;
    }
  }

  double cdf(double t) const {
    switch (kind) {
      case Kind::uniform: return std::clamp((t - p1) / (p2 - p1), 0.0, 1.0);
      case Kind::exponential: return t <= 0.0 ? 0.0 : -std::expm1(-p1 * t);
      case Kind::point: return t >= p1 ? 1.0 : 0.0;
    }
    return 0.0;
  }

  double density(double t) const {
    switch (kind) {
      case Kind::uniform: return (t >= p1 && t <= p2) ? 1.0 / (p2 - p1) : 0.0;
      case Kind::exponential: return t < 0.0 ? 0.0 : p1 * std::exp(-p1 * t);
      case Kind::point: return 0.0;
    }
    return 0.0;
  }

  double quantile(double u) const {
    switch (kind) {
      case Kind::uniform: return p1 + u * (p2 - p1);
      case Kind::exponential: return -std::log1p(-u) / p1;
      case Kind::point: return p1;
    }
    return 0.0;
  }

  std::string name() const {
    switch (kind) {
      case Kind::uniform: return "uniform";
      case Kind::exponential: return "exponential";
      case Kind::point: return "point";
    }
    return "unknown";
  }
};

struct ScenarioSpec {
  std::string name;
  double a = 0.0;
  double b = 1.0;
  double x0 = 0.5;
  Distribution F = Distribution::uniform(0.0, 1.0);
  Distribution G = Distribution::uniform(0.0, 1.0);
  double gamma0 = 1.0 / 3.0;
  double c0 = 0.5;
  std::optional<std::size_t> fixed_K;  // overrides delta = c0 n^-gamma0
  std::int64_t n = 500;
  std::int64_t reps = 1000;
  double eta = 0.05;
  std::uint64_t seed = 1;
  SamplerConfig sampler;
  NuisanceOptions nuisance;
  unsigned threads = 1;
  bool keep_per_rep = false;

  void validate() const {
    if (!(a < x0 && x0 < b)) fail(ErrorKind::invalid_argument, "scenario requires a < x0 < b");
    if (!(gamma0 > 0.0 && gamma0 <= 1.0)) fail(ErrorKind::invalid_argument, "gamma must lie in (0, 1]");
    if (!(c0 > 0.0)) fail(ErrorKind::invalid_argument, "c must be positive");
    if (n < 1) fail(ErrorKind::invalid_argument, "n must be positive");
    if (reps < 1) fail(ErrorKind::invalid_argument, "reps must be positive");
    if (!(eta > 0.0 && eta < 1.0)) fail(ErrorKind::invalid_argument, "eta must lie in (0, 1)");
    F.validate();
    G.validate();
    sampler.validate();
  }
};

inline bool is_boundary_regime(double gamma) { return std::abs(gamma - 1.0 / 3.0) < 1e-9; }

/// delta = c0 n^{-gamma0}, K = floor((b - a) / delta); needs K >= 2.
inline GridSpec build_grid(const ScenarioSpec &spec) {
  spec.validate();
  GridSpec g = spec.fixed_K
                   ? GridSpec::from_count(spec.a, spec.b, *spec.fixed_K)
                   : GridSpec::from_spacing(
                         spec.a, spec.b,
                         spec.c0 * (is_boundary_regime(spec.gamma0)
                                        ? 1.0 / std::cbrt(static_cast<double>(spec.n))
                                        : std::pow(static_cast<double>(spec.n), -spec.gamma0)));
  if (g.size() < 2) fail(ErrorKind::invalid_argument, "grid too coarse");
  return g;
}

/// Inspection probabilities p_1 = G(t_1), p_i = G(t_i) - G(t_{i-1}),
/// p_K = 1 - G(t_{K-1}).
template <class Cdf>
  requires std::is_invocable_r_v<double, Cdf &, double>
std::vector<double> discretize_G(const GridSpec &grid, Cdf &&G) {
  const std::size_t K = grid.size();
  std::vector<double> p(K);
  if (K == 1) {
    p[0] = 1.0;
    return p;
  }
  double prev = 0.0;
  for (std::size_t i = 0; i + 1 < K; ++i) {
    const double cur = G(grid.point(i));
    p[i] = cur - prev;
    prev = cur;
  }
  p[K - 1] = 1.0 - prev;
  for (double v : p)
    if (v < 0.0 || !std::isfinite(v)) fail(ErrorKind::invalid_argument, "invalid CDF");
  return p;
}

inline std::vector<double> discretize_G(const GridSpec &grid, const Distribution &G) {
  return discretize_G(grid, [&](double t) { return G.cdf(t); });
}

/// n records: X from the discretized design, T from F, Y = 1{T <= X}.
inline ObservationSet generate_dataset(const ScenarioSpec &spec, const GridSpec &grid,
                                       std::span<const double> p, RandomStream &rng) {
  std::vector<double> cum(p.size());
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) cum[i] = (s += p[i]);
  ObservationSet obs;
  obs.reserve(static_cast<std::size_t>(spec.n));
  for (std::int64_t j = 0; j < spec.n; ++j) {
    const double u = rng.uniform() * s;
    auto it = std::upper_bound(cum.begin(), cum.end(), u);
    std::size_t i = static_cast<std::size_t>(it - cum.begin());
    if (i >= cum.size()) i = cum.size() - 1;
    const double x = grid.point(i);
    const double t = spec.F.quantile(rng.uniform());
    obs.push_back({x, t <= x ? 1 : 0});
  }
  return obs;
}

inline ObservationSet generate_dataset(const ScenarioSpec &spec, RandomStream &rng) {
  const GridSpec grid = build_grid(spec);
  const auto p = discretize_G(grid, spec.G);
  return generate_dataset(spec, grid, p, rng);
}

/// True alpha = sqrt(F(x0)(1 - F(x0)) / g(x0)) and beta = f(x0) / 2.
inline NuisanceEstimates true_nuisance(const ScenarioSpec &spec) {
  return assemble(spec.F.cdf(spec.x0), spec.G.density(spec.x0), spec.F.density(spec.x0));
}

struct RepOutcome {
  bool practical_ok = false;
  bool covered_P = false;
  bool covered_T = false;
  bool covered_O = false;
  double length_P = 0.0;
  double length_T = 0.0;
  double length_O = 0.0;
  double estimate = 0.0;
  double truth = 0.0;
  double c_hat = 0.0;
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
};

struct CoverageReport {
  ScenarioSpec scenario;
  std::size_t K = 0;
  double c_hat = 0.0;
  std::int64_t successes = 0;
  std::int64_t failures = 0;
  double CR_P = 0.0;
  double CR_T = 0.0;
  double AL_P = 0.0;
  double AL_T = 0.0;
  std::string oracle;  // "gaussian", "chernoff" or "boundary"
  double CR_O = 0.0;
  double AL_O = 0.0;
  std::vector<RepOutcome> per_rep;
};

inline std::string oracle_kind(double gamma0) {
  if (is_boundary_regime(gamma0)) return "boundary";
  return gamma0 < 1.0 / 3.0 ? "gaussian" : "chernoff";
}

/// One simulated replication: fit, practical and idealized adaptive
/// intervals sharing one inner noise bank, and the known-regime oracle.
inline RepOutcome run_replication(const ScenarioSpec &spec, const GridSpec &grid,
                                  std::span<const double> p, const NuisanceEstimates &truth_nuis,
                                  double chernoff_upper_q, std::int64_t rep) {
  const auto r = static_cast<std::uint64_t>(rep);
  RandomStream data_rng(spec.seed, {stream_tag::dataset, r});
  const ObservationSet obs = generate_dataset(spec, grid, p, data_rng);
  const BinnedCounts binned = bin(obs, grid);
  const StepEstimate est = npmle(binned);
  const Anchor anchor = locate_anchor(grid, spec.x0);
  const std::int64_t n = binned.total();

  RepOutcome out;
  out.estimate = est.levels[anchor.l];
  out.truth = spec.F.cdf(grid.point(anchor.l));
  out.c_hat = compute_c_hat(grid.a(), grid.b(), static_cast<std::int64_t>(grid.size()), n);

  const NoiseBank bank =
      NoiseBank::generate(spec.sampler.B, spec.sampler.K_a, spec.seed, stream_tag::inner_mc, r, 1);
  const auto probs = interval_probs(spec.eta);
  auto adaptive = [&](double alpha, double beta) {
    const LimitParams lp{out.c_hat, alpha, beta};
    const QuantileTable t = make_table(boundary_draws(lp, bank), probs, lp, spec.sampler, "boundary");
    return adaptive_interval(out.estimate, n, out.c_hat, t, spec.eta);
  };

  const CiResult ci_T = adaptive(truth_nuis.alpha_hat, truth_nuis.beta_hat);
  out.covered_T = ci_T.covers(out.truth);
  out.length_T = ci_T.length();

  try {
    const NuisanceEstimates nuis = estimate_nuisance(est, binned, anchor, spec.nuisance);
    out.alpha_hat = nuis.alpha_hat;
    out.beta_hat = nuis.beta_hat;
    const CiResult ci_P = adaptive(nuis.alpha_hat, nuis.beta_hat);
    out.practical_ok = true;
    out.covered_P = ci_P.covers(out.truth);
    out.length_P = ci_P.length();
  } catch (const Error &e) {
    if (e.kind() != ErrorKind::numerical) throw;
  }

  CiResult ci_O;
  if (is_boundary_regime(spec.gamma0)) {
    const LimitParams lp{spec.c0, truth_nuis.alpha_hat, truth_nuis.beta_hat};
    const QuantileTable t = make_table(boundary_draws(lp, bank), probs, lp, spec.sampler, "boundary");
    ci_O = adaptive_interval(out.estimate, n, spec.c0, t, spec.eta);
  } else if (spec.gamma0 < 1.0 / 3.0) {
    ci_O = oracle_interval_gaussian(out.estimate, truth_nuis.alpha_hat, spec.c0, spec.gamma0, n,
                                    spec.eta);
  } else {
    ci_O = oracle_interval_chernoff(out.estimate, chernoff_upper_q, n, spec.eta);
  }
  out.covered_O = ci_O.covers(out.truth);
  out.length_O = ci_O.length();
  return out;
}

inline CoverageReport run_coverage(const ScenarioSpec &spec) {
  spec.validate();
  const GridSpec grid = build_grid(spec);
  const auto p = discretize_G(grid, spec.G);
  const NuisanceEstimates truth_nuis = true_nuisance(spec);

  double chernoff_upper_q = 0.0;
  if (!is_boundary_regime(spec.gamma0) && spec.gamma0 > 1.0 / 3.0) {
    SamplerConfig cfg = spec.sampler;
    cfg.seed = substream_seed(spec.seed, {stream_tag::oracle_table});
    cfg.threads = spec.threads;
    const double probs[] = {1.0 - spec.eta / 2.0};
    chernoff_upper_q =
        quantiles_chernoff(truth_nuis.alpha_hat, truth_nuis.beta_hat, probs, cfg).quants[0];
  }

  std::vector<RepOutcome> reps(static_cast<std::size_t>(spec.reps));
  parallel_for(reps.size(), spec.threads, [&](std::size_t r) {
    reps[r] = run_replication(spec, grid, p, truth_nuis, chernoff_upper_q,
                              static_cast<std::int64_t>(r));
  });

  CoverageReport rep;
  rep.scenario = spec;
  rep.K = grid.size();
  rep.c_hat = compute_c_hat(grid.a(), grid.b(), static_cast<std::int64_t>(grid.size()), spec.n);
  rep.oracle = oracle_kind(spec.gamma0);
  double cov_P = 0, len_P = 0, cov_T = 0, len_T = 0, cov_O = 0, len_O = 0;
  for (const RepOutcome &o : reps) {
    cov_T += o.covered_T;
    len_T += o.length_T;
    cov_O += o.covered_O;
    len_O += o.length_O;
    if (o.practical_ok) {
      ++rep.successes;
      cov_P += o.covered_P;
      len_P += o.length_P;
    } else {
      ++rep.failures;
    }
  }
  const double total = static_cast<double>(reps.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  rep.CR_T = cov_T / total;
  rep.AL_T = len_T / total;
  rep.CR_O = cov_O / total;
  rep.AL_O = len_O / total;
  rep.CR_P = rep.successes > 0 ? cov_P / static_cast<double>(rep.successes) : nan;
  rep.AL_P = rep.successes > 0 ? len_P / static_cast<double>(rep.successes) : nan;
  if (spec.keep_per_rep) rep.per_rep = std::move(reps);
  return rep;
}

struct EcdfRow {
  double c = 0.0;
  double ks_gaussian = 0.0;  // sqrt(c) S_c / alpha against N(0, 1)
  double ks_chernoff = 0.0;  // S_c against draws of g_{alpha,beta}(0)
};

/// KS distances of S_c to its two limits, for each c. All c share one noise
/// bank so the sequence in c is coupled.
inline std::vector<EcdfRow> ecdf_compare(double alpha, double beta, std::span<const double> c_list,
                                         SamplerConfig cfg) {
  if (cfg.B < 1000) fail(ErrorKind::invalid_argument, "ecdf comparison needs B >= 1000");
  const NoiseBank bank = NoiseBank::generate(cfg.B, cfg.K_a, cfg.seed, 0, 0, cfg.threads);
  SamplerConfig chernoff_cfg = cfg;
  chernoff_cfg.seed = substream_seed(cfg.seed, {stream_tag::oracle_table});
  const std::vector<double> chernoff = chernoff_draws(alpha, beta, chernoff_cfg);
  std::vector<EcdfRow> rows;
  for (double c : c_list) {
    std::vector<double> s = boundary_draws(LimitParams{c, alpha, beta}, bank, cfg.threads);
    EcdfRow row;
    row.c = c;
    row.ks_chernoff = ks_distance_two_sample(s, chernoff);
    const double scale = std::sqrt(c) / alpha;
    for (double &v : s) v *= scale;
    row.ks_gaussian = ks_distance(std::move(s), [](double x) { return normal_cdf(x); });
    rows.push_back(row);
  }
  return rows;
}

/// Fraction of replications whose naive bin averages are already ordered.
inline double naive_ordering_rate(const ScenarioSpec &spec, std::int64_t reps) {
  const GridSpec grid = build_grid(spec);
  const auto p = discretize_G(grid, spec.G);
  std::vector<char> ordered(static_cast<std::size_t>(reps));
  parallel_for(ordered.size(), spec.threads, [&](std::size_t r) {
    RandomStream rng(spec.seed, {stream_tag::dataset, r});
    ordered[r] = naive_is_monotone(bin(generate_dataset(spec, grid, p, rng), grid));
  });
  double hits = 0;
  for (char o : ordered) hits += o;
  return hits / static_cast<double>(reps);
}

}  // namespace gridcs
