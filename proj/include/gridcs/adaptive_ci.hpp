#pragma once

// Wald-type intervals for F(t_l).
//
// The adaptive interval pretends the grid exponent is 1/3, picks the scale
// c_hat that reproduces the observed number of grid points, and calibrates
// with quantiles of S_{c_hat}. The two oracle intervals assume the regime is
// known and serve as benchmarks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "gridcs/error.hpp"
#include "gridcs/limits.hpp"
#include "gridcs/model.hpp"
#include "gridcs/nuisance.hpp"

namespace gridcs {

enum class CiMode { adaptive, oracle_gaussian, oracle_chernoff };

inline std::string to_string(CiMode m) {
  switch (m) {
    case CiMode::adaptive: return "adaptive";
    case CiMode::oracle_gaussian: return "oracle-gaussian";
    case CiMode::oracle_chernoff: return "oracle-chernoff";
  }
  return "unknown";
}

struct CiRequest {
  double eta = 0.05;  // total miscoverage; quantiles at eta/2 and 1 - eta/2
  SamplerConfig sampler;
  CiMode mode = CiMode::adaptive;
  double gamma0 = 0.0;  // oracle-gaussian only
  double c0 = 0.0;      // oracle-gaussian only

  void validate() const {
    if (!(eta > 0.0 && eta < 1.0)) fail(ErrorKind::invalid_argument, "eta must lie in (0, 1)");
  }
};

struct CiResult {
  CiMode mode = CiMode::adaptive;
  double estimate = 0.0;  // F̂(t_l)
  double lower = 0.0;
  double upper = 0.0;
  double c_hat = 0.0;
  double eta = 0.0;
  double q_lo = 0.0;  // quantile at eta/2 (adaptive) or -q(1 - eta/2) (oracles)
  double q_hi = 0.0;  // quantile at 1 - eta/2
  std::int64_t n = 0;
  bool clamped = false;
  NuisanceEstimates nuisance;

  double length() const { return upper - lower; }
  bool covers(double truth) const { return lower <= truth && truth <= upper; }
};

/// floor((b - a) / (c n^{-1/3})): the grid size implied by scale c at gamma = 1/3.
inline std::int64_t implied_grid_count(double a, double b, double c, std::int64_t n) {
  const double spacing = c / std::cbrt(static_cast<double>(n));
  return static_cast<std::int64_t>(std::floor((b - a) / spacing));
}

/// c_hat = (b - a) n^{1/3} / K, nudged down by at most a few ulps so that
/// implied_grid_count returns exactly K.
inline double compute_c_hat(double a, double b, std::int64_t K, std::int64_t n) {
  if (K < 1 || n < 1 || !(b > a)) fail(ErrorKind::invalid_argument, "invalid grid for c_hat");
  double c = (b - a) * std::cbrt(static_cast<double>(n)) / static_cast<double>(K);
  for (int i = 0; i < 8 && implied_grid_count(a, b, c, n) < K; ++i) c = std::nextafter(c, 0.0);
  return c;
}

namespace detail {
inline void finish(CiResult &r) {
  const double lo = std::clamp(r.lower, 0.0, 1.0);
  const double hi = std::clamp(r.upper, 0.0, 1.0);
  r.clamped = lo != r.lower || hi != r.upper;
  r.lower = lo;
  r.upper = hi;
}
}  // namespace detail

/// [F̂ - n^{-1/3} q(1 - eta/2), F̂ - n^{-1/3} q(eta/2)] from a table of S_{c_hat}.
inline CiResult adaptive_interval(double estimate, std::int64_t n, double c_hat,
                                  const QuantileTable &table, double eta) {
  if (n < 1) fail(ErrorKind::invalid_argument, "sample size must be positive");
  CiResult r;
  r.mode = CiMode::adaptive;
  r.estimate = estimate;
  r.n = n;
  r.eta = eta;
  r.c_hat = c_hat;
  r.q_lo = table.at(eta / 2.0);
  r.q_hi = table.at(1.0 - eta / 2.0);
  const double rate = 1.0 / std::cbrt(static_cast<double>(n));
  r.lower = estimate - rate * r.q_hi;
  r.upper = estimate - rate * r.q_lo;
  detail::finish(r);
  return r;
}

/// Probabilities an adaptive table must carry for miscoverage eta.
inline std::vector<double> interval_probs(double eta) { return {eta / 2.0, 1.0 - eta / 2.0}; }

/// Adaptive interval for F(t_l), simulating S_{c_hat} at the estimated
/// (alpha, beta).
inline CiResult adaptive_interval(const StepEstimate &est, const NuisanceEstimates &nuis,
                                  const Anchor &anchor, std::int64_t n, double c_hat,
                                  const CiRequest &req) {
  req.validate();
  const auto probs = interval_probs(req.eta);
  const QuantileTable table =
      quantiles_boundary(LimitParams{c_hat, nuis.alpha_hat, nuis.beta_hat}, probs, req.sampler);
  CiResult r = adaptive_interval(est.levels.at(anchor.l), n, c_hat, table, req.eta);
  r.nuisance = nuis;
  return r;
}

/// F̂ ± n^{-(1-gamma0)/2} alpha c0^{-1/2} q(Z, 1 - eta/2), for gamma0 < 1/3.
inline CiResult oracle_interval_gaussian(double estimate, double alpha, double c0, double gamma0,
                                         std::int64_t n, double eta) {
  if (!(eta > 0.0 && eta < 1.0)) fail(ErrorKind::invalid_argument, "eta must lie in (0, 1)");
  const double half = gaussian_ci_halfwidth(alpha, c0, n, gamma0, 1.0 - eta / 2.0);
  CiResult r;
  r.mode = CiMode::oracle_gaussian;
  r.estimate = estimate;
  r.n = n;
  r.eta = eta;
  r.q_hi = normal_quantile(1.0 - eta / 2.0);
  r.q_lo = -r.q_hi;
  r.lower = estimate - half;
  r.upper = estimate + half;
  detail::finish(r);
  return r;
}

/// F̂ ± n^{-1/3} q(g_{alpha,beta}(0), 1 - eta/2) with a precomputed upper quantile.
inline CiResult oracle_interval_chernoff(double estimate, double upper_quantile, std::int64_t n,
                                         double eta) {
  CiResult r;
  r.mode = CiMode::oracle_chernoff;
  r.estimate = estimate;
  r.n = n;
  r.eta = eta;
  r.q_hi = upper_quantile;
  r.q_lo = -upper_quantile;
  const double half = upper_quantile / std::cbrt(static_cast<double>(n));
  r.lower = estimate - half;
  r.upper = estimate + half;
  detail::finish(r);
  return r;
}

inline CiResult oracle_interval_chernoff(double estimate, double alpha, double beta,
                                         std::int64_t n, double eta, const SamplerConfig &cfg) {
  if (!(eta > 0.0 && eta < 1.0)) fail(ErrorKind::invalid_argument, "eta must lie in (0, 1)");
  const double probs[] = {1.0 - eta / 2.0};
  const QuantileTable t = quantiles_chernoff(alpha, beta, probs, cfg);
  return oracle_interval_chernoff(estimate, t.quants[0], n, eta);
}

}  // namespace gridcs
