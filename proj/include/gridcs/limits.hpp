#pragma once

// Samplers for the three limit laws of the grid NPMLE at a point:
//
//   * the boundary family S_c: left slope at 0 of the minorant of the
//     discrete-time process with increments alpha Z_k / sqrt(c) + 2 beta c k,
//     computed as the unit-weight isotonic fit at k = 0;
//   * the continuous (Chernoff-type) law g_{alpha,beta}(0): left slope at 0
//     of the minorant of alpha W(h) + beta h^2;
//   * the Gaussian law alpha c^{-1/2} N(0, 1).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "gridcs/error.hpp"
#include "gridcs/isotonic.hpp"
#include "gridcs/parallel.hpp"
#include "gridcs/rng.hpp"

namespace gridcs {

struct LimitParams {
  double c = 1.0;
  double alpha = 1.0;
  double beta = 1.0;

  void validate() const {
    if (!(c > 0.0) || !(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(c) ||
        !std::isfinite(alpha) || !std::isfinite(beta))
      fail(ErrorKind::invalid_argument, "limit parameters must be positive");
  }

  /// Drift of the one-parameter standard form: theta = 2 beta c^{3/2} / alpha.
  double theta() const { return 2.0 * beta * std::pow(c, 1.5) / alpha; }
};

struct SamplerConfig {
  std::size_t K_a = 300;          // truncation half-width of the discrete process
  std::size_t B = 3000;           // Monte Carlo replications
  std::uint64_t seed = 1;
  double fine_step = 0.005;       // Brownian grid step for the continuous law
  double fine_halfwidth = 20.0;   // Brownian domain half-width
  unsigned threads = 1;

  void validate() const {
    if (K_a < 1) fail(ErrorKind::invalid_argument, "K_a must be at least 1");
    if (B < 1) fail(ErrorKind::invalid_argument, "B must be at least 1");
    if (!(fine_step > 0.0) || !(fine_halfwidth > fine_step))
      fail(ErrorKind::invalid_argument, "invalid Brownian grid");
  }
};

struct QuantileTable {
  std::vector<double> probs;
  std::vector<double> quants;
  LimitParams params;
  SamplerConfig config;
  std::string law;           // "boundary" or "chernoff"
  bool unstable = false;     // B < 100

  double at(double p) const {
    for (std::size_t i = 0; i < probs.size(); ++i)
      if (std::abs(probs[i] - p) < 1e-12) return quants[i];
    fail(ErrorKind::invalid_argument, "probability not in quantile table");
  }
};

// ---------------------------------------------------------------------------
// Empirical quantiles

/// Lower empirical quantile x_(ceil(pB)) of already sorted draws.
inline double lower_quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) fail(ErrorKind::invalid_argument, "no draws");
  if (!(p > 0.0 && p < 1.0)) fail(ErrorKind::invalid_argument, "probability must lie in (0, 1)");
  const double pos = std::ceil(p * static_cast<double>(sorted.size()) - 1e-9);
  const auto idx = static_cast<std::size_t>(std::max(pos, 1.0)) - 1;
  return sorted[std::min(idx, sorted.size() - 1)];
}

inline std::vector<double> lower_quantiles(std::vector<double> draws,
                                           std::span<const double> probs) {
  std::sort(draws.begin(), draws.end());
  std::vector<double> q;
  q.reserve(probs.size());
  for (double p : probs) q.push_back(lower_quantile_sorted(draws, p));
  return q;
}

inline void check_probs(std::span<const double> probs) {
  if (probs.empty()) fail(ErrorKind::invalid_argument, "no probabilities requested");
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] > 0.0 && probs[i] < 1.0))
      fail(ErrorKind::invalid_argument, "probability must lie in (0, 1)");
    if (i > 0 && !(probs[i] > probs[i - 1]))
      fail(ErrorKind::invalid_argument, "probabilities must be increasing");
  }
}

// ---------------------------------------------------------------------------
// Boundary family S_c

/// Number of standard normals one boundary draw consumes.
inline std::size_t boundary_noise_length(std::size_t K_a) { return 2 * K_a + 1; }

/// Isotonic fit at k = 0 of {scale * (Z_k + theta k)}, k = -K_a..K_a, where
/// noise[j] holds Z_{j - K_a}.
inline double boundary_slope_scaled(double scale, double theta, std::span<const double> noise,
                                    PavaWorkspace &ws, std::vector<double> &buf) {
  const std::size_t len = noise.size();
  if (len % 2 == 0) fail(ErrorKind::invalid_argument, "noise length must be 2 K_a + 1");
  const auto K_a = static_cast<std::ptrdiff_t>(len / 2);
  buf.resize(len);
  for (std::size_t j = 0; j < len; ++j) {
    const double k = static_cast<double>(static_cast<std::ptrdiff_t>(j) - K_a);
    buf[j] = scale * (noise[j] + theta * k);
  }
  ws.pool(buf, {});
  return ws.value_at(static_cast<std::size_t>(K_a));
}

/// One draw of X_{c,K_a}(0) from explicit noise Z_{-K_a}..Z_{K_a}.
inline double sample_boundary_slope(const LimitParams &params, std::span<const double> noise) {
  params.validate();
  PavaWorkspace ws;
  std::vector<double> buf;
  const std::size_t len = noise.size();
  if (len % 2 == 0) fail(ErrorKind::invalid_argument, "noise length must be 2 K_a + 1");
  const auto K_a = static_cast<std::ptrdiff_t>(len / 2);
  buf.resize(len);
  const double noise_scale = params.alpha / std::sqrt(params.c);
  const double ramp = 2.0 * params.beta * params.c;
  for (std::size_t j = 0; j < len; ++j) {
    const double k = static_cast<double>(static_cast<std::ptrdiff_t>(j) - K_a);
    buf[j] = noise_scale * noise[j] + ramp * k;
  }
  ws.pool(buf, {});
  return ws.value_at(static_cast<std::size_t>(K_a));
}

/// One draw of the standard form I_0(theta) = isotonic fit at 0 of Z_k + theta k.
inline double sample_boundary_standard(double theta, std::span<const double> noise) {
  PavaWorkspace ws;
  std::vector<double> buf;
  return boundary_slope_scaled(1.0, theta, noise, ws, buf);
}

/// Block of standard normals shared by many boundary draws: row d feeds draw d.
class NoiseBank {
 public:
  NoiseBank(std::size_t draws, std::size_t K_a) : draws_(draws), width_(boundary_noise_length(K_a)) {
    data_.resize(draws_ * width_);
  }

  /// Row d from substream {tag, path..., d} of `seed`.
  static NoiseBank generate(std::size_t draws, std::size_t K_a, std::uint64_t seed,
                            std::uint64_t stream_a, std::uint64_t stream_b, unsigned threads) {
    NoiseBank bank(draws, K_a);
    parallel_for(draws, threads, [&](std::size_t d) {
      RandomStream rs(seed, {stream_tag::boundary_draw, stream_a, stream_b, d});
      auto row = bank.row_mut(d);
      rs.fill_normal(row.begin(), row.end());
    });
    return bank;
  }

  std::size_t draws() const { return draws_; }
  std::size_t K_a() const { return width_ / 2; }
  std::span<const double> row(std::size_t d) const { return {data_.data() + d * width_, width_}; }
  std::span<double> row_mut(std::size_t d) { return {data_.data() + d * width_, width_}; }

 private:
  std::size_t draws_;
  std::size_t width_;
  std::vector<double> data_;
};

/// Draws of S_c for `params`, one per bank row.
inline std::vector<double> boundary_draws(const LimitParams &params, const NoiseBank &bank,
                                          unsigned threads = 1) {
  params.validate();
  const double scale = params.alpha / std::sqrt(params.c);
  const double theta = params.theta();
  std::vector<double> out(bank.draws());
  const std::size_t chunk = 64;
  const std::size_t chunks = (bank.draws() + chunk - 1) / chunk;
  parallel_for(chunks, threads, [&](std::size_t ch) {
    PavaWorkspace ws;
    std::vector<double> buf;
    const std::size_t end = std::min(bank.draws(), (ch + 1) * chunk);
    for (std::size_t d = ch * chunk; d < end; ++d)
      out[d] = boundary_slope_scaled(scale, theta, bank.row(d), ws, buf);
  });
  return out;
}

/// B draws of S_c with per-draw substreams of cfg.seed.
inline std::vector<double> boundary_draws(const LimitParams &params, const SamplerConfig &cfg) {
  cfg.validate();
  const NoiseBank bank = NoiseBank::generate(cfg.B, cfg.K_a, cfg.seed, 0, 0, cfg.threads);
  return boundary_draws(params, bank, cfg.threads);
}

inline QuantileTable make_table(std::vector<double> draws, std::span<const double> probs,
                                const LimitParams &params, const SamplerConfig &cfg,
                                std::string law) {
  check_probs(probs);
  QuantileTable t;
  t.probs.assign(probs.begin(), probs.end());
  t.quants = lower_quantiles(std::move(draws), probs);
  t.params = params;
  t.config = cfg;
  t.law = std::move(law);
  t.unstable = cfg.B < 100;
  return t;
}

inline QuantileTable quantiles_boundary(const LimitParams &params, std::span<const double> probs,
                                        const SamplerConfig &cfg) {
  check_probs(probs);
  return make_table(boundary_draws(params, cfg), probs, params, cfg, "boundary");
}

// ---------------------------------------------------------------------------
// Continuous limit g_{alpha,beta}(0)

/// Half-width below which the minorant at 0 may feel the domain edge.
inline double chernoff_min_halfwidth(double alpha, double beta) {
  return 10.0 * std::pow(alpha / beta, 2.0 / 3.0);
}

/// Left slope at 0 of the minorant of alpha W(h) + beta h^2, with W simulated
/// on [-fine_halfwidth, fine_halfwidth] in steps of fine_step as two
/// independent wings started at W(0) = 0.
inline double sample_chernoff_slope(double alpha, double beta, const SamplerConfig &cfg,
                                    RandomStream &rs) {
  if (!(alpha > 0.0) || !(beta > 0.0))
    fail(ErrorKind::invalid_argument, "limit parameters must be positive");
  cfg.validate();
  if (cfg.fine_halfwidth < chernoff_min_halfwidth(alpha, beta))
    fail(ErrorKind::invalid_argument, "localization risk");
  const auto m = static_cast<std::size_t>(std::llround(cfg.fine_halfwidth / cfg.fine_step));
  const double sd = std::sqrt(cfg.fine_step);
  PlanarDiagram diagram;
  diagram.points.resize(2 * m + 1);
  diagram.points[m] = {0.0, 0.0};
  double w = 0.0;
  for (std::size_t j = 1; j <= m; ++j) {  // right wing
    w += sd * rs.normal();
    const double h = static_cast<double>(j) * cfg.fine_step;
    diagram.points[m + j] = {h, alpha * w + beta * h * h};
  }
  w = 0.0;
  for (std::size_t j = 1; j <= m; ++j) {  // left wing
    w += sd * rs.normal();
    const double h = -static_cast<double>(j) * cfg.fine_step;
    diagram.points[m - j] = {h, alpha * w + beta * h * h};
  }
  return left_slope(gcm(diagram), 0.0);
}

/// B draws of g_{alpha,beta}(0) simulated directly in natural units.
inline std::vector<double> chernoff_draws(double alpha, double beta, const SamplerConfig &cfg) {
  cfg.validate();
  std::vector<double> out(cfg.B);
  parallel_for(cfg.B, cfg.threads, [&](std::size_t d) {
    RandomStream rs(cfg.seed, {stream_tag::chernoff_draw, d});
    out[d] = sample_chernoff_slope(alpha, beta, cfg, rs);
  });
  return out;
}

/// (alpha^2 beta)^{1/3}: the factor mapping g_{1,1}(0) onto g_{alpha,beta}(0).
inline double chernoff_scale(double alpha, double beta) {
  return std::cbrt(alpha * alpha * beta);
}

/// Quantiles of g_{alpha,beta}(0) from standardized draws of g_{1,1}(0),
/// rescaled by (alpha^2 beta)^{1/3}.
inline QuantileTable quantiles_chernoff(double alpha, double beta, std::span<const double> probs,
                                        const SamplerConfig &cfg) {
  check_probs(probs);
  std::vector<double> draws = chernoff_draws(1.0, 1.0, cfg);
  const double s = chernoff_scale(alpha, beta);
  for (double &d : draws) d *= s;
  return make_table(std::move(draws), probs, LimitParams{1.0, alpha, beta}, cfg, "chernoff");
}

// ---------------------------------------------------------------------------
// Known-regime interval half-widths

inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) fail(ErrorKind::invalid_argument, "probability must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

inline double normal_cdf(double x) {
  return boost::math::cdf(boost::math::normal_distribution<double>(), x);
}

/// n^{-(1-gamma)/2} alpha c^{-1/2} q(N(0,1), p), for gamma in (0, 1/3).
inline double gaussian_ci_halfwidth(double alpha, double c, std::int64_t n, double gamma, double p) {
  if (!(gamma > 0.0 && gamma < 1.0 / 3.0)) fail(ErrorKind::invalid_argument, "wrong regime");
  if (!(alpha > 0.0) || !(c > 0.0) || n < 1)
    fail(ErrorKind::invalid_argument, "inputs must be positive");
  return std::pow(static_cast<double>(n), -(1.0 - gamma) / 2.0) * alpha / std::sqrt(c) *
         normal_quantile(p);
}

/// n^{-1/3} times the empirical p-quantile of g_{alpha,beta}(0).
inline double chernoff_ci_halfwidth(double alpha, double beta, std::int64_t n,
                                    const SamplerConfig &cfg, double p) {
  if (n < 1) fail(ErrorKind::invalid_argument, "inputs must be positive");
  const double probs[] = {p};
  const QuantileTable t = quantiles_chernoff(alpha, beta, probs, cfg);
  return t.quants[0] / std::cbrt(static_cast<double>(n));
}

}  // namespace gridcs
