#pragma once

// Data-driven estimates of F(x0), g(x0), f(x0) and the limit parameters
// alpha = sqrt(F (1 - F) / g), beta = f / 2.
//
// All windows are expressed in 0-based grid indices and clamped to the grid.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>

#include "gridcs/error.hpp"
#include "gridcs/model.hpp"

namespace gridcs {

struct NuisanceOptions {
  double threshold_mult = 1.0;  // j* threshold is threshold_mult / log n
  bool anchor_free = false;     // estimate F(x0) by F̂(t_l) alone
};

struct NuisanceEstimates {
  double F_hat = 0.0;
  double g_hat = 0.0;
  double f_hat = 0.0;
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
  std::size_t j_star = 0;
  std::size_t i_star = 0;
  bool window_clamped = false;   // a window hit a grid edge
  bool below_threshold = false;  // j* search exhausted the grid
};

namespace detail {
inline std::size_t clamp_low(std::size_t l, std::size_t offset) {
  return offset > l ? 0 : l - offset;
}
inline std::size_t clamp_high(std::size_t l, std::size_t offset, std::size_t K) {
  return std::min(K - 1, l + offset);
}
}  // namespace detail

inline double estimate_F_x0(const StepEstimate &est, const Anchor &anchor, bool anchor_free = false) {
  const double Fl = est.levels.at(anchor.l);
  if (anchor_free) return Fl;
  const double Fr = est.levels.at(anchor.r);
  return anchor.rho * Fl + (1.0 - anchor.rho) * Fr;
}

struct WindowSearch {
  std::size_t j = 0;
  bool clamped = false;
  bool below_threshold = false;
};

/// Smallest j >= 1 whose window [l - j, l + j] holds at least
/// threshold_mult / log n of the sample.
inline WindowSearch find_j_star(const BinnedCounts &binned, std::size_t l,
                                double threshold_mult = 1.0) {
  if (!(threshold_mult > 0.0)) fail(ErrorKind::invalid_argument, "threshold multiplier must be positive");
  const std::int64_t n = binned.total();
  if (n < 3) fail(ErrorKind::invalid_argument, "need at least 3 observations");
  const std::size_t K = binned.grid.size();
  if (l >= K) fail(ErrorKind::invalid_argument, "anchor outside grid");
  const double target = threshold_mult / std::log(static_cast<double>(n));
  const std::size_t j_max = std::max(l, K - 1 - l);
  WindowSearch out;
  if (j_max == 0) {
    out.clamped = true;
    out.below_threshold = static_cast<double>(binned.N[0]) / static_cast<double>(n) < target;
    return out;
  }
  for (std::size_t j = 1; j <= j_max; ++j) {
    const std::size_t lo = detail::clamp_low(l, j);
    const std::size_t hi = detail::clamp_high(l, j, K);
    std::int64_t mass = 0;
    for (std::size_t i = lo; i <= hi; ++i) mass += binned.N[i];
    out.j = j;
    out.clamped = (j > l) || (l + j > K - 1);
    if (static_cast<double>(mass) / static_cast<double>(n) >= target) return out;
  }
  out.below_threshold = true;
  return out;
}

/// Windowed histogram density: (N_{l-j+1} + ... + N_{r+j}) / [n (t_{r+j} - t_{l-j})].
inline double estimate_g_x0(const BinnedCounts &binned, const Anchor &anchor, std::size_t j_star) {
  const std::size_t K = binned.grid.size();
  const std::size_t lo = j_star == 0 ? anchor.l + 1 : detail::clamp_low(anchor.l, j_star - 1);
  const std::size_t hi = detail::clamp_high(anchor.r, j_star, K);
  if (lo > hi) fail(ErrorKind::numerical, "zero-width density window");
  std::int64_t mass = 0;
  for (std::size_t i = lo; i <= hi; ++i) mass += binned.N[i];
  // point(i) - point(i - 1) = delta, with point(-1) = a.
  const double width = static_cast<double>(hi - lo + 1) * binned.grid.delta();
  return static_cast<double>(mass) / (static_cast<double>(binned.total()) * width);
}

/// Smallest i > j_star with F̂(t_{l-i}) < F̂(t_{l+i}), indices clamped to the grid.
inline std::size_t find_i_star(const StepEstimate &est, std::size_t l, std::size_t j_star) {
  const std::size_t K = est.levels.size();
  if (l >= K) fail(ErrorKind::invalid_argument, "anchor outside grid");
  for (std::size_t i = j_star + 1;; ++i) {
    const std::size_t lo = detail::clamp_low(l, i);
    const std::size_t hi = detail::clamp_high(l, i, K);
    if (est.levels[lo] < est.levels[hi]) return i;
    if (lo == 0 && hi == K - 1) break;
  }
  fail(ErrorKind::numerical, "flat estimate, slope unidentifiable");
}

/// Slope of the N-weighted least-squares line through (t_i, F̂(t_i)) over
/// the window [l - i*, l + i*].
inline double estimate_f_x0(const StepEstimate &est, const BinnedCounts &binned, std::size_t l,
                            std::size_t i_star) {
  const std::size_t K = est.levels.size();
  const std::size_t lo = detail::clamp_low(l, i_star);
  const std::size_t hi = detail::clamp_high(l, i_star, K);
  double sw = 0.0, st = 0.0, sf = 0.0;
  std::size_t support = 0;
  for (std::size_t i = lo; i <= hi; ++i) {
    const auto w = static_cast<double>(binned.N[i]);
    if (w <= 0.0) continue;
    ++support;
    sw += w;
    st += w * est.grid.point(i);
    sf += w * est.levels[i];
  }
  if (support < 2) fail(ErrorKind::numerical, "singular design");
  const double t_bar = st / sw;
  const double f_bar = sf / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = lo; i <= hi; ++i) {
    const auto w = static_cast<double>(binned.N[i]);
    if (w <= 0.0) continue;
    const double dt = est.grid.point(i) - t_bar;
    sxx += w * dt * dt;
    sxy += w * dt * (est.levels[i] - f_bar);
  }
  if (!(sxx > 0.0)) fail(ErrorKind::numerical, "singular design");
  return sxy / sxx;
}

inline NuisanceEstimates assemble(double F_hat, double g_hat, double f_hat) {
  if (!(F_hat > 0.0 && F_hat < 1.0)) fail(ErrorKind::numerical, "degenerate alpha");
  if (!(g_hat > 0.0)) fail(ErrorKind::numerical, "design density estimate is not positive");
  if (!(f_hat > 0.0)) fail(ErrorKind::numerical, "event density estimate is not positive");
  NuisanceEstimates e;
  e.F_hat = F_hat;
  e.g_hat = g_hat;
  e.f_hat = f_hat;
  e.alpha_hat = std::sqrt(F_hat * (1.0 - F_hat) / g_hat);
  e.beta_hat = f_hat / 2.0;
  return e;
}

/// Full practical procedure: F(x0), then j*, g(x0), i*, f(x0).
inline NuisanceEstimates estimate_nuisance(const StepEstimate &est, const BinnedCounts &binned,
                                           const Anchor &anchor, const NuisanceOptions &opts = {}) {
  const double F = estimate_F_x0(est, anchor, opts.anchor_free);
  const WindowSearch js = find_j_star(binned, anchor.l, opts.threshold_mult);
  const double g = estimate_g_x0(binned, anchor, js.j);
  const std::size_t i_star = find_i_star(est, anchor.l, js.j);
  const double f = estimate_f_x0(est, binned, anchor.l, i_star);
  NuisanceEstimates e = assemble(F, g, f);
  e.j_star = js.j;
  e.i_star = i_star;
  e.below_threshold = js.below_threshold;
  e.window_clamped = js.clamped || i_star > anchor.l || anchor.l + i_star > binned.grid.size() - 1;
  return e;
}

}  // namespace gridcs
