#pragma once

// Reference implementations used only by tests. They share no code with
// the library routes they check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

/// Isotonic regression by exhaustive search over contiguous block
/// partitions: every monotone fit is constant on the blocks of some
/// partition, so the best partition whose block means are nondecreasing is
/// the projection.
inline std::vector<double> isotonic_brute_force(const std::vector<double> &v,
                                                const std::vector<double> &w) {
  const std::size_t m = v.size();
  double best_sse = std::numeric_limits<double>::infinity();
  std::vector<double> best;
  const unsigned long masks = 1UL << (m - 1);
  for (unsigned long mask = 0; mask < masks; ++mask) {
    // Bit i set means a cut between positions i and i + 1.
    std::vector<double> fit(m);
    std::size_t start = 0;
    double prev_mean = -std::numeric_limits<double>::infinity();
    bool feasible = true;
    for (std::size_t i = 0; i < m && feasible; ++i) {
      const bool cut = (i + 1 == m) || ((mask >> i) & 1UL);
      if (!cut) continue;
      long double sw = 0, swv = 0;
      for (std::size_t j = start; j <= i; ++j) {
        sw += w[j];
        swv += static_cast<long double>(w[j]) * v[j];
      }
      const double mean = static_cast<double>(swv / sw);
      if (mean < prev_mean) feasible = false;
      for (std::size_t j = start; j <= i; ++j) fit[j] = mean;
      prev_mean = mean;
      start = i + 1;
    }
    if (!feasible) continue;
    double sse = 0;
    for (std::size_t j = 0; j < m; ++j) sse += w[j] * (v[j] - fit[j]) * (v[j] - fit[j]);
    if (sse < best_sse - 1e-15) {
      best_sse = sse;
      best = fit;
    }
  }
  return best;
}

/// Value of the greatest convex minorant at each diagram abscissa: the
/// minimum over all chords (i, j) with x_i <= x_k <= x_j of the chord's
/// height at x_k.
inline std::vector<double> minorant_values(const std::vector<std::pair<double, double>> &pts) {
  const std::size_t m = pts.size();
  std::vector<double> out(m);
  for (std::size_t k = 0; k < m; ++k) {
    double best = pts[k].second;
    for (std::size_t i = 0; i <= k; ++i)
      for (std::size_t j = k; j < m; ++j) {
        if (i == j) continue;
        const double t = (pts[k].first - pts[i].first) / (pts[j].first - pts[i].first);
        best = std::min(best, pts[i].second + t * (pts[j].second - pts[i].second));
      }
    out[k] = best;
  }
  return out;
}

/// Asymptotic Kolmogorov survival function P(sqrt(n) D_n > lambda).
inline double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

/// Standard error of a lower p-quantile from B sorted draws, from the
/// binomial spread of order statistics.
inline double quantile_standard_error(const std::vector<double> &sorted, double p) {
  const double B = static_cast<double>(sorted.size());
  const double s = std::sqrt(p * (1 - p) / B);
  auto at = [&](double q) {
    const auto idx = static_cast<std::size_t>(std::clamp(std::ceil(q * B), 1.0, B)) - 1;
    return sorted[idx];
  };
  return (at(p + s) - at(p - s)) / 2.0;
}

}  // namespace oracle
