#pragma once

// Current status data observed on a regular grid, and its NPMLE.
//
// Grid points are stored 0-based: point(i) = a + (i + 1) * delta for
// i = 0 .. K-1, so point(0) is the first inspection time strictly after a.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "gridcs/error.hpp"
#include "gridcs/isotonic.hpp"

namespace gridcs {

/// Relative tolerance used when snapping times onto the grid.
inline constexpr double grid_snap_tolerance = 1e-9;

class GridSpec {
 public:
  GridSpec() = default;

  /// Grid with spacing `delta` on [a, b]; K = floor((b - a) / delta).
  static GridSpec from_spacing(double a, double b, double delta) {
    if (!(a < b)) fail(ErrorKind::invalid_argument, "grid requires a < b");
    if (!(delta > 0.0) || !std::isfinite(delta))
      fail(ErrorKind::invalid_argument, "grid spacing must be positive");
    const double ratio = (b - a) / delta;
    // Absorb rounding in delta = c n^-gamma so exact multiples are kept.
    const auto k = static_cast<std::int64_t>(std::floor(ratio * (1.0 + grid_snap_tolerance)));
    if (k < 1) fail(ErrorKind::invalid_argument, "grid has no points");
    GridSpec g;
    g.a_ = a;
    g.b_ = b;
    g.delta_ = delta;
    g.k_ = static_cast<std::size_t>(k);
    return g;
  }

  /// Grid with exactly K points spaced (b - a) / K, so point(K-1) == b.
  static GridSpec from_count(double a, double b, std::size_t k) {
    if (k < 1) fail(ErrorKind::invalid_argument, "grid has no points");
    if (!(a < b)) fail(ErrorKind::invalid_argument, "grid requires a < b");
    GridSpec g;
    g.a_ = a;
    g.b_ = b;
    g.delta_ = (b - a) / static_cast<double>(k);
    g.k_ = k;
    return g;
  }

  double a() const { return a_; }
  double b() const { return b_; }
  double delta() const { return delta_; }
  std::size_t size() const { return k_; }
  double point(std::size_t i) const { return a_ + static_cast<double>(i + 1) * delta_; }

  /// Index of the grid point that t snaps to, or npos when t is off-grid.
  std::size_t snap(double t) const {
    const double pos = (t - a_) / delta_ - 1.0;
    const double nearest = std::round(pos);
    if (std::abs(pos - nearest) > grid_snap_tolerance) return npos;
    if (nearest < 0.0 || nearest >= static_cast<double>(k_)) return npos;
    return static_cast<std::size_t>(nearest);
  }

  /// Largest index i with point(i) <= t (within snapping tolerance), or npos
  /// when t < point(0).
  std::size_t floor_index(double t) const {
    const double pos = std::floor((t - a_) / delta_ + grid_snap_tolerance) - 1.0;
    if (pos < 0.0) return npos;
    return std::min(static_cast<std::size_t>(pos), k_ - 1);
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  friend bool operator==(const GridSpec &, const GridSpec &) = default;

 private:
  double a_ = 0.0;
  double b_ = 1.0;
  double delta_ = 1.0;
  std::size_t k_ = 1;
};

struct Observation {
  double x;
  int y;
};

using ObservationSet = std::vector<Observation>;

struct BinnedCounts {
  GridSpec grid;
  std::vector<std::int64_t> N;  // observations per grid point
  std::vector<std::int64_t> Z;  // events (y = 1) per grid point

  std::int64_t total() const {
    std::int64_t n = 0;
    for (auto v : N) n += v;
    return n;
  }

  double average(std::size_t i) const {
    return N[i] > 0 ? static_cast<double>(Z[i]) / static_cast<double>(N[i]) : 0.0;
  }

  void validate() const {
    if (N.size() != grid.size() || Z.size() != grid.size())
      fail(ErrorKind::data, "binned counts do not match grid size");
    for (std::size_t i = 0; i < N.size(); ++i)
      if (N[i] < 0 || Z[i] < 0 || Z[i] > N[i])
        fail(ErrorKind::data, "inconsistent binned counts");
    if (total() < 1) fail(ErrorKind::data, "no observations");
  }
};

struct StepEstimate {
  GridSpec grid;
  std::vector<double> levels;     // F*_i at point(i)
  std::size_t empty_bins = 0;     // grid points carried across without data
};

inline BinnedCounts bin(const ObservationSet &obs, const GridSpec &grid) {
  if (obs.empty()) fail(ErrorKind::data, "no observations");
  BinnedCounts out{grid, std::vector<std::int64_t>(grid.size(), 0),
                   std::vector<std::int64_t>(grid.size(), 0)};
  for (const Observation &o : obs) {
    const std::size_t i = grid.snap(o.x);
    if (i == GridSpec::npos) fail(ErrorKind::data, "off-grid observation");
    if (o.y != 0 && o.y != 1) fail(ErrorKind::data, "response must be 0 or 1");
    ++out.N[i];
    out.Z[i] += o.y;
  }
  return out;
}

namespace detail {
// Spread fitted levels of the nonempty bins back over the full grid. Empty
// bins take the level on their left; leading empty bins take the first
// fitted level.
inline StepEstimate spread_levels(const BinnedCounts &binned,
                                  const std::vector<std::size_t> &support,
                                  const std::vector<double> &fitted) {
  StepEstimate est{binned.grid, std::vector<double>(binned.grid.size(), 0.0),
                   binned.grid.size() - support.size()};
  std::size_t s = 0;
  double level = fitted.front();
  for (std::size_t i = 0; i < est.levels.size(); ++i) {
    if (s < support.size() && support[s] == i) level = fitted[s++];
    est.levels[i] = level;
  }
  return est;
}

inline std::vector<std::size_t> nonempty_bins(const BinnedCounts &binned) {
  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < binned.N.size(); ++i)
    if (binned.N[i] > 0) support.push_back(i);
  return support;
}
}  // namespace detail

/// NPMLE: weighted isotonic regression of bin averages with bin counts.
inline StepEstimate npmle(const BinnedCounts &binned) {
  binned.validate();
  const auto support = detail::nonempty_bins(binned);
  WeightedSeries series;
  for (std::size_t i : support) {
    series.values.push_back(binned.average(i));
    series.weights.push_back(static_cast<double>(binned.N[i]));
  }
  return detail::spread_levels(binned, support, pava(series));
}

/// NPMLE as the left slope of the minorant of {(G_n(t), V_n(t))}, where
/// G_n and V_n are the empirical proportions of x <= t and of y = 1, x <= t.
inline StepEstimate npmle_via_gcm(const BinnedCounts &binned) {
  binned.validate();
  const auto support = detail::nonempty_bins(binned);
  const double n = static_cast<double>(binned.total());
  PlanarDiagram diagram;
  diagram.points.push_back({0.0, 0.0});
  std::int64_t cum_n = 0, cum_z = 0;
  for (std::size_t i : support) {
    cum_n += binned.N[i];
    cum_z += binned.Z[i];
    diagram.points.push_back({static_cast<double>(cum_n) / n, static_cast<double>(cum_z) / n});
  }
  const ConvexMinorant cm = gcm(diagram);
  std::vector<double> fitted;
  fitted.reserve(support.size());
  for (std::size_t j = 1; j < diagram.points.size(); ++j)
    fitted.push_back(left_slope(cm, diagram.points[j].x));
  return detail::spread_levels(binned, support, fitted);
}

/// Right-continuous step function: 0 before the first grid point.
inline double eval_step(const StepEstimate &est, double t) {
  const GridSpec &g = est.grid;
  if (!(t >= g.a()) || !(t <= g.b())) fail(ErrorKind::invalid_argument, "out of domain");
  const std::size_t i = g.floor_index(t);
  if (i == GridSpec::npos) return 0.0;
  return est.levels[i];
}

struct Anchor {
  std::size_t l;  // largest grid index with point(l) <= x0
  std::size_t r;  // l + 1
  double rho;     // (x0 - t_l) / (t_r - t_l), in [0, 1)
};

inline Anchor locate_anchor(const GridSpec &grid, double x0) {
  const std::size_t l = grid.floor_index(x0);
  if (l == GridSpec::npos || l + 1 >= grid.size())
    fail(ErrorKind::invalid_argument, "anchor outside grid");
  double rho = (x0 - grid.point(l)) / grid.delta();
  rho = std::clamp(rho, 0.0, 1.0);
  if (rho < grid_snap_tolerance || rho >= 1.0) rho = 0.0;
  return {l, l + 1, rho};
}

/// Anchor for a grid point of interest when no x0 is available.
inline Anchor anchor_at_index(const GridSpec &grid, std::size_t l) {
  if (l + 1 >= grid.size()) fail(ErrorKind::invalid_argument, "anchor outside grid");
  return {l, l + 1, 0.0};
}

/// True when the averages of the nonempty bins are already nondecreasing.
inline bool naive_is_monotone(const BinnedCounts &binned) {
  bool have_prev = false;
  double prev = 0.0;
  for (std::size_t i = 0; i < binned.N.size(); ++i) {
    if (binned.N[i] == 0) continue;
    const double v = binned.average(i);
    if (have_prev && v < prev) return false;
    prev = v;
    have_prev = true;
  }
  return true;
}

}  // namespace gridcs
