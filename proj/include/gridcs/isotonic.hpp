#pragma once

// Weighted isotonic regression and greatest convex minorants.
//
// pava() and gcm()/left_slope() are two routes to the same object: the
// isotonic fit of (values, weights) equals the left derivative of the
// greatest convex minorant of the cumulative sum diagram, read off at the
// cumulative weights.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "gridcs/error.hpp"

namespace gridcs {

struct WeightedSeries {
  std::vector<double> values;
  std::vector<double> weights;

  /// Unit weights.
  static WeightedSeries unweighted(std::vector<double> v) {
    std::vector<double> w(v.size(), 1.0);
    return {std::move(v), std::move(w)};
  }

  void validate() const {
    if (values.empty()) fail(ErrorKind::invalid_argument, "empty series");
    if (weights.size() != values.size())
      fail(ErrorKind::invalid_argument, "length mismatch");
    for (double w : weights)
      if (!(w > 0.0) || !std::isfinite(w))
        fail(ErrorKind::invalid_argument, "invalid weight");
    for (double v : values)
      if (!std::isfinite(v)) fail(ErrorKind::invalid_argument, "non-finite value");
  }
};

/// Reusable scratch space for the pooling stack. One per thread.
class PavaWorkspace {
 public:
  struct Block {
    double weight;
    double weighted_sum;
    double mean;
    std::size_t count;
  };

  /// Pools `values` (weights from `weights`, or unit if empty) and leaves
  /// the final blocks in blocks().
  void pool(std::span<const double> values, std::span<const double> weights) {
    blocks_.clear();
    blocks_.reserve(values.size());
    const bool unit = weights.empty();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double w = unit ? 1.0 : weights[i];
      Block b{w, w * values[i], values[i], 1};
      // Merge while the new block violates the order with its predecessor.
      while (!blocks_.empty() && blocks_.back().mean >= b.mean) {
        const Block &prev = blocks_.back();
        b.weight += prev.weight;
        b.weighted_sum += prev.weighted_sum;
        b.count += prev.count;
        b.mean = b.weighted_sum / b.weight;
        blocks_.pop_back();
      }
      blocks_.push_back(b);
    }
  }

  /// Fitted value at position `index` after pool().
  double value_at(std::size_t index) const {
    std::size_t end = 0;
    for (const Block &b : blocks_) {
      end += b.count;
      if (index < end) return b.mean;
    }
    return blocks_.back().mean;
  }

  void expand(std::vector<double> &out) const {
    out.clear();
    for (const Block &b : blocks_) out.insert(out.end(), b.count, b.mean);
  }

  const std::vector<Block> &blocks() const { return blocks_; }

 private:
  std::vector<Block> blocks_;
};

/// Weighted least-squares projection onto nondecreasing sequences.
inline std::vector<double> pava(const WeightedSeries &series) {
  series.validate();
  PavaWorkspace ws;
  ws.pool(series.values, series.weights);
  std::vector<double> out;
  out.reserve(series.values.size());
  ws.expand(out);
  return out;
}

inline std::vector<double> pava(std::vector<double> values, std::vector<double> weights) {
  return pava(WeightedSeries{std::move(values), std::move(weights)});
}

struct Point {
  double x;
  double y;
  friend bool operator==(const Point &, const Point &) = default;
};

struct PlanarDiagram {
  std::vector<Point> points;

  void validate() const {
    if (points.size() < 2) fail(ErrorKind::invalid_argument, "degenerate diagram");
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (!std::isfinite(points[i].x) || !std::isfinite(points[i].y))
        fail(ErrorKind::invalid_argument, "non-finite diagram point");
      if (i > 0 && !(points[i].x > points[i - 1].x))
        fail(ErrorKind::invalid_argument, "diagram abscissas not strictly increasing");
    }
  }
};

struct ConvexMinorant {
  std::vector<Point> breakpoints;
  std::vector<double> slopes;  // slopes[j] is the segment from breakpoint j to j+1

  double x_min() const { return breakpoints.front().x; }
  double x_max() const { return breakpoints.back().x; }

  /// Minorant value at x (linear interpolation between breakpoints).
  double value(double x) const {
    auto it = std::lower_bound(breakpoints.begin(), breakpoints.end(), x,
                               [](const Point &p, double v) { return p.x < v; });
    if (it == breakpoints.end()) return breakpoints.back().y;
    if (it == breakpoints.begin()) return it->y;
    const std::size_t j = static_cast<std::size_t>(it - breakpoints.begin()) - 1;
    return breakpoints[j].y + slopes[j] * (x - breakpoints[j].x);
  }
};

namespace detail {
// Sign of the turn a -> b -> c; > 0 means b lies strictly below the chord ac.
inline double turn(const Point &a, const Point &b, const Point &c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}
}  // namespace detail

/// Greatest convex minorant (lower convex hull) of a diagram.
///
/// Collinear interior points are dropped, so consecutive slopes are
/// strictly increasing.
inline ConvexMinorant gcm(const PlanarDiagram &diagram) {
  diagram.validate();
  ConvexMinorant cm;
  auto &hull = cm.breakpoints;
  hull.reserve(diagram.points.size());
  for (const Point &p : diagram.points) {
    while (hull.size() >= 2 && detail::turn(hull[hull.size() - 2], hull.back(), p) <= 0.0)
      hull.pop_back();
    hull.push_back(p);
  }
  cm.slopes.reserve(hull.size() - 1);
  for (std::size_t j = 0; j + 1 < hull.size(); ++j)
    cm.slopes.push_back((hull[j + 1].y - hull[j].y) / (hull[j + 1].x - hull[j].x));
  return cm;
}

/// Left derivative of the minorant at x, for x in (x_min, x_max].
inline double left_slope(const ConvexMinorant &cm, double x) {
  if (!(x > cm.x_min()) || !(x <= cm.x_max()))
    fail(ErrorKind::invalid_argument, "slope undefined");
  auto it = std::lower_bound(cm.breakpoints.begin(), cm.breakpoints.end(), x,
                             [](const Point &p, double v) { return p.x < v; });
  const auto j = static_cast<std::size_t>(it - cm.breakpoints.begin());
  return cm.slopes[j - 1];
}

/// Cumulative sum diagram {(0,0)} ∪ {(Σ_{j≤i} w_j, Σ_{j≤i} w_j v_j)}.
inline PlanarDiagram cumulative_diagram(const WeightedSeries &series) {
  series.validate();
  PlanarDiagram d;
  d.points.reserve(series.values.size() + 1);
  d.points.push_back({0.0, 0.0});
  double cw = 0.0, cs = 0.0;
  for (std::size_t i = 0; i < series.values.size(); ++i) {
    cw += series.weights[i];
    cs += series.weights[i] * series.values[i];
    d.points.push_back({cw, cs});
  }
  return d;
}

/// Isotonic fit computed through the minorant instead of pooling.
inline std::vector<double> isotonic_via_gcm(const WeightedSeries &series) {
  const PlanarDiagram d = cumulative_diagram(series);
  const ConvexMinorant cm = gcm(d);
  std::vector<double> out;
  out.reserve(series.values.size());
  for (std::size_t i = 1; i < d.points.size(); ++i)
    out.push_back(left_slope(cm, d.points[i].x));
  return out;
}

}  // namespace gridcs
