#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "filippov/expr.hpp"

namespace filippov {

/// Closed interval, possibly unbounded.  Outward-rounded enough for the
/// coarse certificates used here (exactness is not required, only soundness:
/// the result always contains every attainable value).
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  Interval() = default;
  Interval(double a, double b) : lo(a), hi(b) {}
  static Interval point(double v) { return {v, v}; }
  static Interval whole();

  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  bool is_finite() const { return std::isfinite(lo) && std::isfinite(hi); }
  bool contains(double v) const { return lo <= v && v <= hi; }
  bool intersects(const Interval& o) const { return lo <= o.hi && o.lo <= hi; }
  double distance_to(double v) const {
    return v < lo ? lo - v : (v > hi ? v - hi : 0.0);
  }
};

/// Interval image of e over the box given by per-coordinate ranges `x` and
/// time range `t`.  Domain faults (log over nonpositives, division through
/// zero) widen to infinite bounds, which keeps emptiness certificates sound.
Interval eval_on_box(const Expr& e, const std::vector<Interval>& x,
                     const Interval& t);

inline Interval eval_on_box(const Expr& e, const std::vector<Interval>& x,
                            double t) {
  return eval_on_box(e, x, Interval::point(t));
}

}  // namespace filippov
