#pragma once

#include "filippov/essential_range.hpp"
#include "filippov/hull.hpp"
#include "filippov/piecewise.hpp"

namespace filippov {

/// The set-valued right-hand side: closed convex hulls of essential values
/// of the map over shrinking balls, with null sets quotiented out.
struct FilippovMap {
  PiecewiseMap rhs;  // codomain dim == state dim
  RadiusSchedule radii;
  double hull_tol = 1e-6;
  NegligibilityIdeal ideal;
  MeasureModel measure;
  std::uint64_t seed = 0;
  std::uint64_t budget = 10000;  // Monte Carlo samples per ball query

  /// Defaults: r0 = 0.1 * domain diameter, factor 0.5, 30 steps.
  static FilippovMap standard(PiecewiseMap rhs_map);
};

enum class FilippovPath { Fast, Generic };

/// Fast path: hull of the adjacent branch values (valid because branches are
/// continuous up to cell closures; never consults overrides).  Generic path:
/// essential ranges over shrinking balls, hulled, iterated to convergence of
/// the support functions; throws ConvergenceError when the schedule runs out.
ConvexApprox filippov_set(const FilippovMap& F, double t, const Vec& x,
                          FilippovPath path = FilippovPath::Fast);

/// One step of the generic path: hull of the essential range over the fat
/// ball of radius r around x (clipped to the domain).
ConvexApprox filippov_hull_at_radius(const FilippovMap& F, double t, const Vec& x, double r);

struct SingletonCheck {
  bool is_singleton = false;
  Vec value;
};

/// Diameter test on the Filippov set; at continuity points this must succeed
/// with the common branch limit.
SingletonCheck singleton_check(const FilippovMap& F, double t, const Vec& x, double tol);

}  // namespace filippov
