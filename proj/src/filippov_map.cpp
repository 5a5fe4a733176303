#include "filippov/filippov_map.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace filippov {

FilippovMap FilippovMap::standard(PiecewiseMap rhs_map) {
  FilippovMap F;
  F.radii.rho0 = 0.1 * rhs_map.domain.diameter();
  F.radii.factor = 0.5;
  F.radii.steps = 30;
  F.measure = MeasureModel{rhs_map.domain, std::nullopt};
  F.rhs = std::move(rhs_map);
  return F;
}

namespace {

ConvexApprox fast_hull(const FilippovMap& F, double t, const Vec& x) {
  std::vector<CellId> cells = adjacent_cells(F.rhs, x, F.rhs.surface_tol);
  if (cells.empty())
    throw ValidationError("no owned cell adjacent to the query point");
  std::vector<Vec> values;
  values.reserve(cells.size());
  for (const CellId& c : cells) values.push_back(F.rhs.branch_value(c, x, t));
  return convex_hull(values, F.rhs.codomain_dim);
}

Region ball_region(const PiecewiseMap& f, const Vec& x, double r) {
  Vec lo(x.size()), hi(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    lo[i] = x[i] - r;
    hi[i] = x[i] + r;
  }
  auto box = f.domain.clipped(lo, hi);
  if (!box)
    throw ValidationError("query point is outside the domain interior");
  // Fat open ball {‖x' - x‖² < r²} as a strict constraint.
  const int m = static_cast<int>(x.size());
  std::vector<Expr> coords;
  for (int i = 0; i < m; ++i) coords.push_back(Expr::variable(i, m));
  Expr d2 = squared_distance(coords, x);
  Expr cons = Expr::constant(r * r, m) - d2;
  return Region::single(*box, {{cons, ConstraintSign::Positive}});
}

std::vector<Vec> range_points(const EssentialRange& er) {
  std::vector<Vec> pts;
  if (er.exact) {
    pts = er.values;
    return pts;
  }
  for (const ValueBox& b : er.cover.boxes) {
    const std::size_t d = b.dim();
    for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
      Vec p(d);
      for (std::size_t i = 0; i < d; ++i) p[i] = (mask >> i) & 1 ? b.hi[i] : b.lo[i];
      pts.push_back(std::move(p));
    }
  }
  return pts;
}

}  // namespace

ConvexApprox filippov_hull_at_radius(const FilippovMap& F, double t, const Vec& x, double r) {
  EssConfig cfg;
  cfg.ideal = F.ideal;
  cfg.measure = F.measure;
  cfg.budget = F.budget;
  cfg.time = t;

  Region ball = ball_region(F.rhs, x, r);
  cfg.measure.base = ball.base;
  cfg.seed = F.seed ^ std::hash<double>{}(r);

  // Match the cover resolution to the current image width so wide early
  // iterations stay coarse and late ones resolve to the hull tolerance.
  double width = 0.0;
  auto base_iv = ball.base.as_intervals();
  for (const auto& [cell, branch] : F.rhs.branches)
    for (const Expr& g : branch) {
      Interval I = eval_on_box(g, base_iv, t);
      if (I.is_finite()) width = std::max(width, I.width());
    }
  const double per_axis = std::max(8.0, 64.0 / std::pow(2.0, double(x.size() - 1)));
  double resolution = std::max(F.hull_tol / 2.0, width / per_axis);

  EssentialRange er = essential_range(F.rhs, ball, cfg, resolution);
  std::vector<Vec> pts = range_points(er);
  if (pts.empty())
    throw ConvergenceError("filippov_set: empty essential range over a query ball");
  return convex_hull(pts, F.rhs.codomain_dim);
}

namespace {

// Hulls of piecewise maps are locally constant in r while the ball straddles
// a surface, so closeness of successive hulls alone would stop too early.
// Early exit is only allowed once the ball is certified surface-free;
// otherwise the schedule runs to its end.
bool ball_surface_free(const PiecewiseMap& f, const Vec& x, double r) {
  Vec lo(x.size()), hi(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    lo[i] = x[i] - r;
    hi[i] = x[i] + r;
  }
  auto box = f.domain.clipped(lo, hi);
  if (!box) return false;
  auto iv = box->as_intervals();
  for (const Expr& sigma : f.switches) {
    Interval I = eval_on_box(sigma, iv, 0.0);
    if (I.lo <= 0.0 && I.hi >= 0.0) return false;
  }
  return true;
}

std::string hull_brief(const ConvexApprox& h) {
  std::ostringstream out;
  if (h.rep == ConvexApprox::Rep::Vertices) {
    out << "{";
    for (std::size_t i = 0; i < h.vertices.size(); ++i) {
      out << (i ? "; " : "") << "(";
      for (std::size_t k = 0; k < h.vertices[i].size(); ++k)
        out << (k ? ", " : "") << h.vertices[i][k];
      out << ")";
    }
    out << "}";
  } else {
    out << "<support rep, diameter " << h.diameter() << ">";
  }
  return out.str();
}

ConvexApprox generic_hull(const FilippovMap& F, double t, const Vec& x) {
  ConvexApprox prev, prev2;
  bool have_prev = false, have_prev2 = false;
  double last_gap = std::numeric_limits<double>::infinity();
  for (int j = 0; j < F.radii.steps; ++j) {
    const double r = F.radii.at(j);
    ConvexApprox hull = filippov_hull_at_radius(F, t, x, r);
    if (have_prev) {
      last_gap = hull_hausdorff(prev, hull);
      if (last_gap <= F.hull_tol && ball_surface_free(F.rhs, x, r)) return hull;
    }
    prev2 = std::move(prev);
    have_prev2 = have_prev;
    prev = std::move(hull);
    have_prev = true;
  }
  if (last_gap <= F.hull_tol) return prev;
  std::ostringstream msg;
  msg << "filippov_set: radius schedule exhausted before hull convergence; last gap " << last_gap;
  if (have_prev2) msg << "; second-to-last hull " << hull_brief(prev2);
  if (have_prev) msg << "; last hull " << hull_brief(prev);
  throw ConvergenceError(msg.str());
}

}  // namespace

ConvexApprox filippov_set(const FilippovMap& F, double t, const Vec& x, FilippovPath path) {
  if (!F.rhs.domain.contains(x))
    throw ValidationError("query point is outside the domain");
  if (path == FilippovPath::Fast) return fast_hull(F, t, x);
  return generic_hull(F, t, x);
}

SingletonCheck singleton_check(const FilippovMap& F, double t, const Vec& x, double tol) {
  ConvexApprox hull = filippov_set(F, t, x, FilippovPath::Fast);
  SingletonCheck out;
  out.is_singleton = hull.diameter() <= tol;
  if (out.is_singleton) {
    // The lexicographically smallest adjacent cell is the same branch the
    // raw evaluation uses on surfaces, so the value matches direct limits.
    std::vector<CellId> cells = adjacent_cells(F.rhs, x, F.rhs.surface_tol);
    out.value = F.rhs.branch_value(cells.front(), x, t);
  }
  return out;
}

}  // namespace filippov
