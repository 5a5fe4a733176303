#include "filippov/hull.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "filippov/errors.hpp"

namespace filippov {

namespace {

// Wolfe's min-norm-point algorithm over conv(points).  Returns the nearest
// point to the origin and its convex weights.
std::pair<Vec, std::vector<double>> min_norm_point(const std::vector<Vec>& points) {
  const std::size_t n = points.size();
  const std::size_t d = points[0].size();

  std::size_t start = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    double s = dot(points[i], points[i]);
    if (s < best) best = s, start = i;
  }

  std::vector<std::size_t> active = {start};
  std::vector<double> weights = {1.0};
  Vec x = points[start];

  auto combine = [&](const std::vector<double>& w) {
    Vec r(d, 0.0);
    for (std::size_t k = 0; k < active.size(); ++k)
      for (std::size_t i = 0; i < d; ++i) r[i] += w[k] * points[active[k]][i];
    return r;
  };

  for (int iter = 0; iter < 200; ++iter) {
    double xx = dot(x, x);
    if (xx < 1e-30) break;

    std::size_t jstar = 0;
    double lowest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      double s = dot(x, points[i]);
      if (s < lowest) lowest = s, jstar = i;
    }
    if (lowest >= xx - 1e-14 * std::max(1.0, xx)) break;  // optimal
    if (std::find(active.begin(), active.end(), jstar) == active.end()) {
      active.push_back(jstar);
      weights.push_back(0.0);
    }

    // Minor cycle: step toward the affine minimizer until feasible.
    for (int minor = 0; minor < 100; ++minor) {
      const std::size_t m = active.size();
      Eigen::MatrixXd K(m + 1, m + 1);
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + 1);
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) K(a, b) = dot(points[active[a]], points[active[b]]);
      for (std::size_t a = 0; a < m; ++a) K(a, m) = K(m, a) = 1.0;
      K(m, m) = 0.0;
      rhs(m) = 1.0;
      Eigen::VectorXd sol = K.fullPivLu().solve(rhs);

      bool feasible = true;
      for (std::size_t a = 0; a < m; ++a) feasible = feasible && sol(a) >= -1e-12;
      if (feasible) {
        weights.assign(sol.data(), sol.data() + m);
        for (double& w : weights) w = std::max(w, 0.0);
        x = combine(weights);
        break;
      }
      // Largest step toward the affine point that keeps weights nonnegative.
      double theta = 1.0;
      for (std::size_t a = 0; a < m; ++a) {
        double delta = sol(a) - weights[a];
        if (delta < -1e-18) theta = std::min(theta, weights[a] / -delta);
      }
      std::vector<double> moved(m);
      for (std::size_t a = 0; a < m; ++a)
        moved[a] = std::max(0.0, weights[a] + theta * (sol(a) - weights[a]));
      // Drop vanished points.
      std::vector<std::size_t> kept_idx;
      std::vector<double> kept_w;
      double total = 0.0;
      for (std::size_t a = 0; a < m; ++a) {
        if (moved[a] > 1e-14) {
          kept_idx.push_back(active[a]);
          kept_w.push_back(moved[a]);
          total += moved[a];
        }
      }
      if (kept_idx.empty()) {
        kept_idx.push_back(active[0]);
        kept_w.push_back(1.0);
        total = 1.0;
      }
      for (double& w : kept_w) w /= total;
      active = std::move(kept_idx);
      weights = std::move(kept_w);
      x = combine(weights);
    }
  }

  std::vector<double> full(n, 0.0);
  for (std::size_t k = 0; k < active.size(); ++k) full[active[k]] = weights[k];
  return {x, full};
}

std::vector<Vec> dedupe(const std::vector<Vec>& pts) {
  std::vector<Vec> out = pts;
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

ConvexApprox hull_1d(const std::vector<Vec>& pts) {
  double lo = pts[0][0], hi = pts[0][0];
  for (const Vec& p : pts) {
    lo = std::min(lo, p[0]);
    hi = std::max(hi, p[0]);
  }
  ConvexApprox c;
  c.dim = 1;
  c.vertices.push_back({lo});
  if (hi > lo) c.vertices.push_back({hi});
  return c;
}

double cross2(const Vec& o, const Vec& a, const Vec& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Andrew monotone chain; strict turns only, so collinear interior points are
// dropped and the result is minimal and counterclockwise.
ConvexApprox hull_2d(std::vector<Vec> pts) {
  pts = dedupe(pts);
  ConvexApprox c;
  c.dim = 2;
  if (pts.size() <= 2) {
    c.vertices = pts;
    return c;
  }
  std::vector<Vec> h(2 * pts.size());
  std::size_t k = 0;
  for (const Vec& p : pts) {
    while (k >= 2 && cross2(h[k - 2], h[k - 1], p) <= 0) --k;
    h[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross2(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  if (h.size() <= 2) {
    // All points collinear: keep the extreme pair as a segment.
    Vec dir = diff(pts.back(), pts.front());
    double best_lo = 0.0, best_hi = 0.0;
    Vec plo = pts.front(), phi = pts.front();
    for (const Vec& p : pts) {
      double s = dot(diff(p, pts.front()), dir);
      if (s < best_lo) best_lo = s, plo = p;
      if (s > best_hi) best_hi = s, phi = p;
    }
    c.vertices = {plo};
    if (phi != plo) c.vertices.push_back(phi);
    return c;
  }
  c.vertices = std::move(h);
  return c;
}

// Minimal vertex set in 3D: drop points lying in the hull of the others.
// Point counts here stay small (branch values, reduced covers).
ConvexApprox hull_3d(std::vector<Vec> pts) {
  pts = dedupe(pts);
  if (pts.size() > 96) {
    // Pre-reduce by directional argmax before the exact pass.
    auto dirs = unit_directions(3, 240);
    std::vector<Vec> reduced;
    for (const Vec& d : dirs) {
      std::size_t arg = 0;
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < pts.size(); ++i) {
        double s = dot(pts[i], d);
        if (s > best) best = s, arg = i;
      }
      reduced.push_back(pts[arg]);
    }
    pts = dedupe(reduced);
  }
  std::vector<Vec> kept;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::vector<Vec> others;
    others.reserve(pts.size() - 1);
    for (std::size_t j = 0; j < pts.size(); ++j)
      if (j != i) others.push_back(pts[j]);
    if (others.empty() || distance_to_hull(pts[i], others) > 1e-12) kept.push_back(pts[i]);
  }
  if (kept.empty()) kept.push_back(pts[0]);
  ConvexApprox c;
  c.dim = 3;
  c.vertices = std::move(kept);
  return c;
}

const std::vector<Vec>& direction_table(int dim) {
  static std::vector<std::vector<Vec>> cache(16);
  if (dim < 1 || dim > 15) throw ValidationError("unsupported hull dimension");
  if (cache[dim].empty()) cache[dim] = unit_directions(static_cast<std::size_t>(dim), 100);
  return cache[dim];
}

}  // namespace

double distance_to_hull(const Vec& p, const std::vector<Vec>& points) {
  std::vector<Vec> shifted;
  shifted.reserve(points.size());
  for (const Vec& v : points) shifted.push_back(diff(v, p));
  return norm(min_norm_point(shifted).first);
}

ConvexApprox convex_hull(const std::vector<Vec>& points, int dim) {
  if (points.empty()) throw ValidationError("convex_hull of an empty point set");
  for (const Vec& p : points) {
    if (static_cast<int>(p.size()) != dim)
      throw ValidationError("convex_hull point dimension mismatch");
    for (double v : p)
      if (!std::isfinite(v)) throw ValidationError("convex_hull requires finite coordinates");
  }
  switch (dim) {
    case 1: return hull_1d(points);
    case 2: return hull_2d(points);
    case 3: return hull_3d(points);
    default: break;
  }
  ConvexApprox c;
  c.dim = dim;
  c.rep = ConvexApprox::Rep::Support;
  c.directions = direction_table(dim);
  c.support_values.reserve(c.directions.size());
  for (const Vec& d : c.directions) {
    double best = -std::numeric_limits<double>::infinity();
    for (const Vec& p : points) best = std::max(best, dot(p, d));
    c.support_values.push_back(best);
  }
  return c;
}

double support(const ConvexApprox& c, const Vec& d) {
  double n = norm(d);
  if (n <= 0.0) throw ValidationError("support direction must be nonzero");
  Vec u = scaled(d, 1.0 / n);
  if (c.rep == ConvexApprox::Rep::Vertices) {
    double best = -std::numeric_limits<double>::infinity();
    for (const Vec& v : c.vertices) best = std::max(best, dot(v, u));
    return best;
  }
  // Nearest-sample conservatism: max over the three closest directions.
  std::vector<std::pair<double, std::size_t>> ranked;
  ranked.reserve(c.directions.size());
  for (std::size_t i = 0; i < c.directions.size(); ++i)
    ranked.push_back({distance(c.directions[i], u), i});
  std::partial_sort(ranked.begin(), ranked.begin() + std::min<std::size_t>(3, ranked.size()),
                    ranked.end());
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < std::min<std::size_t>(3, ranked.size()); ++k)
    best = std::max(best, c.support_values[ranked[k].second]);
  return best;
}

bool membership(const ConvexApprox& c, const Vec& v, double tol) {
  if (c.rep == ConvexApprox::Rep::Vertices) {
    if (c.vertices.empty()) return false;
    return distance_to_hull(v, c.vertices) <= tol;
  }
  for (std::size_t i = 0; i < c.directions.size(); ++i)
    if (dot(v, c.directions[i]) > c.support_values[i] + tol) return false;
  return true;
}

double ConvexApprox::diameter() const {
  if (rep == Rep::Vertices) {
    double best = 0.0;
    for (std::size_t i = 0; i < vertices.size(); ++i)
      for (std::size_t j = i + 1; j < vertices.size(); ++j)
        best = std::max(best, distance(vertices[i], vertices[j]));
    return best;
  }
  // Width along sampled axes; the table starts with ±e_i pairs.
  double best = 0.0;
  for (std::size_t i = 0; i + 1 < directions.size(); i += 2)
    best = std::max(best, support_values[i] + support_values[i + 1]);
  return best;
}

Vec ConvexApprox::centroid() const {
  if (rep != Rep::Vertices || vertices.empty())
    throw ValidationError("centroid requires a vertex representation");
  Vec c(vertices[0].size(), 0.0);
  for (const Vec& v : vertices) c = sum(c, v);
  return scaled(c, 1.0 / static_cast<double>(vertices.size()));
}

double hull_hausdorff(const ConvexApprox& a, const ConvexApprox& b) {
  if (a.dim != b.dim) throw ValidationError("hull dimension mismatch");
  double worst = 0.0;
  for (const Vec& d : direction_table(a.dim))
    worst = std::max(worst, std::fabs(support(a, d) - support(b, d)));
  return worst;
}

std::optional<std::pair<Vec, std::vector<double>>> min_norm_in_subspace(
    const std::vector<Vec>& points, const std::vector<Vec>& normals, double tol) {
  if (points.empty()) return std::nullopt;
  const std::size_t d = points[0].size();

  // Orthonormal basis of the active normal span.
  std::vector<Vec> basis;
  for (const Vec& n : normals) {
    Vec r = n;
    for (const Vec& b : basis) r = diff(r, scaled(b, dot(r, b)));
    double len = norm(r);
    if (len > 1e-12) basis.push_back(scaled(r, 1.0 / len));
  }

  auto project = [&](const Vec& v) {  // component inside the normal span
    Vec p(d, 0.0);
    for (const Vec& b : basis) p = sum(p, scaled(b, dot(v, b)));
    return p;
  };

  // Metric penalization: minimizing ‖w‖² + K·‖Pw‖² over the hull is a plain
  // min-norm problem for the transformed points v + (sqrt(1+K)-1)·Pv.
  const double K = 1e12;
  const double stretch = std::sqrt(1.0 + K) - 1.0;
  std::vector<Vec> transformed;
  transformed.reserve(points.size());
  for (const Vec& v : points) transformed.push_back(sum(v, scaled(project(v), stretch)));

  auto [tx, weights] = min_norm_point(transformed);
  (void)tx;

  Vec w(d, 0.0);
  for (std::size_t i = 0; i < points.size(); ++i) w = sum(w, scaled(points[i], weights[i]));

  // Polish: exact KKT solve on the identified support.
  std::vector<std::size_t> supp;
  for (std::size_t i = 0; i < weights.size(); ++i)
    if (weights[i] > 1e-10) supp.push_back(i);
  if (!supp.empty()) {
    const std::size_t m = supp.size();
    const std::size_t rows = m + 1 + basis.size();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, rows);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b) A(a, b) = dot(points[supp[a]], points[supp[b]]);
    for (std::size_t a = 0; a < m; ++a) A(a, m) = A(m, a) = 1.0;
    rhs(m) = 1.0;
    for (std::size_t k = 0; k < basis.size(); ++k)
      for (std::size_t a = 0; a < m; ++a)
        A(a, m + 1 + k) = A(m + 1 + k, a) = dot(points[supp[a]], basis[k]);
    Eigen::VectorXd sol = A.fullPivLu().solve(rhs);
    bool nonneg = sol.allFinite();
    for (std::size_t a = 0; a < m && nonneg; ++a) nonneg = sol(a) >= -1e-9;
    if (nonneg) {
      Vec candidate(d, 0.0);
      std::vector<double> cw(points.size(), 0.0);
      for (std::size_t a = 0; a < m; ++a) {
        double lam = std::max(0.0, sol(a));
        cw[supp[a]] = lam;
        candidate = sum(candidate, scaled(points[supp[a]], lam));
      }
      if (norm(project(candidate)) <= tol) return std::make_pair(candidate, cw);
    }
  }

  if (norm(project(w)) > tol) return std::nullopt;  // hull misses the subspace
  return std::make_pair(w, weights);
}

}  // namespace filippov
