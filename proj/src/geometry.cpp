#include "filippov/geometry.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

namespace filippov {

double dot(const Vec& a, const Vec& b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

double distance(const Vec& a, const Vec& b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

Vec scaled(const Vec& a, double s) {
  Vec r = a;
  for (double& v : r) v *= s;
  return r;
}

Vec sum(const Vec& a, const Vec& b) {
  Vec r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
  return r;
}

Vec diff(const Vec& a, const Vec& b) {
  Vec r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  return r;
}

double ValueBox::width() const {
  double w = 0.0;
  for (std::size_t i = 0; i < lo.size(); ++i) w = std::max(w, hi[i] - lo[i]);
  return w;
}

Vec ValueBox::center() const {
  Vec c(lo.size());
  for (std::size_t i = 0; i < lo.size(); ++i) c[i] = 0.5 * (lo[i] + hi[i]);
  return c;
}

bool ValueBox::contains(const Vec& p, double tol) const {
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (p[i] < lo[i] - tol || p[i] > hi[i] + tol) return false;
  return true;
}

double ValueBox::distance_to(const Vec& p) const {
  double s = 0.0;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    double d = p[i] < lo[i] ? lo[i] - p[i] : (p[i] > hi[i] ? p[i] - hi[i] : 0.0);
    s += d * d;
  }
  return std::sqrt(s);
}

double BoxCover::distance_to(const Vec& p) const {
  double best = std::numeric_limits<double>::infinity();
  for (const ValueBox& b : boxes) best = std::min(best, b.distance_to(p));
  return best;
}

namespace {

// Corner/center/face-midpoint samples of a box; enough resolution for the
// small boxes produced by the refinement passes.
void sample_box_points(const ValueBox& b, std::vector<Vec>& out) {
  const std::size_t d = b.dim();
  const std::size_t corners = std::size_t{1} << d;
  for (std::size_t mask = 0; mask < corners; ++mask) {
    Vec p(d);
    for (std::size_t i = 0; i < d; ++i) p[i] = (mask >> i) & 1 ? b.hi[i] : b.lo[i];
    out.push_back(std::move(p));
  }
  out.push_back(b.center());
  for (std::size_t i = 0; i < d; ++i) {
    Vec p = b.center();
    p[i] = b.lo[i];
    out.push_back(p);
    p[i] = b.hi[i];
    out.push_back(std::move(p));
  }
}

}  // namespace

double directed_cover_distance(const BoxCover& a, const BoxCover& b) {
  if (a.boxes.empty()) return 0.0;
  if (b.boxes.empty()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  std::vector<Vec> pts;
  for (const ValueBox& box : a.boxes) {
    pts.clear();
    sample_box_points(box, pts);
    for (const Vec& p : pts) worst = std::max(worst, b.distance_to(p));
  }
  return worst;
}

double cover_hausdorff(const BoxCover& a, const BoxCover& b) {
  return std::max(directed_cover_distance(a, b), directed_cover_distance(b, a));
}

namespace {

double halton(std::size_t index, unsigned base) {
  double f = 1.0, r = 0.0;
  std::size_t i = index;
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

constexpr unsigned kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                                31, 37, 41, 43, 47, 53, 59, 61, 67, 71};

}  // namespace

std::vector<Vec> unit_directions(std::size_t dim, std::size_t extra) {
  std::vector<Vec> dirs;
  dirs.reserve(2 * dim + extra);
  for (std::size_t i = 0; i < dim; ++i) {
    Vec d(dim, 0.0);
    d[i] = 1.0;
    dirs.push_back(d);
    d[i] = -1.0;
    dirs.push_back(std::move(d));
  }
  // Low-discrepancy sphere points: Halton pairs through Box-Muller, normalized.
  std::size_t produced = 0;
  std::size_t index = 1;
  while (produced < extra) {
    Vec g(dim);
    for (std::size_t k = 0; k < dim; k += 2) {
      double u1 = halton(index, kPrimes[(2 * k) % 20]);
      double u2 = halton(index, kPrimes[(2 * k + 1) % 20]);
      u1 = std::max(u1, 1e-12);
      double r = std::sqrt(-2.0 * std::log(u1));
      g[k] = r * std::cos(2.0 * M_PI * u2);
      if (k + 1 < dim) g[k + 1] = r * std::sin(2.0 * M_PI * u2);
    }
    ++index;
    double n = norm(g);
    if (n < 1e-9) continue;
    dirs.push_back(scaled(g, 1.0 / n));
    ++produced;
  }
  return dirs;
}

}  // namespace filippov
