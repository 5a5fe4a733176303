#pragma once

#include <cstddef>
#include <vector>

namespace filippov {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b);
double norm(const Vec& a);
double distance(const Vec& a, const Vec& b);
Vec scaled(const Vec& a, double s);
Vec sum(const Vec& a, const Vec& b);
Vec diff(const Vec& a, const Vec& b);

/// Axis-aligned box in value space.  Degenerate sides (lo == hi) are allowed;
/// value-point boxes use them.
struct ValueBox {
  Vec lo;
  Vec hi;

  std::size_t dim() const { return lo.size(); }
  double width() const;              // longest side
  Vec center() const;
  bool contains(const Vec& p, double tol = 0.0) const;
  double distance_to(const Vec& p) const;  // Euclidean distance to the box
};

/// Finite union of value boxes; the covered form of computed sets.
struct BoxCover {
  std::size_t dim = 0;
  std::vector<ValueBox> boxes;
  bool resolution_reached = true;

  bool empty() const { return boxes.empty(); }
  double distance_to(const Vec& p) const;  // distance to the union
};

/// max over points of A of dist(p, union B), sampled at box corners, centers
/// and face midpoints.  Exact for the unions of small boxes used here.
double directed_cover_distance(const BoxCover& a, const BoxCover& b);
double cover_hausdorff(const BoxCover& a, const BoxCover& b);

/// Deterministic unit directions: 2*dim axis directions followed by `extra`
/// low-discrepancy directions (Halton points through Box-Muller, normalized).
std::vector<Vec> unit_directions(std::size_t dim, std::size_t extra = 100);

}  // namespace filippov
