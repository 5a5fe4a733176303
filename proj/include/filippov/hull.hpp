#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "filippov/geometry.hpp"

namespace filippov {

/// Closed convex hull approximation.  Exact minimal vertex lists up to
/// dimension 3 (2D counterclockwise); support samples over a fixed
/// deterministic direction set above that.
struct ConvexApprox {
  enum class Rep : std::uint8_t { Vertices, Support };

  int dim = 0;
  Rep rep = Rep::Vertices;
  std::vector<Vec> vertices;
  std::vector<Vec> directions;
  std::vector<double> support_values;
  double tolerance = 1e-6;

  bool empty() const { return vertices.empty() && support_values.empty(); }
  double diameter() const;
  Vec centroid() const;
};

ConvexApprox convex_hull(const std::vector<Vec>& points, int dim);

/// Support value h_C(d) = sup over the set of <v, d>; d is normalized
/// internally.  Support-sample reps answer with the max over the three
/// nearest sampled directions.
double support(const ConvexApprox& c, const Vec& d);

bool membership(const ConvexApprox& c, const Vec& v, double tol);

/// Euclidean distance from p to conv(points) (Wolfe min-norm-point).
double distance_to_hull(const Vec& p, const std::vector<Vec>& points);

/// Symmetric support-function deviation over the fixed direction set.
double hull_hausdorff(const ConvexApprox& a, const ConvexApprox& b);

/// Least-norm element of conv(points) ∩ {w : <w, n> = 0 for all normals}.
/// Returns the point and its convex weights, or nullopt when the
/// intersection is empty (within tol).
std::optional<std::pair<Vec, std::vector<double>>> min_norm_in_subspace(
    const std::vector<Vec>& points, const std::vector<Vec>& normals, double tol = 1e-9);

}  // namespace filippov
