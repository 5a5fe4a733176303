#include "filippov/hull.hpp"

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "filippov/errors.hpp"
#include "filippov/rng.hpp"

using namespace filippov;

namespace {

// Brute-force hull membership oracle: dense grid over convex combinations of
// up to three points (enough for the planar fixtures used here).
bool in_hull_oracle_2d(const Vec& p, const std::vector<Vec>& pts, double tol = 1e-9) {
  const int grid = 200;
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t b = 0; b < pts.size(); ++b)
      for (std::size_t c = 0; c < pts.size(); ++c)
        for (int i = 0; i <= grid; ++i)
          for (int j = 0; j <= grid - i; ++j) {
            double la = static_cast<double>(i) / grid;
            double lb = static_cast<double>(j) / grid;
            double lc = 1.0 - la - lb;
            Vec q = {la * pts[a][0] + lb * pts[b][0] + lc * pts[c][0],
                     la * pts[a][1] + lb * pts[b][1] + lc * pts[c][1]};
            if (distance(p, q) <= tol + 1e-2 / grid) return true;
          }
  return false;
}

}  // namespace

TEST_CASE("2d hull: interior points eliminated, order counterclockwise") {
  std::vector<Vec> pts = {{0, 0}, {1, 0}, {0, 1}, {0.25, 0.25}};
  // Oracle confirms (0.25, 0.25) lies in the hull of the other three.
  CHECK(in_hull_oracle_2d({0.25, 0.25}, {{0, 0}, {1, 0}, {0, 1}}));

  ConvexApprox h = convex_hull(pts, 2);
  REQUIRE(h.vertices.size() == 3);
  std::vector<Vec> sorted = h.vertices;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<Vec>{{0, 0}, {0, 1}, {1, 0}});

  double area2 = 0.0;  // shoelace; positive for counterclockwise order
  for (std::size_t i = 0; i < h.vertices.size(); ++i) {
    const Vec& a = h.vertices[i];
    const Vec& b = h.vertices[(i + 1) % h.vertices.size()];
    area2 += a[0] * b[1] - b[0] * a[1];
  }
  CHECK(area2 > 0.0);
}

TEST_CASE("hull degeneracies: single point, 1d interval, collinear 2d") {
  ConvexApprox single = convex_hull({{2.0, 3.0}}, 2);
  REQUIRE(single.vertices.size() == 1);
  CHECK(single.vertices[0] == Vec{2.0, 3.0});

  ConvexApprox iv = convex_hull({{-1.0}, {1.0}, {0.3}}, 1);
  REQUIRE(iv.vertices.size() == 2);
  CHECK(iv.vertices[0][0] == -1.0);
  CHECK(iv.vertices[1][0] == 1.0);

  // Collinear cloud collapses to a segment, not a perturbed polygon.
  ConvexApprox seg = convex_hull({{0, 0}, {1, 1}, {0.5, 0.5}, {0.25, 0.25}}, 2);
  CHECK(seg.vertices.size() == 2);

  CHECK_THROWS_AS(convex_hull({}, 2), ValidationError);
}

TEST_CASE("support and membership of the unit square") {
  std::vector<Vec> square = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  ConvexApprox h = convex_hull(square, 2);
  REQUIRE(h.vertices.size() == 4);

  Vec diag = {1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
  CHECK(support(h, diag) == doctest::Approx(std::sqrt(2.0)));
  CHECK(support(h, {1.0, 1.0}) == doctest::Approx(std::sqrt(2.0)));  // normalized internally

  CHECK(membership(h, {0.5, 0.5}, 1e-9));
  CHECK(membership(h, {0.0, 0.0}, 1e-9));
  CHECK_FALSE(membership(h, {2.0, 0.0}, 1e-9));
  CHECK_FALSE(membership(h, {1.0 + 1e-6, 0.5}, 1e-9));
}

TEST_CASE("3d hull keeps extreme points only") {
  std::vector<Vec> pts = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0.2, 0.2, 0.2}};
  ConvexApprox h = convex_hull(pts, 3);
  REQUIRE(h.vertices.size() == 4);
  for (const Vec& v : h.vertices) CHECK(v != Vec{0.2, 0.2, 0.2});
  CHECK(membership(h, {0.2, 0.2, 0.2}, 1e-9));
  CHECK_FALSE(membership(h, {0.5, 0.5, 0.5}, 1e-9));
}

TEST_CASE("3d degeneracies stay lower-dimensional") {
  // Coplanar cloud: the interior point goes, the square's corners stay.
  std::vector<Vec> flat = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0.5, 0.5, 0}};
  ConvexApprox h = convex_hull(flat, 3);
  CHECK(h.vertices.size() == 4);
  CHECK(membership(h, {0.5, 0.5, 0.0}, 1e-9));
  CHECK_FALSE(membership(h, {0.5, 0.5, 0.1}, 1e-9));

  // Collinear cloud in 3d collapses to a segment.
  ConvexApprox seg = convex_hull({{0, 0, 0}, {1, 1, 1}, {0.5, 0.5, 0.5}}, 3);
  CHECK(seg.vertices.size() == 2);
}

TEST_CASE("distance to hull matches hand geometry") {
  std::vector<Vec> square = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  CHECK(distance_to_hull({0.5, 0.5}, square) == doctest::Approx(0.0));
  CHECK(distance_to_hull({2.0, 0.5}, square) == doctest::Approx(1.0));
  CHECK(distance_to_hull({2.0, 2.0}, square) == doctest::Approx(std::sqrt(2.0)));
  CHECK(distance_to_hull({-3.0, 0.5}, square) == doctest::Approx(3.0));

  std::vector<Vec> seg = {{-1.0}, {1.0}};
  CHECK(distance_to_hull({0.25}, seg) == doctest::Approx(0.0));
  CHECK(distance_to_hull({1.5}, seg) == doctest::Approx(0.5));
}

TEST_CASE("convexity: pairwise midpoints of vertices are members") {
  CounterRng rng(3, 1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vec> pts;
    for (int i = 0; i < 12; ++i) pts.push_back({rng.next_in(-2, 2), rng.next_in(-2, 2)});
    ConvexApprox h = convex_hull(pts, 2);
    for (std::size_t i = 0; i < h.vertices.size(); ++i)
      for (std::size_t j = i; j < h.vertices.size(); ++j) {
        Vec mid = scaled(sum(h.vertices[i], h.vertices[j]), 0.5);
        CHECK(membership(h, mid, 1e-9));
      }
    // Minimality: no vertex lies in the hull of the others.
    for (std::size_t i = 0; i < h.vertices.size(); ++i) {
      std::vector<Vec> others;
      for (std::size_t j = 0; j < h.vertices.size(); ++j)
        if (j != i) others.push_back(h.vertices[j]);
      if (!others.empty()) CHECK(distance_to_hull(h.vertices[i], others) > 1e-9);
    }
  }
}

TEST_CASE("high-dimensional support representation") {
  CounterRng rng(9, 4);
  std::vector<Vec> pts;
  for (int i = 0; i < 40; ++i) {
    Vec p(5);
    for (auto& v : p) v = rng.next_in(-1, 1);
    pts.push_back(std::move(p));
  }
  ConvexApprox h = convex_hull(pts, 5);
  CHECK(h.rep == ConvexApprox::Rep::Support);
  CHECK(h.directions.size() == h.support_values.size());
  CHECK(h.directions.size() == 2 * 5 + 100);

  // Sublinear consistency of the sampled support data.
  for (std::size_t a = 0; a < h.directions.size(); a += 7)
    for (std::size_t b = a + 1; b < h.directions.size(); b += 13) {
      Vec s = sum(h.directions[a], h.directions[b]);
      double hs = -1e18;
      for (const Vec& p : pts) hs = std::max(hs, dot(p, s));
      CHECK(hs <= h.support_values[a] + h.support_values[b] + 1e-9);
    }

  // Every generating point passes membership; far points fail.
  for (const Vec& p : pts) CHECK(membership(h, p, 1e-9));
  Vec far(5, 3.0);
  CHECK_FALSE(membership(h, far, 1e-9));
}

TEST_CASE("hull hausdorff via support deviation") {
  ConvexApprox a = convex_hull({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, 2);
  ConvexApprox b = convex_hull({{0, 0}, {1.5, 0}, {1.5, 1}, {0, 1}}, 2);
  CHECK(hull_hausdorff(a, a) == doctest::Approx(0.0));
  CHECK(hull_hausdorff(a, b) == doctest::Approx(0.5));
}

TEST_CASE("least-norm element within a tangent subspace") {
  // Segment from (-1,1) to (1,1) intersected with {v dot e1 = 0}: nearest to
  // the origin is (0,1) with weights (1/2, 1/2).
  std::vector<Vec> pts = {{-1.0, 1.0}, {1.0, 1.0}};
  auto res = min_norm_in_subspace(pts, {{1.0, 0.0}});
  REQUIRE(res.has_value());
  CHECK(res->first[0] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(res->first[1] == doctest::Approx(1.0));
  CHECK(res->second[0] == doctest::Approx(0.5));
  CHECK(res->second[1] == doctest::Approx(0.5));

  // Hull that misses the subspace entirely.
  std::vector<Vec> off = {{1.0, 1.0}, {2.0, 1.0}};
  CHECK_FALSE(min_norm_in_subspace(off, {{1.0, 0.0}}).has_value());

  // No normals: plain min-norm point of the hull.
  auto plain = min_norm_in_subspace({{1.0, 1.0}, {1.0, -1.0}}, {});
  REQUIRE(plain.has_value());
  CHECK(plain->first[0] == doctest::Approx(1.0));
  CHECK(plain->first[1] == doctest::Approx(0.0).epsilon(1e-9));
}
