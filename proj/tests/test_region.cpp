#include "filippov/region.hpp"

#include <cmath>

#include "doctest.h"

using namespace filippov;

namespace {

Region half_plane(const DomainBox& box, const char* text, ConstraintSign sign) {
  return Region::single(box, {{Expr::parse(text, static_cast<int>(box.dim())), sign}});
}

}  // namespace

TEST_CASE("measure estimate: half of the square") {
  DomainBox box({-1.0, -1.0}, {1.0, 1.0});
  Region r = half_plane(box, "x1", ConstraintSign::Positive);
  MeasureModel m{box, std::nullopt};
  auto est = measure_estimate(r, m, 100000, 42);
  CHECK(std::fabs(est.estimate - 2.0) <= est.ci_halfwidth + 1e-9);
  CHECK(est.ci_halfwidth < 0.05);
}

TEST_CASE("measure estimate: exact fast path for the whole box") {
  DomainBox box({0.0}, {1.0});
  Region r = Region::whole(box);
  MeasureModel m{box, std::nullopt};
  auto est = measure_estimate(r, m, 1000, 1);
  CHECK(est.estimate == 1.0);
  CHECK(est.ci_halfwidth == 0.0);
  CHECK(est.exact);
}

TEST_CASE("measure estimate: contradictory region is zero") {
  DomainBox box({-1.0}, {1.0});
  Region r = Region::single(box, {{Expr::parse("x1", 1), ConstraintSign::Positive},
                                  {Expr::parse("x1", 1), ConstraintSign::Negative}});
  MeasureModel m{box, std::nullopt};
  auto est = measure_estimate(r, m, 10000, 3);
  CHECK(est.estimate == 0.0);
  CHECK(r.provably_empty());
}

TEST_CASE("measure estimate is deterministic in the seed") {
  DomainBox box({-1.0, -1.0}, {1.0, 1.0});
  Region r = half_plane(box, "x1 + x2", ConstraintSign::Positive);
  MeasureModel m{box, std::nullopt};
  auto a = measure_estimate(r, m, 20000, 9);
  auto b = measure_estimate(r, m, 20000, 9);
  CHECK(a.estimate == b.estimate);
  CHECK(a.ci_halfwidth == b.ci_halfwidth);
  auto c = measure_estimate(r, m, 20000, 10);
  CHECK(a.estimate != c.estimate);
}

TEST_CASE("measure estimate with density") {
  // w(x) = max(0, min(x1, 1-x1)) integrates to 1/4 over [0,1].
  DomainBox box({-1.0}, {1.0});
  MeasureModel m{box, Expr::parse("max(0, min(x1, 1 - x1))", 1)};
  m.validate();
  auto est = measure_estimate(Region::whole(box), m, 200000, 5);
  CHECK(std::fabs(est.estimate - 0.25) <= est.ci_halfwidth + 1e-6);
}

TEST_CASE("monotonicity under containment within statistical tolerance") {
  DomainBox box({-1.0, -1.0}, {1.0, 1.0});
  MeasureModel m{box, std::nullopt};
  Region a = Region::single(box, {{Expr::parse("x1", 2), ConstraintSign::Positive},
                                  {Expr::parse("x2", 2), ConstraintSign::Positive}});
  Region b = half_plane(box, "x1", ConstraintSign::Positive);
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    auto ea = measure_estimate(a, m, 30000, seed);
    auto eb = measure_estimate(b, m, 30000, seed);
    CHECK(ea.estimate <= eb.estimate + ea.ci_halfwidth + eb.ci_halfwidth);
  }
}

TEST_CASE("subtracting a null set does not change the estimate") {
  DomainBox box({-1.0, -1.0}, {1.0, 1.0});
  MeasureModel m{box, std::nullopt};
  Region r = half_plane(box, "x1", ConstraintSign::Positive);
  NullSet n = NullSet::surface(Expr::parse("x1 - 0.5", 2));
  Region rs = region_subtract_null(r, n);
  auto before = measure_estimate(r, m, 50000, 7);
  auto after = measure_estimate(rs, m, 50000, 7);
  CHECK(before.estimate == after.estimate);
  CHECK(rs.exclusions.size() == 1);
}

TEST_CASE("region intersection conjoins constraints") {
  DomainBox box({-1.0, -1.0}, {1.0, 1.0});
  Region a = half_plane(box, "x1", ConstraintSign::Positive);
  Region b = half_plane(box, "x2", ConstraintSign::Positive);
  Region c = region_intersect(a, b);
  CHECK(c.member({0.5, 0.5}));
  CHECK_FALSE(c.member({0.5, -0.5}));
  CHECK_FALSE(c.member({-0.5, 0.5}));

  Region d = region_intersect(half_plane(box, "x1", ConstraintSign::Positive),
                              half_plane(box, "x1", ConstraintSign::Negative));
  CHECK(d.provably_empty());
}

TEST_CASE("negligibility: lebesgue ideal") {
  DomainBox box({-1.0, -1.0}, {1.0, 1.0});
  MeasureModel m{box, std::nullopt};
  auto ideal = NegligibilityIdeal::lebesgue();

  CHECK(is_negligible(NullSet::surface(Expr::parse("x1", 2)), ideal, m));
  CHECK_FALSE(is_negligible(half_plane(box, "x1", ConstraintSign::Positive), ideal, m));
  CHECK(is_negligible(region_intersect(half_plane(box, "x1", ConstraintSign::Positive),
                                       half_plane(box, "x1", ConstraintSign::Negative)),
                      ideal, m));
}

TEST_CASE("negligibility: generated ideal via symbolic containment") {
  DomainBox box({0.0}, {1.0});
  MeasureModel m{box, std::nullopt};
  auto ideal = NegligibilityIdeal::generated(
      {NullSet::point({0.5}).generators[0], NullSet::surface(Expr::parse("x1 - 0.25", 1)).generators[0]});

  CHECK(is_negligible(NullSet::point({0.5}), ideal, m));
  CHECK(is_negligible(NullSet::surface(Expr::parse("x1 - 0.25", 1)), ideal, m));
  // A point lying on a listed surface is covered by it.
  CHECK(is_negligible(NullSet::point({0.25}), ideal, m));
  CHECK_FALSE(is_negligible(NullSet::point({0.75}), ideal, m));
  CHECK_FALSE(is_negligible(NullSet::surface(Expr::parse("x1 - 0.75", 1)), ideal, m));

  // Closure under finite unions of negligible inputs.
  NullSet u = NullSet::point({0.5}).unite(NullSet::surface(Expr::parse("x1 - 0.25", 1)));
  CHECK(is_negligible(u, ideal, m));
}

TEST_CASE("regular surface validation") {
  DomainBox box({-1.0, -1.0}, {1.0, 1.0});
  CHECK_NOTHROW(validate_regular_surface(Expr::parse("x1", 2), box));
  CHECK_NOTHROW(validate_regular_surface(Expr::parse("x1^2 + x2^2 - 0.25", 2), box));
  // No zero set inside the box: vacuously regular.
  CHECK_NOTHROW(validate_regular_surface(Expr::parse("x1^2 + x2^2 + 1", 2), box));
  // sigma == 0 on an open set: degenerate.
  CHECK_THROWS_AS(validate_regular_surface(Expr::parse("0*x1", 2), box), ValidationError);
  // x1^2 has a null zero set and nonzero gradients on {0 < |sigma| < 1e-6}.
  CHECK_NOTHROW(validate_regular_surface(Expr::parse("x1^2", 2), box));
  // Kinked expressions are not usable as surfaces.
  CHECK_THROWS_AS(validate_regular_surface(Expr::parse("abs(x1)", 2), box), ValidationError);
}

TEST_CASE("domain box invariants") {
  CHECK_THROWS_AS(DomainBox({1.0}, {0.0}), ValidationError);
  CHECK_THROWS_AS(DomainBox({0.0}, {0.0}), ValidationError);
  DomainBox box({-2.0, 0.0}, {2.0, 3.0});
  CHECK(box.volume() == doctest::Approx(12.0));
  CHECK(box.diameter() == doctest::Approx(5.0));
  auto clipped = box.clipped({0.0, 0.0}, {5.0, 1.0});
  REQUIRE(clipped.has_value());
  CHECK(clipped->upper[0] == 2.0);
  CHECK(clipped->upper[1] == 1.0);
  CHECK_FALSE(box.clipped({3.0, 0.0}, {4.0, 1.0}).has_value());
}

TEST_CASE("measure model rejects negative densities") {
  DomainBox box({-1.0}, {1.0});
  MeasureModel bad{box, Expr::parse("x1", 1)};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}
