#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "filippov/expr.hpp"
#include "filippov/geometry.hpp"
#include "filippov/interval.hpp"
#include "filippov/rng.hpp"

namespace filippov {

/// Rectangular domain in ℝᵐ with nonempty interior.
struct DomainBox {
  Vec lower;
  Vec upper;

  DomainBox() = default;
  DomainBox(Vec lo, Vec hi);

  std::size_t dim() const { return lower.size(); }
  double volume() const;
  double diameter() const;
  bool contains(const Vec& x, double tol = 0.0) const;
  Vec sample(CounterRng& rng) const;
  std::vector<Interval> as_intervals() const;

  /// Intersection clipped to this box; empty optional when disjoint.
  std::optional<DomainBox> clipped(const Vec& lo, const Vec& hi) const;
};

enum class ConstraintSign : std::uint8_t { Positive, Negative };  // expr > 0 / expr < 0

struct Constraint {
  Expr expr;
  ConstraintSign sign;

  bool satisfied(const Vec& x, double t = 0.0) const;
};

/// One conjunction of strict constraints.
struct Conjunction {
  std::vector<Constraint> constraints;

  bool satisfied(const Vec& x, double t = 0.0) const;
  /// Symbolic contradiction: the same expression required both > 0 and < 0.
  bool provably_empty() const;
  /// Interval certificate that no point of `box` satisfies the conjunction.
  bool certified_empty_on(const std::vector<Interval>& box) const;
};

/// Measure-zero generators: hypersurfaces {σ = 0}, degenerate boxes, finite
/// point lists.
struct NullSet {
  struct Generator {
    enum class Kind : std::uint8_t { Surface, DegenerateBox, Points } kind;
    Expr surface;                 // Surface
    Vec box_lower, box_upper;     // DegenerateBox (some lower_i == upper_i)
    std::vector<Vec> points;      // Points
  };

  std::vector<Generator> generators;

  static NullSet surface(Expr sigma);
  static NullSet point(Vec p);
  static NullSet points(std::vector<Vec> ps);
  static NullSet degenerate_box(Vec lo, Vec hi);
  NullSet unite(const NullSet& other) const;

  bool empty() const { return generators.empty(); }
  /// Membership within `tol` of a generator (used by override lookup).
  bool contains(const Vec& x, double tol) const;
};

/// Fat subset of a box: union of constraint conjunctions, plus recorded
/// null-set exclusions that never affect sampling or closures.
struct Region {
  DomainBox base;
  std::vector<Conjunction> cells;  // empty list means the whole box
  std::vector<NullSet> exclusions;

  static Region whole(DomainBox box);
  static Region single(DomainBox box, std::vector<Constraint> constraints);

  bool member(const Vec& x, double t = 0.0) const;
  bool provably_empty() const;
  std::size_t dim() const { return base.dim(); }
};

Region region_intersect(const Region& a, const Region& b);
Region region_subtract_null(const Region& a, const NullSet& n);

/// Negligibility: Lebesgue-null sets, or an explicitly generated ideal where
/// negligible means contained in a finite union of the listed generators.
struct NegligibilityIdeal {
  enum class Kind : std::uint8_t { LebesgueNull, Generated } kind = Kind::LebesgueNull;
  std::vector<NullSet::Generator> generators;

  static NegligibilityIdeal lebesgue() { return {}; }
  static NegligibilityIdeal generated(std::vector<NullSet::Generator> gens);
};

/// Base box plus optional density w(x) >= 0; default density 1 (Lebesgue).
struct MeasureModel {
  DomainBox base;
  std::optional<Expr> density;

  double weight(const Vec& x) const;
  /// Samples the density at 10^4 points and rejects negative values.
  void validate(std::uint64_t seed = 0) const;
};

struct MeasureEstimate {
  double estimate = 0.0;
  double ci_halfwidth = 0.0;  // 99% normal-approximation half-width
  std::uint64_t positive_hits = 0;
  bool exact = false;
};

/// Monte Carlo estimate of μ(r), deterministic in (seed, budget) regardless
/// of threading.  Whole-box Lebesgue regions use an exact fast path.
MeasureEstimate measure_estimate(const Region& r, const MeasureModel& m,
                                 std::uint64_t budget, std::uint64_t seed,
                                 double t = 0.0);

bool is_negligible(const NullSet& s, const NegligibilityIdeal& ideal, const MeasureModel& m);
bool is_negligible(const Region& r, const NegligibilityIdeal& ideal, const MeasureModel& m);

/// a ⊆ b decided symbolically: identical surface expressions, point lists
/// covered pointwise, nested degenerate boxes.
bool generator_contained(const NullSet::Generator& a, const NullSet::Generator& b);

/// Load-time check that a surface {σ = 0} is regular inside the box:
/// ‖∇σ‖ > 1e-9 at every located near-surface point.  Throws ValidationError.
void validate_regular_surface(const Expr& sigma, const DomainBox& box,
                              std::uint64_t seed = 0);

}  // namespace filippov
