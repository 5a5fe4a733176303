#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "filippov/piecewise.hpp"

namespace filippov {

/// Geometric shrinking schedule of neighborhood radii.
struct RadiusSchedule {
  double rho0 = 1.0;
  double factor = 0.5;
  int steps = 20;

  double at(int j) const;
  double smallest() const { return at(steps - 1); }
};

/// Classification of a codomain value.  Bad verdicts are always certified
/// symbolically (interval subdivision); good verdicts may rest on Monte
/// Carlo evidence and carry a low-confidence flag when none was found.
struct PointClass {
  enum class Verdict : std::uint8_t { Good, Bad };
  Vec value;
  Verdict verdict = Verdict::Good;
  double bad_witness_radius = 0.0;  // some B_rho(y) with negligible preimage
  double good_measure_lcb = 0.0;    // measure lower bound at the smallest radius
  bool low_confidence = false;

  bool good() const { return verdict == Verdict::Good; }
};

/// Computed essential range: a finite value set when every live branch is
/// constant, otherwise a finite box cover at resolution h.
struct EssentialRange {
  int dim = 0;
  bool exact = false;
  std::vector<Vec> values;  // exact form, sorted
  BoxCover cover;           // covered form
  double resolution = 0.0;
  std::vector<PointClass> classifications;  // exact form: verdict per candidate

  bool resolution_reached() const { return cover.resolution_reached; }
  double distance_to(const Vec& y) const;
  /// One-sided containment within tol, suitable for exact and covered forms.
  bool contained_in(const EssentialRange& other, double tol) const;
};

/// The computable stand-in for f^{-1}(bad set): switching surfaces and
/// override supports, restricted to the queried region.
struct CanonicalNullSet {
  Region region;
  NullSet components;
};

struct EssConfig {
  NegligibilityIdeal ideal;
  MeasureModel measure;
  RadiusSchedule radii;
  std::uint64_t seed = 0;
  std::uint64_t budget = 40000;  // Monte Carlo goodness samples
  double time = 0.0;             // fixed t when branches depend on time
  int max_depth = 24;            // subdivision depth for null certificates
  std::size_t max_boxes = 200000;

  static EssConfig lebesgue_for(const PiecewiseMap& f);
};

PointClass classify_value(const PiecewiseMap& f, const Region& q, const Vec& y,
                          const EssConfig& cfg);

/// Monte Carlo classification of a black-box map.  Without a symbolic view
/// of f no bad verdict can ever be certified: the result is good with a
/// measure lower bound when samples hit, and good with the low-confidence
/// flag otherwise.
PointClass classify_value_sampled(const std::function<Vec(const Vec&, double)>& f,
                                  const Region& q, const Vec& y, const EssConfig& cfg);

EssentialRange essential_range(const PiecewiseMap& f, const Region& q, const EssConfig& cfg,
                               double resolution = 1e-3);

CanonicalNullSet canonical_null_set(const PiecewiseMap& f, const Region& q);

/// Box cover of the closure of f(q \ n); override values survive as isolated
/// point boxes unless their support lies inside n.
BoxCover closure_image_minus_null(const PiecewiseMap& f, const Region& q, const NullSet& n,
                                  const EssConfig& cfg, double resolution = 1e-3);

struct RestrictionReport {
  EssentialRange sub_range;
  EssentialRange full_range;
  bool range_contained = false;       // ess.im(f|sub) within tol of ess.im(f|q)
  double range_violation = 0.0;
  bool null_generators_contained = false;  // canonical(q) ∩ sub vs canonical(sub)
};

RestrictionReport restrict_and_compare(const PiecewiseMap& f, const Region& q,
                                       const Region& sub, const EssConfig& cfg,
                                       double resolution = 1e-3);

/// True when every generator of a is contained in some generator of b
/// (identical surfaces, covered point lists, nested degenerate boxes).
bool nullset_contained(const NullSet& a, const NullSet& b);

}  // namespace filippov
