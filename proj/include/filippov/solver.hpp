#pragma once

#include <optional>
#include <string>
#include <vector>

#include "filippov/filippov_map.hpp"

namespace filippov {

/// Initial value problem for the differential inclusion induced by a
/// piecewise right-hand side (state dimension == codomain dimension).
struct IVProblem {
  PiecewiseMap rhs;
  Vec x0;
  double horizon = 1.0;
  double rtol = 1e-8;
  double atol = 1e-10;
  double event_tol = 1e-10;
  std::optional<double> magnitude_bound;

  void validate(std::uint64_t seed = 0) const;
};

enum class StopReason { ReachedHorizon, DomainExit, Ambiguous };

struct Mode {
  enum class Kind : std::uint8_t { Smooth, Sliding, Stopped } kind = Kind::Smooth;
  CellId cell;                       // Smooth
  std::vector<int> active_surfaces;  // Sliding
  std::vector<CellId> sliding_cells; // Sliding: basis cells for the weights
  std::vector<double> weights;       // Sliding: convex weights, sum 1
  StopReason reason = StopReason::ReachedHorizon;  // Stopped

  std::string label() const;
};

struct TrajectoryEvent {
  enum class Decision : std::uint8_t {
    Crossing,
    SlidingEntry,
    SlidingExit,
    DomainExit,
    AmbiguousStop,
  };
  double t = 0.0;
  std::vector<int> surfaces;
  Decision decision = Decision::Crossing;
  bool tangency = false;  // |f · grad sigma| at entry below 1e-12
};

struct TrajectoryNode {
  double t = 0.0;
  Vec x;
  Vec deriv_in;   // derivative of the segment ending here
  Vec deriv_out;  // derivative of the segment starting here
  Mode mode;
};

/// Piecewise-C¹ solution with cubic Hermite dense output per interval.
struct Trajectory {
  std::vector<TrajectoryNode> nodes;
  std::vector<TrajectoryEvent> events;
  StopReason stop = StopReason::ReachedHorizon;
  double event_tol = 1e-10;

  double end_time() const { return nodes.empty() ? 0.0 : nodes.back().t; }
  Vec state_at(double t) const;
};

Trajectory integrate(const IVProblem& p);

struct SurfaceDecision {
  enum class Kind : std::uint8_t { Crossing, Sliding, Ambiguous } kind = Kind::Crossing;
  CellId target;                 // Crossing
  std::vector<CellId> cells;     // Sliding
  std::vector<double> weights;   // Sliding, convex
  Vec velocity;                  // Sliding field value at the query point
  bool tangency = false;
};

/// Continuation rule on switching surfaces: cross when both one-sided fields
/// agree, slide with the tangent convex combination when attractive, stop on
/// repulsion.  Multiple active surfaces use the least-norm hull element in
/// the common tangent space.
SurfaceDecision decide_at_surface(const FilippovMap& F, double t, const Vec& x,
                                  const std::vector<int>& active);

struct ResidualReport {
  std::vector<double> sample_times;
  std::vector<double> violations;  // distance to the Filippov set
  double max_violation = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// A-posteriori check that the numerically differentiated dense output lies
/// in the Filippov set at sampled times away from events.
ResidualReport verify_inclusion(const Trajectory& tr, const FilippovMap& F, int samples,
                                double tol, std::uint64_t seed = 0);

}  // namespace filippov
