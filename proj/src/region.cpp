#include "filippov/region.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace filippov {

namespace {
constexpr double kZ99 = 2.5758293035489004;  // two-sided 99% normal quantile
constexpr double kPointTol = 1e-12;
}  // namespace

DomainBox::DomainBox(Vec lo, Vec hi) : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() != upper.size() || lower.empty())
    throw ValidationError("domain box bounds must have equal nonzero dimension");
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]))
      throw ValidationError("domain box bounds must be finite");
    if (!(lower[i] < upper[i]))
      throw ValidationError("domain box must have nonempty interior (lower < upper)");
  }
}

double DomainBox::volume() const {
  double v = 1.0;
  for (std::size_t i = 0; i < lower.size(); ++i) v *= upper[i] - lower[i];
  return v;
}

double DomainBox::diameter() const {
  double s = 0.0;
  for (std::size_t i = 0; i < lower.size(); ++i) {
    double d = upper[i] - lower[i];
    s += d * d;
  }
  return std::sqrt(s);
}

bool DomainBox::contains(const Vec& x, double tol) const {
  if (x.size() != lower.size()) return false;
  for (std::size_t i = 0; i < lower.size(); ++i)
    if (x[i] < lower[i] - tol || x[i] > upper[i] + tol) return false;
  return true;
}

Vec DomainBox::sample(CounterRng& rng) const {
  Vec x(lower.size());
  for (std::size_t i = 0; i < lower.size(); ++i) x[i] = rng.next_in(lower[i], upper[i]);
  return x;
}

std::vector<Interval> DomainBox::as_intervals() const {
  std::vector<Interval> iv(lower.size());
  for (std::size_t i = 0; i < lower.size(); ++i) iv[i] = {lower[i], upper[i]};
  return iv;
}

std::optional<DomainBox> DomainBox::clipped(const Vec& lo, const Vec& hi) const {
  Vec nl(lower.size()), nh(lower.size());
  for (std::size_t i = 0; i < lower.size(); ++i) {
    nl[i] = std::max(lower[i], lo[i]);
    nh[i] = std::min(upper[i], hi[i]);
    if (!(nl[i] < nh[i])) return std::nullopt;
  }
  return DomainBox(std::move(nl), std::move(nh));
}

bool Constraint::satisfied(const Vec& x, double t) const {
  double v = expr.evaluate({x, t});
  return sign == ConstraintSign::Positive ? v > 0.0 : v < 0.0;
}

bool Conjunction::satisfied(const Vec& x, double t) const {
  for (const Constraint& c : constraints)
    if (!c.satisfied(x, t)) return false;
  return true;
}

bool Conjunction::provably_empty() const {
  for (std::size_t i = 0; i < constraints.size(); ++i)
    for (std::size_t j = i + 1; j < constraints.size(); ++j)
      if (constraints[i].sign != constraints[j].sign &&
          structurally_equal(constraints[i].expr, constraints[j].expr))
        return true;
  return false;
}

bool Conjunction::certified_empty_on(const std::vector<Interval>& box) const {
  for (const Constraint& c : constraints) {
    Interval iv = eval_on_box(c.expr, box, Interval::point(0.0));
    if (c.sign == ConstraintSign::Positive && iv.hi <= 0.0) return true;
    if (c.sign == ConstraintSign::Negative && iv.lo >= 0.0) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// NullSet

NullSet NullSet::surface(Expr sigma) {
  NullSet n;
  Generator g;
  g.kind = Generator::Kind::Surface;
  g.surface = std::move(sigma);
  n.generators.push_back(std::move(g));
  return n;
}

NullSet NullSet::point(Vec p) { return points({std::move(p)}); }

NullSet NullSet::points(std::vector<Vec> ps) {
  NullSet n;
  Generator g;
  g.kind = Generator::Kind::Points;
  g.points = std::move(ps);
  n.generators.push_back(std::move(g));
  return n;
}

NullSet NullSet::degenerate_box(Vec lo, Vec hi) {
  if (lo.size() != hi.size()) throw ValidationError("degenerate box bounds dimension mismatch");
  bool degenerate = false;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (lo[i] > hi[i]) throw ValidationError("degenerate box lower > upper");
    if (lo[i] == hi[i]) degenerate = true;
  }
  if (!degenerate)
    throw ValidationError("null-set box must be degenerate (some lower_i == upper_i)");
  NullSet n;
  Generator g;
  g.kind = Generator::Kind::DegenerateBox;
  g.box_lower = std::move(lo);
  g.box_upper = std::move(hi);
  n.generators.push_back(std::move(g));
  return n;
}

NullSet NullSet::unite(const NullSet& other) const {
  NullSet n = *this;
  n.generators.insert(n.generators.end(), other.generators.begin(), other.generators.end());
  return n;
}

bool NullSet::contains(const Vec& x, double tol) const {
  for (const Generator& g : generators) {
    switch (g.kind) {
      case Generator::Kind::Surface:
        if (std::fabs(g.surface.evaluate({x, 0.0})) <= tol) return true;
        break;
      case Generator::Kind::DegenerateBox: {
        bool in = true;
        for (std::size_t i = 0; i < x.size() && in; ++i)
          in = x[i] >= g.box_lower[i] - tol && x[i] <= g.box_upper[i] + tol;
        if (in) return true;
        break;
      }
      case Generator::Kind::Points:
        for (const Vec& p : g.points) {
          bool close = true;
          for (std::size_t i = 0; i < x.size() && close; ++i)
            close = std::fabs(x[i] - p[i]) <= tol;
          if (close) return true;
        }
        break;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Region

Region Region::whole(DomainBox box) {
  Region r;
  r.base = std::move(box);
  return r;
}

Region Region::single(DomainBox box, std::vector<Constraint> constraints) {
  Region r;
  r.base = std::move(box);
  r.cells.push_back(Conjunction{std::move(constraints)});
  return r;
}

bool Region::member(const Vec& x, double t) const {
  if (!base.contains(x)) return false;
  if (cells.empty()) return true;
  for (const Conjunction& c : cells)
    if (c.satisfied(x, t)) return true;
  return false;
}

bool Region::provably_empty() const {
  if (cells.empty()) return false;  // whole box
  auto box = base.as_intervals();
  for (const Conjunction& c : cells)
    if (!c.provably_empty() && !c.certified_empty_on(box)) return false;
  return true;
}

Region region_intersect(const Region& a, const Region& b) {
  if (a.base.dim() != b.base.dim())
    throw ValidationError("region intersection requires a common base box");
  Region r;
  r.base = a.base;
  if (a.cells.empty()) {
    r.cells = b.cells;
  } else if (b.cells.empty()) {
    r.cells = a.cells;
  } else {
    for (const Conjunction& ca : a.cells)
      for (const Conjunction& cb : b.cells) {
        Conjunction merged = ca;
        merged.constraints.insert(merged.constraints.end(), cb.constraints.begin(),
                                  cb.constraints.end());
        r.cells.push_back(std::move(merged));
      }
  }
  r.exclusions = a.exclusions;
  r.exclusions.insert(r.exclusions.end(), b.exclusions.begin(), b.exclusions.end());
  return r;
}

Region region_subtract_null(const Region& a, const NullSet& n) {
  Region r = a;
  r.exclusions.push_back(n);  // closure and measure are unchanged; fat regions
  return r;
}

// ---------------------------------------------------------------------------
// Ideal / measure model

NegligibilityIdeal NegligibilityIdeal::generated(std::vector<NullSet::Generator> gens) {
  NegligibilityIdeal ideal;
  ideal.kind = Kind::Generated;
  ideal.generators = std::move(gens);
  return ideal;
}

double MeasureModel::weight(const Vec& x) const {
  if (!density) return 1.0;
  return density->evaluate({x, 0.0});
}

void MeasureModel::validate(std::uint64_t seed) const {
  if (!density) return;
  CounterRng rng(seed, 0x6d656173);
  for (int i = 0; i < 10000; ++i) {
    Vec x = base.sample(rng);
    double w;
    try {
      w = density->evaluate({x, 0.0});
    } catch (const DomainError& e) {
      throw ValidationError(std::string("density not evaluable on base box: ") + e.what());
    }
    if (w < 0.0)
      throw ValidationError("density is negative at a sampled point of the base box");
  }
}

MeasureEstimate measure_estimate(const Region& r, const MeasureModel& m, std::uint64_t budget,
                                 std::uint64_t seed, double t) {
  if (budget < 1000) throw ValidationError("measure_estimate budget must be >= 1000");
  for (std::size_t i = 0; i < r.base.dim(); ++i)
    if (r.base.lower[i] < m.base.lower[i] - kPointTol ||
        r.base.upper[i] > m.base.upper[i] + kPointTol)
      throw ValidationError("region base box must be contained in the measure base box");

  // Exact fast path: the whole box under Lebesgue measure.
  if (r.cells.empty() && !m.density) {
    MeasureEstimate e;
    e.estimate = r.base.volume();
    e.ci_halfwidth = 0.0;
    e.positive_hits = budget;
    e.exact = true;
    return e;
  }

  const double vol = r.base.volume();
  const std::size_t dim = r.base.dim();
  CounterRng rng(seed, 0x766f6c);
  double sum = 0.0, sum_sq = 0.0;
  std::uint64_t hits = 0;
  Vec x(dim);
  for (std::uint64_t i = 0; i < budget; ++i) {
    for (std::size_t k = 0; k < dim; ++k) {
      double u = static_cast<double>(rng.at(i * dim + k) >> 11) * 0x1.0p-53;
      x[k] = r.base.lower[k] + (r.base.upper[k] - r.base.lower[k]) * u;
    }
    double q = 0.0;
    if (r.member(x, t)) {
      q = vol * m.weight(x);
      if (q > 0.0) ++hits;
    }
    sum += q;
    sum_sq += q * q;
  }
  const double n = static_cast<double>(budget);
  const double mean = sum / n;
  double var = (sum_sq / n - mean * mean) * n / std::max(1.0, n - 1.0);
  if (var < 0.0) var = 0.0;
  MeasureEstimate e;
  e.estimate = mean;
  e.ci_halfwidth = kZ99 * std::sqrt(var / n);
  e.positive_hits = hits;
  return e;
}

// ---------------------------------------------------------------------------
// Negligibility

namespace {

bool point_in_generator(const Vec& p, const NullSet::Generator& g) {
  switch (g.kind) {
    case NullSet::Generator::Kind::Surface:
      return std::fabs(g.surface.evaluate({p, 0.0})) <= kPointTol;
    case NullSet::Generator::Kind::DegenerateBox: {
      for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] < g.box_lower[i] - kPointTol || p[i] > g.box_upper[i] + kPointTol) return false;
      return true;
    }
    case NullSet::Generator::Kind::Points:
      for (const Vec& q : g.points) {
        bool close = true;
        for (std::size_t i = 0; i < p.size() && close; ++i)
          close = std::fabs(p[i] - q[i]) <= kPointTol;
        if (close) return true;
      }
      return false;
  }
  return false;
}

}  // namespace

bool generator_contained(const NullSet::Generator& a, const NullSet::Generator& b) {
  using Kind = NullSet::Generator::Kind;
  switch (a.kind) {
    case Kind::Surface:
      return b.kind == Kind::Surface && structurally_equal(a.surface, b.surface);
    case Kind::Points:
      for (const Vec& p : a.points)
        if (!point_in_generator(p, b)) return false;
      return true;
    case Kind::DegenerateBox: {
      if (b.kind != Kind::DegenerateBox) return false;
      for (std::size_t i = 0; i < a.box_lower.size(); ++i)
        if (a.box_lower[i] < b.box_lower[i] - kPointTol ||
            a.box_upper[i] > b.box_upper[i] + kPointTol)
          return false;
      return true;
    }
  }
  return false;
}

bool is_negligible(const NullSet& s, const NegligibilityIdeal& ideal, const MeasureModel&) {
  if (ideal.kind == NegligibilityIdeal::Kind::LebesgueNull) return true;
  for (const auto& gen : s.generators) {
    bool covered = false;
    for (const auto& ig : ideal.generators)
      if (generator_contained(gen, ig)) {
        covered = true;
        break;
      }
    if (!covered) return false;
  }
  return true;
}

bool is_negligible(const Region& r, const NegligibilityIdeal&, const MeasureModel&) {
  // Only exact emptiness certifies a region; Monte Carlo never does.
  return r.provably_empty();
}

// ---------------------------------------------------------------------------
// Regular-surface validation

void validate_regular_surface(const Expr& sigma, const DomainBox& box, std::uint64_t seed) {
  if (sigma.has_kink_funcs())
    throw ValidationError("surface expression must be differentiable (no abs/min/max): " +
                          sigma.to_string());
  CounterRng rng(seed, 0x73757266);
  int located = 0;
  for (int s = 0; s < 10000; ++s) {
    Vec x = box.sample(rng);
    bool on_surface = false;
    for (int iter = 0; iter < 25; ++iter) {
      double v;
      try {
        v = sigma.evaluate({x, 0.0});
      } catch (const DomainError&) {
        break;
      }
      if (std::fabs(v) < 1e-6) {
        on_surface = true;
        break;
      }
      Vec g;
      try {
        g = sigma.gradient({x, 0.0});
      } catch (const std::runtime_error&) {
        break;
      }
      double gn = dot(g, g);
      if (gn < 1e-18) break;  // stuck; this start cannot reach the surface
      for (std::size_t k = 0; k < x.size(); ++k) x[k] -= v * g[k] / gn;
      if (!box.contains(x, 0.0)) break;
    }
    if (!on_surface) continue;
    ++located;
    Vec g;
    try {
      g = sigma.gradient({x, 0.0});
    } catch (const std::runtime_error& e) {
      throw ValidationError("surface gradient not evaluable near {sigma=0}: " +
                            std::string(e.what()));
    }
    if (norm(g) <= 1e-9)
      throw ValidationError("degenerate surface: ‖∇σ‖ <= 1e-9 near {σ=0} for σ = " +
                            sigma.to_string());
  }
  (void)located;  // an empty zero set inside the box is fine
}

}  // namespace filippov
