#include "filippov/essential_range.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace filippov {

namespace {
constexpr double kZ99 = 2.5758293035489004;
}

double RadiusSchedule::at(int j) const { return rho0 * std::pow(factor, j); }

EssConfig EssConfig::lebesgue_for(const PiecewiseMap& f) {
  EssConfig cfg;
  cfg.measure = MeasureModel{f.domain, std::nullopt};
  return cfg;
}

bool nullset_contained(const NullSet& a, const NullSet& b) {
  for (const auto& ga : a.generators) {
    bool covered = false;
    for (const auto& gb : b.generators)
      if (generator_contained(ga, gb)) {
        covered = true;
        break;
      }
    if (!covered) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Shared analysis of (f, q, t): live cells, their regions and image bounds,
// and one reusable Monte Carlo batch.

namespace {

struct LiveCell {
  CellId id;
  Region reg;  // q ∩ open cell, base box = q.base
  const std::vector<Expr>* branch = nullptr;
  bool constant = false;
  Vec constant_value;
};

struct Analysis {
  const PiecewiseMap* f = nullptr;
  Region q;
  EssConfig cfg;
  std::vector<LiveCell> cells;  // cells not certified empty within q

  // Batch over q.base; only member points are stored.
  std::vector<Vec> vals;
  std::vector<double> wts;
  std::vector<Vec> pts;
  double base_volume = 0.0;
  std::uint64_t total = 0;
};

Analysis analyze(const PiecewiseMap& f, const Region& q, const EssConfig& cfg) {
  for (std::size_t i = 0; i < q.base.dim(); ++i)
    if (q.base.lower[i] < f.domain.lower[i] - 1e-12 ||
        q.base.upper[i] > f.domain.upper[i] + 1e-12)
      throw ValidationError("query region must lie inside the map's domain box");

  Analysis a;
  a.f = &f;
  a.q = q;
  a.cfg = cfg;

  for (const auto& [cell, branch] : f.branches) {
    LiveCell lc;
    lc.id = cell;
    lc.reg = region_intersect(q, f.cell_region(cell));
    if (lc.reg.provably_empty()) continue;
    lc.branch = &branch;
    lc.constant = true;
    lc.constant_value.resize(branch.size());
    for (std::size_t j = 0; j < branch.size(); ++j) {
      if (!branch[j].with_time(cfg.time).is_constant(&lc.constant_value[j])) {
        lc.constant = false;
        break;
      }
    }
    a.cells.push_back(std::move(lc));
  }

  a.base_volume = q.base.volume();
  a.total = cfg.budget;
  CounterRng rng(cfg.seed, 0x657373);
  const std::size_t dim = q.base.dim();
  Vec x(dim);
  for (std::uint64_t i = 0; i < cfg.budget; ++i) {
    for (std::size_t k = 0; k < dim; ++k) {
      double u = static_cast<double>(rng.at(i * dim + k) >> 11) * 0x1.0p-53;
      x[k] = q.base.lower[k] + (q.base.upper[k] - q.base.lower[k]) * u;
    }
    if (!q.member(x, cfg.time)) continue;
    try {
      Vec v = eval_raw(f, x, cfg.time);
      double w = cfg.measure.weight(x);
      a.vals.push_back(std::move(v));
      a.wts.push_back(w);
      a.pts.push_back(x);
    } catch (const DomainError&) {
      // Sample fell on a spot where a branch is not evaluable; skip it.
    }
  }
  return a;
}

// Certificate that μ(preimage of B_rho(y) ∩ cell ∩ q) is negligible, by
// recursive box subdivision.  Each box is discharged when (1) it provably
// misses cell ∩ q, (2) the branch image over it stays rho away from y, or
// (3) under a Lebesgue density, the density vanishes identically on it.
struct NullCertifier {
  const Analysis& a;
  const Vec& y;
  double rho;
  bool use_density;
  int node_budget = 0;

  bool certify_cell(const LiveCell& cell) {
    node_budget = 20000;
    return rec(cell, a.q.base.lower, a.q.base.upper, 0);
  }

  bool rec(const LiveCell& cell, const Vec& lo, const Vec& hi, int depth) {
    if (--node_budget < 0) return false;
    std::vector<Interval> iv(lo.size());
    for (std::size_t i = 0; i < lo.size(); ++i) iv[i] = {lo[i], hi[i]};

    bool outside = !cell.reg.cells.empty();
    for (const Conjunction& conj : cell.reg.cells) {
      if (conj.provably_empty()) continue;
      if (!conj.certified_empty_on(iv)) {
        outside = false;
        break;
      }
    }
    if (outside) return true;

    double dist_sq = 0.0;
    double max_width = 0.0;
    for (std::size_t j = 0; j < cell.branch->size(); ++j) {
      Interval img = eval_on_box((*cell.branch)[j], iv, a.cfg.time);
      double d = img.distance_to(y[j]);
      dist_sq += d * d;
      max_width = std::max(max_width, img.width());
    }
    if (std::sqrt(dist_sq) >= rho) return true;

    if (use_density && a.cfg.measure.density) {
      Interval w = eval_on_box(*a.cfg.measure.density, iv, 0.0);
      if (w.hi <= 0.0) return true;
    }

    // A constant image closer than rho can never be discharged by splitting.
    if (max_width <= 1e-15 && !(use_density && a.cfg.measure.density)) return false;

    if (depth >= a.cfg.max_depth) return false;
    std::size_t axis = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (hi[i] - lo[i] > best) best = hi[i] - lo[i], axis = i;
    Vec mid_hi = hi, mid_lo = lo;
    mid_hi[axis] = mid_lo[axis] = 0.5 * (lo[axis] + hi[axis]);
    return rec(cell, lo, mid_hi, depth + 1) && rec(cell, mid_lo, hi, depth + 1);
  }
};

// Negligible-preimage certificate for the whole map at radius rho.
bool certify_null(const Analysis& a, const Vec& y, double rho) {
  const bool lebesgue = a.cfg.ideal.kind == NegligibilityIdeal::Kind::LebesgueNull;
  for (const auto& [set, value] : a.f->overrides) {
    if (distance(value, y) < rho && !lebesgue) {
      NullSet s = set;
      if (!is_negligible(s, a.cfg.ideal, a.cfg.measure)) return false;
    }
  }
  for (const LiveCell& cell : a.cells) {
    NullCertifier cert{a, y, rho, lebesgue};
    if (!cert.certify_cell(cell)) return false;
  }
  return true;
}

struct BatchScan {
  std::uint64_t hits = 0;
  double mean = 0.0;
  double lcb = 0.0;
};

BatchScan scan_batch(const Analysis& a, const Vec& y, double rho) {
  BatchScan s;
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < a.vals.size(); ++i) {
    if (distance(a.vals[i], y) >= rho) continue;
    if (a.wts[i] <= 0.0) continue;
    ++s.hits;
    double q = a.base_volume * a.wts[i];
    sum += q;
    sum_sq += q * q;
  }
  const double n = static_cast<double>(a.total);
  s.mean = sum / n;
  double var = (sum_sq / n - s.mean * s.mean) * n / std::max(1.0, n - 1.0);
  if (var < 0.0) var = 0.0;
  s.lcb = std::max(0.0, s.mean - kZ99 * std::sqrt(var / n));
  return s;
}

PointClass classify(const Analysis& a, const Vec& y) {
  if (y.size() != static_cast<std::size_t>(a.f->codomain_dim))
    throw ValidationError("classify_value: value dimension mismatch");

  PointClass pc;
  pc.value = y;
  const double rho_min = a.cfg.radii.smallest();

  BatchScan s = scan_batch(a, y, rho_min);
  if (s.hits > 0) {
    // A member sample with positive weight witnesses positive measure of the
    // open preimage; no null certificate can exist.
    pc.verdict = PointClass::Verdict::Good;
    pc.good_measure_lcb = s.lcb;
    pc.low_confidence = false;
    return pc;
  }

  if (certify_null(a, y, rho_min)) {
    // Monotone in the radius: bisect for the largest certifying rho.
    int lo = 0, hi = a.cfg.radii.steps - 1;
    if (certify_null(a, y, a.cfg.radii.at(0))) {
      hi = 0;
    } else {
      while (lo + 1 < hi) {
        int mid = (lo + hi) / 2;
        if (certify_null(a, y, a.cfg.radii.at(mid)))
          hi = mid;
        else
          lo = mid;
      }
    }
    pc.verdict = PointClass::Verdict::Bad;
    pc.bad_witness_radius = a.cfg.radii.at(hi);
    return pc;
  }

  pc.verdict = PointClass::Verdict::Good;
  pc.good_measure_lcb = 0.0;
  pc.low_confidence = true;
  return pc;
}

// Conservative cover of the branch image over cell ∩ q: leaf image boxes of a
// domain subdivision; undecided leaves are kept so the true image is always
// covered.
void cover_cell_image(const Analysis& a, const LiveCell& cell, double resolution,
                      std::vector<ValueBox>& out, bool& reached) {
  struct Item {
    Vec lo, hi;
    int depth;
  };
  std::deque<Item> queue;
  queue.push_back({a.q.base.lower, a.q.base.upper, 0});
  std::size_t nodes = 0;
  while (!queue.empty()) {
    Item it = queue.front();
    queue.pop_front();
    if (++nodes > a.cfg.max_boxes) {
      reached = false;
      break;
    }
    std::vector<Interval> iv(it.lo.size());
    for (std::size_t i = 0; i < it.lo.size(); ++i) iv[i] = {it.lo[i], it.hi[i]};

    bool outside = !cell.reg.cells.empty();
    for (const Conjunction& conj : cell.reg.cells) {
      if (conj.provably_empty()) continue;
      if (!conj.certified_empty_on(iv)) {
        outside = false;
        break;
      }
    }
    if (outside) continue;

    ValueBox img;
    img.lo.resize(cell.branch->size());
    img.hi.resize(cell.branch->size());
    bool finite = true;
    double width = 0.0;
    for (std::size_t j = 0; j < cell.branch->size(); ++j) {
      Interval I = eval_on_box((*cell.branch)[j], iv, a.cfg.time);
      img.lo[j] = I.lo;
      img.hi[j] = I.hi;
      finite = finite && I.is_finite();
      width = std::max(width, I.width());
    }
    if (finite && width <= resolution) {
      out.push_back(std::move(img));
      continue;
    }
    if (it.depth >= a.cfg.max_depth) {
      if (finite)
        out.push_back(std::move(img));
      reached = false;
      continue;
    }
    std::size_t axis = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < it.lo.size(); ++i)
      if (it.hi[i] - it.lo[i] > best) best = it.hi[i] - it.lo[i], axis = i;
    Item left = it, right = it;
    left.depth = right.depth = it.depth + 1;
    left.hi[axis] = right.lo[axis] = 0.5 * (it.lo[axis] + it.hi[axis]);
    queue.push_back(std::move(left));
    queue.push_back(std::move(right));
  }
}

double half_diagonal(const ValueBox& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < b.lo.size(); ++i) {
    double d = 0.5 * (b.hi[i] - b.lo[i]);
    s += d * d;
  }
  return std::sqrt(s);
}

// No sampled value lies in the rho-dilation of the box (cheap pre-test before
// attempting a null certificate on the whole box).
bool batch_misses_box(const Analysis& a, const ValueBox& b, double rho) {
  for (std::size_t i = 0; i < a.vals.size(); ++i)
    if (a.wts[i] > 0.0 && b.distance_to(a.vals[i]) < rho) return false;
  return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public operations

PointClass classify_value(const PiecewiseMap& f, const Region& q, const Vec& y,
                          const EssConfig& cfg) {
  Analysis a = analyze(f, q, cfg);
  return classify(a, y);
}

PointClass classify_value_sampled(const std::function<Vec(const Vec&, double)>& f,
                                  const Region& q, const Vec& y, const EssConfig& cfg) {
  PointClass pc;
  pc.value = y;
  pc.verdict = PointClass::Verdict::Good;
  const double rho_min = cfg.radii.smallest();
  const double volume = q.base.volume();
  const std::size_t dim = q.base.dim();

  CounterRng rng(cfg.seed, 0x626c6b);
  double sum = 0.0, sum_sq = 0.0;
  std::uint64_t hits = 0;
  Vec x(dim);
  for (std::uint64_t i = 0; i < cfg.budget; ++i) {
    for (std::size_t k = 0; k < dim; ++k) {
      double u = static_cast<double>(rng.at(i * dim + k) >> 11) * 0x1.0p-53;
      x[k] = q.base.lower[k] + (q.base.upper[k] - q.base.lower[k]) * u;
    }
    if (!q.member(x, cfg.time)) continue;
    Vec v = f(x, cfg.time);
    if (v.size() != y.size())
      throw ValidationError("black-box map returned a value of the wrong dimension");
    if (distance(v, y) >= rho_min) continue;
    double w = cfg.measure.weight(x);
    if (w <= 0.0) continue;
    ++hits;
    double qq = volume * w;
    sum += qq;
    sum_sq += qq * qq;
  }
  const double n = static_cast<double>(cfg.budget);
  const double mean = sum / n;
  double var = (sum_sq / n - mean * mean) * n / std::max(1.0, n - 1.0);
  if (var < 0.0) var = 0.0;
  pc.good_measure_lcb = std::max(0.0, mean - kZ99 * std::sqrt(var / n));
  pc.low_confidence = hits == 0;
  return pc;
}

double EssentialRange::distance_to(const Vec& y) const {
  if (exact) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec& v : values) best = std::min(best, distance(v, y));
    return best;
  }
  return cover.distance_to(y);
}

namespace {

BoxCover to_cover(const EssentialRange& r) {
  if (!r.exact) return r.cover;
  BoxCover c;
  c.dim = static_cast<std::size_t>(r.dim);
  for (const Vec& v : r.values) c.boxes.push_back({v, v});
  return c;
}

}  // namespace

bool EssentialRange::contained_in(const EssentialRange& other, double tol) const {
  BoxCover a = to_cover(*this);
  BoxCover b = to_cover(other);
  if (a.boxes.empty()) return true;
  if (b.boxes.empty()) return false;
  return directed_cover_distance(a, b) <= tol;
}

EssentialRange essential_range(const PiecewiseMap& f, const Region& q, const EssConfig& cfg,
                               double resolution) {
  if (!(resolution > 0.0)) throw ValidationError("essential_range resolution must be positive");
  Analysis a = analyze(f, q, cfg);

  EssentialRange out;
  out.dim = f.codomain_dim;
  out.resolution = resolution;

  bool all_constant = true;
  for (const LiveCell& c : a.cells) all_constant = all_constant && c.constant;

  if (all_constant) {
    out.exact = true;
    std::vector<Vec> candidates;
    for (const LiveCell& c : a.cells) candidates.push_back(c.constant_value);
    for (const auto& [set, value] : f.overrides) candidates.push_back(value);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    for (const Vec& y : candidates) {
      PointClass pc = classify(a, y);
      if (pc.good()) out.values.push_back(y);
      out.classifications.push_back(std::move(pc));
    }
    return out;
  }

  // Covered path: seed with per-cell image covers, refine to the requested
  // resolution, keep a leaf iff a representative value in it is good.
  out.exact = false;
  out.cover.dim = static_cast<std::size_t>(f.codomain_dim);
  const double rho_min = cfg.radii.smallest();

  std::vector<ValueBox> queue;
  bool reached = true;
  for (const LiveCell& c : a.cells) {
    double seed_res = resolution;
    // Coarse first pass keeps the queue small for wide images.
    std::vector<Interval> base = a.q.base.as_intervals();
    double img_width = 0.0;
    for (std::size_t j = 0; j < c.branch->size(); ++j) {
      Interval I = eval_on_box((*c.branch)[j], base, cfg.time);
      if (I.is_finite()) img_width = std::max(img_width, I.width());
    }
    seed_res = std::max(resolution, img_width / 64.0);
    cover_cell_image(a, c, seed_res, queue, reached);
  }
  for (const auto& [set, value] : f.overrides) queue.push_back({value, value});

  std::size_t processed = 0;
  while (!queue.empty()) {
    ValueBox b = std::move(queue.back());
    queue.pop_back();
    if (++processed > cfg.max_boxes) {
      reached = false;
      out.cover.boxes.push_back(std::move(b));
      for (auto& rest : queue) out.cover.boxes.push_back(std::move(rest));
      break;
    }
    if (b.width() <= resolution) {
      PointClass pc = classify(a, b.center());
      if (pc.good()) out.cover.boxes.push_back(std::move(b));
      continue;
    }
    // Prune: every value in the box is bad when the preimage of its dilation
    // is certifiably negligible.
    double rho = half_diagonal(b) + rho_min;
    if (batch_misses_box(a, b, rho) && certify_null(a, b.center(), rho)) continue;

    std::size_t axis = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < b.lo.size(); ++i)
      if (b.hi[i] - b.lo[i] > best) best = b.hi[i] - b.lo[i], axis = i;
    ValueBox left = b, right = b;
    left.hi[axis] = right.lo[axis] = 0.5 * (b.lo[axis] + b.hi[axis]);
    queue.push_back(std::move(left));
    queue.push_back(std::move(right));
  }
  out.cover.resolution_reached = reached;
  return out;
}

CanonicalNullSet canonical_null_set(const PiecewiseMap& f, const Region& q) {
  CanonicalNullSet n;
  n.region = q;
  for (const Expr& sigma : f.switches)
    n.components = n.components.unite(NullSet::surface(sigma));
  for (const auto& [set, value] : f.overrides) n.components = n.components.unite(set);
  return n;
}

BoxCover closure_image_minus_null(const PiecewiseMap& f, const Region& q, const NullSet& n,
                                  const EssConfig& cfg, double resolution) {
  if (!(resolution > 0.0))
    throw ValidationError("closure_image_minus_null resolution must be positive");
  if (!is_negligible(n, cfg.ideal, cfg.measure))
    throw ValidationError("closure_image_minus_null: the removed set is not negligible");
  Analysis a = analyze(f, q, cfg);

  BoxCover cover;
  cover.dim = static_cast<std::size_t>(f.codomain_dim);

  // Removing a null set never changes the closure of a branch image over a
  // fat cell, so the branch part ignores n entirely.
  struct Item {
    Vec lo, hi;
    int depth;
  };
  for (const LiveCell& cell : a.cells) {
    std::deque<Item> queue;
    queue.push_back({a.q.base.lower, a.q.base.upper, 0});
    std::size_t nodes = 0;
    while (!queue.empty()) {
      Item it = queue.front();
      queue.pop_front();
      if (++nodes > cfg.max_boxes) {
        cover.resolution_reached = false;
        break;
      }
      std::vector<Interval> iv(it.lo.size());
      for (std::size_t i = 0; i < it.lo.size(); ++i) iv[i] = {it.lo[i], it.hi[i]};

      bool outside = !cell.reg.cells.empty();
      for (const Conjunction& conj : cell.reg.cells) {
        if (conj.provably_empty()) continue;
        if (!conj.certified_empty_on(iv)) {
          outside = false;
          break;
        }
      }
      if (outside) continue;

      ValueBox img;
      img.lo.resize(cell.branch->size());
      img.hi.resize(cell.branch->size());
      bool finite = true;
      double width = 0.0;
      for (std::size_t j = 0; j < cell.branch->size(); ++j) {
        Interval I = eval_on_box((*cell.branch)[j], iv, cfg.time);
        img.lo[j] = I.lo;
        img.hi[j] = I.hi;
        finite = finite && I.is_finite();
        width = std::max(width, I.width());
      }
      bool small_enough = finite && width <= resolution;
      bool at_cap = it.depth >= cfg.max_depth;
      if (small_enough || at_cap) {
        if (!small_enough) cover.resolution_reached = false;
        if (!finite) continue;
        // Keep only leaves verified to touch cell ∩ q.
        bool found = false;
        Vec probe(it.lo.size());
        CounterRng rng(cfg.seed ^ nodes, 0x696d67);
        for (int s = 0; s < 24 && !found; ++s) {
          for (std::size_t i = 0; i < it.lo.size(); ++i)
            probe[i] = s == 0 ? 0.5 * (it.lo[i] + it.hi[i])
                              : rng.next_in(it.lo[i], it.hi[i]);
          found = cell.reg.member(probe, cfg.time);
        }
        if (found) cover.boxes.push_back(std::move(img));
        continue;
      }
      std::size_t axis = 0;
      double best = -1.0;
      for (std::size_t i = 0; i < it.lo.size(); ++i)
        if (it.hi[i] - it.lo[i] > best) best = it.hi[i] - it.lo[i], axis = i;
      Item left = it, right = it;
      left.depth = right.depth = it.depth + 1;
      left.hi[axis] = right.lo[axis] = 0.5 * (it.lo[axis] + it.hi[axis]);
      queue.push_back(std::move(left));
      queue.push_back(std::move(right));
    }
  }

  // Override values survive as isolated points unless their support was
  // removed with n.
  for (const auto& [set, value] : f.overrides) {
    if (nullset_contained(set, n)) continue;
    cover.boxes.push_back({value, value});
  }
  return cover;
}

RestrictionReport restrict_and_compare(const PiecewiseMap& f, const Region& q, const Region& sub,
                                       const EssConfig& cfg, double resolution) {
  CounterRng rng(cfg.seed, 0x737562);
  for (int i = 0; i < 2000; ++i) {
    Vec x = sub.base.sample(rng);
    if (sub.member(x, cfg.time) && !q.member(x, cfg.time))
      throw ValidationError("restriction region is not contained in the query region");
  }

  RestrictionReport rep;
  rep.sub_range = essential_range(f, sub, cfg, resolution);
  rep.full_range = essential_range(f, q, cfg, resolution);

  const double tol =
      rep.sub_range.exact && rep.full_range.exact ? 1e-12 : 2.0 * resolution;
  BoxCover sub_cover = to_cover(rep.sub_range);
  BoxCover full_cover = to_cover(rep.full_range);
  rep.range_violation =
      sub_cover.boxes.empty() ? 0.0 : directed_cover_distance(sub_cover, full_cover);
  rep.range_contained = rep.range_violation <= tol;

  // N0 ∩ Q ⊆ N0^Q: the restricted canonical generators must cover the
  // full-region ones.
  CanonicalNullSet big = canonical_null_set(f, q);
  CanonicalNullSet small = canonical_null_set(f, sub);
  rep.null_generators_contained = nullset_contained(big.components, small.components);
  return rep;
}

}  // namespace filippov
