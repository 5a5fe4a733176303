#include "filippov/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace filippov {

namespace {

constexpr double kTangencyTol = 1e-12;
constexpr int kMaxEvents = 10000;

std::string cell_or_empty(const CellId& c) { return c.signs.empty() ? "()" : c.label(); }

}  // namespace

std::string Mode::label() const {
  switch (kind) {
    case Kind::Smooth: return "smooth:" + cell_or_empty(cell);
    case Kind::Sliding: {
      std::string s = "sliding:";
      for (std::size_t i = 0; i < active_surfaces.size(); ++i)
        s += (i ? "," : "") + std::to_string(active_surfaces[i]);
      return s;
    }
    case Kind::Stopped:
      switch (reason) {
        case StopReason::ReachedHorizon: return "stopped:horizon";
        case StopReason::DomainExit: return "stopped:domain-exit";
        case StopReason::Ambiguous: return "stopped:ambiguous";
      }
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Dense output

Vec Trajectory::state_at(double t) const {
  if (nodes.empty()) throw SolverError("empty trajectory");
  if (t <= nodes.front().t) return nodes.front().x;
  if (t >= nodes.back().t) return nodes.back().x;
  auto it = std::upper_bound(nodes.begin(), nodes.end(), t,
                             [](double v, const TrajectoryNode& n) { return v < n.t; });
  const TrajectoryNode& a = *(it - 1);
  const TrajectoryNode& b = *it;
  const double h = b.t - a.t;
  if (h <= 0.0) return b.x;
  const double s = (t - a.t) / h;
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  Vec out(a.x.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = h00 * a.x[i] + h10 * h * a.deriv_out[i] + h01 * b.x[i] + h11 * h * b.deriv_in[i];
  return out;
}

// ---------------------------------------------------------------------------
// Surface decision

namespace {

struct SidePair {
  bool formula = false;  // exactly one active surface with both sides owned
  CellId plus, minus;
};

SidePair find_side_cells(const PiecewiseMap& f, const Vec& x, int surface, double wildcard_tol) {
  Vec sv = f.switch_values(x);
  SidePair sp;
  CellId plus, minus;
  plus.signs.resize(sv.size());
  minus.signs.resize(sv.size());
  for (std::size_t j = 0; j < sv.size(); ++j) {
    if (static_cast<int>(j) == surface) {
      plus.signs[j] = 1;
      minus.signs[j] = -1;
    } else {
      if (std::fabs(sv[j]) <= wildcard_tol) return sp;  // another surface is active too
      plus.signs[j] = minus.signs[j] = sv[j] > 0 ? 1 : -1;
    }
  }
  if (!f.owns(plus) || !f.owns(minus)) return sp;
  sp.formula = true;
  sp.plus = std::move(plus);
  sp.minus = std::move(minus);
  return sp;
}

}  // namespace

SurfaceDecision decide_at_surface(const FilippovMap& F, double t, const Vec& x,
                                  const std::vector<int>& active) {
  if (active.empty()) throw ValidationError("decide_at_surface requires an active surface");
  const PiecewiseMap& f = F.rhs;

  std::vector<Vec> normals;
  for (int i : active) {
    Vec g = f.switches[static_cast<std::size_t>(i)].gradient({x, 0.0});
    if (norm(g) < 1e-9)
      throw ValidationError("degenerate surface normal at the event point (‖∇σ‖ < 1e-9)");
    normals.push_back(std::move(g));
  }

  SurfaceDecision d;
  if (active.size() == 1) {
    SidePair sp = find_side_cells(f, x, active[0], f.surface_tol);
    if (sp.formula) {
      const Vec& g = normals[0];
      Vec fp = f.branch_value(sp.plus, x, t);
      Vec fm = f.branch_value(sp.minus, x, t);
      double dp = dot(fp, g), dm = dot(fm, g);
      d.tangency = std::fabs(dp) <= kTangencyTol || std::fabs(dm) <= kTangencyTol;
      if (!d.tangency && dp * dm > 0.0) {
        d.kind = SurfaceDecision::Kind::Crossing;
        d.target = dp > 0.0 ? sp.plus : sp.minus;
        return d;
      }
      if (!d.tangency && dp > 0.0 && dm < 0.0) {
        d.kind = SurfaceDecision::Kind::Ambiguous;  // repulsive: nonunique continuation
        return d;
      }
      // Attractive (dp < 0 < dm), or a tangency treated as sliding entry.
      double alpha = dm / (dm - dp);
      alpha = std::clamp(alpha, 0.0, 1.0);
      Vec v(fp.size());
      for (std::size_t k = 0; k < v.size(); ++k) v[k] = alpha * fp[k] + (1 - alpha) * fm[k];
      double gg = dot(g, g);
      double vg = dot(v, g);
      for (std::size_t k = 0; k < v.size(); ++k) v[k] -= vg / gg * g[k];
      d.kind = SurfaceDecision::Kind::Sliding;
      d.cells = {sp.plus, sp.minus};
      d.weights = {alpha, 1.0 - alpha};
      d.velocity = std::move(v);
      return d;
    }
  }

  // General path: least-norm element of the hull in the common tangent space.
  std::vector<CellId> cells = adjacent_cells(f, x, f.surface_tol);
  if (cells.empty()) throw ValidationError("no owned cell adjacent to the event point");
  std::vector<Vec> values;
  values.reserve(cells.size());
  for (const CellId& c : cells) values.push_back(f.branch_value(c, x, t));

  auto res = min_norm_in_subspace(values, normals, 1e-9);
  if (res) {
    d.kind = SurfaceDecision::Kind::Sliding;
    d.cells = std::move(cells);
    d.weights = std::move(res->second);
    d.velocity = std::move(res->first);
    return d;
  }

  // Infeasible intersection: cross along the steepest exit direction.
  double best_score = 0.0;
  std::size_t best = cells.size();
  for (std::size_t c = 0; c < cells.size(); ++c) {
    double score = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < active.size(); ++k) {
      double side = cells[c].signs[static_cast<std::size_t>(active[k])] > 0 ? 1.0 : -1.0;
      score = std::min(score, side * dot(values[c], normals[k]));
    }
    if (score > best_score) {
      best_score = score;
      best = c;
    }
  }
  if (best < cells.size()) {
    d.kind = SurfaceDecision::Kind::Crossing;
    d.target = cells[best];
    return d;
  }
  d.kind = SurfaceDecision::Kind::Ambiguous;
  return d;
}

// ---------------------------------------------------------------------------
// Dormand–Prince 5(4) with FSAL

namespace {

using Field = std::function<Vec(double, const Vec&)>;

struct StepAttempt {
  Vec x_new;
  Vec k_end;   // f(t+h, x_new)
  double err;  // mixed abs/rel error norm, acceptance at <= 1
};

StepAttempt dopri_step(const Field& field, double t, const Vec& x, const Vec& k1, double h,
                       double rtol, double atol) {
  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                      a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                      a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                      b6 = 11.0 / 84;
  static const double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                      e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                      e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

  const std::size_t m = x.size();
  auto stage = [&](std::initializer_list<std::pair<double, const Vec*>> terms) {
    Vec y = x;
    for (const auto& [c, k] : terms)
      for (std::size_t i = 0; i < m; ++i) y[i] += h * c * (*k)[i];
    return y;
  };

  Vec k2 = field(t + h / 5, stage({{a21, &k1}}));
  Vec k3 = field(t + 3 * h / 10, stage({{a31, &k1}, {a32, &k2}}));
  Vec k4 = field(t + 4 * h / 5, stage({{a41, &k1}, {a42, &k2}, {a43, &k3}}));
  Vec k5 = field(t + 8 * h / 9, stage({{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
  Vec k6 = field(t + h, stage({{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));

  StepAttempt out;
  out.x_new = x;
  for (std::size_t i = 0; i < m; ++i)
    out.x_new[i] += h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
  out.k_end = field(t + h, out.x_new);

  double acc = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                    e7 * out.k_end[i]);
    double scale = atol + rtol * std::max(std::fabs(x[i]), std::fabs(out.x_new[i]));
    acc += (e / scale) * (e / scale);
  }
  out.err = std::sqrt(acc / static_cast<double>(m));
  return out;
}

// ---------------------------------------------------------------------------
// Integrator

struct Integrator {
  const IVProblem& p;
  FilippovMap F;
  Trajectory tr;
  int events = 0;

  double t = 0.0;
  Vec x;
  Mode mode;
  // Sliding context (single-surface fast path keeps the two side cells).
  std::vector<int> active;
  std::vector<CellId> slide_cells;
  std::vector<Vec> slide_normals_unit;  // refreshed each field evaluation

  explicit Integrator(const IVProblem& problem)
      : p(problem), F(FilippovMap::standard(problem.rhs)) {
    tr.event_tol = p.event_tol;
  }

  Vec switch_values(const Vec& at) const { return p.rhs.switch_values(at); }

  void bump_events(double at_t, const Vec& at_x) {
    if (++events > kMaxEvents) {
      std::ostringstream msg;
      msg << "event accumulation guard tripped (" << kMaxEvents << " events) at t = " << at_t
          << ", x = (";
      for (std::size_t i = 0; i < at_x.size(); ++i) msg << (i ? ", " : "") << at_x[i];
      msg << "); chattering not absorbed by the sliding decision";
      throw SolverError(msg.str());
    }
  }

  // --- fields ---------------------------------------------------------------

  Vec smooth_field(double tt, const Vec& xx) const {
    return p.rhs.branch_value(mode.cell, xx, tt);
  }

  Vec sliding_field(double tt, const Vec& xx) const {
    if (active.size() == 1 && slide_cells.size() == 2) {
      const Expr& sigma = p.rhs.switches[static_cast<std::size_t>(active[0])];
      Vec g = sigma.gradient({xx, 0.0});
      Vec fp = p.rhs.branch_value(slide_cells[0], xx, tt);
      Vec fm = p.rhs.branch_value(slide_cells[1], xx, tt);
      double dp = dot(fp, g), dm = dot(fm, g);
      double alpha = dm - dp == 0.0 ? 0.5 : std::clamp(dm / (dm - dp), 0.0, 1.0);
      Vec v(fp.size());
      for (std::size_t k = 0; k < v.size(); ++k) v[k] = alpha * fp[k] + (1 - alpha) * fm[k];
      double vg = dot(v, g), gg = dot(g, g);
      for (std::size_t k = 0; k < v.size(); ++k) v[k] -= vg / gg * g[k];
      return v;
    }
    SurfaceDecision d = decide_at_surface(F, tt, xx, active);
    if (d.kind != SurfaceDecision::Kind::Sliding)
      return d.kind == SurfaceDecision::Kind::Crossing
                 ? p.rhs.branch_value(d.target, xx, tt)
                 : Vec(xx.size(), 0.0);
    return d.velocity;
  }

  Field current_field() {
    if (mode.kind == Mode::Kind::Smooth)
      return [this](double tt, const Vec& xx) { return smooth_field(tt, xx); };
    return [this](double tt, const Vec& xx) { return sliding_field(tt, xx); };
  }

  // --- helpers ---------------------------------------------------------------

  void push_node(double tt, const Vec& xx, const Vec& din, const Vec& dout, Mode m) {
    tr.nodes.push_back({tt, xx, din, dout, std::move(m)});
  }

  void snap_to_surfaces(Vec& xx, const std::vector<int>& surfaces) const {
    for (int rep = 0; rep < 3; ++rep) {
      double worst = 0.0;
      for (int i : surfaces) {
        const Expr& sigma = p.rhs.switches[static_cast<std::size_t>(i)];
        double v = sigma.evaluate({xx, 0.0});
        worst = std::max(worst, std::fabs(v));
        if (std::fabs(v) <= 0.1 * p.event_tol) continue;
        Vec g = sigma.gradient({xx, 0.0});
        double gg = dot(g, g);
        if (gg < 1e-18) break;
        for (std::size_t k = 0; k < xx.size(); ++k) xx[k] -= v * g[k] / gg;
      }
      if (worst <= 0.1 * p.event_tol) break;
    }
  }

  // Bisection for the first time in (t0, t1] where pred flips to true on the
  // dense interpolant of the last pushed segment.
  double bisect_event(double t0, double t1, const std::function<bool(double)>& pred) const {
    double lo = t0, hi = t1;
    for (int it = 0; it < 200 && hi - lo > p.event_tol; ++it) {
      double mid = 0.5 * (lo + hi);
      if (pred(mid))
        hi = mid;
      else
        lo = mid;
    }
    return hi;
  }

  // --- main loop --------------------------------------------------------------

  Trajectory run() {
    x = p.x0;
    t = 0.0;

    // Initial mode: a surface start goes through the decision rule.
    std::vector<int> start_active;
    Vec sv = switch_values(x);
    for (std::size_t i = 0; i < sv.size(); ++i)
      if (std::fabs(sv[i]) <= std::max(p.rhs.surface_tol, p.event_tol))
        start_active.push_back(static_cast<int>(i));
    if (start_active.empty()) {
      auto cells = adjacent_cells(p.rhs, x, p.rhs.surface_tol);
      if (cells.empty()) throw ValidationError("initial state lies in no owned cell");
      mode.kind = Mode::Kind::Smooth;
      mode.cell = cells.front();
    } else if (!enter_surface(0.0, start_active, /*record_event=*/false)) {
      // Repulsive start: report the ambiguity immediately.
      Mode stopped;
      stopped.kind = Mode::Kind::Stopped;
      stopped.reason = StopReason::Ambiguous;
      Vec zero(x.size(), 0.0);
      push_node(0.0, x, zero, zero, stopped);
      tr.stop = StopReason::Ambiguous;
      tr.events.push_back({0.0, start_active, TrajectoryEvent::Decision::AmbiguousStop, false});
      return std::move(tr);
    }

    Field field = current_field();
    Vec k1 = field(t, x);
    push_node(t, x, k1, k1, mode);

    const double t_scale = std::max(1.0, p.horizon);
    double h = std::min(p.horizon / 100.0, 0.01 * (1.0 + norm(x)) / (1.0 + norm(k1)));
    const double h_min = 1e-14 * t_scale;
    const double h_max = 0.02 * p.horizon;

    while (t < p.horizon) {
      h = std::clamp(h, h_min, h_max);
      bool last = false;
      if (t + h >= p.horizon) {
        h = p.horizon - t;
        last = true;
      }

      StepAttempt step = dopri_step(field, t, x, k1, h, p.rtol, p.atol);
      if (!std::isfinite(step.err)) {
        h *= 0.25;
        if (h <= h_min) throw SolverError("step size underflow (non-finite error estimate)");
        continue;
      }
      if (step.err > 1.0) {
        h *= std::clamp(0.9 * std::pow(step.err, -0.2), 0.2, 1.0);
        if (h <= h_min) throw SolverError("step size underflow during error control");
        continue;
      }

      // Accepted: provisional segment [t, t+h].
      const double t_new = last ? p.horizon : t + h;
      const Vec x_prev = x;
      const double t_prev = t;
      const Vec k_start = k1;

      // Temporarily push the segment so the dense interpolant is queryable.
      push_node(t_new, step.x_new, step.k_end, step.k_end, mode);

      bool rewound = handle_segment(t_prev, t_new, x_prev, k_start, step);
      if (rewound) {
        field = current_field();
        if (mode.kind == Mode::Kind::Stopped) break;
        k1 = field(t, x);
        tr.nodes.back().deriv_out = k1;
        tr.nodes.back().mode = mode;
        h = std::max(h * 0.5, 1e-6 * t_scale);
        continue;
      }

      t = t_new;
      x = step.x_new;
      k1 = step.k_end;  // FSAL
      h *= std::clamp(0.9 * std::pow(std::max(step.err, 1e-10), -0.2), 0.2, 5.0);
      if (t >= p.horizon) break;
    }

    if (mode.kind != Mode::Kind::Stopped) tr.stop = StopReason::ReachedHorizon;
    return std::move(tr);
  }

  // Examines the just-pushed segment for domain exit, surface events, or
  // sliding exits.  Returns true when the segment was truncated (t, x, mode
  // updated; the truncated node is at tr.nodes.back()).  Sliding steps may
  // re-project step.x_new onto the active surfaces in place.
  bool handle_segment(double t0, double t1, const Vec& x0, const Vec& k_start,
                      StepAttempt& step) {
    (void)k_start;
    // Domain exit first: the dense interpolant leaving the box stops the run.
    if (!p.rhs.domain.contains(step.x_new)) {
      double te = bisect_event(
          t0, t1, [&](double tt) { return !p.rhs.domain.contains(tr.state_at(tt)); });
      Vec xe = tr.state_at(std::max(t0, te - p.event_tol));
      bump_events(te, xe);
      truncate_to(te, xe);
      Mode stopped;
      stopped.kind = Mode::Kind::Stopped;
      stopped.reason = StopReason::DomainExit;
      tr.nodes.back().mode = stopped;
      mode = stopped;
      tr.stop = StopReason::DomainExit;
      tr.events.push_back({te, {}, TrajectoryEvent::Decision::DomainExit, false});
      return true;
    }

    if (mode.kind == Mode::Kind::Smooth) return handle_smooth_events(t0, t1, x0, step);
    if (mode.kind == Mode::Kind::Sliding) return handle_sliding_events(t0, t1, x0, step);
    return false;
  }

  void truncate_to(double te, const Vec& xe) {
    TrajectoryNode& node = tr.nodes.back();
    const TrajectoryNode& prev = tr.nodes[tr.nodes.size() - 2];
    if (te <= prev.t) te = std::nextafter(prev.t, std::numeric_limits<double>::infinity());
    node.t = te;
    node.x = xe;
    // End derivative of the truncated piece under the segment's own field.
    Vec din;
    if (mode.kind == Mode::Kind::Smooth)
      din = smooth_field(te, xe);
    else if (mode.kind == Mode::Kind::Sliding)
      din = sliding_field(te, xe);
    else
      din = prev.deriv_out;
    node.deriv_in = din;
    node.deriv_out = din;
    t = te;
    x = xe;
  }

  bool handle_smooth_events(double t0, double t1, const Vec& x0, const StepAttempt& step) {
    (void)x0;
    Vec sv_new = switch_values(step.x_new);
    std::vector<int> flipped;
    for (std::size_t i = 0; i < sv_new.size(); ++i) {
      double side = mode.cell.signs[i] > 0 ? 1.0 : -1.0;
      if (side * sv_new[i] < 0.0 && std::fabs(sv_new[i]) > p.event_tol)
        flipped.push_back(static_cast<int>(i));
    }
    if (flipped.empty()) return false;

    // Earliest crossing among the flipped surfaces.
    double te = t1;
    for (int i : flipped) {
      const Expr& sigma = p.rhs.switches[static_cast<std::size_t>(i)];
      double side = mode.cell.signs[static_cast<std::size_t>(i)] > 0 ? 1.0 : -1.0;
      double ti = bisect_event(t0, t1, [&](double tt) {
        return side * sigma.evaluate({tr.state_at(tt), 0.0}) < 0.0;
      });
      te = std::min(te, ti);
    }
    Vec xe = tr.state_at(te);

    // Active set: every surface within tolerance at the event point.
    Vec sve = switch_values(xe);
    std::vector<int> active_now;
    for (std::size_t i = 0; i < sve.size(); ++i)
      if (std::fabs(sve[i]) <= 10 * p.event_tol) active_now.push_back(static_cast<int>(i));
    if (active_now.empty()) active_now = flipped;
    snap_to_surfaces(xe, active_now);

    bump_events(te, xe);
    truncate_to(te, xe);
    if (!enter_surface(te, active_now, /*record_event=*/true)) {
      Mode stopped;
      stopped.kind = Mode::Kind::Stopped;
      stopped.reason = StopReason::Ambiguous;
      tr.nodes.back().mode = stopped;
      mode = stopped;
      tr.stop = StopReason::Ambiguous;
    }
    return true;
  }

  // Applies the decision rule at a surface point; updates mode.  Returns
  // false on an ambiguous (repulsive) configuration.
  bool enter_surface(double te, const std::vector<int>& active_now, bool record_event) {
    SurfaceDecision d = decide_at_surface(F, te, x, active_now);
    switch (d.kind) {
      case SurfaceDecision::Kind::Crossing: {
        mode.kind = Mode::Kind::Smooth;
        mode.cell = d.target;
        mode.active_surfaces.clear();
        mode.weights.clear();
        mode.sliding_cells.clear();
        if (record_event)
          tr.events.push_back(
              {te, active_now, TrajectoryEvent::Decision::Crossing, d.tangency});
        return true;
      }
      case SurfaceDecision::Kind::Sliding: {
        mode.kind = Mode::Kind::Sliding;
        mode.active_surfaces = active_now;
        mode.sliding_cells = d.cells;
        mode.weights = d.weights;
        active = active_now;
        slide_cells = d.cells;
        if (record_event)
          tr.events.push_back(
              {te, active_now, TrajectoryEvent::Decision::SlidingEntry, d.tangency});
        return true;
      }
      case SurfaceDecision::Kind::Ambiguous:
        if (record_event)
          tr.events.push_back(
              {te, active_now, TrajectoryEvent::Decision::AmbiguousStop, d.tangency});
        return false;
    }
    return false;
  }

  bool handle_sliding_events(double t0, double t1, const Vec& x0, StepAttempt& step) {
    (void)x0;
    Vec x_end = step.x_new;
    snap_to_surfaces(x_end, active);
    if (x_end != step.x_new) {
      step.x_new = x_end;
      step.k_end = sliding_field(t1, x_end);
      tr.nodes.back().x = x_end;
      tr.nodes.back().deriv_in = step.k_end;
      tr.nodes.back().deriv_out = step.k_end;
    }

    // Crossing of a surface not currently active.
    Vec sv0 = switch_values(tr.state_at(t0));
    Vec sv1 = switch_values(x_end);
    for (std::size_t i = 0; i < sv1.size(); ++i) {
      if (std::find(active.begin(), active.end(), static_cast<int>(i)) != active.end()) continue;
      if (sv0[i] * sv1[i] < 0.0 && std::fabs(sv1[i]) > p.event_tol) {
        const Expr& sigma = p.rhs.switches[i];
        double side = sv0[i] > 0 ? 1.0 : -1.0;
        double te = bisect_event(t0, t1, [&](double tt) {
          return side * sigma.evaluate({tr.state_at(tt), 0.0}) < 0.0;
        });
        Vec xe = tr.state_at(te);
        std::vector<int> new_active = active;
        new_active.push_back(static_cast<int>(i));
        std::sort(new_active.begin(), new_active.end());
        snap_to_surfaces(xe, new_active);
        bump_events(te, xe);
        truncate_to(te, xe);
        if (!enter_surface(te, new_active, true)) {
          Mode stopped;
          stopped.kind = Mode::Kind::Stopped;
          stopped.reason = StopReason::Ambiguous;
          tr.nodes.back().mode = stopped;
          mode = stopped;
          tr.stop = StopReason::Ambiguous;
        }
        return true;
      }
    }

    // Exit condition: attractivity lost on an active surface (a sliding
    // weight reaching 0 or 1).
    if (active.size() == 1 && slide_cells.size() == 2) {
      const Expr& sigma = p.rhs.switches[static_cast<std::size_t>(active[0])];
      auto rates = [&](double tt, const Vec& xx) {
        Vec g = sigma.gradient({xx, 0.0});
        double dp = dot(p.rhs.branch_value(slide_cells[0], xx, tt), g);
        double dm = dot(p.rhs.branch_value(slide_cells[1], xx, tt), g);
        return std::make_pair(dp, dm);
      };
      auto [dp1, dm1] = rates(t1, x_end);
      bool exit_plus = dp1 > kTangencyTol;
      bool exit_minus = dm1 < -kTangencyTol;
      if (exit_plus || exit_minus) {
        double te = bisect_event(t0, t1, [&](double tt) {
          Vec xt = tr.state_at(tt);
          auto [dp, dm] = rates(tt, xt);
          return dp > kTangencyTol || dm < -kTangencyTol;
        });
        Vec xe = tr.state_at(te);
        snap_to_surfaces(xe, active);
        bump_events(te, xe);
        truncate_to(te, xe);
        auto [dpe, dme] = rates(te, xe);
        CellId target = dpe >= -kTangencyTol ? slide_cells[0] : slide_cells[1];
        (void)dme;
        tr.events.push_back({te, active, TrajectoryEvent::Decision::SlidingExit, false});
        mode.kind = Mode::Kind::Smooth;
        mode.cell = target;
        mode.active_surfaces.clear();
        mode.weights.clear();
        mode.sliding_cells.clear();
        active.clear();
        slide_cells.clear();
        return true;
      }
      // Refresh recorded weights.
      double alpha = dm1 - dp1 == 0.0 ? 0.5 : std::clamp(dm1 / (dm1 - dp1), 0.0, 1.0);
      tr.nodes.back().mode.weights = {alpha, 1.0 - alpha};
      return false;
    }

    // Multi-surface sliding: drop surfaces whose one-sided attractivity is
    // gone (hierarchical check via constrained min-norm on each side).
    for (std::size_t idx = 0; idx < active.size(); ++idx) {
      int i = active[idx];
      std::vector<Vec> normals_rest;
      Vec g_i;
      for (int j : active) {
        Vec g = p.rhs.switches[static_cast<std::size_t>(j)].gradient({x_end, 0.0});
        if (j == i)
          g_i = g;
        else
          normals_rest.push_back(g);
      }
      std::vector<CellId> cells = adjacent_cells(p.rhs, x_end, p.rhs.surface_tol);
      std::vector<Vec> plus_vals, minus_vals;
      for (const CellId& c : cells) {
        Vec v = p.rhs.branch_value(c, x_end, t1);
        if (c.signs[static_cast<std::size_t>(i)] > 0)
          plus_vals.push_back(std::move(v));
        else
          minus_vals.push_back(std::move(v));
      }
      if (plus_vals.empty() || minus_vals.empty()) continue;
      auto vp = min_norm_in_subspace(plus_vals, normals_rest, 1e-9);
      auto vm = min_norm_in_subspace(minus_vals, normals_rest, 1e-9);
      if (!vp || !vm) continue;
      double dp = dot(vp->first, g_i), dm = dot(vm->first, g_i);
      if (dp > kTangencyTol || dm < -kTangencyTol) {
        std::vector<int> reduced;
        for (int j : active)
          if (j != i) reduced.push_back(j);
        bump_events(t1, x_end);
        tr.events.push_back({t1, {i}, TrajectoryEvent::Decision::SlidingExit, false});
        if (reduced.empty()) {
          Vec svx = switch_values(x_end);
          CellId target;
          target.signs.resize(svx.size());
          for (std::size_t j = 0; j < svx.size(); ++j)
            target.signs[j] = static_cast<int>(j) == i ? (dp > kTangencyTol ? 1 : -1)
                                                       : (svx[j] > 0 ? 1 : -1);
          mode.kind = Mode::Kind::Smooth;
          mode.cell = target;
          active.clear();
          slide_cells.clear();
        } else if (!enter_surface(t1, reduced, false)) {
          Mode stopped;
          stopped.kind = Mode::Kind::Stopped;
          stopped.reason = StopReason::Ambiguous;
          tr.nodes.back().mode = stopped;
          mode = stopped;
          tr.stop = StopReason::Ambiguous;
        }
        t = t1;
        x = x_end;
        return true;
      }
    }
    return false;
  }
};

}  // namespace

void IVProblem::validate(std::uint64_t seed) const {
  rhs.validate(seed);
  if (static_cast<int>(rhs.dim()) != rhs.codomain_dim)
    throw ValidationError("IVP requires state dimension == codomain dimension");
  if (x0.size() != rhs.dim()) throw ValidationError("x0 dimension mismatch");
  for (std::size_t i = 0; i < x0.size(); ++i)
    if (!(x0[i] > rhs.domain.lower[i] && x0[i] < rhs.domain.upper[i]))
      throw ValidationError("x0 must lie in the domain interior");
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw ValidationError("horizon must be positive and finite");
  if (!(rtol > 0.0) || !(atol > 0.0) || !(event_tol > 0.0))
    throw ValidationError("tolerances must be positive");
  if (magnitude_bound) {
    CounterRng rng(seed, 0x626e64);
    for (int s = 0; s < 10000; ++s) {
      Vec xx = rhs.domain.sample(rng);
      double tt = rng.next_in(0.0, horizon);
      try {
        Vec v = eval_raw(rhs, xx, tt);
        if (norm(v) > *magnitude_bound)
          throw ValidationError("branch value exceeds the declared magnitude bound");
      } catch (const DomainError&) {
        continue;
      }
    }
  }
}

Trajectory integrate(const IVProblem& p) {
  p.validate();
  Integrator integ(p);
  return integ.run();
}

ResidualReport verify_inclusion(const Trajectory& tr, const FilippovMap& F, int samples,
                                double tol, std::uint64_t seed) {
  ResidualReport rep;
  rep.tolerance = tol;
  if (tr.nodes.size() < 2) {
    rep.pass = false;
    return rep;
  }
  const double t_end = tr.end_time();
  const double t_begin = tr.nodes.front().t;
  const double delta = 1e-6 * std::max(1.0, t_end - t_begin);
  const double event_window = 10.0 * tr.event_tol;

  auto excluded = [&](double tt) {
    for (const TrajectoryEvent& e : tr.events)
      if (std::fabs(tt - e.t) <= event_window) return true;
    for (const TrajectoryNode& n : tr.nodes)
      if (std::fabs(tt - n.t) <= 3 * delta) return true;
    return false;
  };

  CounterRng rng(seed, 0x766572);
  int attempts = 0;
  while (static_cast<int>(rep.sample_times.size()) < samples && attempts < 100 * samples) {
    ++attempts;
    double tt = rng.next_in(t_begin + delta, t_end - delta);
    if (excluded(tt)) continue;
    rep.sample_times.push_back(tt);
  }
  std::sort(rep.sample_times.begin(), rep.sample_times.end());

  for (double tt : rep.sample_times) {
    Vec xp = tr.state_at(tt + delta);
    Vec xm = tr.state_at(tt - delta);
    Vec deriv(xp.size());
    for (std::size_t i = 0; i < xp.size(); ++i) deriv[i] = (xp[i] - xm[i]) / (2 * delta);

    Vec xt = tr.state_at(tt);
    double violation = 0.0;
    try {
      ConvexApprox hull = filippov_set(F, tt, xt, FilippovPath::Fast);
      if (hull.rep == ConvexApprox::Rep::Vertices) {
        violation = distance_to_hull(deriv, hull.vertices);
      } else {
        for (std::size_t k = 0; k < hull.directions.size(); ++k)
          violation = std::max(
              violation, dot(deriv, hull.directions[k]) - hull.support_values[k]);
        violation = std::max(violation, 0.0);
      }
    } catch (const ValidationError&) {
      violation = std::numeric_limits<double>::infinity();  // left the domain
    }
    rep.violations.push_back(violation);
    rep.max_violation = std::max(rep.max_violation, violation);
  }
  rep.pass = rep.max_violation <= tol && !rep.sample_times.empty();
  return rep;
}

}  // namespace filippov
