#include "filippov/piecewise.hpp"

#include <algorithm>
#include <cmath>

namespace filippov {

std::string CellId::label() const {
  std::string s;
  s.reserve(signs.size());
  for (auto v : signs) s += v > 0 ? '+' : '-';
  return s;
}

CellId CellId::from_label(const std::string& s) {
  CellId c;
  c.signs.reserve(s.size());
  for (char ch : s) {
    if (ch == '+')
      c.signs.push_back(1);
    else if (ch == '-')
      c.signs.push_back(-1);
    else
      throw ValidationError("cell label must consist of + and - only, got '" + s + "'");
  }
  return c;
}

Vec PiecewiseMap::switch_values(const Vec& x) const {
  Vec v(switches.size());
  for (std::size_t i = 0; i < switches.size(); ++i) v[i] = switches[i].evaluate({x, 0.0});
  return v;
}

Vec PiecewiseMap::branch_value(const CellId& c, const Vec& x, double t) const {
  auto it = branches.find(c);
  if (it == branches.end())
    throw ValidationError("no branch for cell " + c.label());
  Vec out(it->second.size());
  for (std::size_t j = 0; j < it->second.size(); ++j) out[j] = it->second[j].evaluate({x, t});
  return out;
}

Region PiecewiseMap::cell_region(const CellId& c) const {
  std::vector<Constraint> cons;
  cons.reserve(switches.size());
  for (std::size_t i = 0; i < switches.size(); ++i)
    cons.push_back({switches[i],
                    c.signs[i] > 0 ? ConstraintSign::Positive : ConstraintSign::Negative});
  return Region::single(domain, std::move(cons));
}

namespace {

// Owned completions of a sign pattern with wildcards (0 entries).
void collect_completions(const PiecewiseMap& f, std::vector<std::int8_t>& pattern,
                         std::size_t i, std::vector<CellId>& out) {
  if (i == pattern.size()) {
    CellId c{pattern};
    if (f.owns(c)) out.push_back(std::move(c));
    return;
  }
  if (pattern[i] != 0) {
    collect_completions(f, pattern, i + 1, out);
    return;
  }
  for (std::int8_t s : {std::int8_t{-1}, std::int8_t{1}}) {
    pattern[i] = s;
    collect_completions(f, pattern, i + 1, out);
  }
  pattern[i] = 0;
}

}  // namespace

std::vector<CellId> adjacent_cells(const PiecewiseMap& f, const Vec& x, double tol) {
  if (!f.domain.contains(x)) return {};
  Vec sv = f.switch_values(x);
  std::vector<std::int8_t> pattern(sv.size());
  for (std::size_t i = 0; i < sv.size(); ++i)
    pattern[i] = std::fabs(sv[i]) <= tol ? std::int8_t{0} : (sv[i] > 0 ? std::int8_t{1} : std::int8_t{-1});
  std::vector<CellId> out;
  collect_completions(f, pattern, 0, out);
  std::sort(out.begin(), out.end());
  return out;
}

Vec eval_raw(const PiecewiseMap& f, const Vec& x, double t) {
  if (!f.domain.contains(x))
    throw DomainError("point outside the map's domain box");
  for (const auto& [set, value] : f.overrides)
    if (set.contains(x, 0.0)) return value;

  Vec sv = f.switch_values(x);
  CellId exact;
  exact.signs.resize(sv.size());
  bool on_surface = false;
  for (std::size_t i = 0; i < sv.size(); ++i) {
    if (sv[i] == 0.0) on_surface = true;
    exact.signs[i] = sv[i] > 0.0 ? 1 : -1;  // sign 0 handled below via wildcards
  }
  if (!on_surface && f.owns(exact)) return f.branch_value(exact, x, t);

  // Surface point (or unowned zero-measure sliver): lexicographically
  // smallest adjacent owned cell decides.
  std::vector<CellId> adj = adjacent_cells(f, x, std::max(f.surface_tol, 0.0));
  if (adj.empty())
    throw ValidationError("no owned cell adjacent to the evaluation point");
  return f.branch_value(adj.front(), x, t);
}

bool is_continuous_at(const PiecewiseMap& f, const Vec& x, double tol, double t) {
  std::vector<CellId> adj = adjacent_cells(f, x, f.surface_tol);
  if (adj.empty()) return false;
  Vec first = f.branch_value(adj.front(), x, t);
  for (std::size_t i = 1; i < adj.size(); ++i) {
    Vec v = f.branch_value(adj[i], x, t);
    if (distance(first, v) > tol) return false;
  }
  for (const auto& [set, value] : f.overrides)
    if (set.contains(x, 0.0) && distance(value, first) > tol) return false;
  return true;
}

void PiecewiseMap::validate(std::uint64_t seed) const {
  if (codomain_dim <= 0) throw ValidationError("codomain dimension must be positive");
  if (branches.empty()) throw ValidationError("map must own at least one branch");
  for (const auto& [cell, exprs] : branches) {
    if (cell.signs.size() != switches.size())
      throw ValidationError("branch sign vector '" + cell.label() +
                            "' does not match the number of switches");
    if (static_cast<int>(exprs.size()) != codomain_dim)
      throw ValidationError("branch " + cell.label() + " has wrong codomain dimension");
  }
  for (const Expr& sigma : switches) {
    if (sigma.depends_on_time())
      throw ValidationError("switching surfaces must not depend on t: " + sigma.to_string());
    validate_regular_surface(sigma, domain, seed);
  }
  for (const auto& [set, value] : overrides) {
    if (static_cast<int>(value.size()) != codomain_dim)
      throw ValidationError("override value has wrong codomain dimension");
    for (double v : value)
      if (!std::isfinite(v)) throw ValidationError("override value must be finite");
    if (set.empty()) throw ValidationError("override null set has no generators");
  }

  // Sampling pass: every sampled strict-sign point must land in an owned cell
  // and its branch must evaluate there (catches division/log leaving the cell).
  CounterRng rng(seed, 0x636f76);
  for (int s = 0; s < 10000; ++s) {
    Vec x = domain.sample(rng);
    Vec sv = switch_values(x);
    CellId cell;
    cell.signs.resize(sv.size());
    bool near_surface = false;
    for (std::size_t i = 0; i < sv.size(); ++i) {
      if (std::fabs(sv[i]) <= surface_tol) near_surface = true;
      cell.signs[i] = sv[i] > 0 ? 1 : -1;
    }
    if (near_surface) continue;
    auto it = branches.find(cell);
    if (it == branches.end())
      throw ValidationError("no branch for positive-measure cell " + cell.label());
    try {
      for (const Expr& g : it->second) (void)g.evaluate({x, 0.0});
    } catch (const DomainError& e) {
      throw ValidationError("branch " + cell.label() + " not evaluable on its cell: " + e.what());
    }
  }
}

}  // namespace filippov
