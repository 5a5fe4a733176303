#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "filippov/region.hpp"

namespace filippov {

/// Sign vector indexing one open cell of the switching arrangement.
/// Ordering treats '-' as smaller than '+', so {-,-} < {-,+} < {+,-} < {+,+}.
struct CellId {
  std::vector<std::int8_t> signs;  // entries are -1 or +1

  bool operator<(const CellId& o) const { return signs < o.signs; }
  bool operator==(const CellId& o) const { return signs == o.signs; }
  std::string label() const;

  static CellId from_label(const std::string& s);
};

/// Piecewise-defined map f: domain -> ℝⁿ.  Finitely many continuous branches
/// keyed by the signs of the switching expressions, plus value overrides on
/// null sets.  Switching surfaces depend on x only; branches may use t.
struct PiecewiseMap {
  DomainBox domain;
  int codomain_dim = 0;
  std::vector<Expr> switches;
  std::map<CellId, std::vector<Expr>> branches;
  std::vector<std::pair<NullSet, Vec>> overrides;
  double surface_tol = 1e-9;

  std::size_t dim() const { return domain.dim(); }
  std::size_t num_switches() const { return switches.size(); }

  Vec switch_values(const Vec& x) const;
  bool owns(const CellId& c) const { return branches.count(c) > 0; }
  Vec branch_value(const CellId& c, const Vec& x, double t) const;

  /// The open cell as a constraint conjunction over the domain box.
  Region cell_region(const CellId& c) const;

  /// Load-time validation: switching surfaces regular and kink-free, every
  /// sampled point lands in an owned cell, branches evaluable on their cells,
  /// override values finite and of codomain dimension.
  void validate(std::uint64_t seed = 0) const;
};

/// Raw pointwise evaluation: overrides first, then the owning branch; points
/// on a surface take the branch of the lexicographically smallest adjacent
/// owned cell.
Vec eval_raw(const PiecewiseMap& f, const Vec& x, double t = 0.0);

/// All owned cells whose closure contains x: components with |σ_i(x)| <= tol
/// are wildcards, every owned completion is returned.
std::vector<CellId> adjacent_cells(const PiecewiseMap& f, const Vec& x, double tol);
inline std::vector<CellId> adjacent_cells(const PiecewiseMap& f, const Vec& x) {
  return adjacent_cells(f, x, f.surface_tol);
}

/// True iff all adjacent branch values at x agree within tol and no override
/// at x conflicts with them.
bool is_continuous_at(const PiecewiseMap& f, const Vec& x, double tol, double t = 0.0);

}  // namespace filippov
