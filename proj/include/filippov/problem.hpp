#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "filippov/essential_range.hpp"
#include "filippov/solver.hpp"

#include "json.hpp"

namespace filippov {

/// One query block of a problem file.
struct QuerySpec {
  enum class Kind : std::uint8_t { EssRange, FilippovSet, Solve, Verify };

  std::string name;
  Kind kind = Kind::EssRange;

  // ess-range
  std::optional<Region> region;  // defaults to the whole domain
  double resolution = 1e-3;
  // filippov-set
  double t = 0.0;
  Vec x;
  bool generic = false;
  // verify
  int samples = 500;
  double tolerance = 1e-6;
};

/// Parsed, fully validated problem document.  Loading either succeeds as a
/// whole or throws with a field diagnostic; nothing half-loads.
struct ProblemFile {
  PiecewiseMap map;
  NegligibilityIdeal ideal;
  MeasureModel measure;  // base box = map domain
  std::optional<IVProblem> ivp;
  std::vector<QuerySpec> queries;
  std::uint64_t seed = 0;
  double hull_tol = 1e-6;

  nlohmann::json canonical;  // normalized document (sorted keys, parsed numbers)
  std::string config_hash;   // stable digest of the canonical document

  static ProblemFile load(const std::string& path);           // I/O + parse
  static ProblemFile parse(const nlohmann::json& document);   // parse only

  const QuerySpec* find_query(const std::string& name) const;
  EssConfig ess_config() const;
  FilippovMap filippov_map() const;
};

struct RunReport {
  std::string command;
  std::string config_hash;
  nlohmann::json results;
  std::vector<std::string> warnings;
  double wall_time_ms = 0.0;

  nlohmann::json to_json() const;
};

// Serialization of computed objects (bit-exact number round-trips).
nlohmann::json trajectory_to_json(const Trajectory& tr);
Trajectory trajectory_from_json(const nlohmann::json& j);
std::string trajectory_to_table(const Trajectory& tr);

nlohmann::json hull_to_json(const ConvexApprox& hull);
nlohmann::json ess_range_to_json(const EssentialRange& er);
nlohmann::json null_set_to_json(const NullSet& n);
nlohmann::json residual_report_to_json(const ResidualReport& rep);

std::string fnv1a_hex(const std::string& bytes);

}  // namespace filippov
