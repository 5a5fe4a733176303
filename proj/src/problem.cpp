#include "filippov/problem.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace filippov {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ValidationError(where + ": " + what);
}

const json& need(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) fail(where, std::string("missing field '") + key + "'");
  return *it;
}

double need_number(const json& j, const char* key, const std::string& where) {
  const json& v = need(j, key, where);
  if (!v.is_number()) fail(where + "." + key, "expected a number");
  return v.get<double>();
}

double opt_number(const json& j, const char* key, double fallback) {
  auto it = j.find(key);
  return it == j.end() ? fallback : it->get<double>();
}

Vec need_vector(const json& j, const char* key, std::size_t dim, const std::string& where) {
  const json& v = need(j, key, where);
  if (!v.is_array() || v.size() != dim)
    fail(where + "." + key, "expected an array of length " + std::to_string(dim));
  Vec out;
  for (const auto& e : v) {
    if (!e.is_number()) fail(where + "." + key, "expected numeric entries");
    out.push_back(e.get<double>());
  }
  return out;
}

Expr parse_expr(const json& v, int dim, const std::string& where) {
  if (!v.is_string()) fail(where, "expected an expression string");
  try {
    return Expr::parse(v.get<std::string>(), dim);
  } catch (const ParseError& e) {
    fail(where, e.what());
  }
}

NullSet::Generator generator_from_json(const json& g, int dim, const std::string& where) {
  if (!g.is_object()) fail(where, "expected a null-set generator object");
  if (g.contains("surface")) {
    return NullSet::surface(parse_expr(g["surface"], dim, where + ".surface")).generators[0];
  }
  if (g.contains("points")) {
    const json& pts = g["points"];
    if (!pts.is_array() || pts.empty()) fail(where + ".points", "expected a nonempty array");
    std::vector<Vec> points;
    for (const auto& p : pts) {
      if (!p.is_array() || p.size() != static_cast<std::size_t>(dim))
        fail(where + ".points", "each point must have length " + std::to_string(dim));
      points.push_back(p.get<Vec>());
    }
    return NullSet::points(std::move(points)).generators[0];
  }
  if (g.contains("box")) {
    const json& b = g["box"];
    Vec lo = need_vector(b, "lower", static_cast<std::size_t>(dim), where + ".box");
    Vec hi = need_vector(b, "upper", static_cast<std::size_t>(dim), where + ".box");
    try {
      return NullSet::degenerate_box(std::move(lo), std::move(hi)).generators[0];
    } catch (const ValidationError& e) {
      fail(where + ".box", e.what());
    }
  }
  fail(where, "generator must be one of {surface, points, box}");
}

NullSet nullset_from_json(const json& s, int dim, const std::string& where) {
  NullSet n;
  if (s.is_array()) {
    for (std::size_t i = 0; i < s.size(); ++i)
      n.generators.push_back(generator_from_json(s[i], dim, where + "[" + std::to_string(i) + "]"));
  } else {
    n.generators.push_back(generator_from_json(s, dim, where));
  }
  return n;
}

Constraint constraint_from_json(const json& c, int dim, const std::string& where) {
  Expr e = parse_expr(need(c, "expr", where), dim, where + ".expr");
  if (e.depends_on_time())
    fail(where + ".expr", "region constraints must not depend on t");
  const json& sgn = need(c, "sign", where);
  std::string s = sgn.is_string() ? sgn.get<std::string>() : "";
  if (s != ">" && s != "<") fail(where + ".sign", "expected \">\" or \"<\"");
  return {std::move(e), s == ">" ? ConstraintSign::Positive : ConstraintSign::Negative};
}

Region region_from_json(const json& r, const DomainBox& box, const std::string& where) {
  const int dim = static_cast<int>(box.dim());
  if (r.contains("cells")) {
    Region reg;
    reg.base = box;
    const json& cells = r["cells"];
    if (!cells.is_array()) fail(where + ".cells", "expected an array of constraint lists");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      Conjunction conj;
      for (std::size_t k = 0; k < cells[i].size(); ++k)
        conj.constraints.push_back(constraint_from_json(
            cells[i][k], dim, where + ".cells[" + std::to_string(i) + "]"));
      reg.cells.push_back(std::move(conj));
    }
    return reg;
  }
  if (r.contains("constraints")) {
    std::vector<Constraint> cons;
    const json& list = r["constraints"];
    for (std::size_t k = 0; k < list.size(); ++k)
      cons.push_back(constraint_from_json(list[k], dim,
                                          where + ".constraints[" + std::to_string(k) + "]"));
    return Region::single(box, std::move(cons));
  }
  return Region::whole(box);
}

std::string mode_kind_name(Mode::Kind k) {
  switch (k) {
    case Mode::Kind::Smooth: return "smooth";
    case Mode::Kind::Sliding: return "sliding";
    case Mode::Kind::Stopped: return "stopped";
  }
  return "?";
}

std::string stop_name(StopReason r) {
  switch (r) {
    case StopReason::ReachedHorizon: return "horizon";
    case StopReason::DomainExit: return "domain-exit";
    case StopReason::Ambiguous: return "ambiguous";
  }
  return "?";
}

StopReason stop_from_name(const std::string& s) {
  if (s == "horizon") return StopReason::ReachedHorizon;
  if (s == "domain-exit") return StopReason::DomainExit;
  if (s == "ambiguous") return StopReason::Ambiguous;
  throw ValidationError("unknown stop reason '" + s + "'");
}

std::string decision_name(TrajectoryEvent::Decision d) {
  switch (d) {
    case TrajectoryEvent::Decision::Crossing: return "crossing";
    case TrajectoryEvent::Decision::SlidingEntry: return "sliding-entry";
    case TrajectoryEvent::Decision::SlidingExit: return "sliding-exit";
    case TrajectoryEvent::Decision::DomainExit: return "domain-exit";
    case TrajectoryEvent::Decision::AmbiguousStop: return "ambiguous-stop";
  }
  return "?";
}

TrajectoryEvent::Decision decision_from_name(const std::string& s) {
  if (s == "crossing") return TrajectoryEvent::Decision::Crossing;
  if (s == "sliding-entry") return TrajectoryEvent::Decision::SlidingEntry;
  if (s == "sliding-exit") return TrajectoryEvent::Decision::SlidingExit;
  if (s == "domain-exit") return TrajectoryEvent::Decision::DomainExit;
  if (s == "ambiguous-stop") return TrajectoryEvent::Decision::AmbiguousStop;
  throw ValidationError("unknown event decision '" + s + "'");
}

}  // namespace

// ---------------------------------------------------------------------------
// Loading

ProblemFile ProblemFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open problem file: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(path, e.what());
  }
  return parse(doc);
}

ProblemFile ProblemFile::parse(const json& doc) {
  ProblemFile pf;
  const json& dims = need(doc, "dims", "problem");
  const int m = static_cast<int>(need_number(dims, "m", "dims"));
  const int n = static_cast<int>(need_number(dims, "n", "dims"));
  if (m < 1) fail("dims.m", "state dimension must be >= 1");
  if (n < 1) fail("dims.n", "codomain dimension must be >= 1");

  const json& dom = need(doc, "domain", "problem");
  Vec lo = need_vector(dom, "lower", static_cast<std::size_t>(m), "domain");
  Vec hi = need_vector(dom, "upper", static_cast<std::size_t>(m), "domain");
  try {
    pf.map.domain = DomainBox(std::move(lo), std::move(hi));
  } catch (const ValidationError& e) {
    fail("domain", e.what());
  }
  pf.map.codomain_dim = n;

  if (doc.contains("switches")) {
    const json& sw = doc["switches"];
    if (!sw.is_array()) fail("switches", "expected an array");
    for (std::size_t i = 0; i < sw.size(); ++i) {
      const std::string where = "switches[" + std::to_string(i) + "]";
      if (sw[i].is_string())
        pf.map.switches.push_back(parse_expr(sw[i], m, where));
      else
        pf.map.switches.push_back(parse_expr(need(sw[i], "expr", where), m, where + ".expr"));
    }
  }

  const json& branches = need(doc, "branches", "problem");
  if (!branches.is_object() || branches.empty())
    fail("branches", "expected a nonempty object keyed by sign labels");
  for (auto it = branches.begin(); it != branches.end(); ++it) {
    const std::string where = "branches['" + it.key() + "']";
    CellId cell;
    try {
      cell = CellId::from_label(it.key() == "()" ? "" : it.key());
    } catch (const ValidationError& e) {
      fail(where, e.what());
    }
    if (cell.signs.size() != pf.map.switches.size())
      fail(where, "label length must equal the number of switches");
    if (!it->is_array() || it->size() != static_cast<std::size_t>(n))
      fail(where, "expected an array of " + std::to_string(n) + " expressions");
    std::vector<Expr> exprs;
    for (std::size_t k = 0; k < it->size(); ++k)
      exprs.push_back(parse_expr((*it)[k], m, where + "[" + std::to_string(k) + "]"));
    pf.map.branches[cell] = std::move(exprs);
  }

  if (doc.contains("overrides")) {
    const json& ov = doc["overrides"];
    if (!ov.is_array()) fail("overrides", "expected an array");
    for (std::size_t i = 0; i < ov.size(); ++i) {
      const std::string where = "overrides[" + std::to_string(i) + "]";
      NullSet set = nullset_from_json(need(ov[i], "set", where), m, where + ".set");
      Vec value = need_vector(ov[i], "value", static_cast<std::size_t>(n), where);
      pf.map.overrides.push_back({std::move(set), std::move(value)});
    }
  }

  pf.map.surface_tol = opt_number(doc, "surface_tol", 1e-9);
  pf.hull_tol = opt_number(doc, "hull_tol", 1e-6);

  pf.measure.base = pf.map.domain;
  if (doc.contains("measure")) {
    const json& ms = doc["measure"];
    if (ms.contains("density"))
      pf.measure.density = parse_expr(ms["density"], m, "measure.density");
  }

  if (doc.contains("ideal")) {
    const json& ideal = doc["ideal"];
    std::string kind = need(ideal, "kind", "ideal").get<std::string>();
    if (kind == "lebesgue") {
      pf.ideal = NegligibilityIdeal::lebesgue();
    } else if (kind == "generated") {
      std::vector<NullSet::Generator> gens;
      const json& list = need(ideal, "generators", "ideal");
      for (std::size_t i = 0; i < list.size(); ++i)
        gens.push_back(
            generator_from_json(list[i], m, "ideal.generators[" + std::to_string(i) + "]"));
      pf.ideal = NegligibilityIdeal::generated(std::move(gens));
    } else {
      fail("ideal.kind", "expected 'lebesgue' or 'generated'");
    }
  }

  if (doc.contains("seed")) pf.seed = doc["seed"].get<std::uint64_t>();

  if (doc.contains("ivp")) {
    const json& ivp = doc["ivp"];
    IVProblem p;
    if (m != n) fail("ivp", "an IVP requires dims.m == dims.n");
    p.rhs = pf.map;
    p.x0 = need_vector(ivp, "x0", static_cast<std::size_t>(m), "ivp");
    p.horizon = need_number(ivp, "horizon", "ivp");
    p.rtol = opt_number(ivp, "rtol", 1e-8);
    p.atol = opt_number(ivp, "atol", 1e-10);
    p.event_tol = opt_number(ivp, "event_tol", 1e-10);
    if (ivp.contains("bound")) p.magnitude_bound = ivp["bound"].get<double>();
    pf.ivp = std::move(p);
  }

  if (doc.contains("queries")) {
    const json& qs = doc["queries"];
    if (!qs.is_array()) fail("queries", "expected an array");
    for (std::size_t i = 0; i < qs.size(); ++i) {
      const std::string where = "queries[" + std::to_string(i) + "]";
      const json& q = qs[i];
      QuerySpec spec;
      spec.name = need(q, "name", where).get<std::string>();
      std::string kind = need(q, "kind", where).get<std::string>();
      if (kind == "ess-range") {
        spec.kind = QuerySpec::Kind::EssRange;
        if (q.contains("region"))
          spec.region = region_from_json(q["region"], pf.map.domain, where + ".region");
        spec.resolution = opt_number(q, "resolution", 1e-3);
        if (!(spec.resolution > 0.0)) fail(where + ".resolution", "must be positive");
      } else if (kind == "filippov-set") {
        spec.kind = QuerySpec::Kind::FilippovSet;
        spec.t = opt_number(q, "t", 0.0);
        spec.x = need_vector(q, "x", static_cast<std::size_t>(m), where);
        spec.generic = q.value("generic", false);
      } else if (kind == "solve") {
        spec.kind = QuerySpec::Kind::Solve;
        if (!pf.ivp) fail(where, "solve query requires an ivp block");
      } else if (kind == "verify") {
        spec.kind = QuerySpec::Kind::Verify;
        spec.samples = static_cast<int>(opt_number(q, "samples", 500));
        spec.tolerance = opt_number(q, "tolerance", 1e-6);
      } else {
        fail(where + ".kind", "expected ess-range | filippov-set | solve | verify");
      }
      for (const QuerySpec& other : pf.queries)
        if (other.name == spec.name) fail(where + ".name", "duplicate query name");
      pf.queries.push_back(std::move(spec));
    }
  }

  // Whole-problem validation; either everything loads or nothing does.
  try {
    pf.map.validate(pf.seed);
    pf.measure.validate(pf.seed);
    for (const auto& [set, value] : pf.map.overrides)
      for (const auto& gen : set.generators)
        if (gen.kind == NullSet::Generator::Kind::Surface)
          validate_regular_surface(gen.surface, pf.map.domain, pf.seed);
    for (const auto& gen : pf.ideal.generators)
      if (gen.kind == NullSet::Generator::Kind::Surface)
        validate_regular_surface(gen.surface, pf.map.domain, pf.seed);
    if (pf.ivp) pf.ivp->validate(pf.seed);
  } catch (const ValidationError& e) {
    fail("problem", e.what());
  }

  pf.canonical = doc;
  pf.config_hash = fnv1a_hex(doc.dump());
  return pf;
}

const QuerySpec* ProblemFile::find_query(const std::string& name) const {
  for (const QuerySpec& q : queries)
    if (q.name == name) return &q;
  return nullptr;
}

EssConfig ProblemFile::ess_config() const {
  EssConfig cfg;
  cfg.ideal = ideal;
  cfg.measure = measure;
  cfg.seed = seed;
  return cfg;
}

FilippovMap ProblemFile::filippov_map() const {
  FilippovMap F = FilippovMap::standard(map);
  F.ideal = ideal;
  F.measure = measure;
  F.seed = seed;
  F.hull_tol = hull_tol;
  return F;
}

// ---------------------------------------------------------------------------
// Serialization

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json RunReport::to_json() const {
  json j;
  j["command"] = command;
  j["config_hash"] = config_hash;
  j["results"] = results;
  j["warnings"] = warnings;
  j["wall_time_ms"] = wall_time_ms;
  return j;
}

namespace {

json mode_to_json(const Mode& m) {
  json j;
  j["kind"] = mode_kind_name(m.kind);
  switch (m.kind) {
    case Mode::Kind::Smooth: j["cell"] = m.cell.label(); break;
    case Mode::Kind::Sliding: {
      j["surfaces"] = m.active_surfaces;
      json cells = json::array();
      for (const CellId& c : m.sliding_cells) cells.push_back(c.label());
      j["cells"] = cells;
      j["weights"] = m.weights;
      break;
    }
    case Mode::Kind::Stopped: j["reason"] = stop_name(m.reason); break;
  }
  return j;
}

Mode mode_from_json(const json& j) {
  Mode m;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "smooth") {
    m.kind = Mode::Kind::Smooth;
    m.cell = CellId::from_label(j.at("cell").get<std::string>());
  } else if (kind == "sliding") {
    m.kind = Mode::Kind::Sliding;
    m.active_surfaces = j.at("surfaces").get<std::vector<int>>();
    for (const auto& c : j.at("cells"))
      m.sliding_cells.push_back(CellId::from_label(c.get<std::string>()));
    m.weights = j.at("weights").get<std::vector<double>>();
  } else if (kind == "stopped") {
    m.kind = Mode::Kind::Stopped;
    m.reason = stop_from_name(j.at("reason").get<std::string>());
  } else {
    throw ValidationError("unknown mode kind '" + kind + "'");
  }
  return m;
}

}  // namespace

json trajectory_to_json(const Trajectory& tr) {
  json j;
  j["format"] = "trajectory";
  j["interpolation"] = "cubic-hermite";
  j["event_tol"] = tr.event_tol;
  j["stop"] = stop_name(tr.stop);
  json nodes = json::array();
  for (const TrajectoryNode& n : tr.nodes) {
    json jn;
    jn["t"] = n.t;
    jn["x"] = n.x;
    jn["din"] = n.deriv_in;
    jn["dout"] = n.deriv_out;
    jn["mode"] = mode_to_json(n.mode);
    nodes.push_back(std::move(jn));
  }
  j["nodes"] = std::move(nodes);
  json events = json::array();
  for (const TrajectoryEvent& e : tr.events) {
    json je;
    je["t"] = e.t;
    je["surfaces"] = e.surfaces;
    je["decision"] = decision_name(e.decision);
    je["tangency"] = e.tangency;
    events.push_back(std::move(je));
  }
  j["events"] = std::move(events);
  return j;
}

Trajectory trajectory_from_json(const json& j) {
  if (j.value("format", "") != "trajectory")
    throw ValidationError("not a trajectory document (missing format tag)");
  Trajectory tr;
  tr.event_tol = j.at("event_tol").get<double>();
  tr.stop = stop_from_name(j.at("stop").get<std::string>());
  for (const auto& jn : j.at("nodes")) {
    TrajectoryNode n;
    n.t = jn.at("t").get<double>();
    n.x = jn.at("x").get<Vec>();
    n.deriv_in = jn.at("din").get<Vec>();
    n.deriv_out = jn.at("dout").get<Vec>();
    n.mode = mode_from_json(jn.at("mode"));
    tr.nodes.push_back(std::move(n));
  }
  for (const auto& je : j.at("events")) {
    TrajectoryEvent e;
    e.t = je.at("t").get<double>();
    e.surfaces = je.at("surfaces").get<std::vector<int>>();
    e.decision = decision_from_name(je.at("decision").get<std::string>());
    e.tangency = je.value("tangency", false);
    tr.events.push_back(std::move(e));
  }
  return tr;
}

std::string trajectory_to_table(const Trajectory& tr) {
  std::ostringstream out;
  out << "t";
  if (!tr.nodes.empty())
    for (std::size_t i = 0; i < tr.nodes.front().x.size(); ++i) out << "\tx" << (i + 1);
  out << "\tmode\n";
  char buf[32];
  for (const TrajectoryNode& n : tr.nodes) {
    std::snprintf(buf, sizeof(buf), "%.17g", n.t);
    out << buf;
    for (double v : n.x) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << '\t' << buf;
    }
    out << '\t' << n.mode.label() << '\n';
  }
  return out.str();
}

json hull_to_json(const ConvexApprox& hull) {
  json j;
  j["dim"] = hull.dim;
  if (hull.rep == ConvexApprox::Rep::Vertices) {
    j["rep"] = "vertices";
    json verts = json::array();
    for (const Vec& v : hull.vertices) verts.push_back(v);
    j["vertices"] = std::move(verts);
  } else {
    j["rep"] = "support";
    json dirs = json::array();
    for (const Vec& d : hull.directions) dirs.push_back(d);
    j["directions"] = std::move(dirs);
    j["values"] = hull.support_values;
  }
  j["diameter"] = hull.diameter();
  return j;
}

json null_set_to_json(const NullSet& n) {
  json out = json::array();
  for (const auto& g : n.generators) {
    json jg;
    switch (g.kind) {
      case NullSet::Generator::Kind::Surface: jg["surface"] = g.surface.to_string(); break;
      case NullSet::Generator::Kind::Points: jg["points"] = g.points; break;
      case NullSet::Generator::Kind::DegenerateBox:
        jg["box"] = {{"lower", g.box_lower}, {"upper", g.box_upper}};
        break;
    }
    out.push_back(std::move(jg));
  }
  return out;
}

json ess_range_to_json(const EssentialRange& er) {
  json j;
  j["dim"] = er.dim;
  j["exact"] = er.exact;
  if (er.exact) {
    json vals = json::array();
    for (const Vec& v : er.values) vals.push_back(v);
    j["values"] = std::move(vals);
    json cls = json::array();
    for (const PointClass& pc : er.classifications) {
      json jc;
      jc["value"] = pc.value;
      jc["verdict"] = pc.good() ? "good" : "bad";
      if (pc.good()) {
        jc["measure_lcb"] = pc.good_measure_lcb;
        jc["low_confidence"] = pc.low_confidence;
      } else {
        jc["witness_radius"] = pc.bad_witness_radius;
      }
      cls.push_back(std::move(jc));
    }
    j["classifications"] = std::move(cls);
  } else {
    json boxes = json::array();
    for (const ValueBox& b : er.cover.boxes)
      boxes.push_back({{"lo", b.lo}, {"hi", b.hi}});
    j["boxes"] = std::move(boxes);
    j["resolution"] = er.resolution;
    j["resolution_reached"] = er.resolution_reached();
  }
  return j;
}

json residual_report_to_json(const ResidualReport& rep) {
  json j;
  j["samples"] = rep.sample_times.size();
  j["tolerance"] = rep.tolerance;
  j["max_violation"] = rep.max_violation;
  j["pass"] = rep.pass;
  j["times"] = rep.sample_times;
  j["violations"] = rep.violations;
  return j;
}

}  // namespace filippov
