#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "filippov/problem.hpp"

namespace {

using namespace filippov;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitPropertyFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

struct GlobalOpts {
  std::optional<std::uint64_t> seed;
  std::string format = "structured";
  bool quiet = false;
  std::optional<double> rtol, atol, event_tol, hull_tol, resolution, tolerance;
  std::optional<int> samples;
};

double now_ms() {
  using namespace std::chrono;
  return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
}

ProblemFile load_with_overrides(const std::string& path, const GlobalOpts& g) {
  ProblemFile pf = ProblemFile::load(path);
  if (g.seed) pf.seed = *g.seed;
  if (g.hull_tol) pf.hull_tol = *g.hull_tol;
  if (pf.ivp) {
    if (g.rtol) pf.ivp->rtol = *g.rtol;
    if (g.atol) pf.ivp->atol = *g.atol;
    if (g.event_tol) pf.ivp->event_tol = *g.event_tol;
  }
  return pf;
}

void emit(const RunReport& rep, const GlobalOpts& g, const std::string& tabular) {
  if (g.quiet) return;
  if (g.format == "tabular")
    std::cout << tabular;
  else
    std::cout << rep.to_json().dump(2) << "\n";
}

int cmd_check(const std::string& path, const GlobalOpts& g) {
  ProblemFile pf = load_with_overrides(path, g);
  if (!g.quiet)
    std::cout << "ok: " << path << " (config hash " << pf.config_hash << ", "
              << pf.map.branches.size() << " branches, " << pf.map.num_switches()
              << " switches, " << pf.queries.size() << " queries)\n";
  return kExitOk;
}

int cmd_ess_range(const std::string& path, const std::string& query_name, const GlobalOpts& g) {
  ProblemFile pf = load_with_overrides(path, g);
  const QuerySpec* q = pf.find_query(query_name);
  if (!q || q->kind != QuerySpec::Kind::EssRange)
    throw ValidationError("no ess-range query named '" + query_name + "'");

  double t0 = now_ms();
  Region region = q->region ? *q->region : Region::whole(pf.map.domain);
  EssConfig cfg = pf.ess_config();
  double resolution = g.resolution ? *g.resolution : q->resolution;
  EssentialRange er = essential_range(pf.map, region, cfg, resolution);
  CanonicalNullSet canon = canonical_null_set(pf.map, region);

  RunReport rep;
  rep.command = "ess-range " + query_name;
  rep.config_hash = pf.config_hash;
  rep.results["range"] = ess_range_to_json(er);
  rep.results["canonical_null_set"] = null_set_to_json(canon.components);
  for (const PointClass& pc : er.classifications)
    if (pc.good() && pc.low_confidence) {
      std::ostringstream w;
      w << "low-confidence good verdict at value (";
      for (std::size_t i = 0; i < pc.value.size(); ++i) w << (i ? ", " : "") << pc.value[i];
      w << ")";
      rep.warnings.push_back(w.str());
    }
  if (!er.exact && !er.resolution_reached())
    rep.warnings.push_back("box refinement stopped before the requested resolution");
  rep.wall_time_ms = now_ms() - t0;

  std::ostringstream tab;
  if (er.exact) {
    for (const Vec& v : er.values) {
      for (std::size_t i = 0; i < v.size(); ++i) tab << (i ? "\t" : "") << v[i];
      tab << "\n";
    }
  } else {
    for (const ValueBox& b : er.cover.boxes) {
      for (std::size_t i = 0; i < b.lo.size(); ++i)
        tab << (i ? "\t" : "") << b.lo[i] << "\t" << b.hi[i];
      tab << "\n";
    }
  }
  emit(rep, g, tab.str());
  return kExitOk;
}

int cmd_solve(const std::string& path, const std::string& out_path, const GlobalOpts& g) {
  ProblemFile pf = load_with_overrides(path, g);
  if (!pf.ivp) throw ValidationError("problem file has no ivp block");

  double t0 = now_ms();
  Trajectory tr = integrate(*pf.ivp);
  json jtr = trajectory_to_json(tr);

  RunReport rep;
  rep.command = "solve";
  rep.config_hash = pf.config_hash;
  rep.results["trajectory"] = jtr;
  rep.results["nodes"] = tr.nodes.size();
  rep.results["end_time"] = tr.end_time();
  if (tr.stop == StopReason::Ambiguous)
    rep.warnings.push_back("integration stopped at an ambiguous (repulsive) surface");
  if (tr.stop == StopReason::DomainExit)
    rep.warnings.push_back("trajectory left the domain box before the horizon");
  rep.wall_time_ms = now_ms() - t0;

  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw std::ios_base::failure("cannot write trajectory file: " + out_path);
    out << jtr.dump(2) << "\n";
  }
  emit(rep, g, trajectory_to_table(tr));
  return kExitOk;
}

int cmd_filippov(const std::string& path, double t, const std::string& x_text, bool generic,
                 const std::string& query_name, const GlobalOpts& g) {
  ProblemFile pf = load_with_overrides(path, g);
  Vec x;
  if (!query_name.empty()) {
    const QuerySpec* q = pf.find_query(query_name);
    if (!q || q->kind != QuerySpec::Kind::FilippovSet)
      throw ValidationError("no filippov-set query named '" + query_name + "'");
    t = q->t;
    x = q->x;
    generic = generic || q->generic;
  }
  if (!x_text.empty()) {
    x.clear();
    std::stringstream ss(x_text);
    std::string item;
    while (std::getline(ss, item, ',')) x.push_back(std::stod(item));
  }
  if (x.size() != pf.map.dim())
    throw ValidationError("--x must have " + std::to_string(pf.map.dim()) + " components");

  double t0 = now_ms();
  FilippovMap F = pf.filippov_map();
  ConvexApprox fast = filippov_set(F, t, x, FilippovPath::Fast);
  RunReport rep;
  rep.command = "filippov";
  rep.config_hash = pf.config_hash;
  rep.results["fast"] = hull_to_json(fast);
  std::ostringstream tab;
  for (const Vec& v : fast.vertices) {
    for (std::size_t i = 0; i < v.size(); ++i) tab << (i ? "\t" : "") << v[i];
    tab << "\n";
  }
  if (generic) {
    ConvexApprox gen = filippov_set(F, t, x, FilippovPath::Generic);
    rep.results["generic"] = hull_to_json(gen);
    rep.results["paths_agree_within"] = hull_hausdorff(fast, gen);
  }
  rep.wall_time_ms = now_ms() - t0;
  emit(rep, g, tab.str());
  return kExitOk;
}

int cmd_verify(const std::string& path, const std::string& traj_path, const GlobalOpts& g) {
  ProblemFile pf = load_with_overrides(path, g);
  std::ifstream in(traj_path);
  if (!in) throw std::ios_base::failure("cannot open trajectory file: " + traj_path);
  json jtr;
  try {
    jtr = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(traj_path + ": " + e.what());
  }
  Trajectory tr = trajectory_from_json(jtr);

  int samples = g.samples ? *g.samples : 500;
  double tol = g.tolerance ? *g.tolerance : 1e-6;
  for (const QuerySpec& q : pf.queries)
    if (q.kind == QuerySpec::Kind::Verify) {
      if (!g.samples) samples = q.samples;
      if (!g.tolerance) tol = q.tolerance;
      break;
    }

  double t0 = now_ms();
  FilippovMap F = pf.filippov_map();
  ResidualReport res = verify_inclusion(tr, F, samples, tol, pf.seed);

  RunReport rep;
  rep.command = "verify";
  rep.config_hash = pf.config_hash;
  rep.results["report"] = residual_report_to_json(res);
  rep.wall_time_ms = now_ms() - t0;
  std::ostringstream tab;
  tab << (res.pass ? "pass" : "fail") << "\tmax_violation\t" << res.max_violation << "\n";
  emit(rep, g, tab.str());
  return res.pass ? kExitOk : kExitPropertyFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"piecewise maps, essential ranges, and Filippov differential inclusions"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOpts g;
  app.add_option("--seed", g.seed, "override the problem seed")->envname("FILIPPOV_SEED");
  app.add_option("--format", g.format, "structured | tabular")
      ->check(CLI::IsMember({"structured", "tabular"}));
  app.add_flag("--quiet", g.quiet, "suppress report output");
  app.add_option("--rtol", g.rtol, "override relative step tolerance");
  app.add_option("--atol", g.atol, "override absolute step tolerance");
  app.add_option("--event-tol", g.event_tol, "override event localization tolerance");
  app.add_option("--hull-tol", g.hull_tol, "override hull convergence tolerance");
  app.add_option("--resolution", g.resolution, "override ess-range cover resolution");
  app.add_option("--tolerance", g.tolerance, "override verification tolerance");
  app.add_option("--samples", g.samples, "override verification sample count");

  std::string path, query, traj, out_path, x_text;
  double t_query = 0.0;
  bool generic = false;

  CLI::App* check = app.add_subcommand("check", "parse and validate a problem file");
  check->add_option("file", path)->required();

  CLI::App* ess = app.add_subcommand("ess-range", "compute an essential range query");
  ess->add_option("file", path)->required();
  ess->add_option("query", query, "query block name")->required();

  CLI::App* solve = app.add_subcommand("solve", "integrate the problem's IVP");
  solve->add_option("file", path)->required();
  solve->add_option("--out", out_path, "write the trajectory document to a file");

  std::string fil_query;
  CLI::App* fil = app.add_subcommand("filippov", "evaluate the Filippov set at (t, x)");
  fil->add_option("file", path)->required();
  fil->add_option("--t", t_query, "time");
  fil->add_option("--x", x_text, "comma-separated state coordinates");
  fil->add_option("--query", fil_query, "take (t, x) from a filippov-set query block");
  fil->add_flag("--generic", generic, "also run the shrinking-ball path");

  CLI::App* verify = app.add_subcommand("verify", "check a trajectory against the inclusion");
  verify->add_option("file", path)->required();
  verify->add_option("trajectory", traj, "trajectory document from solve --out")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (check->parsed()) return cmd_check(path, g);
    if (ess->parsed()) return cmd_ess_range(path, query, g);
    if (solve->parsed()) return cmd_solve(path, out_path, g);
    if (fil->parsed()) {
      if (x_text.empty() && fil_query.empty())
        throw ValidationError("filippov requires --x or --query");
      return cmd_filippov(path, t_query, x_text, generic, fil_query, g);
    }
    if (verify->parsed()) return cmd_verify(path, traj, g);
  } catch (const std::ios_base::failure& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ConvergenceError& e) {
    std::cerr << "convergence failure: " << e.what() << "\n";
    return kExitPropertyFailure;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitPropertyFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
