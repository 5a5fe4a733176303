#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "filippov/problem.hpp"

namespace py = pybind11;
using namespace filippov;

namespace {

ProblemFile problem_from_json_text(const std::string& text) {
  return ProblemFile::parse(nlohmann::json::parse(text));
}

std::string run_ess_range(const ProblemFile& pf, const std::string& query_name) {
  const QuerySpec* q = pf.find_query(query_name);
  if (!q || q->kind != QuerySpec::Kind::EssRange)
    throw ValidationError("no ess-range query named '" + query_name + "'");
  Region region = q->region ? *q->region : Region::whole(pf.map.domain);
  EssentialRange er = essential_range(pf.map, region, pf.ess_config(), q->resolution);
  return ess_range_to_json(er).dump();
}

}  // namespace

PYBIND11_MODULE(_filippov, m) {
  m.doc() = "piecewise maps, essential ranges, and Filippov differential inclusions";

  py::register_exception<ParseError>(m, "ExprParseError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ArithmeticError);
  py::register_exception<NondifferentiableError>(m, "NondifferentiableError",
                                                 PyExc_ArithmeticError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);

  py::class_<Expr>(m, "Expr")
      .def_static("parse", &Expr::parse, py::arg("text"), py::arg("dim"))
      .def("evaluate",
           [](const Expr& e, const Vec& x, double t) { return e.evaluate({x, t}); },
           py::arg("x"), py::arg("t") = 0.0)
      .def("gradient",
           [](const Expr& e, const Vec& x, double t) { return e.gradient({x, t}); },
           py::arg("x"), py::arg("t") = 0.0)
      .def("__str__", &Expr::to_string)
      .def_property_readonly("dim", &Expr::dim);

  py::class_<ConvexApprox>(m, "ConvexApprox")
      .def_property_readonly("dim", [](const ConvexApprox& c) { return c.dim; })
      .def_property_readonly("vertices", [](const ConvexApprox& c) { return c.vertices; })
      .def("support", &support)
      .def("membership", &membership, py::arg("v"), py::arg("tol") = 1e-9)
      .def("diameter", &ConvexApprox::diameter)
      .def("__repr__", [](const ConvexApprox& c) { return hull_to_json(c).dump(); });

  m.def("convex_hull", &convex_hull, py::arg("points"), py::arg("dim"));
  m.def("distance_to_hull", &distance_to_hull, py::arg("point"), py::arg("vertices"));

  m.def(
      "classify_value_sampled",
      [](const std::function<Vec(const Vec&, double)>& f, const ProblemFile& pf, const Vec& y) {
        PointClass pc =
            classify_value_sampled(f, Region::whole(pf.map.domain), y, pf.ess_config());
        py::dict out;
        out["verdict"] = pc.good() ? "good" : "bad";
        out["measure_lcb"] = pc.good_measure_lcb;
        out["low_confidence"] = pc.low_confidence;
        return out;
      },
      py::arg("f"), py::arg("problem"), py::arg("y"),
      "Monte Carlo classification of a black-box callable f(x, t) over the "
      "problem's domain; reports confidence, never a certified bad verdict");

  py::class_<Trajectory>(m, "Trajectory")
      .def("state_at", &Trajectory::state_at)
      .def("end_time", &Trajectory::end_time)
      .def_property_readonly("num_nodes", [](const Trajectory& t) { return t.nodes.size(); })
      .def_property_readonly("num_events", [](const Trajectory& t) { return t.events.size(); })
      .def("to_json", [](const Trajectory& t) { return trajectory_to_json(t).dump(); })
      .def_static("from_json", [](const std::string& text) {
        return trajectory_from_json(nlohmann::json::parse(text));
      });

  py::class_<ResidualReport>(m, "ResidualReport")
      .def_property_readonly("max_violation",
                             [](const ResidualReport& r) { return r.max_violation; })
      .def_property_readonly("passed", [](const ResidualReport& r) { return r.pass; })
      .def("to_json", [](const ResidualReport& r) { return residual_report_to_json(r).dump(); });

  py::class_<ProblemFile>(m, "Problem")
      .def_static("load", &ProblemFile::load, py::arg("path"))
      .def_static("from_json", &problem_from_json_text, py::arg("text"))
      .def_property_readonly("config_hash", [](const ProblemFile& p) { return p.config_hash; })
      .def_property_readonly("seed", [](const ProblemFile& p) { return p.seed; })
      .def("ess_range", &run_ess_range, py::arg("query"),
           "run an ess-range query block, returns a JSON report string")
      .def("filippov_set",
           [](const ProblemFile& pf, double t, const Vec& x, bool generic) {
             return filippov_set(pf.filippov_map(), t, x,
                                 generic ? FilippovPath::Generic : FilippovPath::Fast);
           },
           py::arg("t"), py::arg("x"), py::arg("generic") = false)
      .def("singleton_check",
           [](const ProblemFile& pf, double t, const Vec& x, double tol) {
             auto sc = singleton_check(pf.filippov_map(), t, x, tol);
             return py::make_tuple(sc.is_singleton,
                                   sc.is_singleton ? py::cast(sc.value) : py::none());
           },
           py::arg("t"), py::arg("x"), py::arg("tol") = 1e-9)
      .def("solve",
           [](const ProblemFile& pf) {
             if (!pf.ivp) throw ValidationError("problem has no ivp block");
             return integrate(*pf.ivp);
           })
      .def("verify",
           [](const ProblemFile& pf, const Trajectory& tr, int samples, double tol) {
             return verify_inclusion(tr, pf.filippov_map(), samples, tol, pf.seed);
           },
           py::arg("trajectory"), py::arg("samples") = 500, py::arg("tolerance") = 1e-6);

  m.attr("__version__") = "0.1.0";
}
