#include "genewton/disturbance.hpp"
#include "genewton/experiment.hpp"
#include "genewton/geneq.hpp"
#include "genewton/geometry.hpp"
#include "genewton/isslab.hpp"
#include "genewton/nlp.hpp"
#include "genewton/problems.hpp"
#include "genewton/subproblem.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace genewton;

namespace {

// Trace as plain python data; keeps the binding surface small.
py::dict trace_to_dict(const Trace& t) {
  py::dict d;
  py::list iterates, disturbances, statuses;
  for (const auto& z : t.iterates) iterates.append(z);
  for (const auto& v : t.disturbances) disturbances.append(v);
  for (const auto s : t.step_status) statuses.append(std::string(to_string(s)));
  d["iterates"] = iterates;
  d["disturbances"] = disturbances;
  d["residuals"] = t.residuals;
  d["step_status"] = statuses;
  d["errors_to_zbar"] = t.errors_to_zbar;
  py::dict extras;
  for (const auto& [k, v] : t.extras) extras[py::str(k)] = v;
  d["extras"] = extras;
  return d;
}

ExperimentConfig config_from_kwargs(const std::string& problem,
                                    const std::string& algorithm,
                                    const std::string& disturbance,
                                    const std::string& channel, double tol,
                                    int max_iter, double rho, double alpha) {
  ExperimentConfig cfg;
  apply_config_line(cfg, "problem", problem);
  apply_config_line(cfg, "algorithm", algorithm);
  apply_config_line(cfg, "disturbance", disturbance);
  apply_config_line(cfg, "channel", channel);
  cfg.tol = tol;
  cfg.max_iter = max_iter;
  cfg.rho = rho;
  cfg.pgd_alpha = alpha;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Newton-type methods for generalized equations with empirical "
            "input-to-state-stability estimation";

  py::register_exception<SolverError>(m, "SolverError");
  py::register_exception<ConfigError>(m, "ConfigurationError");

  py::class_<Box>(m, "Box")
      .def(py::init<Vector, Vector>(), py::arg("lower"), py::arg("upper"))
      .def_static("free", &Box::free, py::arg("dim"))
      .def_static("nonnegative", &Box::nonnegative, py::arg("dim"))
      .def_static("bounds", &Box::bounds, py::arg("lower"), py::arg("upper"),
                  py::arg("dim"))
      .def_property_readonly("dim", &Box::dim)
      .def_property_readonly("lower", &Box::lower)
      .def_property_readonly("upper", &Box::upper)
      .def("contains", &Box::contains, py::arg("x"),
           py::arg("tol") = kMembershipTol);

  py::class_<NormalConeCertificate>(m, "NormalConeCertificate")
      .def_readonly("margin", &NormalConeCertificate::margin)
      .def_readonly("feasible", &NormalConeCertificate::feasible)
      .def_readonly("member", &NormalConeCertificate::member);

  m.def("project_box", &project_box, py::arg("x"), py::arg("box"));
  m.def("normal_cone_contains", &normal_cone_contains, py::arg("box"),
        py::arg("x"), py::arg("w"), py::arg("tol") = kMembershipTol);
  m.def("natural_residual", &natural_residual, py::arg("z"), py::arg("fz"),
        py::arg("box"));

  py::class_<MixedAvi>(m, "MixedAvi")
      .def(py::init<Vector, Matrix, Box>(), py::arg("a"), py::arg("m"),
           py::arg("cone"))
      .def_readonly("a", &MixedAvi::a)
      .def_readonly("m", &MixedAvi::m)
      .def("residual", &MixedAvi::residual, py::arg("z"));

  m.def("solve_avi_semismooth", &solve_avi_semismooth, py::arg("problem"),
        py::arg("z0"), py::arg("tol") = 1e-12, py::arg("max_iter") = 100);
  m.def(
      "solve_avi_enumerate",
      [](const MixedAvi& p, double tol) {
        const EnumerationResult r = solve_avi_enumerate(p, tol);
        return py::make_tuple(r.solutions, r.singular_patterns);
      },
      py::arg("problem"), py::arg("tol") = 1e-9,
      "Returns (solutions, singular_pattern_count)");

  py::class_<RegularityEstimate>(m, "RegularityEstimate")
      .def_readonly("kappa", &RegularityEstimate::kappa)
      .def_readonly("sampled_radii", &RegularityEstimate::sampled_radii)
      .def_property_readonly("pattern_inverse_max",
                             &RegularityEstimate::pattern_inverse_max);

  m.def("estimate_kappa", &estimate_kappa, py::arg("problem"), py::arg("zbar"),
        py::arg("radius"), py::arg("samples"), py::arg("seed") = 0);

  py::class_<IssEstimate>(m, "IssEstimate")
      .def_readonly("alpha", &IssEstimate::alpha)
      .def_readonly("gamma", &IssEstimate::gamma)
      .def_readonly("feasible", &IssEstimate::feasible)
      .def_property_readonly("asymptotic_gain", &IssEstimate::asymptotic_gain);

  m.def(
      "estimate_iss_gains",
      [](const std::vector<double>& errors, const std::vector<double>& vnorms) {
        return estimate_iss_gains(errors, vnorms);
      },
      py::arg("errors"), py::arg("vnorms"),
      "Fit e_{k+1} <= alpha e_k + gamma |v_k| from an error sequence");

  m.def("list_problems", [] {
    std::vector<std::string> names;
    for (const auto& p : problem_registry()) names.push_back(p.name);
    return names;
  });

  m.def(
      "solve",
      [](const std::string& problem, const std::string& algorithm,
         const std::string& disturbance, const std::string& channel,
         double tol, int max_iter, double rho, double alpha) {
        const ExperimentConfig cfg = config_from_kwargs(
            problem, algorithm, disturbance, channel, tol, max_iter, rho,
            alpha);
        const RunResult res = run_experiment(cfg);
        py::dict d;
        d["trace"] = trace_to_dict(res.trace);
        d["converged"] = res.converged;
        d["iterations"] = res.iterations;
        d["final_residual"] = res.final_residual;
        d["status"] = res.status;
        d["summary_json"] = res.summary_json;
        if (res.iss) d["iss"] = *res.iss;
        if (res.rate_fit) d["rate_fit"] = *res.rate_fit;
        if (res.quadratic) d["quadratic_c"] = res.quadratic->c;
        return d;
      },
      py::arg("problem"), py::arg("algorithm") = "newton",
      py::arg("disturbance") = "zero", py::arg("channel") = "f",
      py::arg("tol") = 1e-12, py::arg("max_iter") = 50, py::arg("rho") = 10.0,
      py::arg("alpha") = 0.1,
      "Run one experiment on a registry problem and return the trace and "
      "fitted metrics");
}
