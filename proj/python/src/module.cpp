#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "dynbc/convergence.hpp"
#include "dynbc/error.hpp"
#include "dynbc/mesh.hpp"
#include "dynbc/problems.hpp"
#include "dynbc/schemes.hpp"

namespace py = pybind11;
using namespace dynbc;

namespace {

Eigen::MatrixXd node_array(const Mesh& m) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(m.nodes.size()), 2);
  for (std::size_t i = 0; i < m.nodes.size(); ++i) {
    out(static_cast<Eigen::Index>(i), 0) = m.nodes[i].x;
    out(static_cast<Eigen::Index>(i), 1) = m.nodes[i].y;
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_dynbc, mod) {
  mod.doc() = "Bulk-surface finite elements with dynamic boundary conditions";

  auto base = py::register_exception<Error>(mod, "DynbcError", PyExc_RuntimeError);
  py::register_exception<ArgumentError>(mod, "ArgumentError", base.ptr());
  py::register_exception<ParseError>(mod, "ParseError", base.ptr());
  py::register_exception<UnsupportedError>(mod, "UnsupportedError", base.ptr());
  py::register_exception<NonConvergenceError>(mod, "NonConvergenceError", base.ptr());

  py::class_<MeshMetrics>(mod, "MeshMetrics")
      .def_readonly("h", &MeshMetrics::h)
      .def_readonly("h_gamma", &MeshMetrics::h_gamma)
      .def_readonly("theta", &MeshMetrics::theta);

  py::class_<Mesh>(mod, "Mesh")
      .def_readonly("n_omega", &Mesh::n_omega)
      .def_readonly("n_gamma", &Mesh::n_gamma)
      .def_readonly("metrics", &Mesh::metrics)
      .def_readonly("triangles", &Mesh::triangles)
      .def_readonly("boundary_edges", &Mesh::boundary_edges)
      .def_property_readonly("nodes", &node_array)
      .def_property_readonly("n_interior", &Mesh::n_interior)
      .def("save", [](const Mesh& m, const std::filesystem::path& p) { save_mesh(p, m); });

  mod.def("disk_mesh", &generate_disk_mesh, py::arg("target_h"));
  mod.def("crisscross_square", &generate_crisscross_square, py::arg("n"));
  mod.def("load_mesh", &load_mesh, py::arg("path"));
  mod.def("total_area", &total_area);
  mod.def("boundary_length", &boundary_length);

  py::class_<Coefficients>(mod, "Coefficients")
      .def(py::init([](double kappa, double alpha_omega, double alpha_gamma, double beta) {
             return Coefficients{kappa, alpha_omega, alpha_gamma, beta};
           }),
           py::arg("kappa") = 1.0, py::arg("alpha_omega") = 0.0, py::arg("alpha_gamma") = 0.0,
           py::arg("beta") = 1.0)
      .def_readwrite("kappa", &Coefficients::kappa)
      .def_readwrite("alpha_omega", &Coefficients::alpha_omega)
      .def_readwrite("alpha_gamma", &Coefficients::alpha_gamma)
      .def_readwrite("beta", &Coefficients::beta);

  py::class_<ProblemSpec>(mod, "Problem")
      .def_readonly("name", &ProblemSpec::name)
      .def_readwrite("T", &ProblemSpec::T)
      .def_readonly("alpha_omega", &ProblemSpec::alpha_omega)
      .def_readonly("alpha_gamma", &ProblemSpec::alpha_gamma)
      .def_readonly("beta", &ProblemSpec::beta)
      .def_property_readonly("has_exact", &ProblemSpec::has_exact)
      .def("exact", [](const ProblemSpec& s, double t, double x, double y) {
        if (!s.has_exact()) throw UnsupportedError("problem has no exact solution");
        return s.exact(t, {x, y});
      });

  mod.def("builtin_problem", &builtin_problem, py::arg("name"), py::arg("coefficients") = Coefficients{});
  mod.def("builtin_problem_names", &builtin_problem_names);
  mod.def("load_problem", &load_problem_config, py::arg("path"));
  mod.def("interpolate_exact", &interpolate_exact, py::arg("problem"), py::arg("mesh"), py::arg("t"));

  py::class_<StepState>(mod, "StepState")
      .def_readonly("u1", &StepState::u1)
      .def_readonly("p", &StepState::p)
      .def_readonly("dp", &StepState::dp)
      .def_readonly("t", &StepState::t)
      .def_property_readonly("full", &StepState::full);

  py::class_<TrajectorySummary>(mod, "TrajectorySummary")
      .def_readonly("steps", &TrajectorySummary::steps)
      .def_readonly("final_state", &TrajectorySummary::final_state)
      .def_readonly("blow_up", &TrajectorySummary::blow_up)
      .def_readonly("blow_up_time", &TrajectorySummary::blow_up_time)
      .def_readonly("max_norm_u", &TrajectorySummary::max_norm_u)
      .def_readonly("newton_max_iterations", &TrajectorySummary::newton_max_iterations);

  mod.def("scheme_names", [] {
    std::vector<std::string> out;
    for (auto k : {SchemeKind::Euler, SchemeKind::Lie, SchemeKind::Naive, SchemeKind::Strang})
      out.push_back(scheme_name(k));
    return out;
  });
  mod.def(
      "integrate",
      [](const ProblemSpec& spec, const Mesh& mesh, const std::string& scheme, double tau) {
        py::gil_scoped_release release;
        return integrate(spec, mesh, parse_scheme(scheme), tau);
      },
      py::arg("problem"), py::arg("mesh"), py::arg("scheme"), py::arg("tau"));

  py::class_<CflReport>(mod, "CflReport")
      .def_readonly("h", &CflReport::h)
      .def_readonly("c_M", &CflReport::c_M)
      .def_readonly("c_inv", &CflReport::c_inv)
      .def_readonly("tau", &CflReport::tau)
      .def_readonly("tau_max", &CflReport::tau_max)
      .def_readonly("satisfied", &CflReport::satisfied);
  mod.def("cfl", [](const ProblemSpec& s, const Mesh& m, double tau) { return cfl_for(s, m, tau); },
          py::arg("problem"), py::arg("mesh"), py::arg("tau"));

  py::class_<ErrorRecord>(mod, "ErrorRecord")
      .def_readonly("problem", &ErrorRecord::problem)
      .def_readonly("scheme", &ErrorRecord::scheme)
      .def_readonly("h", &ErrorRecord::h)
      .def_readonly("tau", &ErrorRecord::tau)
      .def_readonly("err_u_L2", &ErrorRecord::err_u_L2)
      .def_readonly("err_p_L2", &ErrorRecord::err_p_L2)
      .def_readonly("err_u_H1", &ErrorRecord::err_u_H1)
      .def_readonly("err_p_H1", &ErrorRecord::err_p_H1)
      .def_readonly("blow_up", &ErrorRecord::blow_up)
      .def_readonly("failure", &ErrorRecord::failure)
      .def_readonly("newton_max_iterations", &ErrorRecord::newton_max_iterations);

  py::class_<ConvergenceResult>(mod, "ConvergenceResult")
      .def_readonly("records", &ConvergenceResult::records)
      .def_readonly("paths", &ConvergenceResult::paths)
      .def("any_failure", &ConvergenceResult::any_failure)
      .def("median_eocs",
           [](const ConvergenceResult& r, const std::string& norm) {
             std::vector<std::optional<double>> out;
             for (auto n : {ErrorNorm::UL2, ErrorNorm::PL2, ErrorNorm::UH1, ErrorNorm::PH1}) {
               if (norm_name(n) != norm) continue;
               for (const auto& t : r.tables(n)) out.push_back(t.median_eoc());
               return out;
             }
             throw ArgumentError("unknown norm: " + norm);
           })
      .def("csv", [](const ConvergenceResult& r) {
        std::ostringstream os;
        write_csv(os, r.records);
        return os.str();
      });

  mod.def(
      "run_convergence",
      [](const ProblemSpec& spec, const std::string& scheme, const std::vector<double>& h_targets,
         const std::string& tau) {
        const TauRule rule = TauRule::parse(tau);
        py::gil_scoped_release release;
        return run_convergence(spec, parse_scheme(scheme), h_targets, rule);
      },
      py::arg("problem"), py::arg("scheme"), py::arg("h_targets"), py::arg("tau") = "coupled");
}
