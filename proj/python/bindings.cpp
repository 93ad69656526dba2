#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nehari/errors.hpp"
#include "nehari/functional.hpp"
#include "nehari/nehari.hpp"
#include "nehari/run.hpp"
#include "nehari/sweep.hpp"
#include "nehari/testfn.hpp"

namespace py = pybind11;
using namespace nehari;

namespace {

Problem make_problem(const ProblemSpec& spec, int m, double grading) {
    return Problem(spec, build_grid(spec.geom, m, grading));
}

py::dict report_dict(const SolveReport& r) {
    py::dict d;
    d["branch"] = to_string(r.branch);
    d["u"] = r.u;
    d["J_value"] = r.J_value;
    d["phi_residual"] = r.phi_residual;
    d["grad_residual"] = r.grad_residual;
    d["iterations"] = r.iterations;
    d["converged"] = r.converged;
    d["sign_ok"] = r.sign_ok;
    d["status"] = r.status;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Radial Nehari-manifold solver for a fourth-order elliptic problem";

    auto base = py::register_exception<Error>(m, "Error");
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<ConfigurationError>(m, "ConfigurationError", base.ptr());
    py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
    py::register_exception<StencilError>(m, "StencilError", base.ptr());
    py::register_exception<ProjectionError>(m, "ProjectionError", base.ptr());
    py::register_exception<ResolutionError>(m, "ResolutionError", base.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
    py::register_exception<ContractError>(m, "ContractError", base.ptr());

    py::enum_<GeometryKind>(m, "GeometryKind")
        .value("EuclideanBall", GeometryKind::EuclideanBall)
        .value("RoundSphere", GeometryKind::RoundSphere);

    py::class_<ModelGeometry>(m, "ModelGeometry")
        .def_static("euclidean_ball", &ModelGeometry::euclidean_ball, py::arg("n"), py::arg("R") = 1.0)
        .def_static("round_sphere", &ModelGeometry::round_sphere, py::arg("n"), py::arg("R") = 1.0)
        .def_readonly("kind", &ModelGeometry::kind)
        .def_readonly("n", &ModelGeometry::n)
        .def_readonly("R", &ModelGeometry::R)
        .def("volume", &ModelGeometry::volume)
        .def("scalar_curvature", &ModelGeometry::scalar_curvature)
        .def("volume_element", &ModelGeometry::volume_element, py::arg("rho"));

    py::class_<RadialProfile>(m, "RadialProfile")
        .def(py::init([](double center, double laplacian_ratio) { return RadialProfile{center, laplacian_ratio}; }),
             py::arg("center") = 0.0, py::arg("laplacian_ratio") = 0.0)
        .def_readwrite("center", &RadialProfile::center)
        .def_readwrite("laplacian_ratio", &RadialProfile::laplacian_ratio);

    py::class_<ProblemSpec>(m, "ProblemSpec")
        .def(py::init([](const ModelGeometry& geom) {
                 ProblemSpec s;
                 s.geom = geom;
                 return s;
             }),
             py::arg("geom"))
        .def_readwrite("geom", &ProblemSpec::geom)
        .def_readwrite("a", &ProblemSpec::a)
        .def_readwrite("b", &ProblemSpec::b)
        .def_readwrite("f", &ProblemSpec::f)
        .def_readwrite("q", &ProblemSpec::q)
        .def_readwrite("sigma", &ProblemSpec::sigma)
        .def_readwrite("mu", &ProblemSpec::mu)
        .def_readwrite("lambda_", &ProblemSpec::lambda)
        .def_readwrite("r", &ProblemSpec::r)
        .def_readwrite("s", &ProblemSpec::s)
        .def_property_readonly("critical_exponent", &ProblemSpec::critical_exponent)
        .def("validate", &ProblemSpec::validate);

    py::class_<Problem>(m, "Problem")
        .def(py::init(&make_problem), py::arg("spec"), py::arg("m") = 2048, py::arg("grading") = 2.0)
        .def_property_readonly("spec", &Problem::spec)
        .def_property_readonly("nodes", [](const Problem& p) { return p.grid().nodes; })
        .def("with_lambda", &Problem::with_lambda, py::arg("lambda_"))
        .def("quad_form", [](const Problem& p, const Eigen::VectorXd& u) { return quad_form(p, make_field(p, u)); })
        .def("energy", [](const Problem& p, const Eigen::VectorXd& u) { return energy(p, make_field(p, u)); })
        .def("nehari_residual",
             [](const Problem& p, const Eigen::VectorXd& u) { return nehari_residual(p, make_field(p, u)); })
        .def("energy_dual", [](const Problem& p, const Eigen::VectorXd& u) { return energy_dual(p, u); });

    py::class_<ConstantsReport>(m, "ConstantsReport")
        .def_readonly("Lambda", &ConstantsReport::Lambda)
        .def_readonly("K0", &ConstantsReport::K0)
        .def_readonly("A_eps", &ConstantsReport::A_eps)
        .def_readonly("lambda0", &ConstantsReport::lambda0)
        .def_readonly("lambda2", &ConstantsReport::lambda2)
        .def_readonly("theta", &ConstantsReport::theta)
        .def_readonly("coercive", &ConstantsReport::coercive)
        .def("lambda_small", &ConstantsReport::lambda_small);

    py::class_<FiberingResult>(m, "FiberingResult")
        .def_readonly("t0", &FiberingResult::t0)
        .def_readonly("E_t0", &FiberingResult::E_t0)
        .def_readonly("level", &FiberingResult::level)
        .def_readonly("feasible", &FiberingResult::feasible)
        .def_readonly("t_plus", &FiberingResult::t_plus)
        .def_readonly("t_minus", &FiberingResult::t_minus);

    m.def("integral_I", &integral_I, py::arg("p"), py::arg("q"));
    m.def("fibering_scalar", &fibering_scalar, py::arg("quad"), py::arg("level"), py::arg("crit"), py::arg("q"),
          py::arg("N"));
    m.def("estimate_constants", &estimate_constants, py::arg("problem"));
    m.def("sobolev_constant_estimate", &sobolev_constant_estimate, py::arg("n"));
    m.def(
        "solve_both",
        [](const Problem& p, double tol, int max_iter) {
            SolverOptions o;
            o.tol = tol;
            o.max_iter = max_iter;
            o.keep_trace = false;
            const auto both = solve_both(p, o);
            py::dict d;
            d["plus"] = report_dict(both.plus);
            d["minus"] = report_dict(both.minus);
            d["distance_h"] = both.distance_h;
            d["ordering"] = both.ordering;
            d["distinct"] = both.distinct;
            d["converged"] = both.converged;
            return d;
        },
        py::arg("problem"), py::arg("tol") = 1e-7, py::arg("max_iter") = 20000);
    m.def(
        "run_config",
        [](const std::string& text, std::optional<std::string> mode, std::optional<std::string> out_dir) {
            const auto r = run_text(text, mode, out_dir, true);
            return py::make_tuple(static_cast<int>(r.code), r.message, r.files);
        },
        py::arg("text"), py::arg("mode") = py::none(), py::arg("out_dir") = py::none());
}
