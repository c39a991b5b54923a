#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cmath>
#include <vector>

#include "insmkt/acceptance.hpp"
#include "insmkt/analytics.hpp"
#include "insmkt/dynamics.hpp"
#include "insmkt/errors.hpp"
#include "insmkt/io.hpp"
#include "insmkt/solver.hpp"

namespace py = pybind11;
using namespace insmkt;

namespace {

py::array_t<double> as_array(const std::vector<double>& v) {
    return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

template <class T>
void bind_fields(py::class_<T>& cls, std::initializer_list<std::pair<const char*, double T::*>> fields) {
    for (const auto& [name, member] : fields) cls.def_readwrite(name, member);
}

}  // namespace

PYBIND11_MODULE(_insmkt, m) {
    m.doc() = "Robust insurance-market equilibrium, capacity dynamics and cycle analytics";

    // Translators registered later are tried first, so subclasses follow Error.
    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<InvalidParameters>(m, "InvalidParameters", m.attr("Error"));
    py::register_exception<ConfigError>(m, "ConfigError", m.attr("Error"));
    py::register_exception<NoEquilibrium>(m, "NoEquilibrium", m.attr("Error"));
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const NoEquilibrium& e) {
            py::object cls = py::module_::import("insmkt._insmkt").attr("NoEquilibrium");
            py::object inst = cls(e.what());
            inst.attr("invariant") = e.invariant();
            PyErr_SetObject(cls.ptr(), inst.ptr());
        }
    });

    py::class_<MarketParams> params(m, "MarketParams");
    params.def(py::init<>())
        .def_static("benchmark", &MarketParams::benchmark)
        .def_static("no_investment", &MarketParams::no_investment)
        .def("sharpe", &MarketParams::sharpe)
        .def("validate", &MarketParams::validate)
        .def("__eq__", [](const MarketParams& a, const MarketParams& b) { return a == b; })
        .def("__repr__", [](const MarketParams& p) { return "MarketParams(" + io::to_json(p).dump() + ")"; });
    bind_fields(params, {{"lambda_", &MarketParams::lambda}, {"l", &MarketParams::l},
                         {"eta", &MarketParams::eta},        {"r", &MarketParams::r},
                         {"mu", &MarketParams::mu},          {"sigma", &MarketParams::sigma},
                         {"gamma", &MarketParams::gamma},    {"alpha", &MarketParams::alpha},
                         {"theta", &MarketParams::theta},    {"rho", &MarketParams::rho}});

    py::class_<SolverConfig>(m, "SolverConfig")
        .def(py::init<>())
        .def_readwrite("boundary_tol", &SolverConfig::boundary_tol)
        .def_readwrite("interior_tol", &SolverConfig::interior_tol)
        .def_readwrite("grid_size", &SolverConfig::grid_size)
        .def_readwrite("max_iters", &SolverConfig::max_iters)
        .def_readwrite("bracket", &SolverConfig::bracket)
        .def_readwrite("capacity_cap", &SolverConfig::capacity_cap)
        .def_readwrite("max_refinements", &SolverConfig::max_refinements);

    py::class_<EquilibriumSolution>(m, "EquilibriumSolution")
        .def_readonly("params", &EquilibriumSolution::params)
        .def_readonly("M_low", &EquilibriumSolution::M_low)
        .def_readonly("M_high", &EquilibriumSolution::M_high)
        .def_property_readonly("M", [](const EquilibriumSolution& s) { return as_array(s.M); })
        .def_property_readonly("u", [](const EquilibriumSolution& s) { return as_array(s.u); })
        .def_property_readonly("du", [](const EquilibriumSolution& s) { return as_array(s.du); })
        .def_property_readonly("p", [](const EquilibriumSolution& s) { return as_array(s.p); })
        .def_property_readonly("D", [](const EquilibriumSolution& s) { return as_array(s.D); })
        .def_property_readonly("Y", [](const EquilibriumSolution& s) { return as_array(s.Y); })
        .def_property_readonly("hI", [](const EquilibriumSolution& s) { return as_array(s.hI); })
        .def_property_readonly("hS", [](const EquilibriumSolution& s) { return as_array(s.hS); })
        .def_property_readonly("diagnostics",
                               [](const EquilibriumSolution& s) { return io::to_json(s.diagnostics).dump(); })
        .def("__len__", &EquilibriumSolution::size);

    m.def("solve_equilibrium", &solve_equilibrium, py::arg("params") = MarketParams{},
          py::arg("config") = SolverConfig{}, "Solve for the barriers and u(M) on a uniform grid.");

    m.def(
        "sweep",
        [](const MarketParams& base, const std::string& axis, const std::vector<double>& values,
           const SolverConfig& cfg) {
            py::list out;
            for (const auto& r : sweep(base, axis, values, cfg)) {
                py::dict row;
                row[py::str(axis)] = r.value;
                row["M_low"] = r.M_low;
                row["M_high"] = r.M_high;
                row["delta_M"] = r.range;
                row["status"] = r.status;
                row["invariant"] = r.invariant;
                out.append(row);
            }
            return out;
        },
        py::arg("base"), py::arg("axis"), py::arg("values"), py::arg("config") = SolverConfig{});

    m.def(
        "cycle_durations",
        [](const EquilibriumSolution& sol, std::size_t grid_size) {
            const auto d = phase_durations(build_dynamics(sol), grid_size);
            py::dict out;
            out["M"] = as_array(d.M);
            out["Ts"] = as_array(d.Ts);
            out["Th"] = as_array(d.Th);
            out["soft"] = d.soft();
            out["hard"] = d.hard();
            out["cycle"] = d.cycle();
            return out;
        },
        py::arg("solution"), py::arg("grid_size") = 2001);

    m.def(
        "stationary_density",
        [](const EquilibriumSolution& sol, std::size_t grid_size) {
            const auto d = stationary_density(build_dynamics(sol), grid_size);
            py::dict out;
            out["M"] = as_array(d.M);
            out["pi"] = as_array(d.pi);
            out["kappa"] = d.kappa;
            out["mass"] = d.total_mass();
            return out;
        },
        py::arg("solution"), py::arg("grid_size") = 2001);

    m.def(
        "simulate_path",
        [](const EquilibriumSolution& sol, double horizon, double dt, std::uint64_t seed, double M0,
           std::size_t stride) {
            SimulationConfig cfg;
            cfg.horizon = horizon;
            cfg.dt = dt;
            cfg.seed = seed;
            cfg.M0 = M0;
            cfg.stride = stride;
            const auto dyn = build_dynamics(sol);
            cfg.validate(dyn);
            const auto path = simulate_path(dyn, cfg);
            return py::make_tuple(as_array(path.t), as_array(path.M));
        },
        py::arg("solution"), py::arg("horizon") = 100.0, py::arg("dt") = 1e-3,
        py::arg("seed") = SimulationConfig{}.seed, py::arg("M0") = std::nan(""), py::arg("stride") = 1);

    m.def("write_solution", &io::write_solution, py::arg("solution"), py::arg("csv_path"),
          py::arg("json_path"));
    m.def("read_solution", &io::read_solution, py::arg("csv_path"), py::arg("json_path"));

    m.def("run_acceptance", [] {
        py::list out;
        for (const auto& r : run_acceptance()) {
            py::dict d;
            d["id"] = r.id;
            d["description"] = r.description;
            d["passed"] = r.passed;
            d["detail"] = r.detail;
            d["seconds"] = r.seconds;
            out.append(d);
        }
        return out;
    });
}
