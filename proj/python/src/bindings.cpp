// Python access to meshes, graph calculus, runs and the sweep/CSV readers.
#include <fstream>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bulksurf/config.hpp"
#include "bulksurf/errors.hpp"
#include "bulksurf/graphs.hpp"
#include "bulksurf/harness.hpp"
#include "bulksurf/io.hpp"

namespace py = pybind11;
using namespace bulksurf;

namespace {

py::dict records_to_dict(const std::vector<DiagnosticsRecord>& recs) {
    const std::size_t n = recs.size();
    auto col = [&](auto get) {
        py::array_t<double> a(static_cast<py::ssize_t>(n));
        auto m = a.mutable_unchecked<1>();
        for (std::size_t i = 0; i < n; ++i) m(static_cast<py::ssize_t>(i)) = static_cast<double>(get(recs[i]));
        return a;
    };
    py::dict d;
    d["step"] = col([](const auto& r) { return r.step; });
    d["t"] = col([](const auto& r) { return r.t; });
    d["boundary_mass"] = col([](const auto& r) { return r.boundary_mass; });
    d["total_mass_eps"] = col([](const auto& r) { return r.total_mass_eps; });
    d["energy"] = col([](const auto& r) { return r.energy; });
    d["dissipation"] = col([](const auto& r) { return r.dissipation; });
    d["grad_u_bulk"] = col([](const auto& r) { return r.grad_u_bulk; });
    d["grad_u_surf"] = col([](const auto& r) { return r.grad_u_surf; });
    d["env_bulk"] = col([](const auto& r) { return r.env_bulk; });
    d["env_surf"] = col([](const auto& r) { return r.env_surf; });
    d["omega"] = col([](const auto& r) { return r.omega; });
    d["newton_iters"] = col([](const auto& r) { return r.newton_iters; });
    d["residual"] = col([](const auto& r) { return r.residual; });
    return d;
}

py::dict report_to_dict(const SweepReport& r) {
    py::dict d;
    d["axis"] = r.axis;
    d["values"] = r.values;
    d["errors"] = r.errors;
    d["fitted_slope"] = r.fitted_slope;
    d["constants"] = r.constants;
    d["pass_flags"] = r.pass_flags;
    d["point_data"] = r.point_data;
    d["passes"] = r.passes();
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "bulk-surface phase-field solver";
    m.attr("RUN_CSV_VERSION") = kRunCsvVersion;

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<MeshError>(m, "MeshError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

    py::class_<MeshBundle>(m, "Mesh")
        .def_property_readonly("nodes",
                               [](const MeshBundle& mesh) {
                                   Eigen::MatrixX2d p(mesh.num_nodes(), 2);
                                   for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
                                       p(i, 0) = mesh.nodes()[i].x;
                                       p(i, 1) = mesh.nodes()[i].y;
                                   }
                                   return p;
                               })
        .def_property_readonly("triangles", &MeshBundle::triangles)
        .def_property_readonly("boundary_edges", &MeshBundle::boundary_edges)
        .def_property_readonly("trace_map", &MeshBundle::trace_map)
        .def_property_readonly("area", &MeshBundle::bulk_area)
        .def_property_readonly("boundary_length", &MeshBundle::boundary_length)
        .def("__len__", &MeshBundle::num_nodes);
    m.def("disk_mesh", &gen_disk_mesh, py::arg("rings"), py::arg("sectors"));
    m.def("load_mesh", [](const std::string& path) { return load_mesh(path); });

    m.def(
        "yosida",
        [](const std::string& kind, double lam, py::array_t<double, py::array::c_style | py::array::forcecast> r) {
            const MonotoneGraph g(graph_kind_from_string(kind));
            py::array_t<double> out(r.request().shape);
            const double* in = r.data();
            double* dst = out.mutable_data();
            for (py::ssize_t i = 0; i < r.size(); ++i) dst[i] = g.yosida(lam, in[i]);
            return out;
        },
        py::arg("kind"), py::arg("lam"), py::arg("r"));

    m.def(
        "compatibility",
        [](const std::string& bulk, const std::string& boundary, double varrho, double c0, double lam,
           std::size_t count) {
            const MonotoneGraph b(graph_kind_from_string(bulk)), s(graph_kind_from_string(boundary));
            const auto grid = domain_grid(b, count);
            const CompatibilityReport rep = check_compatibility(b, s, {varrho, c0}, grid, lam);
            py::dict d;
            d["passes"] = rep.passes;
            d["domain_ok"] = rep.domain_ok;
            d["max_excess_yosida"] = rep.max_excess_yosida;
            d["max_excess_minimal"] = rep.max_excess_minimal;
            d["message"] = rep.message;
            return d;
        },
        py::arg("bulk"), py::arg("boundary"), py::arg("varrho") = 1.0, py::arg("c0") = 1.0, py::arg("lam") = 0.1,
        py::arg("count") = 10001);

    m.def(
        "run_config",
        [](const std::string& path) {
            const RunConfig cfg = load_config(path);
            const Problem prob = build_problem(cfg);
            const ModelParams data = prepare_for_eps(prob.params, prob.params.eps, prob.forms, prob.dt, prob.t_end);
            Trajectory t;
            {
                py::gil_scoped_release release;
                t = run(prob.forms, data, prob.dt, prob.t_end, {}, solver_options(cfg), false);
            }
            return records_to_dict(t.records);
        },
        py::arg("path"), "Run a config file and return its diagnostics columns.");

    m.def(
        "read_run_csv",
        [](const std::string& path) {
            std::ifstream in(path);
            if (!in) throw ConfigError("cannot open '" + path + "'");
            return records_to_dict(read_run_csv(in));
        },
        py::arg("path"));

    m.def(
        "read_sweep_jsonl",
        [](const std::string& path) {
            std::ifstream in(path);
            if (!in) throw ConfigError("cannot open '" + path + "'");
            return report_to_dict(read_report_jsonl(in));
        },
        py::arg("path"));
}
