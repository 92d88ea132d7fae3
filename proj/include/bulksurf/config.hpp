#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "bulksurf/harness.hpp"

namespace bulksurf {

/// Flat `section.key = value` configuration. Every key has a default, so an
/// empty section is fine, but a file without any key is rejected.
struct RunConfig {
    // mesh
    std::string mesh_kind = "disk";  ///< disk | file
    std::string mesh_file;
    int rings = 8;
    int sectors = 32;
    // model
    double tau = 1.0;
    double eps = 0.0;
    double lambda = 0.1;
    std::string bulk_potential = "cubic";
    std::string boundary_potential = "cubic";
    double varrho = 1.0;
    double c0 = 1.0;
    double log_c = 1.0;
    std::string bulk_pi = "default";  ///< default | zero | linear:k | table:L:x/y,x/y,...
    std::string boundary_pi = "default";
    // sources / initial data (see SpatialPreset, TimeFactor)
    std::string f = "const:0";
    std::string f_G = "const:0";
    std::string f_time = "one";
    std::string f_G_time = "one";
    std::string u0 = "const:0";
    std::string u0_G = "trace";
    // time
    double dt = 0.01;
    double t_end = 0.5;
    // solver
    double newton_tol = 1e-12;
    int newton_max_iter = 50;
    // output
    std::string csv = "run.csv";
    int snapshot_stride = 0;  ///< 0 disables snapshots
    std::string snapshot = "snapshots.txt";
    // sweep
    std::string sweep_axis;  ///< eps | lambda | perturbation
    std::vector<double> sweep_values;
    std::string sweep_bump = "gauss:1,0.3,0.2,0.4";
    std::string sweep_report = "sweep";

    /// Directory relative mesh paths are resolved against.
    std::filesystem::path base_dir;
};

RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

LipschitzPerturbation parse_perturbation(const std::string& spec, const MonotoneGraph& graph);

/// Mesh, forms and model data described by the config; params are validated.
Problem build_problem(const RunConfig& cfg);

SolverOptions solver_options(const RunConfig& cfg);

}  // namespace bulksurf
