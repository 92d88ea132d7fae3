// Command line front end: mesh | run | check | sweep.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "bulksurf/checks.hpp"
#include "bulksurf/config.hpp"
#include "bulksurf/errors.hpp"
#include "bulksurf/io.hpp"

namespace fs = std::filesystem;
using namespace bulksurf;

namespace {

enum Exit { kOk = 0, kConfig = 2, kSolver = 3, kCheck = 4 };

struct Flags {
    std::string config;
    std::string out = ".";
    unsigned threads = 1;
    bool verbose = false;
};

// One line on stderr, `error code=<n> kind=<kind>: <message>`.
int fail(Exit code, const char* kind, const std::string& msg) {
    std::cerr << "error code=" << code << " kind=" << kind << ": " << msg << '\n';
    return code;
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write '" + path.string() + "'");
    return f;
}

void require_compatible(const ModelParams& p) {
    const auto grid = domain_grid(p.bulk_graph, 10001);
    const CompatibilityReport rep = check_compatibility(p.bulk_graph, p.surf_graph, p.compat, grid, p.lam);
    if (!rep.passes) throw ConfigError("potentials rejected by compatibility check: " + rep.message);
}

int cmd_mesh(const Flags& fl) {
    RunConfig cfg;
    if (!fl.config.empty()) cfg = load_config(fl.config);
    const Problem prob = build_problem(cfg);
    const fs::path path = fs::path(fl.out) / "mesh.txt";
    auto f = open_out(path);
    write_mesh(prob.mesh, f);
    std::printf("nodes %zu triangles %zu bedges %zu area %.17g length %.17g -> %s\n", prob.mesh.num_nodes(),
                prob.mesh.triangles().size(), prob.mesh.boundary_edges().size(), prob.mesh.bulk_area(),
                prob.mesh.boundary_length(), path.string().c_str());
    return kOk;
}

int cmd_run(const Flags& fl) {
    const RunConfig cfg = load_config(fl.config);
    const Problem prob = build_problem(cfg);
    require_compatible(prob.params);
    const ModelParams data = prepare_for_eps(prob.params, prob.params.eps, prob.forms, prob.dt, prob.t_end);

    auto csv = open_out(fs::path(fl.out) / cfg.csv);
    write_run_csv_header(csv);
    std::ofstream snaps;
    if (cfg.snapshot_stride > 0) snaps = open_out(fs::path(fl.out) / cfg.snapshot);
    std::size_t rows = 0;
    auto sink = [&](const State& s, const DiagnosticsRecord& r) {
        write_run_csv_row(r, csv);
        ++rows;
        if (cfg.snapshot_stride > 0 && s.step % static_cast<std::size_t>(cfg.snapshot_stride) == 0) {
            write_snapshot(s, prob.mesh, snaps);
        }
        if (fl.verbose) {
            std::fprintf(stderr, "step %zu t=%.6g E=%.10g newton=%d res=%.3g\n", r.step, r.t, r.energy,
                         r.newton_iters, r.residual);
        }
    };
    run(prob.forms, data, prob.dt, prob.t_end, sink, solver_options(cfg), false);
    std::printf("ok rows=%zu csv=%s\n", rows, (fs::path(fl.out) / cfg.csv).string().c_str());
    return kOk;
}

int cmd_check(const Flags& fl) {
    const RunConfig cfg = load_config(fl.config);
    const auto results = run_checks(cfg);
    bool all = true;
    std::size_t width = 0;
    for (const auto& r : results) width = std::max(width, r.name.size());
    for (const auto& r : results) {
        std::printf("%-*s  %s  %s\n", static_cast<int>(width), r.name.c_str(), r.passed ? "PASS" : "FAIL",
                    r.detail.c_str());
        all = all && r.passed;
    }
    return all ? kOk : kCheck;
}

int cmd_sweep(const Flags& fl) {
    const RunConfig cfg = load_config(fl.config);
    if (cfg.sweep_axis.empty()) throw ConfigError("sweep.axis: required for the sweep command");
    if (cfg.sweep_values.empty()) throw ConfigError("sweep.values: required for the sweep command");
    const Problem prob = build_problem(cfg);
    require_compatible(prob.params);
    SweepOptions opts;
    opts.threads = fl.threads;
    opts.solver = solver_options(cfg);
    if (fl.verbose) opts.log = [](const std::string& m) { std::fprintf(stderr, "%s\n", m.c_str()); };

    SweepReport rep;
    if (cfg.sweep_axis == "eps") {
        rep = sweep_eps(prob.params, prob.forms, cfg.sweep_values, prob.dt, prob.t_end, opts);
    } else if (cfg.sweep_axis == "lambda") {
        rep = sweep_lambda(prob.params, prob.forms, cfg.sweep_values, prob.dt, prob.t_end, opts);
    } else {
        rep = sweep_perturbation(prob.params, prob.forms, prob.mesh, cfg.sweep_values, prob.dt, prob.t_end,
                                 SpatialPreset::parse(cfg.sweep_bump), opts);
    }
    const fs::path base = fs::path(fl.out) / cfg.sweep_report;
    {
        auto f = open_out(base.string() + ".csv");
        write_report_csv(rep, f);
    }
    {
        auto f = open_out(base.string() + ".jsonl");
        write_report_jsonl(rep, f);
    }
    std::printf("axis=%s points=%zu slope=%.6g\n", rep.axis.c_str(), rep.values.size(), rep.fitted_slope);
    for (std::size_t i = 0; i < rep.errors.size(); ++i) std::printf("  %.6g  %.6g\n", rep.values[i], rep.errors[i]);
    for (const auto& [k, v] : rep.pass_flags) std::printf("  %s %s\n", k.c_str(), v ? "PASS" : "FAIL");
    return rep.passes() ? kOk : kCheck;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bulk-surface phase-field solver"};
    app.require_subcommand(1);
    Flags fl;
    auto add_common = [&](CLI::App* sub, bool need_config) {
        auto* opt = sub->add_option("--config", fl.config, "config file");
        if (need_config) opt->required();
        sub->add_option("--out", fl.out, "output directory");
        sub->add_option("--threads", fl.threads, "worker threads for sweeps")->check(CLI::Range(1u, 256u));
        sub->add_flag("--verbose", fl.verbose, "progress on stderr");
    };
    auto* mesh = app.add_subcommand("mesh", "write the configured mesh");
    add_common(mesh, false);
    auto* run_cmd = app.add_subcommand("run", "single run, CSV diagnostics and snapshots");
    add_common(run_cmd, true);
    auto* check = app.add_subcommand("check", "invariant suite");
    add_common(check, true);
    auto* sweep = app.add_subcommand("sweep", "eps / lambda / perturbation sweep");
    add_common(sweep, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        if (*mesh) return cmd_mesh(fl);
        if (*run_cmd) return cmd_run(fl);
        if (*check) return cmd_check(fl);
        return cmd_sweep(fl);
    } catch (const ConfigError& e) {
        return fail(kConfig, "config", e.what());
    } catch (const MeshError& e) {
        return fail(kConfig, "mesh", e.what());
    } catch (const DomainError& e) {
        return fail(kConfig, "domain", e.what());
    } catch (const SolverError& e) {
        return fail(kSolver, "solver", e.what());
    } catch (const std::exception& e) {
        return fail(kSolver, "internal", e.what());
    }
}
