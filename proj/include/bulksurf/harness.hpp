#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "bulksurf/diagnostics.hpp"
#include "bulksurf/fields.hpp"
#include "bulksurf/stepper.hpp"

namespace bulksurf {

/// Mesh, forms and data of one problem. Params hold pointers into nothing;
/// the forms must outlive anything built from them, so keep the bundle alive.
struct Problem {
    MeshBundle mesh;
    FormSet forms;
    ModelParams params;
    double dt = 0.01;
    double t_end = 0.5;
};

struct ReferenceOptions {
    int rings = 8;
    int sectors = 32;
    GraphKind bulk = GraphKind::cubic;
    GraphKind surf = GraphKind::cubic;
    double lam = 0.1;
    double eps = 0.0;
    bool time_dependent_sources = true;
    std::string bulk_source = "sep:0.2,1.5,1";
    std::string surf_source = "trig:0.1,2";
};

/// The pinned reference configuration: unit disk (8 rings, 32 sectors), tau = 1,
/// double-well perturbations, smooth separable sources, smooth random initial
/// data with its exact trace.
Problem reference_problem(const ReferenceOptions& opts = {});

/// Data actually fed to the relaxed problem: for eps > 0 the sources are
/// replaced by their smoothed series on the run grid and the initial data
/// by the elliptic smoothing; for eps = 0 the data are returned unchanged.
ModelParams prepare_for_eps(const ModelParams& base, double eps, const FormSet& forms, double dt, double t_end);

/// sqrt(sum_{n>=1} dt |u1 - u2|^2_M) + sqrt(sum_{n>=1} dt |u1_G - u2_G|^2_MG)
double trajectory_distance(const Trajectory& a, const Trajectory& b, const FormSet& forms);

/// Least-squares slope and intercept of log y against log x over the
/// entries with x, y > 0. NaN slope when fewer than two usable points.
struct LogFit {
    double slope;
    double intercept;
};
LogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

struct SweepReport {
    std::string axis;
    std::vector<double> values;
    std::vector<double> errors;
    double fitted_slope = 0.0;
    std::map<std::string, double> constants;
    std::map<std::string, bool> pass_flags;
    /// per sweep point, named scalars (tracked quantities, ratios, C* ...)
    std::vector<std::map<std::string, double>> point_data;

    bool passes() const;
    bool operator==(const SweepReport& other) const;
};

void write_report_csv(const SweepReport& report, std::ostream& out);
void write_report_jsonl(const SweepReport& report, std::ostream& out);
SweepReport read_report_jsonl(std::istream& in);

struct SweepOptions {
    unsigned threads = 1;
    SolverOptions solver{};
    /// Optional progress sink, called from the orchestrating thread.
    std::function<void(const std::string&)> log;
};

SweepReport sweep_eps(const ModelParams& base, const FormSet& forms, const std::vector<double>& eps_list,
                      double dt, double t_end, const SweepOptions& opts = {});

SweepReport sweep_lambda(const ModelParams& base, const FormSet& forms, const std::vector<double>& lam_list,
                         double dt, double t_end, const SweepOptions& opts = {});

/// Perturbs (u0, u0_G, f, f_G) by a * bump with the given bulk bump; the
/// boundary parts use its trace. Amplitudes must be strictly decreasing and
/// nonnegative; amplitude 0 is allowed and reports lhs = 0.
SweepReport sweep_perturbation(const ModelParams& base, const FormSet& forms, const MeshBundle& mesh,
                               const std::vector<double>& amplitudes, double dt, double t_end,
                               const SpatialPreset& bump, const SweepOptions& opts = {});

/// Runs fn(i) for i in [0, count) on up to `threads` workers; results in index order.
/// The first exception (lowest index) is rethrown after all workers finish.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t count, unsigned threads, Fn&& fn);

}  // namespace bulksurf

#include "bulksurf/detail/parallel_map.hpp"
