#include "bulksurf/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "bulksurf/errors.hpp"

namespace bulksurf {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double d = 0.0;
    try {
        d = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size() || !std::isfinite(d)) throw ConfigError(key + ": expected a number, got '" + v + "'");
    return d;
}

int to_int(const std::string& key, const std::string& v) {
    const double d = to_double(key, v);
    if (d != std::floor(d) || std::abs(d) > 1e9) throw ConfigError(key + ": expected an integer, got '" + v + "'");
    return static_cast<int>(d);
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

template <class T>
Setter field(T RunConfig::*member) {
    return [member](RunConfig& c, const std::string& key, const std::string& v) {
        if constexpr (std::is_same_v<T, double>) c.*member = to_double(key, v);
        else if constexpr (std::is_same_v<T, int>) c.*member = to_int(key, v);
        else if constexpr (std::is_same_v<T, std::string>) c.*member = v;
        else c.*member = to_list(key, v);
    };
}

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"mesh.kind", field(&RunConfig::mesh_kind)},
        {"mesh.file", field(&RunConfig::mesh_file)},
        {"mesh.rings", field(&RunConfig::rings)},
        {"mesh.sectors", field(&RunConfig::sectors)},
        {"model.tau", field(&RunConfig::tau)},
        {"model.eps", field(&RunConfig::eps)},
        {"model.lambda", field(&RunConfig::lambda)},
        {"model.bulk_potential", field(&RunConfig::bulk_potential)},
        {"model.boundary_potential", field(&RunConfig::boundary_potential)},
        {"model.varrho", field(&RunConfig::varrho)},
        {"model.c0", field(&RunConfig::c0)},
        {"model.log_c", field(&RunConfig::log_c)},
        {"model.bulk_pi", field(&RunConfig::bulk_pi)},
        {"model.boundary_pi", field(&RunConfig::boundary_pi)},
        {"sources.f", field(&RunConfig::f)},
        {"sources.f_G", field(&RunConfig::f_G)},
        {"sources.f_time", field(&RunConfig::f_time)},
        {"sources.f_G_time", field(&RunConfig::f_G_time)},
        {"initial.u0", field(&RunConfig::u0)},
        {"initial.u0_G", field(&RunConfig::u0_G)},
        {"time.dt", field(&RunConfig::dt)},
        {"time.t_end", field(&RunConfig::t_end)},
        {"solver.newton_tol", field(&RunConfig::newton_tol)},
        {"solver.newton_max_iter", field(&RunConfig::newton_max_iter)},
        {"output.csv", field(&RunConfig::csv)},
        {"output.snapshot_stride", field(&RunConfig::snapshot_stride)},
        {"output.snapshot", field(&RunConfig::snapshot)},
        {"sweep.axis", field(&RunConfig::sweep_axis)},
        {"sweep.values", field(&RunConfig::sweep_values)},
        {"sweep.bump", field(&RunConfig::sweep_bump)},
        {"sweep.report", field(&RunConfig::sweep_report)},
    };
    return table;
}

void check_ranges(const RunConfig& c) {
    if (c.mesh_kind != "disk" && c.mesh_kind != "file") throw ConfigError("mesh.kind: expected 'disk' or 'file'");
    if (c.mesh_kind == "file" && c.mesh_file.empty()) throw ConfigError("mesh.file: required when mesh.kind = file");
    if (c.rings < 1) throw ConfigError("mesh.rings: must be >= 1");
    if (c.sectors < 3) throw ConfigError("mesh.sectors: must be >= 3");
    if (!(c.tau > 0.0)) throw ConfigError("model.tau: must be > 0");
    if (!(c.eps >= 0.0 && c.eps <= 1.0)) throw ConfigError("model.eps: must lie in [0, 1]");
    if (!(c.lambda > 0.0 && c.lambda <= 1.0)) throw ConfigError("model.lambda: must lie in (0, 1]");
    if (!(c.varrho > 0.0)) throw ConfigError("model.varrho: must be > 0");
    if (!(c.c0 > 0.0)) throw ConfigError("model.c0: must be > 0");
    if (!(c.log_c > 0.0)) throw ConfigError("model.log_c: must be > 0");
    if (!(c.dt > 0.0)) throw ConfigError("time.dt: must be > 0");
    if (!(c.t_end > 0.0)) throw ConfigError("time.t_end: must be > 0");
    if (!(c.newton_tol > 0.0)) throw ConfigError("solver.newton_tol: must be > 0");
    if (c.newton_max_iter < 1) throw ConfigError("solver.newton_max_iter: must be >= 1");
    if (c.snapshot_stride < 0) throw ConfigError("output.snapshot_stride: must be >= 0");
    if (c.csv.empty()) throw ConfigError("output.csv: must not be empty");
    if (!c.sweep_axis.empty() && c.sweep_axis != "eps" && c.sweep_axis != "lambda" &&
        c.sweep_axis != "perturbation") {
        throw ConfigError("sweep.axis: expected eps, lambda or perturbation");
    }
    try {
        graph_kind_from_string(c.bulk_potential);
    } catch (const Error& e) {
        throw ConfigError(std::string("model.bulk_potential: ") + e.what());
    }
    try {
        graph_kind_from_string(c.boundary_potential);
    } catch (const Error& e) {
        throw ConfigError(std::string("model.boundary_potential: ") + e.what());
    }
    const std::pair<const char*, const std::string*> presets[] = {
        {"sources.f", &c.f}, {"sources.f_G", &c.f_G}, {"initial.u0", &c.u0}, {"initial.u0_G", &c.u0_G},
        {"sweep.bump", &c.sweep_bump}};
    for (const auto& [key, value] : presets) {
        try {
            const SpatialPreset p = SpatialPreset::parse(*value);
            if (p.is_trace() && std::string(key) != "initial.u0_G") throw ConfigError("'trace' not allowed here");
        } catch (const Error& e) {
            throw ConfigError(std::string(key) + ": " + e.what());
        }
    }
    for (const auto& [key, value] : {std::pair{"sources.f_time", &c.f_time}, std::pair{"sources.f_G_time", &c.f_G_time}}) {
        try {
            TimeFactor::parse(*value);
        } catch (const Error& e) {
            throw ConfigError(std::string(key) + ": " + e.what());
        }
    }
}

}  // namespace

RunConfig parse_config(std::istream& in, const std::string& source) {
    RunConfig cfg;
    std::set<std::string> seen;
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const auto where = source + ":" + std::to_string(lineno) + ": ";
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        auto it = setters().find(key);
        if (it == setters().end()) throw ConfigError(where + "unknown key '" + key + "'");
        if (!seen.insert(key).second) throw ConfigError(where + "duplicate key '" + key + "'");
        if (value.empty()) throw ConfigError(where + key + ": missing value");
        try {
            it->second(cfg, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        }
    }
    if (seen.empty()) throw ConfigError(source + ": empty config");
    try {
        check_ranges(cfg);
    } catch (const ConfigError& e) {
        throw ConfigError(source + ": " + e.what());
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    RunConfig cfg = parse_config(in, path.string());
    cfg.base_dir = path.parent_path();
    return cfg;
}

LipschitzPerturbation parse_perturbation(const std::string& spec, const MonotoneGraph& graph) {
    if (spec == "default") return LipschitzPerturbation::default_for(graph);
    if (spec == "zero") return LipschitzPerturbation::zero();
    if (spec.rfind("linear:", 0) == 0) return LipschitzPerturbation::linear(to_double("pi", spec.substr(7)));
    if (spec.rfind("table:", 0) == 0) {
        const std::string rest = spec.substr(6);
        const auto colon = rest.find(':');
        if (colon == std::string::npos) throw ConfigError("pi table: expected table:L:x/y,x/y,...");
        const double lip = to_double("pi table Lipschitz constant", rest.substr(0, colon));
        std::vector<double> xs, ys;
        std::stringstream ss(rest.substr(colon + 1));
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto slash = item.find('/');
            if (slash == std::string::npos) throw ConfigError("pi table: entry '" + item + "' is not x/y");
            xs.push_back(to_double("pi table", trim(item.substr(0, slash))));
            ys.push_back(to_double("pi table", trim(item.substr(slash + 1))));
        }
        try {
            return LipschitzPerturbation::tabulated(std::move(xs), std::move(ys), lip);
        } catch (const Error& e) {
            throw ConfigError(std::string("pi table: ") + e.what());
        }
    }
    throw ConfigError("unknown perturbation '" + spec + "' (default, zero, linear:k, table:L:...)");
}

Problem build_problem(const RunConfig& cfg) {
    MeshBundle mesh = cfg.mesh_kind == "disk"
                          ? gen_disk_mesh(cfg.rings, cfg.sectors)
                          : load_mesh(std::filesystem::path(cfg.mesh_file).is_absolute()
                                          ? std::filesystem::path(cfg.mesh_file)
                                          : cfg.base_dir / cfg.mesh_file);
    FormSet forms = assemble(mesh);
    ModelParams m;
    m.tau = cfg.tau;
    m.eps = cfg.eps;
    m.lam = cfg.lambda;
    m.bulk_graph = MonotoneGraph(graph_kind_from_string(cfg.bulk_potential), cfg.log_c);
    m.surf_graph = MonotoneGraph(graph_kind_from_string(cfg.boundary_potential), cfg.log_c);
    try {
        m.bulk_pi = parse_perturbation(cfg.bulk_pi, m.bulk_graph);
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("model.bulk_pi: ") + e.what());
    }
    try {
        m.surf_pi = parse_perturbation(cfg.boundary_pi, m.surf_graph);
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("model.boundary_pi: ") + e.what());
    }
    m.compat = CompatibilityParams{cfg.varrho, cfg.c0};
    m.u0 = sample_bulk(SpatialPreset::parse(cfg.u0), mesh);
    const SpatialPreset u0g = SpatialPreset::parse(cfg.u0_G);
    m.u0_G = u0g.is_trace() ? forms.restrict(m.u0) : sample_boundary(u0g, mesh);
    m.f = separable_field(sample_bulk(SpatialPreset::parse(cfg.f), mesh), TimeFactor::parse(cfg.f_time));
    m.f_G = separable_field(sample_boundary(SpatialPreset::parse(cfg.f_G), mesh), TimeFactor::parse(cfg.f_G_time));
    m.validate(forms);
    step_count(cfg.dt, cfg.t_end);
    return Problem{std::move(mesh), std::move(forms), std::move(m), cfg.dt, cfg.t_end};
}

SolverOptions solver_options(const RunConfig& cfg) {
    SolverOptions o;
    o.newton_tol = cfg.newton_tol;
    o.newton_max_iter = cfg.newton_max_iter;
    return o;
}

}  // namespace bulksurf
