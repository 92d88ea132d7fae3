#include "bulksurf/io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "bulksurf/errors.hpp"

namespace bulksurf {

namespace {

constexpr const char* kHeader =
    "step,t,boundary_mass,total_mass_eps,energy,dissipation,grad_u_bulk,grad_u_surf,env_bulk,env_surf,omega,"
    "newton_iters,residual";

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_run_csv_header(std::ostream& out) { out << kRunCsvVersion << '\n' << kHeader << '\n'; }

void write_run_csv_row(const DiagnosticsRecord& r, std::ostream& out) {
    out << r.step << ',' << g17(r.t) << ',' << g17(r.boundary_mass) << ',' << g17(r.total_mass_eps) << ','
        << g17(r.energy) << ',' << g17(r.dissipation) << ',' << g17(r.grad_u_bulk) << ',' << g17(r.grad_u_surf)
        << ',' << g17(r.env_bulk) << ',' << g17(r.env_surf) << ',' << g17(r.omega) << ',' << r.newton_iters << ','
        << g17(r.residual) << '\n';
}

std::vector<DiagnosticsRecord> read_run_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kRunCsvVersion) throw ConfigError("run csv: missing or wrong version line");
    if (!std::getline(in, line) || line != kHeader) throw ConfigError("run csv: unexpected header");
    std::vector<DiagnosticsRecord> rows;
    int lineno = 2;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 13) throw ConfigError("run csv line " + std::to_string(lineno) + ": expected 13 columns");
        try {
            DiagnosticsRecord r;
            r.step = std::stoull(cells[0]);
            r.t = std::stod(cells[1]);
            r.boundary_mass = std::stod(cells[2]);
            r.total_mass_eps = std::stod(cells[3]);
            r.energy = std::stod(cells[4]);
            r.dissipation = std::stod(cells[5]);
            r.grad_u_bulk = std::stod(cells[6]);
            r.grad_u_surf = std::stod(cells[7]);
            r.env_bulk = std::stod(cells[8]);
            r.env_surf = std::stod(cells[9]);
            r.omega = std::stod(cells[10]);
            r.newton_iters = std::stoi(cells[11]);
            r.residual = std::stod(cells[12]);
            rows.push_back(r);
        } catch (const std::exception&) {
            throw ConfigError("run csv line " + std::to_string(lineno) + ": bad number");
        }
    }
    return rows;
}

void write_snapshot(const State& s, const MeshBundle& mesh, std::ostream& out) {
    out << "t=" << g17(s.t) << '\n';
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
        const Point& p = mesh.nodes()[i];
        out << i << ' ' << g17(p.x) << ' ' << g17(p.y) << ' ' << g17(s.u[i]) << ' ' << g17(s.mu[i]) << '\n';
    }
    out << "boundary:\n";
    for (std::size_t k = 0; k < mesh.num_boundary_nodes(); ++k) {
        out << k << ' ' << g17(s.u_G[k]) << ' ' << g17(s.mu_G[k]) << ' ' << g17(s.xi_G[k]) << '\n';
    }
}

}  // namespace bulksurf
