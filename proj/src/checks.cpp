#include "bulksurf/checks.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "bulksurf/dataprep.hpp"
#include "bulksurf/errors.hpp"

namespace bulksurf {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(3);
    os << v;
    return os.str();
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

CheckResult yosida_check(const std::string& name, const MonotoneGraph& g, double lam) {
    std::mt19937_64 rng(1234);
    const Interval dom = g.domain();
    int bad = 0;
    std::string first;
    auto fail = [&](const std::string& what) {
        if (bad++ == 0) first = what;
    };
    for (int i = 0; i < 2000; ++i) {
        const double r = uniform(rng, -3.0, 3.0);
        const double s = uniform(rng, -3.0, 3.0);
        const double yr = g.yosida(lam, r), ys = g.yosida(lam, s);
        if (dom.contains(r) && std::abs(yr) > std::abs(g.minimal_section(r)) + 1e-10) fail("|beta_lam| > |beta0| at " + fmt(r));
        const double env = g.envelope(lam, r);
        if (env < -1e-10 || env > g.primitive(r) + 1e-10) fail("envelope bound at " + fmt(r));
        if ((yr - ys) * (r - s) < -1e-10) fail("monotonicity at " + fmt(r));
        if (std::abs(yr - ys) > std::abs(r - s) / lam + 1e-10) fail("Lipschitz at " + fmt(r));
    }
    return {name, bad == 0, bad == 0 ? "2000 samples" : std::to_string(bad) + " violations, first: " + first};
}

}  // namespace

double relative_mass_drift(const std::vector<DiagnosticsRecord>& records, bool use_total) {
    if (records.empty()) return 0.0;
    auto mass = [&](const DiagnosticsRecord& r) { return use_total ? r.total_mass_eps : r.boundary_mass; };
    const double m0 = mass(records.front());
    double drift = 0.0;
    for (const auto& r : records) drift = std::max(drift, std::abs(mass(r) - m0));
    return drift / std::max(std::abs(m0), 1e-300);
}

std::vector<CheckResult> run_checks(const RunConfig& cfg, std::size_t short_steps) {
    std::vector<CheckResult> out;
    Problem prob = build_problem(cfg);
    const ModelParams& p = prob.params;

    out.push_back(yosida_check("graph.bulk_yosida", p.bulk_graph, p.lam));
    out.push_back(yosida_check("graph.boundary_yosida", p.surf_graph, p.surf_lam()));

    {
        const auto grid = domain_grid(p.bulk_graph, 10001);
        const CompatibilityReport rep = check_compatibility(p.bulk_graph, p.surf_graph, p.compat, grid, p.lam);
        out.push_back({"graph.compatibility", rep.passes, rep.message});
    }

    try {
        const PoincareConstants pc = poincare_constants(prob.forms, prob.mesh);
        std::mt19937_64 rng(99);
        int bad = 0;
        const Vector wG = prob.forms.lumped_surf;
        for (int i = 0; i < 50; ++i) {
            Vector z(prob.forms.num_bulk());
            for (auto& v : z) v = uniform(rng, -1.0, 1.0);
            Vector zG = prob.forms.restrict(z);
            const double kz = z.dot(prob.forms.K_bulk * z);
            const double mz = z.dot(prob.forms.M_bulk * z);
            const double mg = zG.dot(prob.forms.M_surf * zG);
            if (mz > pc.c_p1 * (kz + mg) * (1 + 1e-9)) ++bad;
            Vector y = zG.array() - wG.dot(zG) / wG.sum();
            const double ky = y.dot(prob.forms.K_surf * y);
            if (y.dot(prob.forms.M_surf * y) > pc.c_p2 * ky * (1 + 1e-9)) ++bad;
            Vector zz = z.array() - wG.dot(zG) / wG.sum();
            Vector zzG = prob.forms.restrict(zz);
            const double a = zz.dot(prob.forms.K_bulk * zz) + zzG.dot(prob.forms.K_surf * zzG);
            const double v = zz.dot((prob.forms.M_bulk + prob.forms.K_bulk) * zz) +
                             zzG.dot((prob.forms.M_surf + prob.forms.K_surf) * zzG);
            if (v > pc.c_p3 * a * (1 + 1e-9)) ++bad;
        }
        out.push_back({"assembly.poincare", bad == 0,
                       "c_p1=" + fmt(pc.c_p1) + " c_p2=" + fmt(pc.c_p2) + " c_p3=" + fmt(pc.c_p3) + ", " +
                           std::to_string(bad) + " violations"});
    } catch (const Error& e) {
        out.push_back({"assembly.poincare", false, e.what()});
    }

    {
        const double eps = p.eps > 0.0 ? p.eps : 1e-2;
        const auto ctx = WeightedMeanContext::make(prob.forms, eps);
        std::mt19937_64 rng(5);
        double worst_mean = 0.0, worst_idem = 0.0;
        int bad = 0;
        for (int i = 0; i < 20; ++i) {
            Vector z(prob.forms.num_bulk()), zg(prob.forms.num_surf());
            for (auto& v : z) v = uniform(rng, -1.0, 1.0);
            for (auto& v : zg) v = uniform(rng, -1.0, 1.0);
            auto [pz, pg] = project_P_eps(ctx, z, zg);
            worst_mean = std::max(worst_mean, std::abs(weighted_mean(ctx, pz, pg)));
            auto [ppz, ppg] = project_P_eps(ctx, pz, pg);
            worst_idem = std::max(worst_idem, std::max((ppz - pz).cwiseAbs().maxCoeff(), (ppg - pg).cwiseAbs().maxCoeff()));
            const double best = weighted_norm_sq(ctx, z - pz, zg - pg);
            for (int k = 0; k < 5; ++k) {
                Vector y(z.size()), yg(zg.size());
                for (auto& v : y) v = uniform(rng, -1.0, 1.0);
                for (auto& v : yg) v = uniform(rng, -1.0, 1.0);
                auto [y0, y0g] = project_P_eps(ctx, y, yg);
                if (weighted_norm_sq(ctx, z - y0, zg - y0g) < best * (1 - 1e-12)) ++bad;
            }
        }
        const bool ok = worst_mean <= 1e-13 && worst_idem <= 1e-13 && bad == 0;
        out.push_back({"dataprep.projection", ok,
                       "max |m_eps(Pz)|=" + fmt(worst_mean) + " idempotence=" + fmt(worst_idem) + " competitors beaten=" +
                           std::to_string(bad)});
    }

    try {
        const double dt = prob.dt;
        const std::size_t steps = std::min<std::size_t>(short_steps, step_count(dt, prob.t_end));
        const double t_end = dt * static_cast<double>(steps);
        const ModelParams data = prepare_for_eps(p, p.eps, prob.forms, dt, t_end);
        const Trajectory traj = run(prob.forms, data, dt, t_end, {}, solver_options(cfg));
        const bool total = p.eps > 0.0;
        const double drift = relative_mass_drift(traj.records, total);
        out.push_back({total ? "run.total_mass" : "run.boundary_mass", drift <= 1e-10,
                       "relative drift " + fmt(drift) + " over " + std::to_string(steps) + " steps"});
        bool nonneg = true;
        for (const auto& r : traj.records) nonneg = nonneg && r.dissipation >= 0.0 && r.env_bulk >= 0.0 && r.env_surf >= 0.0;
        out.push_back({"run.nonnegativity", nonneg, "dissipation and envelope integrals"});
        double worst = -1e300;
        for (std::size_t n = 1; n < traj.states.size(); ++n) {
            const double scale = std::max(1.0, std::abs(traj.records[n - 1].energy));
            worst = std::max(worst, energy_balance(traj.states[n - 1], traj.states[n], data, prob.forms) / scale);
        }
        out.push_back({"run.energy_balance", worst <= 1e-12, "max scaled balance " + fmt(worst) + " (must be <= 0)"});
    } catch (const SolverError& e) {
        out.push_back({"run.short", false, e.what()});
    }
    return out;
}

}  // namespace bulksurf
