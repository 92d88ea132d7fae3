#include <doctest.h>

#include <cmath>

#include "bulksurf/errors.hpp"
#include "bulksurf/harness.hpp"
#include "bulksurf/stepper.hpp"

using namespace bulksurf;

namespace {

Problem small(double eps, bool time_dep = true, GraphKind bulk = GraphKind::cubic, GraphKind surf = GraphKind::cubic) {
    ReferenceOptions o;
    o.rings = 3;
    o.sectors = 12;
    o.eps = eps;
    o.bulk = bulk;
    o.surf = surf;
    o.time_dependent_sources = time_dep;
    return reference_problem(o);
}

// Both equations of the scheme rebuilt from the raw forms and the reported
// Yosida values; returns the larger residual norm.
double scheme_residual(const State& prev, const State& next, const ModelParams& p, const FormSet& f, double dt) {
    const SparseMatrix Ms = f.lift(f.M_surf), Ks = f.lift(f.K_surf);
    const SparseMatrix D = p.eps * f.M_bulk + Ms;
    const SparseMatrix A = f.K_bulk + Ks;
    const SparseMatrix G = p.tau * f.M_bulk + p.eps * Ms;
    const Vector du = next.u - prev.u;
    const Vector r1 = D * du + dt * (A * next.mu);

    Vector nl = f.lumped_bulk.cwiseProduct(next.xi);
    Vector pb(prev.u.size());
    for (Eigen::Index i = 0; i < pb.size(); ++i) pb[i] = p.bulk_pi(prev.u[i]);
    Vector pg(prev.u_G.size());
    for (Eigen::Index k = 0; k < pg.size(); ++k) pg[k] = p.surf_pi(prev.u_G[k]);
    nl += f.trace * f.lumped_surf.cwiseProduct(next.xi_G);
    const Vector pert = f.lumped_bulk.cwiseProduct(pb) + f.trace * f.lumped_surf.cwiseProduct(pg);
    const Vector load = f.M_bulk * p.bulk_source(next.step, next.t, f.num_bulk()) +
                        f.trace * (f.M_surf * p.surf_source(next.step, next.t, f.num_surf()));
    const Vector r2 = D * next.mu - G * du / dt - A * next.u - nl - pert + load;
    return std::max(r1.norm(), r2.norm());
}

}  // namespace

TEST_CASE("a step solves the scheme equations") {
    for (double eps : {0.0, 0.05}) {
        Problem p = small(eps);
        const ModelParams data = prepare_for_eps(p.params, eps, p.forms, p.dt, p.t_end);
        const Stepper st(p.forms, data);
        State s = st.initial_state();
        for (int k = 0; k < 3; ++k) {
            StepStats stats;
            const State next = st.step(s, p.dt, &stats);
            CHECK(scheme_residual(s, next, data, p.forms, p.dt) < 1e-10);
            CHECK(stats.newton_iters >= 1);
            CHECK(stats.residual <= 1e-9);
            CHECK((next.u_G - p.forms.restrict(next.u)).norm() == 0.0);
            CHECK(next.step == s.step + 1);
            s = next;
        }
    }
}

TEST_CASE("Newton converges superlinearly on the reference problem") {
    ReferenceOptions o;  // full reference mesh
    Problem p = reference_problem(o);
    SolverOptions opts;
    opts.newton_tol = 1e-14;
    const Stepper st(p.forms, p.params, opts);
    State s = st.initial_state();
    double worst_order = 1e300;
    int measured = 0;
    for (int k = 0; k < 10; ++k) {
        StepStats stats;
        s = st.step(s, p.dt, &stats);
        const auto& h = stats.residual_history;
        // order from the last three residuals that sit clearly above roundoff
        for (std::size_t i = 2; i < h.size(); ++i) {
            if (h[i] < 1e-12 || h[i - 1] >= h[i - 2]) continue;
            worst_order = std::min(worst_order, std::log(h[i] / h[i - 1]) / std::log(h[i - 1] / h[i - 2]));
            ++measured;
        }
    }
    MESSAGE("worst observed order " << worst_order << " over " << measured << " triples");
    if (measured > 0) CHECK(worst_order >= 1.5);
}

TEST_CASE("boundary mass is conserved in the limit system") {
    Problem p = small(0.0);
    const Trajectory tr = run(p.forms, p.params, p.dt, 0.2);
    REQUIRE(tr.records.size() == 21);
    const double m0 = tr.records.front().boundary_mass;
    CHECK(m0 == doctest::Approx(p.forms.lumped_surf.dot(p.params.u0_G)));
    for (const auto& r : tr.records) CHECK(std::abs(r.boundary_mass - m0) <= 1e-12 * std::max(1.0, std::abs(m0)));
}

TEST_CASE("total mass is conserved in the relaxed system") {
    for (double eps : {0.1, 1e-3}) {
        Problem p = small(eps);
        const ModelParams data = prepare_for_eps(p.params, eps, p.forms, p.dt, 0.2);
        const Trajectory tr = run(p.forms, data, p.dt, 0.2);
        const double m0 = eps * p.forms.lumped_bulk.dot(data.u0) + p.forms.lumped_surf.dot(data.u0_G);
        CHECK(tr.records.front().total_mass_eps == doctest::Approx(m0));
        for (const auto& r : tr.records) CHECK(std::abs(r.total_mass_eps - m0) <= 1e-12 * std::max(1.0, std::abs(m0)));
    }
}

TEST_CASE("energy balance is nonpositive") {
    SUBCASE("time-independent sources, energy decays") {
        Problem p = small(0.0, false);
        const Trajectory tr = run(p.forms, p.params, p.dt, 0.3);
        for (std::size_t k = 1; k < tr.records.size(); ++k) {
            const double scale = std::max(1.0, std::abs(tr.records[k - 1].energy));
            CHECK(tr.records[k].energy - tr.records[k - 1].energy <= 1e-12 * scale);
            CHECK(tr.records[k].energy - tr.records[k - 1].energy + tr.records[k].dissipation -
                      tr.records[k].splitting_slack <=
                  1e-12 * scale);
        }
    }
    SUBCASE("time-dependent sources, balance with the load increment") {
        for (double eps : {0.0, 0.02}) {
            Problem p = small(eps, true, GraphKind::cubic, GraphKind::logarithmic);
            const ModelParams data = prepare_for_eps(p.params, eps, p.forms, p.dt, 0.3);
            const Trajectory tr = run(p.forms, data, p.dt, 0.3);
            for (std::size_t k = 1; k < tr.states.size(); ++k) {
                const double scale = std::max(1.0, std::abs(tr.records[k - 1].energy));
                CHECK(energy_balance(tr.states[k - 1], tr.states[k], data, p.forms) <= 1e-11 * scale);
            }
        }
    }
}

TEST_CASE("constant state without forcing is stationary") {
    Problem p = small(0.0, false, GraphKind::zero, GraphKind::zero);
    p.params.bulk_pi = LipschitzPerturbation::zero();
    p.params.surf_pi = LipschitzPerturbation::zero();
    p.params.f = {};
    p.params.f_G = {};
    p.params.u0 = Vector::Constant(p.forms.num_bulk(), 0.3);
    p.params.u0_G = Vector::Constant(p.forms.num_surf(), 0.3);
    const Stepper st(p.forms, p.params);
    const State s1 = st.step(st.initial_state(), 0.05);
    CHECK((s1.u.array() - 0.3).abs().maxCoeff() < 1e-13);
    CHECK(s1.mu.lpNorm<Eigen::Infinity>() < 1e-13);
}

TEST_CASE("trajectory bookkeeping") {
    Problem p = small(0.0);
    std::size_t calls = 0;
    const Trajectory tr = run(p.forms, p.params, 0.02, 0.1, [&](const State& s, const DiagnosticsRecord& r) {
        CHECK(s.step == calls);
        CHECK(r.step == calls);
        ++calls;
    });
    CHECK(calls == 6);
    CHECK(tr.states.size() == 6);
    CHECK(tr.states.back().t == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(run(p.forms, p.params, 0.02, 0.1, {}, {}, false).states.empty());
    CHECK(step_count(0.01, 0.5) == 50);
    CHECK(step_count(0.1, 0.3) == 3);
    CHECK_THROWS_AS(step_count(0.03, 0.1), ConfigError);
    CHECK_THROWS_AS(step_count(0.0, 0.1), ConfigError);
}

TEST_CASE("entry points check the regime") {
    Problem p = small(0.0);
    const Stepper st(p.forms, p.params);
    const State s0 = st.initial_state();
    CHECK_NOTHROW(step_limit(s0, p.params, p.forms, p.dt));
    CHECK_THROWS_AS(step_regularized(s0, p.params, p.forms, p.dt), ConfigError);
    ModelParams relaxed = p.params;
    relaxed.eps = 0.1;
    CHECK_THROWS_AS(step_limit(s0, relaxed, p.forms, p.dt), ConfigError);
    CHECK_NOTHROW(step_regularized(s0, relaxed, p.forms, p.dt));
}

TEST_CASE("initial data must satisfy the trace condition") {
    Problem p = small(0.0);
    p.params.u0_G[0] += 1e-3;
    const Stepper st(p.forms, p.params);
    CHECK_THROWS_AS(st.initial_state(), ConfigError);
}

TEST_CASE("Newton failure surfaces as SolverError") {
    Problem p = small(0.0);
    SolverOptions o;
    o.newton_max_iter = 0;
    const Stepper st(p.forms, p.params, o);
    try {
        st.step(st.initial_state(), p.dt);
        FAIL("expected SolverError");
    } catch (const SolverError& e) {
        CHECK(e.step() == 1);
        CHECK(e.residual() > 0.0);
    }
}

TEST_CASE("indicator and logarithmic graphs stay solvable") {
    for (auto [b, s] : {std::pair{GraphKind::indicator, GraphKind::indicator},
                        std::pair{GraphKind::logarithmic, GraphKind::logarithmic}}) {
        Problem p = small(0.0, true, b, s);
        StepStats stats;
        const Stepper st(p.forms, p.params);
        State x = st.initial_state();
        for (int k = 0; k < 5; ++k) x = st.step(x, p.dt, &stats);
        CHECK(x.u.allFinite());
        CHECK(stats.newton_iters < 20);
    }
}
