#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bulksurf/diagnostics.hpp"
#include "bulksurf/errors.hpp"
#include "bulksurf/harness.hpp"

using namespace bulksurf;

namespace {

struct Fixture {
    MeshBundle mesh = gen_disk_mesh(4, 16);
    FormSet forms = assemble(mesh);

    State state_from(const Vector& u, const Vector& mu) const {
        State s;
        s.u = u;
        s.u_G = forms.restrict(u);
        s.mu = mu;
        s.mu_G = forms.restrict(mu);
        return s;
    }
    Vector x() const {
        Vector v(mesh.num_nodes());
        for (std::size_t i = 0; i < mesh.num_nodes(); ++i) v[i] = mesh.nodes()[i].x;
        return v;
    }
};

}  // namespace

TEST_CASE_FIXTURE(Fixture, "dual norm of a constant") {
    const DualNorms dual(forms);
    for (double c : {1.0, -0.3, 4.0}) {
        const Vector zg = Vector::Constant(forms.num_surf(), c);
        CHECK(std::sqrt(dual.surf_sq(zg)) == doctest::Approx(std::abs(c) * std::sqrt(mesh.boundary_length())));
        CHECK(dual_norm_surf(zg, forms) ==
              doctest::Approx(std::abs(c) * std::sqrt(mesh.boundary_length())));
        const Vector z = Vector::Constant(forms.num_bulk(), c);
        CHECK(dual.bulk_sq(z) == doctest::Approx(c * c * mesh.bulk_area()));
    }
    // M + K dominates M, so the dual norm is dominated by the L2 norm
    const Vector xg = mesh.restrict_to_boundary(x());
    CHECK(dual.surf_sq(xg) < xg.dot(forms.M_surf * xg));
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 30; ++trial) {
        Vector z(forms.num_surf()), zb(forms.num_bulk());
        for (auto& v : z) v = nd(rng);
        for (auto& v : zb) v = nd(rng);
        CHECK(dual.surf_sq(z) <= z.dot(forms.M_surf * z) * (1 + 1e-12));
        CHECK(dual.bulk_sq(zb) <= zb.dot(forms.M_bulk * zb) * (1 + 1e-12));
    }
}

TEST_CASE_FIXTURE(Fixture, "omega is the boundary mean of mu") {
    Vector mu(mesh.num_nodes());
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) mu[i] = std::atan2(mesh.nodes()[i].y, mesh.nodes()[i].x);
    mu = mu.array().sin();
    CHECK(std::abs(omega_mean(state_from(x(), mu), forms)) < 1e-14);
    CHECK(omega_mean(state_from(x(), Vector::Constant(mesh.num_nodes(), 2.5)), forms) == doctest::Approx(2.5));
}

TEST_CASE_FIXTURE(Fixture, "energy of a simple state") {
    ModelParams p;
    p.bulk_graph = MonotoneGraph(GraphKind::zero);
    p.surf_graph = MonotoneGraph(GraphKind::zero);
    p.bulk_pi = LipschitzPerturbation::linear(1.0);
    p.surf_pi = LipschitzPerturbation::zero();
    const Vector u = x();
    const State s = state_from(u, Vector::Zero(mesh.num_nodes()));
    // 1/2 |grad x|^2 = area/2; boundary gradient by edges; -1/2 sum w x^2 by row sums
    double surf = 0.0;
    for (std::size_t e = 0; e < mesh.boundary_edges().size(); ++e) {
        const auto& ed = mesh.boundary_edges()[e];
        const double dx = mesh.nodes()[ed[1]].x - mesh.nodes()[ed[0]].x;
        surf += 0.5 * dx * dx / mesh.edge_length(e);
    }
    double pert = 0.0;
    const Vector w = forms.M_bulk * Vector::Ones(mesh.num_nodes());
    for (Eigen::Index i = 0; i < u.size(); ++i) pert -= 0.5 * w[i] * u[i] * u[i];
    CHECK(energy(s, p, forms) == doctest::Approx(0.5 * mesh.bulk_area() + surf + pert).epsilon(1e-12));

    // a constant source subtracts its pairing
    p.f = separable_field(Vector::Constant(mesh.num_nodes(), 1.0), TimeFactor{});
    const double pairing = u.dot(forms.M_bulk * Vector::Ones(mesh.num_nodes()));
    CHECK(energy(s, p, forms) == doctest::Approx(0.5 * mesh.bulk_area() + surf + pert - pairing).epsilon(1e-12));
}

TEST_CASE_FIXTURE(Fixture, "dissipation by hand") {
    ModelParams p;
    p.tau = 2.0;
    p.eps = 0.5;
    const State a = state_from(Vector::Zero(mesh.num_nodes()), Vector::Zero(mesh.num_nodes()));
    const State b = state_from(Vector::Constant(mesh.num_nodes(), 0.1), x());
    const double dt = 0.1;
    const Vector xg = mesh.restrict_to_boundary(x());
    const double expect = p.tau * 0.01 * mesh.bulk_area() / dt + p.eps * 0.01 * mesh.boundary_length() / dt +
                          dt * mesh.bulk_area() + dt * xg.dot(forms.K_surf * xg);
    State b2 = b;
    b2.t = dt;
    CHECK(dissipation(a, b2, p, forms) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("continuous dependence metric") {
    ReferenceOptions o;
    o.rings = 3;
    o.sectors = 12;
    Problem p = reference_problem(o);
    const Trajectory t1 = run(p.forms, p.params, 0.02, 0.1);
    SUBCASE("identical runs give zeros") {
        const ContDepMetric m = cont_dep_metric(t1, t1, p.params, p.params, p.forms);
        CHECK(m.rhs_data == 0.0);
        CHECK(m.lhs.size() == t1.states.size());
        for (double v : m.lhs) CHECK(v == 0.0);
    }
    SUBCASE("perturbed initial data") {
        ModelParams q = p.params;
        q.u0.array() += 0.01;
        q.u0_G = p.forms.restrict(q.u0);
        const Trajectory t2 = run(p.forms, q, 0.02, 0.1);
        const ContDepMetric m = cont_dep_metric(t1, t2, p.params, q, p.forms);
        const DualNorms dual(p.forms);
        const Vector d = Vector::Constant(p.forms.num_bulk(), 0.01);
        const Vector dg = Vector::Constant(p.forms.num_surf(), 0.01);
        CHECK(m.rhs_data == doctest::Approx(d.dot(p.forms.M_bulk * d) + dual.surf_sq(dg)));
        CHECK(m.lhs.front() == doctest::Approx(m.rhs_data));
        // accumulated integral only grows
        for (std::size_t n = 1; n < m.lhs.size(); ++n) CHECK(m.lhs[n] > 0.0);
        const ContDepMetric swapped = cont_dep_metric(t2, t1, q, p.params, p.forms);
        CHECK(swapped.lhs.back() == doctest::Approx(m.lhs.back()));
    }
    SUBCASE("mismatched grids are rejected") {
        const Trajectory t3 = run(p.forms, p.params, 0.02, 0.08);
        CHECK_THROWS_AS(cont_dep_metric(t1, t3, p.params, p.params, p.forms), Error);
    }
}

TEST_CASE("records carry the run diagnostics") {
    ReferenceOptions o;
    o.rings = 3;
    o.sectors = 12;
    Problem p = reference_problem(o);
    const Trajectory t = run(p.forms, p.params, 0.05, 0.1);
    const auto& r = t.records.back();
    CHECK(r.step == 2);
    CHECK(r.dissipation > 0.0);
    CHECK(r.newton_iters > 0);
    CHECK(r.grad_u_bulk == doctest::Approx(std::sqrt(t.states.back().u.dot(p.forms.K_bulk * t.states.back().u))));
    CHECK(t.records.front().dissipation == 0.0);
    CHECK(t.records.front().splitting_slack == 0.0);
}
