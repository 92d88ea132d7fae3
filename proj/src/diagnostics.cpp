#include "bulksurf/diagnostics.hpp"

#include <cmath>

#include "bulksurf/errors.hpp"

namespace bulksurf {

double envelope_integral_bulk(const Vector& u, const ModelParams& params, const FormSet& forms) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) s += forms.lumped_bulk[i] * params.bulk_graph.envelope(params.lam, u[i]);
    return s;
}

double envelope_integral_surf(const Vector& u_G, const ModelParams& params, const FormSet& forms) {
    const double lg = params.surf_lam();
    double s = 0.0;
    for (Eigen::Index k = 0; k < u_G.size(); ++k) s += forms.lumped_surf[k] * params.surf_graph.envelope(lg, u_G[k]);
    return s;
}

double energy(const State& state, const ModelParams& params, const FormSet& forms) {
    const Vector f = params.bulk_source(state.step, state.t, forms.num_bulk());
    const Vector f_G = params.surf_source(state.step, state.t, forms.num_surf());
    double e = 0.5 * state.u.dot(forms.K_bulk * state.u) + 0.5 * state.u_G.dot(forms.K_surf * state.u_G);
    e += envelope_integral_bulk(state.u, params, forms) + envelope_integral_surf(state.u_G, params, forms);
    for (Eigen::Index i = 0; i < state.u.size(); ++i) e += forms.lumped_bulk[i] * params.bulk_pi.primitive(state.u[i]);
    for (Eigen::Index k = 0; k < state.u_G.size(); ++k) {
        e += forms.lumped_surf[k] * params.surf_pi.primitive(state.u_G[k]);
    }
    e -= state.u.dot(forms.M_bulk * f) + state.u_G.dot(forms.M_surf * f_G);
    return e;
}

double dissipation(const State& prev, const State& next, const ModelParams& params, const FormSet& forms) {
    const double dt = next.t - prev.t;
    if (!(dt > 0.0)) throw Error("dissipation: states are not ordered in time");
    const Vector du = next.u - prev.u;
    const Vector du_G = next.u_G - prev.u_G;
    return params.tau * du.dot(forms.M_bulk * du) / dt + params.eps * du_G.dot(forms.M_surf * du_G) / dt +
           dt * next.mu.dot(forms.K_bulk * next.mu) + dt * next.mu_G.dot(forms.K_surf * next.mu_G);
}

double splitting_slack(const State& prev, const State& next, const ModelParams& params, const FormSet& forms) {
    auto gap = [](const LipschitzPerturbation& pi, double a, double b) {
        return pi.primitive(b) - pi.primitive(a) - pi(a) * (b - a);
    };
    double s = 0.0;
    for (Eigen::Index i = 0; i < next.u.size(); ++i) {
        s += forms.lumped_bulk[i] * gap(params.bulk_pi, prev.u[i], next.u[i]);
    }
    for (Eigen::Index k = 0; k < next.u_G.size(); ++k) {
        s += forms.lumped_surf[k] * gap(params.surf_pi, prev.u_G[k], next.u_G[k]);
    }
    return s;
}

double energy_balance(const State& prev, const State& next, const ModelParams& params, const FormSet& forms) {
    const Eigen::Index n = forms.num_bulk(), nb = forms.num_surf();
    const Vector df = params.bulk_source(next.step, next.t, n) - params.bulk_source(prev.step, prev.t, n);
    const Vector dfg = params.surf_source(next.step, next.t, nb) - params.surf_source(prev.step, prev.t, nb);
    const double load_change = prev.u.dot(forms.M_bulk * df) + prev.u_G.dot(forms.M_surf * dfg);
    return energy(next, params, forms) - energy(prev, params, forms) + dissipation(prev, next, params, forms) -
           splitting_slack(prev, next, params, forms) + load_change;
}

double omega_mean(const State& state, const FormSet& forms) {
    const Vector ones = Vector::Ones(forms.num_surf());
    return ones.dot(forms.M_surf * state.mu_G) / ones.dot(forms.M_surf * ones);
}

DiagnosticsRecord make_record(const State& state, const State* prev, const ModelParams& params,
                              const FormSet& forms, int newton_iters, double residual) {
    DiagnosticsRecord r;
    r.step = state.step;
    r.t = state.t;
    const Vector ones_b = Vector::Ones(forms.num_bulk());
    const Vector ones_s = Vector::Ones(forms.num_surf());
    r.boundary_mass = ones_s.dot(forms.M_surf * state.u_G);
    r.total_mass_eps = params.eps * ones_b.dot(forms.M_bulk * state.u) + r.boundary_mass;
    r.energy = energy(state, params, forms);
    r.grad_u_bulk = std::sqrt(std::max(0.0, state.u.dot(forms.K_bulk * state.u)));
    r.grad_u_surf = std::sqrt(std::max(0.0, state.u_G.dot(forms.K_surf * state.u_G)));
    r.env_bulk = envelope_integral_bulk(state.u, params, forms);
    r.env_surf = envelope_integral_surf(state.u_G, params, forms);
    r.omega = omega_mean(state, forms);
    r.newton_iters = newton_iters;
    r.residual = residual;
    if (prev != nullptr) {
        r.dissipation = dissipation(*prev, state, params, forms);
        r.splitting_slack = splitting_slack(*prev, state, params, forms);
    }
    return r;
}

DualNorms::DualNorms(const FormSet& forms) : forms_(&forms) {
    Eigen::SparseMatrix<double> s = forms.M_surf + forms.K_surf;
    surf_.compute(s);
    Eigen::SparseMatrix<double> b = forms.M_bulk + forms.K_bulk;
    bulk_.compute(b);
    if (surf_.info() != Eigen::Success || bulk_.info() != Eigen::Success) {
        throw SolverError("DualNorms: Gram matrix M + K is not positive definite");
    }
}

double DualNorms::surf_sq(const Vector& z_G) const {
    const Vector r = forms_->M_surf * z_G;
    const Vector y = surf_.solve(r);
    return r.dot(y);
}

double DualNorms::bulk_sq(const Vector& z) const {
    const Vector r = forms_->M_bulk * z;
    const Vector y = bulk_.solve(r);
    return r.dot(y);
}

double dual_norm_surf(const Vector& z_G, const FormSet& forms) {
    return std::sqrt(std::max(0.0, DualNorms(forms).surf_sq(z_G)));
}

ContDepMetric cont_dep_metric(const Trajectory& traj1, const Trajectory& traj2, const ModelParams& data1,
                              const ModelParams& data2, const FormSet& forms) {
    if (traj1.states.size() != traj2.states.size() || traj1.states.empty()) {
        throw Error("cont_dep_metric: trajectories have different lengths");
    }
    if (std::abs(traj1.dt - traj2.dt) > 1e-14 * std::max(1.0, traj1.dt)) {
        throw Error("cont_dep_metric: trajectories use different time steps");
    }
    for (std::size_t n = 0; n < traj1.states.size(); ++n) {
        const auto& a = traj1.states[n];
        const auto& b = traj2.states[n];
        if (a.u.size() != b.u.size() || a.u.size() != forms.num_bulk() || std::abs(a.t - b.t) > 1e-12) {
            throw Error("cont_dep_metric: trajectories are not on the same mesh/time grid (step " +
                        std::to_string(n) + ")");
        }
    }

    const DualNorms dual(forms);
    const double dt = traj1.dt;
    ContDepMetric m;
    double integral = 0.0;  // left-endpoint accumulation
    for (std::size_t n = 0; n < traj1.states.size(); ++n) {
        const auto& a = traj1.states[n];
        const auto& b = traj2.states[n];
        const Vector du = a.u - b.u;
        const Vector du_G = a.u_G - b.u_G;
        m.t.push_back(a.t);
        m.lhs.push_back(du.dot(forms.M_bulk * du) + dual.surf_sq(du_G) + integral);
        integral += dt * (du.dot((forms.M_bulk + forms.K_bulk) * du) + du_G.dot((forms.M_surf + forms.K_surf) * du_G));
    }

    const auto& a0 = traj1.states.front();
    const auto& b0 = traj2.states.front();
    const Vector du0 = a0.u - b0.u;
    m.rhs_data = du0.dot(forms.M_bulk * du0) + dual.surf_sq(a0.u_G - b0.u_G);
    const std::size_t steps = traj1.states.size() - 1;
    for (std::size_t n = 0; n < steps; ++n) {
        const double t = a0.t + static_cast<double>(n) * dt;
        const Vector df = data1.bulk_source(n, t, forms.num_bulk()) - data2.bulk_source(n, t, forms.num_bulk());
        const Vector dfg = data1.surf_source(n, t, forms.num_surf()) - data2.surf_source(n, t, forms.num_surf());
        m.rhs_data += dt * (dual.bulk_sq(df) + dual.surf_sq(dfg));
    }
    return m;
}

}  // namespace bulksurf
