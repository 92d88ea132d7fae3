#include "bulksurf/stepper.hpp"

#include <cmath>
#include <sstream>

#include "bulksurf/errors.hpp"

namespace bulksurf {

namespace {

using ColMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

void append(std::vector<Triplet>& out, const SparseMatrix& m, Eigen::Index row0, Eigen::Index col0, double scale) {
    for (Eigen::Index i = 0; i < m.outerSize(); ++i) {
        for (SparseMatrix::InnerIterator it(m, i); it; ++it) {
            out.emplace_back(static_cast<int>(row0 + it.row()), static_cast<int>(col0 + it.col()), scale * it.value());
        }
    }
}

}  // namespace

Stepper::Stepper(const FormSet& forms, ModelParams params, SolverOptions options)
    : forms_(&forms), params_(std::move(params)), options_(options) {
    params_.validate(forms);
    const SparseMatrix surf_mass = forms.lift(forms.M_surf);
    D_ = params_.eps * forms.M_bulk + surf_mass;
    A_ = forms.K_bulk + forms.lift(forms.K_surf);
    G_ = params_.tau * forms.M_bulk + params_.eps * surf_mass;
    w_surf_lifted_ = forms.trace * forms.lumped_surf;
    boundary_of_.assign(static_cast<std::size_t>(forms.num_bulk()), -1);
    for (SparseMatrix::Index i = 0; i < forms.trace.outerSize(); ++i) {
        for (SparseMatrix::InnerIterator it(forms.trace, i); it; ++it) boundary_of_[it.row()] = static_cast<int>(it.col());
    }
}

State Stepper::initial_state() const {
    State s;
    s.u = params_.u0;
    s.u_G = params_.u0_G;
    const Vector trace = forms_->restrict(s.u);
    const double mismatch = (trace - s.u_G).lpNorm<Eigen::Infinity>();
    if (mismatch > 1e-12 * std::max(1.0, trace.lpNorm<Eigen::Infinity>())) {
        std::ostringstream os;
        os << "initial boundary data is not the trace of the bulk data (max mismatch " << mismatch << ")";
        throw ConfigError(os.str());
    }
    s.u_G = trace;
    s.mu = Vector::Zero(s.u.size());
    s.mu_G = Vector::Zero(s.u_G.size());
    s.xi = s.u.unaryExpr([this](double r) { return params_.bulk_graph.yosida(params_.lam, r); });
    const double lg = params_.surf_lam();
    s.xi_G = s.u_G.unaryExpr([this, lg](double r) { return params_.surf_graph.yosida(lg, r); });
    s.t = 0.0;
    s.step = 0;
    return s;
}

void Stepper::nonlinear(const Vector& u, Vector& value, Vector& deriv) const {
    const Eigen::Index n = u.size();
    const double lg = params_.surf_lam();
    value.resize(n);
    deriv.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double wb = forms_->lumped_bulk[i];
        value[i] = wb * params_.bulk_graph.yosida(params_.lam, u[i]);
        deriv[i] = wb * params_.bulk_graph.yosida_derivative(params_.lam, u[i]);
        if (boundary_of_[i] >= 0) {
            const double ws = w_surf_lifted_[i];
            value[i] += ws * params_.surf_graph.yosida(lg, u[i]);
            deriv[i] += ws * params_.surf_graph.yosida_derivative(lg, u[i]);
        }
    }
}

Vector Stepper::residual(const Vector& x, const Vector& u_prev, const Vector& rhs_fixed, double dt) const {
    const Eigen::Index n = u_prev.size();
    const auto u = x.head(n);
    const auto mu = x.tail(n);
    const Vector du = u - u_prev;
    Vector nl, dnl;
    nonlinear(u, nl, dnl);
    Vector r(2 * n);
    r.head(n) = D_ * du + dt * (A_ * mu);
    r.tail(n) = D_ * mu - (G_ * du) / dt - A_ * u - nl - rhs_fixed;
    return r;
}

State Stepper::step(const State& state, double dt, StepStats* stats) const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time step must be positive");
    const Eigen::Index n = forms_->num_bulk();
    const Eigen::Index nb = forms_->num_surf();
    const std::size_t next_step = state.step + 1;
    const double t_next = state.t + dt;

    // Explicit perturbation and sources at t^{n+1}.
    Vector rhs_fixed(n);
    for (Eigen::Index i = 0; i < n; ++i) rhs_fixed[i] = forms_->lumped_bulk[i] * params_.bulk_pi(state.u[i]);
    {
        Vector pg(nb);
        for (Eigen::Index k = 0; k < nb; ++k) pg[k] = forms_->lumped_surf[k] * params_.surf_pi(state.u_G[k]);
        rhs_fixed += forms_->trace * pg;
    }
    const Vector f = params_.bulk_source(next_step, t_next, n);
    const Vector f_G = params_.surf_source(next_step, t_next, nb);
    rhs_fixed -= forms_->M_bulk * f + forms_->trace * (forms_->M_surf * f_G);

    // Jacobian pattern: [[D, dt A], [-(G/dt + A + diag N'), D]]; the
    // lower-left diagonal is always present so its values can be updated.
    std::vector<Triplet> trips;
    append(trips, D_, 0, 0, 1.0);
    append(trips, A_, 0, n, dt);
    append(trips, G_, n, 0, -1.0 / dt);
    append(trips, A_, n, 0, -1.0);
    append(trips, D_, n, n, 1.0);
    for (Eigen::Index i = 0; i < n; ++i) trips.emplace_back(static_cast<int>(n + i), static_cast<int>(i), 0.0);
    ColMatrix jac_base(2 * n, 2 * n);
    jac_base.setFromTriplets(trips.begin(), trips.end());
    jac_base.makeCompressed();
    std::vector<Eigen::Index> diag_slot(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) diag_slot[i] = &jac_base.coeffRef(n + i, i) - jac_base.valuePtr();

    Eigen::SparseLU<ColMatrix> lu;
    lu.analyzePattern(jac_base);

    Vector x(2 * n);
    x.head(n) = state.u;
    x.tail(n) = state.mu;
    Vector r = residual(x, state.u, rhs_fixed, dt);
    double rn = r.norm();
    StepStats local;
    int it = 0;
    for (;; ++it) {
        local.residual_history.push_back(rn);
        if (!std::isfinite(rn)) {
            throw SolverError("Newton produced a non-finite residual", static_cast<int>(next_step), it, rn);
        }
        if (rn <= options_.newton_tol) break;
        if (it >= options_.newton_max_iter) {
            std::ostringstream os;
            os << "Newton did not converge in " << it << " iterations (residual " << rn << ")";
            throw SolverError(os.str(), static_cast<int>(next_step), it, rn);
        }
        Vector nl, dnl;
        nonlinear(x.head(n), nl, dnl);
        ColMatrix jac = jac_base;
        for (Eigen::Index i = 0; i < n; ++i) jac.valuePtr()[diag_slot[i]] -= dnl[i];
        lu.factorize(jac);
        if (lu.info() != Eigen::Success) {
            throw SolverError("Jacobian is singular (rank loss in the monolithic system)", static_cast<int>(next_step),
                              it, rn);
        }
        const Vector delta = lu.solve(-r);
        if (lu.info() != Eigen::Success || !delta.allFinite()) {
            throw SolverError("linear solve failed", static_cast<int>(next_step), it, rn);
        }

        double alpha = 1.0;
        bool accepted = false;
        for (int ls = 0; ls <= options_.line_search_max; ++ls, alpha *= 0.5) {
            Vector x_try = x + alpha * delta;
            Vector r_try = residual(x_try, state.u, rhs_fixed, dt);
            const double rn_try = r_try.norm();
            if (rn_try < (1.0 - 1e-4 * alpha) * rn) {
                x = std::move(x_try);
                r = std::move(r_try);
                rn = rn_try;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            // No descent left: accept if we are already at the roundoff floor.
            if (rn <= 1e3 * options_.newton_tol) break;
            std::ostringstream os;
            os << "Newton line search failed (residual " << rn << ")";
            throw SolverError(os.str(), static_cast<int>(next_step), it, rn);
        }
    }

    State out;
    out.u = x.head(n);
    out.mu = x.tail(n);
    out.u_G = forms_->restrict(out.u);
    out.mu_G = forms_->restrict(out.mu);
    out.xi = out.u.unaryExpr([this](double v) { return params_.bulk_graph.yosida(params_.lam, v); });
    const double lg = params_.surf_lam();
    out.xi_G = out.u_G.unaryExpr([this, lg](double v) { return params_.surf_graph.yosida(lg, v); });
    out.t = t_next;
    out.step = next_step;

    local.newton_iters = it;
    local.residual = rn;
    if (stats) *stats = std::move(local);
    return out;
}

State step_regularized(const State& state, const ModelParams& params, const FormSet& forms, double dt,
                       StepStats* stats, const SolverOptions& options) {
    if (!(params.eps > 0.0)) throw ConfigError("step_regularized requires eps > 0");
    return Stepper(forms, params, options).step(state, dt, stats);
}

State step_limit(const State& state, const ModelParams& params, const FormSet& forms, double dt, StepStats* stats,
                 const SolverOptions& options) {
    if (params.eps != 0.0) throw ConfigError("step_limit requires eps = 0");
    return Stepper(forms, params, options).step(state, dt, stats);
}

std::size_t step_count(double dt, double t_end) {
    if (!(t_end > 0.0)) throw ConfigError("time.t_end must be > 0");
    if (!(dt > 0.0) || dt > t_end * (1.0 + 1e-12)) throw ConfigError("time.dt must satisfy 0 < dt <= t_end");
    const double ratio = t_end / dt;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
        throw ConfigError("time.t_end must be an integer multiple of time.dt");
    }
    return static_cast<std::size_t>(rounded);
}

Trajectory run(const FormSet& forms, const ModelParams& params, double dt, double t_end, const DiagnosticsSink& hooks,
               const SolverOptions& options, bool keep_states) {
    const std::size_t steps = step_count(dt, t_end);
    const Stepper stepper(forms, params, options);
    Trajectory traj;
    traj.dt = dt;
    State current = stepper.initial_state();
    DiagnosticsRecord rec = make_record(current, nullptr, params, forms);
    if (hooks) hooks(current, rec);
    traj.records.push_back(rec);
    if (keep_states) traj.states.push_back(current);
    for (std::size_t k = 0; k < steps; ++k) {
        StepStats stats;
        State next;
        try {
            next = stepper.step(current, dt, &stats);
        } catch (const SolverError& e) {
            throw SolverError(std::string(e.what()) + " at step " + std::to_string(k + 1), static_cast<int>(k + 1),
                              e.iterations(), e.residual());
        }
        // Grid times are k*dt rather than accumulated sums.
        next.t = static_cast<double>(k + 1) * dt;
        rec = make_record(next, &current, params, forms, stats.newton_iters, stats.residual);
        if (hooks) hooks(next, rec);
        traj.records.push_back(rec);
        if (keep_states) traj.states.push_back(next);
        current = std::move(next);
    }
    return traj;
}

}  // namespace bulksurf
