#pragma once

#include <memory>
#include <vector>

#include <Eigen/SparseCholesky>

#include "bulksurf/model.hpp"

namespace bulksurf {

struct DiagnosticsRecord {
    std::size_t step = 0;
    double t = 0.0;
    double boundary_mass = 0.0;
    double total_mass_eps = 0.0;
    double energy = 0.0;
    double dissipation = 0.0;
    double grad_u_bulk = 0.0;
    double grad_u_surf = 0.0;
    double env_bulk = 0.0;
    double env_surf = 0.0;
    double omega = 0.0;
    int newton_iters = 0;
    double residual = 0.0;
    /// Concave-splitting remainder of the last step: energy change plus
    /// dissipation never exceeds it. Zero for the initial record.
    double splitting_slack = 0.0;
};

/// Lyapunov functional of the scheme, envelope integrals by nodal quadrature.
/// Sources are taken at the state's own time level.
double energy(const State& state, const ModelParams& params, const FormSet& forms);

double envelope_integral_bulk(const Vector& u, const ModelParams& params, const FormSet& forms);
double envelope_integral_surf(const Vector& u_G, const ModelParams& params, const FormSet& forms);

/// tau |du|^2/dt + eps |du_G|^2/dt + dt |grad mu|^2 + dt |grad_G mu_G|^2
double dissipation(const State& prev, const State& next, const ModelParams& params, const FormSet& forms);

/// sum over nodes of w (pi_hat(u1) - pi_hat(u0) - pi(u0)(u1 - u0)), bulk plus boundary
double splitting_slack(const State& prev, const State& next, const ModelParams& params, const FormSet& forms);

/// E^{n+1} - E^n + dissipation - slack + (u^n, F^{n+1} - F^n), with F the
/// assembled source load. The scheme makes this nonpositive up to roundoff,
/// also for time-dependent sources.
double energy_balance(const State& prev, const State& next, const ModelParams& params, const FormSet& forms);

/// M_surf-weighted mean of mu_G.
double omega_mean(const State& state, const FormSet& forms);

DiagnosticsRecord make_record(const State& state, const State* prev, const ModelParams& params,
                              const FormSet& forms, int newton_iters = 0, double residual = 0.0);

/// Riesz maps of the discrete (I - Delta) inner products, factored once.
class DualNorms {
public:
    explicit DualNorms(const FormSet& forms);
    /// |z|_{V_G*}^2 = r^T (M_surf + K_surf)^{-1} r, r = M_surf z
    double surf_sq(const Vector& z_G) const;
    /// |z|_{V*}^2 with the bulk matrices
    double bulk_sq(const Vector& z) const;

private:
    const FormSet* forms_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> surf_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> bulk_;
};

/// |z_G|_{V_G*} (the norm, not its square), with a one-off factorization.
double dual_norm_surf(const Vector& z_G, const FormSet& forms);

struct Trajectory {
    std::vector<State> states;
    std::vector<DiagnosticsRecord> records;
    double dt = 0.0;
};

struct ContDepMetric {
    std::vector<double> t;
    std::vector<double> lhs;
    double rhs_data = 0.0;
};

/// Both sides of the continuous-dependence estimate for two runs on the same
/// mesh and time grid. Time integrals use the left-endpoint rule.
ContDepMetric cont_dep_metric(const Trajectory& traj1, const Trajectory& traj2, const ModelParams& data1,
                              const ModelParams& data2, const FormSet& forms);

}  // namespace bulksurf
