#pragma once

#include <functional>
#include <vector>

#include <Eigen/SparseLU>

#include "bulksurf/diagnostics.hpp"
#include "bulksurf/mesh.hpp"
#include "bulksurf/model.hpp"

namespace bulksurf {

struct SolverOptions {
    double newton_tol = 1e-12;  ///< Euclidean norm of the discrete residual
    int newton_max_iter = 50;
    int line_search_max = 30;
};

struct StepStats {
    int newton_iters = 0;
    double residual = 0.0;
    std::vector<double> residual_history;
};

/// Implicit Euler with convex/concave splitting for the coupled bulk/boundary
/// system. Unknowns are the bulk nodal vectors u and mu; boundary values are
/// their traces. Per step the monolithic system
///
///   D (u - u^n) + dt A mu = 0
///   D mu = G (u - u^n)/dt + A u + N(u) + P(u^n) - F^{n+1}
///
/// is solved by Newton, where D = eps M + M_G, G = tau M + eps M_G,
/// A = K + K_G (boundary forms lifted to bulk nodes), N collects the Yosida
/// terms (implicit) and P the Lipschitz perturbations (explicit).
/// eps = 0 gives the limit system; D is then singular on its own but the
/// monolithic Jacobian is not.
class Stepper {
public:
    Stepper(const FormSet& forms, ModelParams params, SolverOptions options = {});

    const ModelParams& params() const noexcept { return params_; }
    const FormSet& forms() const noexcept { return *forms_; }

    /// t = 0 state from params.u0 / u0_G. mu is not defined by the scheme at
    /// t = 0 and is reported as zero. Throws ConfigError if u0_G is not the
    /// trace of u0.
    State initial_state() const;

    State step(const State& state, double dt, StepStats* stats = nullptr) const;

private:
    Vector residual(const Vector& x, const Vector& u_prev, const Vector& rhs_fixed, double dt) const;
    void nonlinear(const Vector& u, Vector& value, Vector& deriv) const;

    const FormSet* forms_;
    ModelParams params_;
    SolverOptions options_;
    SparseMatrix D_, A_, G_;
    Vector w_surf_lifted_;  // lumped boundary weights placed on bulk nodes
    std::vector<int> boundary_of_;  // bulk node -> boundary index or -1
};

/// One step of the eps > 0 relaxed system.
State step_regularized(const State& state, const ModelParams& params, const FormSet& forms, double dt,
                       StepStats* stats = nullptr, const SolverOptions& options = {});
/// One step of the eps = 0 limit system.
State step_limit(const State& state, const ModelParams& params, const FormSet& forms, double dt,
                 StepStats* stats = nullptr, const SolverOptions& options = {});

using DiagnosticsSink = std::function<void(const State&, const DiagnosticsRecord&)>;

/// Number of uniform steps of size dt covering [0, t_end]; throws if t_end
/// is not an integer multiple of dt.
std::size_t step_count(double dt, double t_end);

/// States at t = 0, dt, ..., t_end with one diagnostics record each.
Trajectory run(const FormSet& forms, const ModelParams& params, double dt, double t_end,
               const DiagnosticsSink& hooks = {}, const SolverOptions& options = {}, bool keep_states = true);

}  // namespace bulksurf
