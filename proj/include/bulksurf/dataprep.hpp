#pragma once

#include <utility>
#include <vector>

#include "bulksurf/assembly.hpp"
#include "bulksurf/graphs.hpp"
#include "bulksurf/model.hpp"

namespace bulksurf {

/// Data for the eps-weighted mean m_eps and the inner product
/// ((z, y)) = eps (z, y)_H + (z_G, y_G)_HG of the relaxed problem.
struct WeightedMeanContext {
    double eps = 1.0;
    double bulk_measure = 0.0;  ///< 1^T M_bulk 1
    double surf_measure = 0.0;  ///< 1^T M_surf 1
    const FormSet* forms = nullptr;

    static WeightedMeanContext make(const FormSet& forms, double eps);
};

double weighted_mean(const WeightedMeanContext& ctx, const Vector& z, const Vector& z_G);

/// z - m_eps(z) 1, applied to both components.
std::pair<Vector, Vector> project_P_eps(const WeightedMeanContext& ctx, const Vector& z, const Vector& z_G);

/// Subtracts the bulk and boundary means separately. Orthogonal for the
/// unweighted norm but does not keep z_G equal to the trace of z; kept only
/// so tests can show that.
std::pair<Vector, Vector> project_separate_means(const WeightedMeanContext& ctx, const Vector& z,
                                                 const Vector& z_G);

/// ((z, z)) for the pair.
double weighted_norm_sq(const WeightedMeanContext& ctx, const Vector& z, const Vector& z_G);

/// Nodal values at t_n = n dt, n = 0..steps.
using SourceSeries = std::vector<Vector>;

SourceSeries sample_series(const FieldFn& f, Eigen::Index size, double dt, std::size_t steps);

/// Backward Euler for eps g' + g = f, g(0) = 0, on the grid of the series:
///   g_n = (eps/dt g_{n-1} + f_n) / (1 + eps/dt).
SourceSeries smooth_source(const SourceSeries& f, double eps, double dt);

/// Exact solution for a time-constant source: f (1 - exp(-t_n/eps)).
SourceSeries smooth_source_exact(const Vector& f, double eps, double dt, std::size_t steps);

/// Field function that replays a series by step index.
FieldFn series_field(SourceSeries series);

/// sqrt(sum_{n>=1} dt |a_n - b_n|^2_W) for a symmetric weight matrix W.
double l2_time_error(const SourceSeries& a, const SourceSeries& b, const SparseMatrix& weight, double dt);

/// Solves (M + eps K) u + trace (M_G + eps K_G) u_G = M u0 + trace M_G u0_G
/// on the coupled space. Returns (u, trace of u).
std::pair<Vector, Vector> smooth_initial(const Vector& u0, const Vector& u0_G, double eps, const FormSet& forms);

/// a(z, z) = z^T K z + z_G^T K_G z_G
double gradient_form(const Vector& z, const Vector& z_G, const FormSet& forms);

/// Constant of the boundary estimate |u0_G,eps - u0_G|_HG <= eps^{1/2} C~0:
/// sqrt(a(u0, u0)/2).
double smoothing_constant_initial(const Vector& u0, const Vector& u0_G, const FormSet& forms);

/// Calibrated constant for the envelope bound
///   int_G bhat_{G,lam}(u0_G,eps) <= (1 + eps^{1/2}/lam) C0.
/// Taken as the max of the unsmoothed bulk+boundary envelope integral, the
/// unsmoothed boundary integral, and 3 C~0 |(u0, u0_G)|_H / varrho (the
/// factor 3 absorbs the lumped/consistent quadrature mismatch).
double envelope_constant(const Vector& u0, const Vector& u0_G, const ModelParams& params, const FormSet& forms);

/// (1 + eps^{1/2}/lam)^{1/2}
double c_star(double eps, double lam);

}  // namespace bulksurf
