#include "bulksurf/dataprep.hpp"

#include <cmath>
#include <string>

#include <Eigen/SparseCholesky>

#include "bulksurf/errors.hpp"

namespace bulksurf {

WeightedMeanContext WeightedMeanContext::make(const FormSet& forms, double eps) {
    if (!(eps > 0.0 && eps <= 1.0)) throw ConfigError("weighted mean: eps must lie in (0, 1]");
    WeightedMeanContext ctx;
    ctx.eps = eps;
    ctx.bulk_measure = forms.lumped_bulk.sum();
    ctx.surf_measure = forms.lumped_surf.sum();
    ctx.forms = &forms;
    if (!(ctx.bulk_measure > 0.0) || !(ctx.surf_measure > 0.0)) throw MeshError("weighted mean: empty measure");
    return ctx;
}

double weighted_mean(const WeightedMeanContext& ctx, const Vector& z, const Vector& z_G) {
    // lumped weights are the row sums of M, so w.z == 1^T M z
    const double num = ctx.eps * ctx.forms->lumped_bulk.dot(z) + ctx.forms->lumped_surf.dot(z_G);
    return num / (ctx.eps * ctx.bulk_measure + ctx.surf_measure);
}

std::pair<Vector, Vector> project_P_eps(const WeightedMeanContext& ctx, const Vector& z, const Vector& z_G) {
    const double m = weighted_mean(ctx, z, z_G);
    return {z.array() - m, z_G.array() - m};
}

std::pair<Vector, Vector> project_separate_means(const WeightedMeanContext& ctx, const Vector& z,
                                                 const Vector& z_G) {
    const double mb = ctx.forms->lumped_bulk.dot(z) / ctx.bulk_measure;
    const double ms = ctx.forms->lumped_surf.dot(z_G) / ctx.surf_measure;
    return {z.array() - mb, z_G.array() - ms};
}

double weighted_norm_sq(const WeightedMeanContext& ctx, const Vector& z, const Vector& z_G) {
    return ctx.eps * z.dot(ctx.forms->M_bulk * z) + z_G.dot(ctx.forms->M_surf * z_G);
}

SourceSeries sample_series(const FieldFn& f, Eigen::Index size, double dt, std::size_t steps) {
    SourceSeries out;
    out.reserve(steps + 1);
    for (std::size_t n = 0; n <= steps; ++n) {
        if (!f) {
            out.push_back(Vector::Zero(size));
            continue;
        }
        Vector v = f(n, static_cast<double>(n) * dt);
        if (v.size() != size) throw ConfigError("source field returned a vector of the wrong size");
        out.push_back(std::move(v));
    }
    return out;
}

SourceSeries smooth_source(const SourceSeries& f, double eps, double dt) {
    if (!(eps > 0.0)) throw ConfigError("smooth_source: eps must be > 0");
    if (!(dt > 0.0)) throw ConfigError("smooth_source: dt must be > 0");
    SourceSeries g;
    if (f.empty()) return g;
    g.reserve(f.size());
    g.push_back(Vector::Zero(f.front().size()));
    const double a = eps / dt;
    for (std::size_t n = 1; n < f.size(); ++n) g.push_back((a * g.back() + f[n]) / (1.0 + a));
    return g;
}

SourceSeries smooth_source_exact(const Vector& f, double eps, double dt, std::size_t steps) {
    if (!(eps > 0.0)) throw ConfigError("smooth_source_exact: eps must be > 0");
    SourceSeries g;
    g.reserve(steps + 1);
    for (std::size_t n = 0; n <= steps; ++n) g.push_back(-std::expm1(-static_cast<double>(n) * dt / eps) * f);
    return g;
}

FieldFn series_field(SourceSeries series) {
    return [s = std::move(series)](std::size_t step, double) -> Vector {
        if (step >= s.size()) {
            throw Error("source series has " + std::to_string(s.size()) + " samples, step " + std::to_string(step) +
                        " requested");
        }
        return s[step];
    };
}

double l2_time_error(const SourceSeries& a, const SourceSeries& b, const SparseMatrix& weight, double dt) {
    if (a.size() != b.size()) throw Error("l2_time_error: series lengths differ");
    double s = 0.0;
    for (std::size_t n = 1; n < a.size(); ++n) {
        const Vector d = a[n] - b[n];
        s += dt * d.dot(weight * d);
    }
    return std::sqrt(std::max(0.0, s));
}

std::pair<Vector, Vector> smooth_initial(const Vector& u0, const Vector& u0_G, double eps, const FormSet& forms) {
    if (!(eps > 0.0)) throw ConfigError("smooth_initial: eps must be > 0");
    if (u0.size() != forms.num_bulk() || u0_G.size() != forms.num_surf()) {
        throw ConfigError("smooth_initial: data size does not match the mesh");
    }
    const SparseMatrix surf = forms.M_surf + eps * forms.K_surf;
    Eigen::SparseMatrix<double> a = forms.M_bulk + eps * forms.K_bulk + forms.lift(surf);
    const Vector rhs = forms.M_bulk * u0 + forms.trace * (forms.M_surf * u0_G);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(a);
    if (solver.info() != Eigen::Success) throw SolverError("smooth_initial: factorization failed");
    Vector u = solver.solve(rhs);
    if (solver.info() != Eigen::Success || !u.allFinite()) throw SolverError("smooth_initial: solve failed");
    Vector u_G = forms.restrict(u);
    return {std::move(u), std::move(u_G)};
}

double gradient_form(const Vector& z, const Vector& z_G, const FormSet& forms) {
    return z.dot(forms.K_bulk * z) + z_G.dot(forms.K_surf * z_G);
}

double smoothing_constant_initial(const Vector& u0, const Vector& u0_G, const FormSet& forms) {
    return std::sqrt(std::max(0.0, 0.5 * gradient_form(u0, u0_G, forms)));
}

double envelope_constant(const Vector& u0, const Vector& u0_G, const ModelParams& params, const FormSet& forms) {
    double joint = 0.0;
    for (Eigen::Index i = 0; i < u0.size(); ++i) joint += forms.lumped_bulk[i] * params.bulk_graph.primitive(u0[i]);
    double surf = 0.0;
    for (Eigen::Index k = 0; k < u0_G.size(); ++k) {
        joint += forms.lumped_surf[k] * params.bulk_graph.primitive(u0_G[k]);
        surf += forms.lumped_surf[k] * params.surf_graph.primitive(u0_G[k]);
    }
    const double h_norm = std::sqrt(u0.dot(forms.M_bulk * u0) + u0_G.dot(forms.M_surf * u0_G));
    const double growth = 3.0 * smoothing_constant_initial(u0, u0_G, forms) * h_norm / params.compat.varrho;
    return std::max({joint, surf, growth});
}

double c_star(double eps, double lam) {
    if (!(eps >= 0.0) || !(lam > 0.0)) throw ConfigError("c_star: need eps >= 0 and lam > 0");
    return std::sqrt(1.0 + std::sqrt(eps) / lam);
}

}  // namespace bulksurf
