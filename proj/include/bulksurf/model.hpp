#pragma once

#include <cstddef>
#include <functional>

#include "bulksurf/assembly.hpp"
#include "bulksurf/graphs.hpp"

namespace bulksurf {

/// Nodal field sampled on the run's time grid: (step index, time) -> values.
/// An empty function stands for the zero field.
using FieldFn = std::function<Vector(std::size_t step, double t)>;

/// Nodal fields at one time level. u_G / mu_G are the boundary traces of
/// u / mu; xi and xi_G hold the Yosida values of the graphs at u and u_G.
struct State {
    Vector u;
    Vector u_G;
    Vector mu;
    Vector mu_G;
    Vector xi;
    Vector xi_G;
    double t = 0.0;
    std::size_t step = 0;
};

struct ModelParams {
    double tau = 1.0;
    double eps = 0.0;
    double lam = 0.1;
    MonotoneGraph bulk_graph{GraphKind::cubic};
    MonotoneGraph surf_graph{GraphKind::cubic};
    LipschitzPerturbation bulk_pi = LipschitzPerturbation::linear(1.0);
    LipschitzPerturbation surf_pi = LipschitzPerturbation::linear(1.0);
    CompatibilityParams compat{};
    FieldFn f;
    FieldFn f_G;
    Vector u0;
    Vector u0_G;

    /// Effective Yosida parameter of the boundary graph (lambda * varrho).
    double surf_lam() const { return lam * compat.varrho; }

    /// Range checks; throws ConfigError. Sizes are checked against the forms.
    void validate(const FormSet& forms) const;

    Vector bulk_source(std::size_t step, double t, Eigen::Index n) const;
    Vector surf_source(std::size_t step, double t, Eigen::Index nb) const;
};

}  // namespace bulksurf
