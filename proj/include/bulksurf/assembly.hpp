#pragma once

#include <iosfwd>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "bulksurf/mesh.hpp"

namespace bulksurf {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class MassKind { consistent, lumped };

/// P1 bilinear forms on the bulk triangulation and on the boundary polyline.
///
/// Bulk matrices act on bulk node vectors, boundary matrices on
/// boundary-local vectors. `trace` is the n x nb matrix that places a
/// boundary vector on its bulk nodes, so trace^T restricts bulk to boundary
/// and trace * M_surf * trace^T is the boundary form pulled back to the
/// coupled space.
struct FormSet {
    SparseMatrix M_bulk;
    SparseMatrix K_bulk;
    SparseMatrix M_surf;
    SparseMatrix K_surf;
    SparseMatrix trace;
    /// Row sums of the mass matrices (nodal quadrature weights).
    Vector lumped_bulk;
    Vector lumped_surf;
    MassKind mass_kind = MassKind::consistent;

    Eigen::Index num_bulk() const { return M_bulk.rows(); }
    Eigen::Index num_surf() const { return M_surf.rows(); }

    /// trace * X * trace^T
    SparseMatrix lift(const SparseMatrix& boundary_form) const;
    Vector restrict(const Vector& bulk) const { return trace.transpose() * bulk; }
};

FormSet assemble(const MeshBundle& mesh, MassKind mass = MassKind::consistent);

struct PoincareConstants {
    double c_p1 = 0.0;
    double c_p2 = 0.0;
    double c_p3 = 0.0;
    int iterations[3] = {0, 0, 0};
};

struct EigenOptions {
    int max_iterations = 20000;
    double tolerance = 1e-13;
};

/// Discrete optimal constants of the three Poincare-Wirtinger inequalities:
///   |z|_H^2 <= c_p1 (|grad z|^2 + |z|_G|^2)
///   |z_G|_HG^2 <= c_p2 |grad_G z_G|^2           for int_G z_G = 0
///   |(z, z_G)|_V^2 <= c_p3 (|grad z|^2 + |grad_G z_G|^2)  for int_G z_G = 0
/// Each is the top eigenvalue of a (constrained) generalized pencil, found by
/// inverse iteration with a bordered sparse solve for the mean constraint.
PoincareConstants poincare_constants(const FormSet& forms, const MeshBundle& mesh, const EigenOptions& opts = {});

/// Largest generalized eigenvalue of (num, den) on {c^T x = 0} (or the whole
/// space when c is empty): max x^T num x / x^T den x. `den` must be definite
/// on the constraint subspace.
double max_rayleigh(const SparseMatrix& num, const SparseMatrix& den, const Vector& constraint,
                    const EigenOptions& opts, int* iterations = nullptr);

/// Coordinate text dump, one `i j value` line per stored entry.
void dump_coo(const SparseMatrix& m, std::ostream& out);

}  // namespace bulksurf
