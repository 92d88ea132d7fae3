#include "bulksurf/assembly.hpp"

#include <cmath>
#include <cstdint>
#include <ostream>
#include <iomanip>

#include <Eigen/SparseLU>

#include "bulksurf/errors.hpp"

namespace bulksurf {

namespace {

using Triplet = Eigen::Triplet<double>;

// Rebuilds the diagonal of a stiffness matrix as minus the off-diagonal row
// sum, so constants lie in the kernel up to the final summation only.
SparseMatrix with_balanced_diagonal(const SparseMatrix& k) {
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(k.nonZeros()) + static_cast<std::size_t>(k.rows()));
    for (Eigen::Index i = 0; i < k.outerSize(); ++i) {
        double off = 0.0;
        for (SparseMatrix::InnerIterator it(k, i); it; ++it) {
            if (it.col() != i) {
                off += it.value();
                trips.emplace_back(static_cast<int>(i), static_cast<int>(it.col()), it.value());
            }
        }
        trips.emplace_back(static_cast<int>(i), static_cast<int>(i), -off);
    }
    SparseMatrix out(k.rows(), k.cols());
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

SparseMatrix diagonal_matrix(const Vector& d) {
    SparseMatrix m(d.size(), d.size());
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(d.size()));
    for (Eigen::Index i = 0; i < d.size(); ++i) trips.emplace_back(static_cast<int>(i), static_cast<int>(i), d[i]);
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

// Deterministic start vector for the eigen iterations (splitmix64 stream).
Vector start_vector(Eigen::Index n) {
    Vector v(n);
    std::uint64_t state = 0x9e3779b97f4a7c15ULL;
    for (Eigen::Index i = 0; i < n; ++i) {
        state += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z ^= z >> 31;
        v[i] = static_cast<double>(z >> 11) * 0x1.0p-53 - 0.5;
    }
    return v;
}

}  // namespace

SparseMatrix FormSet::lift(const SparseMatrix& boundary_form) const {
    SparseMatrix out = trace * boundary_form * SparseMatrix(trace.transpose());
    return out;
}

FormSet assemble(const MeshBundle& mesh, MassKind mass) {
    const auto n = static_cast<Eigen::Index>(mesh.num_nodes());
    const auto nb = static_cast<Eigen::Index>(mesh.num_boundary_nodes());

    std::vector<Triplet> mt, kt;
    mt.reserve(mesh.triangles().size() * 9);
    kt.reserve(mesh.triangles().size() * 9);
    for (std::size_t t = 0; t < mesh.triangles().size(); ++t) {
        const auto& tri = mesh.triangles()[t];
        const auto& p0 = mesh.nodes()[tri[0]];
        const auto& p1 = mesh.nodes()[tri[1]];
        const auto& p2 = mesh.nodes()[tri[2]];
        const double area = mesh.triangle_area(t);
        const double b[3] = {p1.y - p2.y, p2.y - p0.y, p0.y - p1.y};
        const double c[3] = {p2.x - p1.x, p0.x - p2.x, p1.x - p0.x};
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                mt.emplace_back(tri[i], tri[j], area / 12.0 * (i == j ? 2.0 : 1.0));
                kt.emplace_back(tri[i], tri[j], (b[i] * b[j] + c[i] * c[j]) / (4.0 * area));
            }
        }
    }

    std::vector<Triplet> ms, ks;
    for (std::size_t e = 0; e < mesh.boundary_edges().size(); ++e) {
        const int a = static_cast<int>(e);
        const int b = static_cast<int>((e + 1) % mesh.boundary_edges().size());
        const double h = mesh.edge_length(e);
        ms.emplace_back(a, a, h / 3.0);
        ms.emplace_back(b, b, h / 3.0);
        ms.emplace_back(a, b, h / 6.0);
        ms.emplace_back(b, a, h / 6.0);
        ks.emplace_back(a, a, 1.0 / h);
        ks.emplace_back(b, b, 1.0 / h);
        ks.emplace_back(a, b, -1.0 / h);
        ks.emplace_back(b, a, -1.0 / h);
    }

    FormSet f;
    f.mass_kind = mass;
    f.M_bulk.resize(n, n);
    f.M_bulk.setFromTriplets(mt.begin(), mt.end());
    SparseMatrix k_raw(n, n);
    k_raw.setFromTriplets(kt.begin(), kt.end());
    f.K_bulk = with_balanced_diagonal(k_raw);
    f.M_surf.resize(nb, nb);
    f.M_surf.setFromTriplets(ms.begin(), ms.end());
    SparseMatrix ks_raw(nb, nb);
    ks_raw.setFromTriplets(ks.begin(), ks.end());
    f.K_surf = with_balanced_diagonal(ks_raw);

    f.lumped_bulk = f.M_bulk * Vector::Ones(n);
    f.lumped_surf = f.M_surf * Vector::Ones(nb);
    if (mass == MassKind::lumped) {
        f.M_bulk = diagonal_matrix(f.lumped_bulk);
        f.M_surf = diagonal_matrix(f.lumped_surf);
    }

    std::vector<Triplet> tt;
    for (Eigen::Index k = 0; k < nb; ++k) tt.emplace_back(mesh.trace_map()[k], static_cast<int>(k), 1.0);
    f.trace.resize(n, nb);
    f.trace.setFromTriplets(tt.begin(), tt.end());
    return f;
}

double max_rayleigh(const SparseMatrix& num, const SparseMatrix& den, const Vector& constraint,
                    const EigenOptions& opts, int* iterations) {
    const Eigen::Index n = den.rows();
    const bool constrained = constraint.size() > 0;
    const Eigen::Index m = constrained ? n + 1 : n;

    // Bordered operator [den c; c^T 0] realizes the inverse on {c^T x = 0}.
    std::vector<Triplet> trips;
    for (Eigen::Index i = 0; i < den.outerSize(); ++i) {
        for (SparseMatrix::InnerIterator it(den, i); it; ++it) {
            trips.emplace_back(static_cast<int>(i), static_cast<int>(it.col()), it.value());
        }
    }
    if (constrained) {
        for (Eigen::Index i = 0; i < n; ++i) {
            if (constraint[i] != 0.0) {
                trips.emplace_back(static_cast<int>(i), static_cast<int>(n), constraint[i]);
                trips.emplace_back(static_cast<int>(n), static_cast<int>(i), constraint[i]);
            }
        }
    }
    Eigen::SparseMatrix<double> op(m, m);
    op.setFromTriplets(trips.begin(), trips.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(op);
    if (lu.info() != Eigen::Success) throw SolverError("max_rayleigh: pencil is singular on the constraint subspace");

    Vector x = start_vector(n);
    if (constrained) x -= (constraint.dot(x) / constraint.squaredNorm()) * constraint;
    double rho_prev = 0.0;
    Vector rhs = Vector::Zero(m);
    for (int it = 1; it <= opts.max_iterations; ++it) {
        rhs.head(n) = num * x;
        Vector sol = lu.solve(rhs);
        x = sol.head(n);
        const double nx = std::sqrt(x.dot(num * x));
        if (!(nx > 0.0) || !std::isfinite(nx)) throw SolverError("max_rayleigh: iteration collapsed");
        x /= nx;
        const double rho = 1.0 / x.dot(den * x);
        if (it > 1 && std::abs(rho - rho_prev) <= opts.tolerance * std::abs(rho)) {
            if (iterations) *iterations = it;
            return rho;
        }
        rho_prev = rho;
    }
    throw SolverError("max_rayleigh: inverse iteration did not converge", -1, opts.max_iterations);
}

PoincareConstants poincare_constants(const FormSet& forms, const MeshBundle& mesh, const EigenOptions& opts) {
    (void)mesh;
    PoincareConstants pc;
    const SparseMatrix surf_mass_lifted = forms.lift(forms.M_surf);
    const SparseMatrix surf_stiff_lifted = forms.lift(forms.K_surf);

    // first inequality: numerator |z|_H^2, denominator |grad z|^2 + |z|_G|^2
    SparseMatrix den1 = forms.K_bulk + surf_mass_lifted;
    pc.c_p1 = max_rayleigh(forms.M_bulk, den1, Vector(), opts, &pc.iterations[0]);

    // second: on the boundary, zero mean
    const Vector c2 = forms.M_surf * Vector::Ones(forms.num_surf());
    pc.c_p2 = max_rayleigh(forms.M_surf, forms.K_surf, c2, opts, &pc.iterations[1]);

    // third: full V norm of the pair over the coupled gradient form, zero boundary mean
    SparseMatrix num3 = forms.M_bulk + forms.K_bulk + surf_mass_lifted + surf_stiff_lifted;
    SparseMatrix den3 = forms.K_bulk + surf_stiff_lifted;
    const Vector c3 = forms.trace * c2;
    pc.c_p3 = max_rayleigh(num3, den3, c3, opts, &pc.iterations[2]);
    return pc;
}

void dump_coo(const SparseMatrix& m, std::ostream& out) {
    out << std::setprecision(17);
    for (Eigen::Index i = 0; i < m.outerSize(); ++i) {
        for (SparseMatrix::InnerIterator it(m, i); it; ++it) out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    }
}

}  // namespace bulksurf
