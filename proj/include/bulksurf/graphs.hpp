#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bulksurf {

enum class GraphKind {
    zero,         ///< beta = 0 on R
    cubic,        ///< beta(r) = r^3 on R
    logarithmic,  ///< beta(r) = ln((1+r)/(1-r)) on (-1,1)
    indicator,    ///< beta = subdifferential of the indicator of [-1,1]
};

std::string_view to_string(GraphKind kind);
GraphKind graph_kind_from_string(std::string_view name);

/// Closed or open interval; infinite bounds stand for the whole line.
struct Interval {
    double lo;
    double hi;
    bool lo_closed;
    bool hi_closed;

    bool contains(double r) const;
    /// True when every point of `inner` lies in this interval.
    bool contains(const Interval& inner) const;
};

/// Maximal monotone graph beta = d(beta_hat) with beta_hat(0) = 0, together
/// with its lambda-parametrized resolvent / Yosida / Moreau-envelope calculus.
///
/// The boundary graph uses the scaled parameter lambda * varrho; callers pass
/// that product as `lam_eff`. beta itself is never evaluated by the solver,
/// only yosida(), envelope() and minimal_section().
class MonotoneGraph {
public:
    explicit MonotoneGraph(GraphKind kind, double log_c = 1.0);

    GraphKind kind() const noexcept { return kind_; }
    /// Constant c of the logarithmic double well (enters only its default perturbation).
    double log_c() const noexcept { return log_c_; }
    Interval domain() const;
    /// Closure of the effective domain of beta_hat.
    Interval primitive_domain() const;

    bool in_domain(double r) const { return domain().contains(r); }

    /// J(r) = (I + lam_eff beta)^{-1} r
    double resolvent(double lam_eff, double r) const;
    /// (r - J(r)) / lam_eff
    double yosida(double lam_eff, double r) const;
    /// Derivative of yosida(); at the kinks of the indicator the inner branch (slope 0) is taken.
    double yosida_derivative(double lam_eff, double r) const;
    /// Moreau envelope |r - J|^2 / (2 lam_eff) + beta_hat(J).
    double envelope(double lam_eff, double r) const;
    /// Element of beta(r) of least modulus. Throws DomainError outside D(beta).
    double minimal_section(double r) const;
    /// beta_hat(r); +inf outside the effective domain.
    double primitive(double r) const;

private:
    GraphKind kind_;
    double log_c_;
};

/// Lipschitz perturbation pi with pi(0) = 0, and its primitive pi_hat.
class LipschitzPerturbation {
public:
    /// pi(r) = -slope * r, L = |slope|
    static LipschitzPerturbation linear(double slope);
    static LipschitzPerturbation zero() { return linear(0.0); }
    /// Piecewise-linear interpolation of (x, y) samples, constant extension
    /// beyond the table. Validated against pi(0) = 0 and the declared constant.
    static LipschitzPerturbation tabulated(std::vector<double> x, std::vector<double> y, double lipschitz);
    /// The perturbation of the double-well family the graph belongs to:
    /// -r for cubic / indicator, -2 c r for logarithmic, 0 for zero.
    static LipschitzPerturbation default_for(const MonotoneGraph& graph);

    double operator()(double r) const;
    double primitive(double r) const;
    double lipschitz_constant() const noexcept { return lipschitz_; }
    bool is_tabulated() const noexcept { return !x_.empty(); }
    double slope() const noexcept { return slope_; }
    const std::vector<double>& table_x() const noexcept { return x_; }
    const std::vector<double>& table_y() const noexcept { return y_; }

private:
    LipschitzPerturbation() = default;

    double slope_ = 0.0;
    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> cumulative_;  // primitive at table nodes
    double lipschitz_ = 0.0;
};

struct CompatibilityParams {
    double varrho = 1.0;
    double c0 = 1.0;
};

struct CompatibilityReport {
    bool domain_ok = false;
    /// max over samples of |beta_lam(r)| - varrho |beta_G,lam(r)| - c0 (boundary graph at lam*varrho)
    double max_excess_yosida = 0.0;
    double worst_r_yosida = 0.0;
    /// same with minimal sections, over the samples lying in D(beta_G)
    double max_excess_minimal = 0.0;
    double worst_r_minimal = 0.0;
    std::size_t minimal_samples = 0;
    bool passes = false;
    std::string message;
};

/// Certifies the domination of the bulk graph by the boundary graph on the
/// sample set, both for minimal sections and for the Yosida approximations.
/// A domain containment violation is reported as a failed check.
CompatibilityReport check_compatibility(const MonotoneGraph& bulk, const MonotoneGraph& boundary,
                                        const CompatibilityParams& params, std::span<const double> samples,
                                        double lam);

/// `count` equispaced points covering the graph's domain clipped to [-radius, radius];
/// open endpoints are excluded.
std::vector<double> domain_grid(const MonotoneGraph& graph, std::size_t count, double radius = 3.0);

}  // namespace bulksurf
