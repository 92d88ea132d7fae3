#include "bulksurf/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bulksurf/errors.hpp"

namespace bulksurf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Bracket for the logarithmic resolvent; J is kept strictly inside (-1, 1).
constexpr double kLogEdge = 1.0 - 1e-15;

// (1 + s) ln(1 + s) + (1 - s) ln(1 - s) on [-1, 1], with 0 ln 0 = 0.
double log_primitive(double s) {
    const double a = s >= 1.0 ? 0.0 : (1.0 - s) * std::log1p(-s);
    const double b = s <= -1.0 ? 0.0 : (1.0 + s) * std::log1p(s);
    return a + b;
}

// Root of s + a s^3 = r, r >= 0. Newton from the right of the root; f is
// convex on [0, inf) so the iterates decrease monotonically.
double cubic_resolvent_positive(double a, double r) {
    if (r == 0.0) return 0.0;
    double s = std::min(r, std::cbrt(r / a));
    for (int it = 0; it < 200; ++it) {
        const double f = s + a * s * s * s - r;
        const double next = s - f / (1.0 + 3.0 * a * s * s);
        if (!(next < s)) break;
        s = next;
    }
    return s;
}

// Root of s + a ln((1+s)/(1-s)) = r on [0, 1), r >= 0. Safeguarded Newton
// inside a shrinking bisection bracket.
double log_resolvent_positive(double a, double r) {
    if (r == 0.0) return 0.0;
    auto g = [a, r](double s) { return s + a * (std::log1p(s) - std::log1p(-s)) - r; };
    double lo = 0.0;
    double hi = std::min(r, kLogEdge);
    if (g(hi) <= 0.0) return hi;  // root closer to 1 than the bracket resolves
    double s = 0.5 * (lo + hi);
    for (int it = 0; it < 300; ++it) {
        const double val = g(s);
        if (val == 0.0) return s;
        if (val < 0.0) lo = s; else hi = s;
        const double deriv = 1.0 + 2.0 * a / ((1.0 - s) * (1.0 + s));
        double next = s - val / deriv;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - s) <= 1e-16 * std::max(1.0, std::abs(s)) || hi - lo <= 1e-16) {
            s = next;
            break;
        }
        s = next;
    }
    return s;
}

}  // namespace

std::string_view to_string(GraphKind kind) {
    switch (kind) {
        case GraphKind::zero: return "zero";
        case GraphKind::cubic: return "cubic";
        case GraphKind::logarithmic: return "logarithmic";
        case GraphKind::indicator: return "indicator";
    }
    return "unknown";
}

GraphKind graph_kind_from_string(std::string_view name) {
    if (name == "zero") return GraphKind::zero;
    if (name == "cubic") return GraphKind::cubic;
    if (name == "logarithmic" || name == "log") return GraphKind::logarithmic;
    if (name == "indicator") return GraphKind::indicator;
    throw ConfigError("unknown potential '" + std::string(name) + "' (expected zero|cubic|logarithmic|indicator)");
}

bool Interval::contains(double r) const {
    if (std::isnan(r)) return false;
    const bool above = lo_closed ? r >= lo : r > lo;
    const bool below = hi_closed ? r <= hi : r < hi;
    return above && below;
}

bool Interval::contains(const Interval& inner) const {
    const bool lo_ok = inner.lo > lo || (inner.lo == lo && (lo_closed || !inner.lo_closed));
    const bool hi_ok = inner.hi < hi || (inner.hi == hi && (hi_closed || !inner.hi_closed));
    return lo_ok && hi_ok;
}

MonotoneGraph::MonotoneGraph(GraphKind kind, double log_c) : kind_(kind), log_c_(log_c) {
    if (!(log_c > 0.0) || !std::isfinite(log_c)) throw ConfigError("logarithmic constant c must be positive");
}

Interval MonotoneGraph::domain() const {
    switch (kind_) {
        case GraphKind::logarithmic: return {-1.0, 1.0, false, false};
        case GraphKind::indicator: return {-1.0, 1.0, true, true};
        default: return {-kInf, kInf, false, false};
    }
}

Interval MonotoneGraph::primitive_domain() const {
    if (kind_ == GraphKind::logarithmic) return {-1.0, 1.0, true, true};
    return domain();
}

double MonotoneGraph::resolvent(double lam_eff, double r) const {
    if (!(lam_eff > 0.0)) throw DomainError("resolvent: lam_eff must be positive");
    const double sign = r < 0.0 ? -1.0 : 1.0;
    const double ar = std::abs(r);
    switch (kind_) {
        case GraphKind::zero: return r;
        case GraphKind::cubic: return sign * cubic_resolvent_positive(lam_eff, ar);
        case GraphKind::logarithmic: return sign * log_resolvent_positive(lam_eff, ar);
        case GraphKind::indicator: return std::clamp(r, -1.0, 1.0);
    }
    return r;
}

double MonotoneGraph::yosida(double lam_eff, double r) const {
    return (r - resolvent(lam_eff, r)) / lam_eff;
}

double MonotoneGraph::yosida_derivative(double lam_eff, double r) const {
    switch (kind_) {
        case GraphKind::zero: return 0.0;
        case GraphKind::indicator: return std::abs(r) > 1.0 ? 1.0 / lam_eff : 0.0;
        case GraphKind::cubic: {
            const double s = resolvent(lam_eff, r);
            const double d = 3.0 * s * s;
            return d / (1.0 + lam_eff * d);
        }
        case GraphKind::logarithmic: {
            const double s = resolvent(lam_eff, r);
            // beta'(s) / (1 + lam beta'(s)) with beta'(s) = 2 / (1 - s^2)
            const double q = (1.0 - s) * (1.0 + s);
            return 2.0 / (q + 2.0 * lam_eff);
        }
    }
    return 0.0;
}

double MonotoneGraph::envelope(double lam_eff, double r) const {
    const double s = resolvent(lam_eff, r);
    const double d = r - s;
    return d * d / (2.0 * lam_eff) + primitive(s);
}

double MonotoneGraph::minimal_section(double r) const {
    if (!in_domain(r)) {
        std::ostringstream os;
        os << "minimal_section: r = " << r << " lies outside D(beta) of the " << to_string(kind_) << " graph";
        throw DomainError(os.str());
    }
    switch (kind_) {
        case GraphKind::zero: return 0.0;
        case GraphKind::cubic: return r * r * r;
        case GraphKind::logarithmic: return std::log1p(r) - std::log1p(-r);
        case GraphKind::indicator: return 0.0;
    }
    return 0.0;
}

double MonotoneGraph::primitive(double r) const {
    if (!primitive_domain().contains(r)) return kInf;
    switch (kind_) {
        case GraphKind::zero: return 0.0;
        case GraphKind::cubic: return 0.25 * r * r * r * r;
        case GraphKind::logarithmic: return log_primitive(r);
        case GraphKind::indicator: return 0.0;
    }
    return 0.0;
}

LipschitzPerturbation LipschitzPerturbation::linear(double slope) {
    if (!std::isfinite(slope)) throw ConfigError("perturbation slope must be finite");
    LipschitzPerturbation p;
    p.slope_ = slope;
    p.lipschitz_ = std::abs(slope);
    return p;
}

LipschitzPerturbation LipschitzPerturbation::tabulated(std::vector<double> x, std::vector<double> y,
                                                       double lipschitz) {
    if (x.size() != y.size() || x.size() < 2) throw ConfigError("tabulated perturbation needs >= 2 (x, y) pairs");
    if (!(lipschitz >= 0.0)) throw ConfigError("tabulated perturbation: Lipschitz constant must be >= 0");
    for (std::size_t i = 1; i < x.size(); ++i) {
        if (!(x[i] > x[i - 1])) throw ConfigError("tabulated perturbation: x values must be strictly increasing");
        const double slope = (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
        if (std::abs(slope) > lipschitz * (1.0 + 1e-12) + 1e-12) {
            std::ostringstream os;
            os << "tabulated perturbation: slope " << slope << " on [" << x[i - 1] << ", " << x[i]
               << "] exceeds the declared Lipschitz constant " << lipschitz;
            throw ConfigError(os.str());
        }
    }
    LipschitzPerturbation p;
    p.x_ = std::move(x);
    p.y_ = std::move(y);
    p.lipschitz_ = lipschitz;
    p.cumulative_.assign(p.x_.size(), 0.0);
    for (std::size_t i = 1; i < p.x_.size(); ++i) {
        p.cumulative_[i] = p.cumulative_[i - 1] + 0.5 * (p.y_[i] + p.y_[i - 1]) * (p.x_[i] - p.x_[i - 1]);
    }
    if (std::abs(p(0.0)) > 1e-12) throw ConfigError("tabulated perturbation must satisfy pi(0) = 0");
    return p;
}

LipschitzPerturbation LipschitzPerturbation::default_for(const MonotoneGraph& graph) {
    switch (graph.kind()) {
        case GraphKind::zero: return zero();
        case GraphKind::logarithmic: return linear(2.0 * graph.log_c());
        default: return linear(1.0);
    }
}

double LipschitzPerturbation::operator()(double r) const {
    if (x_.empty()) return -slope_ * r;
    if (r <= x_.front()) return y_.front();
    if (r >= x_.back()) return y_.back();
    const auto it = std::upper_bound(x_.begin(), x_.end(), r);
    const std::size_t i = static_cast<std::size_t>(it - x_.begin());
    const double t = (r - x_[i - 1]) / (x_[i] - x_[i - 1]);
    return y_[i - 1] + t * (y_[i] - y_[i - 1]);
}

double LipschitzPerturbation::primitive(double r) const {
    if (x_.empty()) return -0.5 * slope_ * r * r;
    // Integral from x_.front() to r of the interpolant, then shifted so that pi_hat(0) = 0.
    auto from_front = [this](double v) {
        if (v <= x_.front()) return y_.front() * (v - x_.front());
        if (v >= x_.back()) return cumulative_.back() + y_.back() * (v - x_.back());
        const auto it = std::upper_bound(x_.begin(), x_.end(), v);
        const std::size_t i = static_cast<std::size_t>(it - x_.begin());
        const double pv = (*this)(v);
        return cumulative_[i - 1] + 0.5 * (y_[i - 1] + pv) * (v - x_[i - 1]);
    };
    return from_front(r) - from_front(0.0);
}

CompatibilityReport check_compatibility(const MonotoneGraph& bulk, const MonotoneGraph& boundary,
                                        const CompatibilityParams& params, std::span<const double> samples,
                                        double lam) {
    if (samples.empty()) throw ConfigError("check_compatibility: sample set is empty");
    if (!(params.varrho > 0.0) || !(params.c0 > 0.0)) throw ConfigError("check_compatibility: varrho and c0 must be positive");
    if (!(lam > 0.0)) throw ConfigError("check_compatibility: lambda must be positive");

    CompatibilityReport rep;
    rep.domain_ok = bulk.domain().contains(boundary.domain());
    rep.max_excess_yosida = -kInf;
    rep.max_excess_minimal = -kInf;
    const double lam_g = lam * params.varrho;
    for (double r : samples) {
        const double ex = std::abs(bulk.yosida(lam, r)) - params.varrho * std::abs(boundary.yosida(lam_g, r)) - params.c0;
        if (ex > rep.max_excess_yosida) {
            rep.max_excess_yosida = ex;
            rep.worst_r_yosida = r;
        }
        if (boundary.in_domain(r) && bulk.in_domain(r)) {
            ++rep.minimal_samples;
            const double exm = std::abs(bulk.minimal_section(r)) -
                               params.varrho * std::abs(boundary.minimal_section(r)) - params.c0;
            if (exm > rep.max_excess_minimal) {
                rep.max_excess_minimal = exm;
                rep.worst_r_minimal = r;
            }
        }
    }
    constexpr double tol = 1e-12;
    const bool yosida_ok = rep.max_excess_yosida <= tol;
    const bool minimal_ok = rep.minimal_samples == 0 || rep.max_excess_minimal <= tol;
    rep.passes = rep.domain_ok && yosida_ok && minimal_ok;

    std::ostringstream os;
    if (!rep.domain_ok) {
        os << "D(beta_G) of the " << to_string(boundary.kind()) << " graph is not contained in D(beta) of the "
           << to_string(bulk.kind()) << " graph";
    } else if (!minimal_ok) {
        os << "minimal-section domination fails at r = " << rep.worst_r_minimal << " (excess " << rep.max_excess_minimal
           << ")";
    } else if (!yosida_ok) {
        os << "Yosida domination fails at r = " << rep.worst_r_yosida << " (excess " << rep.max_excess_yosida << ")";
    } else {
        os << "domination holds on " << samples.size() << " samples";
    }
    if (!rep.domain_ok && rep.minimal_samples > 0 && rep.max_excess_minimal > tol) {
        os << "; minimal-section domination also fails at r = " << rep.worst_r_minimal;
    }
    rep.message = os.str();
    return rep;
}

std::vector<double> domain_grid(const MonotoneGraph& graph, std::size_t count, double radius) {
    if (count < 2) throw ConfigError("domain_grid: need at least 2 points");
    const Interval d = graph.domain();
    const double lo = std::max(d.lo, -radius);
    const double hi = std::min(d.hi, radius);
    const bool lo_open = d.lo >= -radius && !d.lo_closed;
    const bool hi_open = d.hi <= radius && !d.hi_closed;
    // Open ends: shift the grid inward by one spacing.
    const std::size_t slots = count - 1 + (lo_open ? 1 : 0) + (hi_open ? 1 : 0);
    const double h = (hi - lo) / static_cast<double>(slots);
    std::vector<double> grid(count);
    for (std::size_t i = 0; i < count; ++i) grid[i] = lo + h * static_cast<double>(i + (lo_open ? 1 : 0));
    return grid;
}

}  // namespace bulksurf
