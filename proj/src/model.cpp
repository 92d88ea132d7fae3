#include "bulksurf/model.hpp"

#include <cmath>
#include <string>

#include "bulksurf/errors.hpp"

namespace bulksurf {

void ModelParams::validate(const FormSet& forms) const {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("model.tau must be > 0");
    if (!(eps >= 0.0 && eps <= 1.0)) throw ConfigError("model.eps must lie in [0, 1]");
    if (!(lam > 0.0 && lam <= 1.0)) throw ConfigError("model.lambda must lie in (0, 1]");
    if (!(compat.varrho > 0.0) || !std::isfinite(compat.varrho)) throw ConfigError("model.varrho must be > 0");
    if (!(compat.c0 > 0.0) || !std::isfinite(compat.c0)) throw ConfigError("model.c0 must be > 0");
    if (u0.size() != forms.num_bulk()) {
        throw ConfigError("initial data u0 has " + std::to_string(u0.size()) + " entries, mesh has " +
                          std::to_string(forms.num_bulk()) + " nodes");
    }
    if (u0_G.size() != forms.num_surf()) {
        throw ConfigError("initial data u0_G has " + std::to_string(u0_G.size()) + " entries, boundary has " +
                          std::to_string(forms.num_surf()) + " nodes");
    }
    if (!u0.allFinite() || !u0_G.allFinite()) throw ConfigError("initial data contains non-finite values");
}

Vector ModelParams::bulk_source(std::size_t step, double t, Eigen::Index n) const {
    if (!f) return Vector::Zero(n);
    Vector v = f(step, t);
    if (v.size() != n) throw ConfigError("bulk source returned a vector of the wrong size");
    return v;
}

Vector ModelParams::surf_source(std::size_t step, double t, Eigen::Index nb) const {
    if (!f_G) return Vector::Zero(nb);
    Vector v = f_G(step, t);
    if (v.size() != nb) throw ConfigError("boundary source returned a vector of the wrong size");
    return v;
}

}  // namespace bulksurf
