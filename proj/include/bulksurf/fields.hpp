#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "bulksurf/mesh.hpp"
#include "bulksurf/model.hpp"

namespace bulksurf {

/// Analytic nodal data, written `kind:arg,arg,...`:
///   const:c
///   gauss:a,x0,y0,s       a exp(-|x - x0|^2 / (2 s^2))
///   trig:a,k              a r^k cos(k theta); equals a cos(k theta) on the unit circle
///   sep:a,kx,ky           a cos(kx x) cos(ky y)
///   random:seed,amp,modes smooth random polynomial, deterministic in the seed
///   trace                 (boundary data only) the trace of the bulk field
struct SpatialPreset {
    std::string kind = "const";
    std::vector<double> args{0.0};

    static SpatialPreset parse(std::string_view text);
    std::string str() const;
    double operator()(double x, double y) const;
    bool is_trace() const { return kind == "trace"; }
};

/// Time modulation of a source: `one`, `cos:w` (cos(w t)), `ramp:t1` (min(t/t1, 1)).
struct TimeFactor {
    std::string kind = "one";
    double w = 0.0;

    static TimeFactor parse(std::string_view text);
    std::string str() const;
    double operator()(double t) const;
};

Vector sample_bulk(const SpatialPreset& preset, const MeshBundle& mesh);
Vector sample_boundary(const SpatialPreset& preset, const MeshBundle& mesh);

/// values * factor(t)
FieldFn separable_field(Vector values, TimeFactor factor);

}  // namespace bulksurf
