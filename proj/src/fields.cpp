#include "bulksurf/fields.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>

#include "bulksurf/errors.hpp"

namespace bulksurf {

namespace {

std::vector<double> parse_args(std::string_view text, std::string_view what) {
    std::vector<double> out;
    while (!text.empty()) {
        const auto comma = text.find(',');
        std::string item(text.substr(0, comma));
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size() || !std::isfinite(v)) {
            throw ConfigError(std::string(what) + ": bad number '" + item + "'");
        }
        out.push_back(v);
        if (comma == std::string_view::npos) break;
        text.remove_prefix(comma + 1);
    }
    return out;
}

double unit_uniform(std::mt19937_64& rng) {
    // explicit conversion so the sequence does not depend on the library's distributions
    return static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

}  // namespace

SpatialPreset SpatialPreset::parse(std::string_view text) {
    SpatialPreset p;
    const auto colon = text.find(':');
    p.kind = std::string(text.substr(0, colon));
    p.args.clear();
    if (colon != std::string_view::npos) p.args = parse_args(text.substr(colon + 1), p.kind);
    std::size_t want = 0;
    if (p.kind == "const") want = 1;
    else if (p.kind == "gauss") want = 4;
    else if (p.kind == "trig") want = 2;
    else if (p.kind == "sep") want = 3;
    else if (p.kind == "random") want = 3;
    else if (p.kind == "trace") want = 0;
    else throw ConfigError("unknown field preset '" + p.kind + "'");
    if (p.args.size() != want) {
        throw ConfigError("preset '" + p.kind + "' takes " + std::to_string(want) + " arguments, got " +
                          std::to_string(p.args.size()));
    }
    if (p.kind == "gauss" && !(p.args[3] > 0.0)) throw ConfigError("gauss: width must be > 0");
    if (p.kind == "trig" && (p.args[1] < 0.0 || p.args[1] != std::floor(p.args[1]))) {
        throw ConfigError("trig: mode must be a nonnegative integer");
    }
    if (p.kind == "random" && (p.args[2] < 1.0 || p.args[2] > 16.0 || p.args[2] != std::floor(p.args[2]) ||
                               p.args[0] < 0.0 || p.args[0] != std::floor(p.args[0]))) {
        throw ConfigError("random: seed must be a nonnegative integer and modes in 1..16");
    }
    return p;
}

std::string SpatialPreset::str() const {
    std::ostringstream os;
    os.precision(17);
    os << kind;
    for (std::size_t i = 0; i < args.size(); ++i) os << (i == 0 ? ':' : ',') << args[i];
    return os.str();
}

double SpatialPreset::operator()(double x, double y) const {
    if (kind == "const") return args[0];
    if (kind == "gauss") {
        const double dx = x - args[1], dy = y - args[2];
        return args[0] * std::exp(-(dx * dx + dy * dy) / (2.0 * args[3] * args[3]));
    }
    if (kind == "trig") {
        const int k = static_cast<int>(args[1]);
        const double r = std::hypot(x, y);
        return args[0] * std::pow(r, k) * std::cos(k * std::atan2(y, x));
    }
    if (kind == "sep") return args[0] * std::cos(args[1] * x) * std::cos(args[2] * y);
    if (kind == "random") {
        std::mt19937_64 rng(static_cast<std::uint64_t>(args[0]));
        const int modes = static_cast<int>(args[2]);
        const double r = std::hypot(x, y);
        const double th = std::atan2(y, x);
        double v = 0.5 * unit_uniform(rng) + 0.5 * unit_uniform(rng) * r * r;
        for (int m = 1; m <= modes; ++m) {
            const double a = unit_uniform(rng), b = unit_uniform(rng);
            v += std::pow(r, m) * (a * std::cos(m * th) + b * std::sin(m * th)) / m;
        }
        return args[1] * v / modes;
    }
    throw ConfigError("preset '" + kind + "' has no pointwise values");
}

TimeFactor TimeFactor::parse(std::string_view text) {
    TimeFactor f;
    const auto colon = text.find(':');
    f.kind = std::string(text.substr(0, colon));
    std::vector<double> args;
    if (colon != std::string_view::npos) args = parse_args(text.substr(colon + 1), f.kind);
    if (f.kind == "one") {
        if (!args.empty()) throw ConfigError("time factor 'one' takes no arguments");
    } else if (f.kind == "cos" || f.kind == "ramp") {
        if (args.size() != 1) throw ConfigError("time factor '" + f.kind + "' takes one argument");
        f.w = args[0];
        if (f.kind == "ramp" && !(f.w > 0.0)) throw ConfigError("ramp: duration must be > 0");
    } else {
        throw ConfigError("unknown time factor '" + f.kind + "'");
    }
    return f;
}

std::string TimeFactor::str() const {
    if (kind == "one") return kind;
    std::ostringstream os;
    os.precision(17);
    os << kind << ':' << w;
    return os.str();
}

double TimeFactor::operator()(double t) const {
    if (kind == "cos") return std::cos(w * t);
    if (kind == "ramp") return std::min(t / w, 1.0);
    return 1.0;
}

Vector sample_bulk(const SpatialPreset& preset, const MeshBundle& mesh) {
    if (preset.is_trace()) throw ConfigError("'trace' is only valid for boundary data");
    Vector v(static_cast<Eigen::Index>(mesh.num_nodes()));
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) v[i] = preset(mesh.nodes()[i].x, mesh.nodes()[i].y);
    return v;
}

Vector sample_boundary(const SpatialPreset& preset, const MeshBundle& mesh) {
    if (preset.is_trace()) throw ConfigError("'trace' must be resolved against a bulk field");
    Vector v(static_cast<Eigen::Index>(mesh.num_boundary_nodes()));
    for (std::size_t k = 0; k < mesh.num_boundary_nodes(); ++k) {
        const Point& p = mesh.nodes()[mesh.trace_map()[k]];
        v[k] = preset(p.x, p.y);
    }
    return v;
}

FieldFn separable_field(Vector values, TimeFactor factor) {
    return [v = std::move(values), factor](std::size_t, double t) -> Vector { return v * factor(t); };
}

}  // namespace bulksurf
