#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "bulksurf/checks.hpp"
#include "bulksurf/config.hpp"
#include "bulksurf/errors.hpp"
#include "bulksurf/io.hpp"

using namespace bulksurf;

namespace {

std::string error_of(const std::string& text) {
    std::istringstream in(text);
    try {
        parse_config(in, "t.cfg");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

RunConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in, "t.cfg");
}

}  // namespace

TEST_CASE("parser diagnostics") {
    CHECK(error_of("model.tau = 1\nmodel.tauu = 2\n") == "t.cfg:2: unknown key 'model.tauu'");
    CHECK(error_of("model.tau = 1\n\nmodel.tau = 2\n") == "t.cfg:3: duplicate key 'model.tau'");
    CHECK(error_of("model.tau =\n") == "t.cfg:1: model.tau: missing value");
    CHECK(error_of("just words\n") == "t.cfg:1: expected 'key = value'");
    CHECK(error_of("# only a comment\n\n") == "t.cfg: empty config");
    CHECK(error_of("") == "t.cfg: empty config");
    CHECK(error_of("model.tau = 0\n") == "t.cfg: model.tau: must be > 0");
    CHECK(error_of("model.eps = 2\n") == "t.cfg: model.eps: must lie in [0, 1]");
    CHECK(error_of("model.lambda = abc\n").find("model.lambda: expected a number") != std::string::npos);
    CHECK(error_of("mesh.rings = 2.5\n").find("expected an integer") != std::string::npos);
    CHECK(error_of("sweep.axis = time\n").find("sweep.axis") != std::string::npos);
    CHECK(error_of("model.bulk_potential = quartic\n").find("model.bulk_potential") != std::string::npos);
    CHECK(error_of("sources.f = wave:1\n").find("sources.f") != std::string::npos);
    CHECK(error_of("sources.f = trace\n").find("not allowed") != std::string::npos);
}

TEST_CASE("values and comments") {
    const RunConfig c = parse("model.tau = 2.5   # trailing\n  time.dt=0.02\nsweep.values = 0.1, 0.01 ,0.001\n");
    CHECK(c.tau == 2.5);
    CHECK(c.dt == 0.02);
    CHECK(c.sweep_values == std::vector<double>{0.1, 0.01, 0.001});
    CHECK(c.eps == 0.0);  // default kept
}

TEST_CASE("reference config reproduces the reference problem") {
    const RunConfig cfg = load_config(BULKSURF_CONFIG_DIR "/reference.cfg");
    const Problem a = build_problem(cfg);
    const Problem b = reference_problem();
    CHECK(a.mesh.num_nodes() == b.mesh.num_nodes());
    CHECK(a.params.u0 == b.params.u0);
    CHECK(a.params.u0_G == b.params.u0_G);
    for (std::size_t n : {0u, 7u, 50u}) {
        const double t = 0.01 * static_cast<double>(n);
        CHECK(a.params.f(n, t) == b.params.f(n, t));
        CHECK(a.params.f_G(n, t) == b.params.f_G(n, t));
    }
    CHECK(a.params.bulk_pi(0.5) == b.params.bulk_pi(0.5));
    CHECK(a.dt == b.dt);
    CHECK(a.t_end == b.t_end);
    CHECK(cfg.base_dir.filename() == "configs");
}

TEST_CASE("build_problem checks the time grid and the mesh file") {
    CHECK_THROWS_AS(build_problem(parse("time.dt = 0.03\ntime.t_end = 0.1\n")), ConfigError);
    CHECK_THROWS_AS(build_problem(parse("mesh.kind = file\nmesh.file = /nonexistent/mesh.txt\n")), MeshError);
    CHECK_THROWS_AS(build_problem(parse("mesh.kind = file\n")), ConfigError);
}

TEST_CASE("field presets") {
    CHECK(SpatialPreset::parse("const:2")(0.3, 0.1) == 2.0);
    CHECK(SpatialPreset::parse("gauss:2,0.5,0,0.1")(0.5, 0.0) == 2.0);
    CHECK(SpatialPreset::parse("gauss:1,0,0,1")(1.0, 0.0) == doctest::Approx(std::exp(-0.5)));
    const double th = 0.7;
    CHECK(SpatialPreset::parse("trig:0.5,3")(std::cos(th), std::sin(th)) == doctest::Approx(0.5 * std::cos(3 * th)));
    CHECK(SpatialPreset::parse("trig:1,2")(0.5, 0.0) == doctest::Approx(0.25));
    CHECK(SpatialPreset::parse("sep:2,1,3")(0.4, 0.2) == doctest::Approx(2 * std::cos(0.4) * std::cos(0.6)));
    const auto r1 = SpatialPreset::parse("random:5,1,4"), r2 = SpatialPreset::parse("random:5,1,4");
    const auto r3 = SpatialPreset::parse("random:6,1,4");
    CHECK(r1(0.2, -0.3) == r2(0.2, -0.3));
    CHECK(r1(0.2, -0.3) != r3(0.2, -0.3));
    CHECK(SpatialPreset::parse("trace").is_trace());
    CHECK_THROWS_AS(SpatialPreset::parse("gauss:1,2"), ConfigError);
    CHECK_THROWS_AS(SpatialPreset::parse("trig:1,1.5"), ConfigError);
    CHECK_THROWS_AS(SpatialPreset::parse("random:1,1,0"), ConfigError);
    CHECK_THROWS_AS(SpatialPreset::parse("blob:1"), ConfigError);

    CHECK(TimeFactor::parse("one")(3.0) == 1.0);
    CHECK(TimeFactor::parse("cos:2")(0.5) == doctest::Approx(std::cos(1.0)));
    CHECK(TimeFactor::parse("ramp:0.5")(0.25) == doctest::Approx(0.5));
    CHECK(TimeFactor::parse("ramp:0.5")(2.0) == 1.0);
    CHECK_THROWS_AS(TimeFactor::parse("sin:1"), ConfigError);
}

TEST_CASE("perturbation specs") {
    const MonotoneGraph cubic(GraphKind::cubic);
    CHECK(parse_perturbation("default", cubic)(2.0) == -2.0);
    CHECK(parse_perturbation("zero", cubic)(2.0) == 0.0);
    CHECK(parse_perturbation("linear:3", cubic)(1.0) == -3.0);
    const auto tab = parse_perturbation("table:1:-1/1,0/0,1/-1", cubic);
    CHECK(tab.is_tabulated());
    CHECK(tab(0.5) == doctest::Approx(-0.5));
    CHECK_THROWS_AS(parse_perturbation("table:1:-1/1,0/0.5", cubic), ConfigError);
    CHECK_THROWS_AS(parse_perturbation("table:1", cubic), ConfigError);
    CHECK_THROWS_AS(parse_perturbation("spline", cubic), ConfigError);
}

TEST_CASE("run csv roundtrip") {
    std::vector<DiagnosticsRecord> recs(3);
    for (std::size_t i = 0; i < recs.size(); ++i) {
        auto& r = recs[i];
        r.step = i;
        r.t = 0.1 * static_cast<double>(i);
        r.boundary_mass = std::numbers::pi + static_cast<double>(i);
        r.total_mass_eps = 1.0 / 3.0;
        r.energy = -1e-300;
        r.dissipation = 1e300;
        r.grad_u_bulk = 0.1;
        r.grad_u_surf = 0.2;
        r.env_bulk = 0.3;
        r.env_surf = 0.4;
        r.omega = -0.5;
        r.newton_iters = 3;
        r.residual = 1e-14;
    }
    std::stringstream ss;
    write_run_csv_header(ss);
    for (const auto& r : recs) write_run_csv_row(r, ss);
    const std::string text = ss.str();
    CHECK(text.rfind(std::string(kRunCsvVersion) + "\n", 0) == 0);
    const auto back = read_run_csv(ss);
    REQUIRE(back.size() == recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        CHECK(back[i].step == recs[i].step);
        CHECK(back[i].t == recs[i].t);
        CHECK(back[i].boundary_mass == recs[i].boundary_mass);
        CHECK(back[i].total_mass_eps == recs[i].total_mass_eps);
        CHECK(back[i].energy == recs[i].energy);
        CHECK(back[i].dissipation == recs[i].dissipation);
        CHECK(back[i].omega == recs[i].omega);
        CHECK(back[i].newton_iters == recs[i].newton_iters);
        CHECK(back[i].residual == recs[i].residual);
    }
    std::istringstream wrong("# bulksurf run csv v2\n");
    CHECK_THROWS_AS(read_run_csv(wrong), ConfigError);
    std::string cut = text.substr(0, text.rfind(','));
    std::istringstream short_row(cut + "\n");
    CHECK_THROWS_AS(read_run_csv(short_row), ConfigError);
}

TEST_CASE("mass drift helper") {
    std::vector<DiagnosticsRecord> recs(3);
    recs[0].boundary_mass = 2.0;
    recs[1].boundary_mass = 2.002;
    recs[2].boundary_mass = 1.999;
    recs[0].total_mass_eps = 1.0;
    recs[1].total_mass_eps = 1.0;
    recs[2].total_mass_eps = 1.5;
    CHECK(relative_mass_drift(recs, false) == doctest::Approx(1e-3));
    CHECK(relative_mass_drift(recs, true) == doctest::Approx(0.5));
}

TEST_CASE("check suite") {
    SUBCASE("reference passes") {
        const auto res = run_checks(parse("mesh.rings = 3\nmesh.sectors = 12\nsources.f = sep:0.2,1.5,1\n"
                                          "initial.u0 = random:7,0.6,4\n"),
                                    10);
        REQUIRE_FALSE(res.empty());
        for (const auto& r : res) CHECK_MESSAGE(r.passed, r.name << ": " << r.detail);
    }
    SUBCASE("domination with a small varrho fails") {
        const auto res = run_checks(parse("mesh.rings = 3\nmesh.sectors = 12\nmodel.varrho = 0.1\n"),
                                    5);
        bool compat_failed = false;
        for (const auto& r : res) compat_failed |= r.name == "graph.compatibility" && !r.passed;
        CHECK(compat_failed);
    }
}
