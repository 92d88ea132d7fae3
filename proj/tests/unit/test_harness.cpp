#include <doctest.h>

#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "bulksurf/errors.hpp"
#include "bulksurf/harness.hpp"

using namespace bulksurf;

namespace {

Problem small(double eps = 0.0) {
    ReferenceOptions o;
    o.rings = 3;
    o.sectors = 12;
    o.eps = eps;
    return reference_problem(o);
}

std::size_t count_lines(const std::string& s) {
    std::size_t n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

}  // namespace

TEST_CASE("log-log fit") {
    const std::vector<double> x{1e-1, 1e-2, 1e-3};
    std::vector<double> y;
    for (double v : x) y.push_back(3.0 * v * v);
    const LogFit f = fit_loglog(x, y);
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(std::exp(f.intercept) == doctest::Approx(3.0));
    // nonpositive entries are skipped
    CHECK(fit_loglog({1e-1, 0.0, 1e-3}, {3e-2, 0.0, 3e-6}).slope == doctest::Approx(2.0));
    CHECK(std::isnan(fit_loglog({1.0}, {2.0}).slope));
}

TEST_CASE("parallel_map keeps index order and rethrows the first failure") {
    for (unsigned threads : {1u, 2u, 7u}) {
        const auto v = parallel_map<int>(20, threads, [](std::size_t i) { return static_cast<int>(i * i); });
        REQUIRE(v.size() == 20);
        for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i] == static_cast<int>(i * i));
        std::atomic<int> calls{0};
        try {
            parallel_map<int>(10, threads, [&](std::size_t i) -> int {
                ++calls;
                if (i == 3 || i == 8) throw std::runtime_error("fail " + std::to_string(i));
                return 0;
            });
            FAIL("expected an exception");
        } catch (const std::runtime_error& e) {
            CHECK(std::string(e.what()) == "fail 3");
        }
        CHECK(calls == 10);
    }
    CHECK(parallel_map<int>(0, 4, [](std::size_t) { return 1; }).empty());
}

TEST_CASE("reference problem") {
    const Problem p = small();
    CHECK((p.forms.restrict(p.params.u0) - p.params.u0_G).norm() == 0.0);
    CHECK(p.params.u0.cwiseAbs().maxCoeff() > 0.0);
    CHECK(p.params.f(1, 0.0).size() == p.forms.num_bulk());
    // cos(2t) modulation of the sources
    CHECK(p.params.f(0, 0.5)[0] == doctest::Approx(p.params.f(0, 0.0)[0] * std::cos(1.0)));
    const ModelParams same = prepare_for_eps(p.params, 0.0, p.forms, p.dt, p.t_end);
    CHECK(same.u0 == p.params.u0);
    const ModelParams relaxed = prepare_for_eps(p.params, 0.1, p.forms, p.dt, p.t_end);
    CHECK(relaxed.eps == 0.1);
    CHECK(relaxed.f(0, 0.0).norm() == 0.0);  // smoothed sources start from zero
}

TEST_CASE("trajectory distance") {
    Problem p = small();
    const Trajectory a = run(p.forms, p.params, 0.05, 0.1);
    CHECK(trajectory_distance(a, a, p.forms) == 0.0);
    Trajectory b = a;
    for (auto& s : b.states) {
        s.u.array() += 1.0;
        s.u_G.array() += 1.0;
    }
    // two steps of size 0.05 with |1|_M^2 = area and |1|_MG^2 = length; step 0 not counted
    const double expect =
        std::sqrt(2 * 0.05 * p.mesh.bulk_area()) + std::sqrt(2 * 0.05 * p.mesh.boundary_length());
    CHECK(trajectory_distance(a, b, p.forms) == doctest::Approx(expect));
}

TEST_CASE("sweeps are deterministic in the thread count") {
    Problem p = small();
    SweepOptions one, many;
    many.threads = 4;
    const auto r1 = sweep_eps(p.params, p.forms, {0.1, 0.01}, 0.02, 0.1, one);
    const auto r2 = sweep_eps(p.params, p.forms, {0.1, 0.01}, 0.02, 0.1, many);
    CHECK(r1 == r2);
    CHECK(r1.point_data.size() == 3);
    CHECK(r1.errors.size() == 2);
    const auto l1 = sweep_lambda(p.params, p.forms, {0.1, 0.05, 0.025}, 0.02, 0.1, one);
    const auto l2 = sweep_lambda(p.params, p.forms, {0.1, 0.05, 0.025}, 0.02, 0.1, many);
    CHECK(l1 == l2);
    CHECK(l1.errors.size() == 2);
}

TEST_CASE("JSON-lines report roundtrip") {
    Problem p = small();
    const auto bump = SpatialPreset::parse("gauss:1,0.3,0.2,0.4");
    const auto rep = sweep_perturbation(p.params, p.forms, p.mesh, {0.1, 0.01, 0.0}, 0.02, 0.1, bump);
    CHECK(rep.pass_flags.at("zero_identity"));
    CHECK(rep.errors.back() == 0.0);
    CHECK(rep.point_data.back().count("ratio") == 0);
    std::stringstream ss;
    write_report_jsonl(rep, ss);
    CHECK(count_lines(ss.str()) == 3);
    const SweepReport back = read_report_jsonl(ss);
    CHECK(back == rep);

    SUBCASE("truncated stream is rejected") {
        std::string text;
        std::stringstream src;
        write_report_jsonl(rep, src);
        std::getline(src, text);
        std::istringstream one_line(text + "\n");
        CHECK_THROWS_AS(read_report_jsonl(one_line), ConfigError);
    }
    SUBCASE("foreign schema is rejected") {
        std::istringstream bad("{\"schema\":\"other\",\"index\":0}\n");
        CHECK_THROWS_AS(read_report_jsonl(bad), ConfigError);
    }
    SUBCASE("empty stream is rejected") {
        std::istringstream none("");
        CHECK_THROWS_AS(read_report_jsonl(none), ConfigError);
    }
}

TEST_CASE("single-point sweep has no slope") {
    Problem p = small();
    const auto rep = sweep_lambda(p.params, p.forms, {0.1}, 0.02, 0.1);
    CHECK(rep.errors.empty());
    CHECK(std::isnan(rep.fitted_slope));
    std::stringstream ss;
    write_report_jsonl(rep, ss);
    CHECK(read_report_jsonl(ss) == rep);
    std::ostringstream csv;
    write_report_csv(rep, csv);
    CHECK(csv.str().rfind("# bulksurf sweep csv v1 axis=lambda", 0) == 0);
    CHECK(csv.str().find("\nindex,value,error,") != std::string::npos);
    CHECK(count_lines(csv.str()) == 3);
}

TEST_CASE("sweep argument validation") {
    Problem p = small();
    CHECK_THROWS_AS(sweep_eps(p.params, p.forms, {0.01, 0.1}, 0.02, 0.1), ConfigError);
    CHECK_THROWS_AS(sweep_eps(p.params, p.forms, {2.0, 0.1}, 0.02, 0.1), ConfigError);
    CHECK_THROWS_AS(sweep_eps(p.params, p.forms, {}, 0.02, 0.1), ConfigError);
    CHECK_THROWS_AS(sweep_lambda(p.params, p.forms, {0.1, 0.1}, 0.02, 0.1), ConfigError);
    ModelParams relaxed = p.params;
    relaxed.eps = 0.1;
    CHECK_THROWS_AS(sweep_lambda(relaxed, p.forms, {0.1}, 0.02, 0.1), ConfigError);
    const auto bump = SpatialPreset::parse("const:1");
    CHECK_THROWS_AS(sweep_perturbation(relaxed, p.forms, p.mesh, {0.1}, 0.02, 0.1, bump), ConfigError);
    CHECK_THROWS_AS(sweep_perturbation(p.params, p.forms, p.mesh, {0.1, -0.1}, 0.02, 0.1, bump), ConfigError);
}
