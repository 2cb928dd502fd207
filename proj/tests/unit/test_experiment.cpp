#include "wgeom/errors.hpp"
#include "wgeom/experiment.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace wgeom;
using json = nlohmann::json;

namespace {

json minimal(const std::string& op, json args) {
    return {{"manifold", "euclidean(2)"}, {"task", {{"op", op}, {"args", std::move(args)}}}};
}

// Path of the SchemaError thrown by parsing, or "" when parsing succeeds.
std::string error_path(const json& j) {
    try {
        (void)parse_spec(j);
    } catch (const SchemaError& e) {
        return e.path();
    }
    return "";
}

RunResult run(const json& j) { return run_experiment(parse_spec(j)); }

} // namespace

TEST_SUITE("spec parsing") {

TEST_CASE("a minimal spec takes the defaults") {
    const ExperimentSpec s = parse_spec(minimal("build-manifold", json::object()));
    CHECK(s.seed == 20240611u);
    CHECK(s.format == "csv");
    CHECK(s.output_path.empty());
    CHECK(!s.density);
    CHECK(parse_spec(to_json(s)).task == s.task);
}

TEST_CASE("schema violations name the offending field") {
    json j = minimal("curvature", {{"quantity", "ric_f"}, {"point", {0, 0}}});
    j["colour"] = "red";
    CHECK(error_path(j) == "/colour");

    CHECK(error_path({{"task", {{"op", "curvature"}}}}) == "/manifold");
    CHECK(error_path(minimal("teleport", json::object())) == "/task/op");
    CHECK(error_path(minimal("geodesic", {{"speed", 2}})) == "/task/args/speed");

    json both = minimal("build-manifold", json::object());
    both["density"] = "x";
    both["potential"] = "y";
    CHECK(error_path(both) == "/potential");

    json tol = minimal("build-manifold", json::object());
    tol["tolerances"] = {{"ode_rtol", -1.0}};
    CHECK(error_path(tol) == "/tolerances/ode_rtol");
    tol["tolerances"] = {{"warp_factor", 1.0}};
    CHECK(error_path(tol) == "/tolerances/warp_factor");

    json inline_bad = minimal("build-manifold", json::object());
    inline_bad["manifold"] = {{"coords", {"u", "v"}}, {"metric", json::array({json::array({"1", "0"}), json::array({"0"})})}};
    CHECK(error_path(inline_bad) == "/manifold/metric/1");

    json fmt = minimal("build-manifold", json::object());
    fmt["output"] = {{"format", "xml"}};
    CHECK(error_path(fmt) == "/output/format");
}

TEST_CASE("argument errors found while running become exit code 4") {
    const RunResult r = run(minimal("curvature", {{"quantity", "ric_f"}, {"point", {0, 0, 0}}}));
    CHECK(r.exit_code == exit_invalid_spec);
    CHECK(r.summary.front().find("/task/args/point") != std::string::npos);
    const RunResult k = run(minimal("check", {{"theorem", "myers"}, {"K", -1.0}}));
    CHECK(k.exit_code == exit_invalid_spec);
    CHECK(error_path(minimal("check", {{"theorem", "poincare"}})) == "/task/args/theorem");
}

TEST_CASE("numbers may be constant expressions") {
    CHECK(spec_number(json("pi/2"), "/x") == doctest::Approx(std::acos(0.0)));
    CHECK(spec_number(json(3), "/x") == 3.0);
    CHECK(std::isinf(spec_number(json("inf"), "/x")));
    CHECK_THROWS_AS((void)spec_number(json("x + 1"), "/x"), SchemaError);
    CHECK_THROWS_AS((void)spec_number(json(true), "/x"), SchemaError);
}

TEST_CASE("manifold forms") {
    ExperimentSpec s = parse_spec(minimal("build-manifold", json::object()));
    s.manifold = {{"catalog", "sphere_polar"}, {"params", {{"n", 3}}}};
    CHECK(build_manifold(s).dim() == 3);
    s.manifold = {{"coords", {"u", "v"}}, {"metric", json::array({json::array({"1", "0"}), json::array({"0", "exp(2*u)"})})}, {"name", "half-plane"}};
    s.potential = "u";
    const Chart c = build_manifold(s);
    CHECK(c.name() == "half-plane");
    Vec p(2);
    p << 0.5, 0.0;
    CHECK(c.metric(p)(1, 1) == doctest::Approx(std::exp(1.0)));
    CHECK(c.f(p) == doctest::Approx(0.5));
}

TEST_CASE("tolerance overrides reach the settings") {
    json j = minimal("build-manifold", json::object());
    j["tolerances"] = {{"ode_rtol", 1e-7}};
    j["seed"] = 7;
    const Settings st = spec_settings(parse_spec(j));
    CHECK(st.ode_rtol == 1e-7);
    CHECK(st.seed == 7u);
}

} // TEST_SUITE

TEST_SUITE("runs") {

TEST_CASE("exit codes follow the verdict") {
    CHECK(run(minimal("build-manifold", {{"point", {0.1, 0.2}}})).exit_code == exit_pass);

    json myers = minimal("check", {{"theorem", "myers"}, {"K", 1.0}, {"point", {0, 0}}, {"directions", 8}});
    const RunResult flat = run(myers);
    CHECK(flat.exit_code == exit_hypothesis_unmet);
    CHECK(flat.status == "hypothesis-unmet");

    json ric = minimal("curvature", {{"quantity", "ric_f"}, {"point", {0.3, 0.2}}, {"expect", 9.0}, {"tolerance", 1e-6}});
    ric["manifold"] = "expansion_example(2,3)";
    CHECK(run(ric).exit_code == exit_fail);
    ric["task"]["args"]["expect"] = 8.0;
    CHECK(run(ric).exit_code == exit_pass);
}

TEST_CASE("library errors surface with their module") {
    json j = minimal("curvature", {{"quantity", "ric_f"}, {"point", {0.5, 0.1}}, {"N", 2}});
    const RunResult r = run(j);
    CHECK(r.exit_code == exit_numerical_error);
    CHECK(r.summary.front().find("tensorcalc") != std::string::npos);

    json domain = minimal("build-manifold", {{"point", {0.5, 0.1}}});
    domain["density"] = "log(x - 1)";
    const RunResult d = run(domain);
    CHECK(d.exit_code == exit_numerical_error);
}

TEST_CASE("rigidity metric is the mean curvature equality case") {
    json j = minimal("check", {{"theorem", "mean_curvature"}, {"point", {0, 0}}, {"direction", {1, 0}}, {"K", 1.0},
                               {"r_max", 4.0}});
    j["manifold"] = "rigidity_metric(2,1,r/4)";
    const RunResult r = run(j);
    CHECK(r.exit_code == exit_pass);
    CHECK(r.csv.rfind("theorem,ray,r,s,value,bound,margin,tolerance\n", 0) == 0);
}

TEST_CASE("pretty tables align the CSV") {
    RunResult r;
    r.csv = "a,bb\n1,2\n333,4\n";
    const std::string t = render(r, "pretty-table");
    CHECK(t.find("333") != std::string::npos);
    CHECK(t.find(',') == std::string::npos);
    CHECK(render(r, "csv") == r.csv);
}

} // TEST_SUITE

TEST_SUITE("bundle") {

TEST_CASE("the bundle covers the reproductions and parses") {
    const auto& b = reproduction_bundle();
    CHECK(b.size() >= 12);
    std::set<std::string> names, tasks;
    for (const auto& e : b) {
        INFO(e.name);
        CHECK(names.insert(e.name).second);
        CHECK(std::set<std::string>{"pass", "fail", "hypothesis-unmet"}.count(e.expected) == 1);
        const ExperimentSpec s = parse_spec(e.spec);
        tasks.insert(s.task);
        CHECK(s.name == e.name);
    }
    for (const char* t : {"holonomy-algebra", "holonomy", "parallel-field", "curvature", "one-dim", "check"})
        CHECK(tasks.count(t) == 1);
}

TEST_CASE("fast bundle entries reach their expected status deterministically") {
    for (const auto& e : reproduction_bundle()) {
        const std::string op = e.spec["task"]["op"];
        if (op != "one-dim" && op != "curvature" && op != "holonomy") continue;
        INFO(e.name);
        const RunResult a = run(e.spec), b = run(e.spec);
        CHECK(a.status == e.expected);
        CHECK(a.csv == b.csv);
        CHECK(!a.csv.empty());
    }
}

} // TEST_SUITE
