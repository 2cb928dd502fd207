#include "wgeom/catalog.hpp"
#include "wgeom/chart.hpp"
#include "wgeom/errors.hpp"
#include "wgeom/expr.hpp"
#include "wgeom/field.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <set>

using namespace wgeom;

namespace {

constexpr double pi = 3.14159265358979323846;

Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

} // namespace

TEST_SUITE("expressions") {

TEST_CASE("constant and simple fields") {
    const auto zero = ScalarField::parse("0", {"x", "y"});
    CHECK(zero.value(v2(3.0, -1.0)) == 0.0);
    const auto c = ScalarField::parse("cos(r)", {"r"});
    Vec x(1);
    x[0] = pi / 2;
    CHECK(std::abs(c.value(x)) < 1e-15);
}

TEST_CASE("symbolic derivative of cos agrees with a central difference") {
    const auto c = ScalarField::parse("cos(r)", {"r"});
    Vec x(1);
    x[0] = 1.0;
    const double d = c.gradient(x)[0];
    CHECK(d == doctest::Approx(-std::sin(1.0)).epsilon(1e-15));
    Vec a = x, b = x;
    a[0] -= 1e-6;
    b[0] += 1e-6;
    const double fd = (c.value(b) - c.value(a)) / 2e-6;
    CHECK(d == doctest::Approx(fd).epsilon(1e-8));
    CHECK(d == doctest::Approx(-0.841471).epsilon(1e-6));
}

TEST_CASE("grammar: precedence, unary minus, power and constants") {
    auto ev = [](const char* s) { return expr::parse(s, {}).eval(nullptr, 0); };
    CHECK(ev("1 + 2 * 3") == 7.0);
    CHECK(ev("-2^2") == -4.0);
    CHECK(ev("2^3^2") == doctest::Approx(512.0));
    CHECK(ev("(1 + 2) * 3") == 9.0);
    CHECK(ev("pi") == doctest::Approx(pi));
    CHECK(ev("e") == doctest::Approx(std::exp(1.0)));
    CHECK(ev("sqrt(4) + abs(-3) + tanh(0)") == doctest::Approx(5.0));
    CHECK(ev("1.5e2") == 150.0);
}

TEST_CASE("parse errors carry byte offsets") {
    try {
        (void)expr::parse("1 + * 2", {});
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 4);
    }
    CHECK_THROWS_AS((void)expr::parse("foo(1)", {}), ParseError);
    CHECK_THROWS_AS((void)expr::parse("x + 1", {"y"}), ParseError);
    CHECK_THROWS_AS((void)expr::parse("(1 + 2", {}), ParseError);
}

TEST_CASE("domain errors report the point") {
    const auto lg = ScalarField::parse("log(x)", {"x", "y"});
    try {
        (void)lg.value(v2(-1.0, 2.0));
        FAIL("expected a domain error");
    } catch (const EvalDomainError& e) {
        REQUIRE(e.point().size() == 2);
        CHECK(e.point()[0] == -1.0);
    }
    CHECK_THROWS_AS((void)ScalarField::parse("sqrt(y)", {"x", "y"}).value(v2(0.0, -1.0)), EvalDomainError);
}

TEST_CASE("pretty-print round trip at random points") {
    const std::vector<std::string> vars{"x", "y"};
    const char* sources[] = {"sin(x)*exp(-y^2) + x/(1 + y^2)", "cosh(x) - sinh(y)^2 + tan(x/3)",
                             "log(2 + x^2) * sqrt(1 + y^2) - abs(x - y)", "-x^3 + 2^y - (x - y)/(3 + x^2)"};
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-2, 2);
    for (const char* s : sources) {
        const auto e = expr::parse(s, vars);
        const auto back = expr::parse(e.str(vars), vars);
        for (int k = 0; k < 100; ++k) {
            const std::vector<double> p{u(rng), u(rng)};
            CHECK(std::abs(e.eval(p) - back.eval(p)) < 1e-12);
        }
    }
}

TEST_CASE("symbolic gradients and Hessians match central differences") {
    const std::vector<std::string> vars{"x", "y"};
    const char* sources[] = {"sin(x)*exp(-y^2)", "x^2*y - cosh(x*y)", "log(3 + x^2 + y^2)", "sqrt(2 + sin(x*y))",
                             "tanh(x - y)/(2 + cos(y))"};
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (const char* s : sources) {
        const auto f = ScalarField::parse(s, vars);
        REQUIRE(f.symbolic());
        for (int k = 0; k < 20; ++k) {
            const Vec p = v2(u(rng), u(rng));
            const Vec g = f.gradient(p);
            const Mat H = f.hessian(p);
            for (int i = 0; i < 2; ++i) {
                Vec a = p, b = p;
                a[i] -= 1e-6;
                b[i] += 1e-6;
                const double fd = (f.value(b) - f.value(a)) / 2e-6;
                CHECK(std::abs(g[i] - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
                const Vec gd = (f.gradient(b) - f.gradient(a)) / 2e-6;
                for (int j = 0; j < 2; ++j) CHECK(std::abs(H(j, i) - gd[j]) <= 1e-5 * std::max(1.0, std::abs(gd[j])));
            }
        }
    }
}

} // TEST_SUITE

TEST_SUITE("catalog") {

TEST_CASE("sphere_polar(2) at the equator is the identity") {
    const Chart s = sphere_polar(2);
    const Mat g = s.metric(v2(pi / 2, 0.0));
    CHECK(g(0, 0) == doctest::Approx(1.0));
    CHECK(g(1, 1) == doctest::Approx(1.0));
    CHECK(g(0, 1) == 0.0);
    CHECK(s.domain().lo[0] == doctest::Approx(1e-3));
    CHECK(s.domain().hi[0] == doctest::Approx(pi - 1e-3));
}

TEST_CASE("euclidean(3) is flat") {
    const Chart e = euclidean(3);
    Vec p(3);
    p << 4.0, -2.0, 7.5;
    CHECK(e.metric(p).isIdentity(0.0));
}

TEST_CASE("hyperbolic_warped(2,1) at r = 1") {
    const Chart h = hyperbolic_warped(2, 1.0);
    const Vec p = v2(1.0, 0.0);
    const Mat g = h.metric(p);
    CHECK(g(0, 0) == doctest::Approx(1.0));
    CHECK(g(1, 1) == doctest::Approx(std::exp(2.0)).epsilon(1e-14));
    const auto an = h.metric_derivatives(p);
    const auto fd = h.metric_derivatives_fd(p);
    for (int k = 0; k < 2; ++k) CHECK((an[k] - fd[k]).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("rigidity metric: f = 0 reproduces the model spaces") {
    const Chart r1 = rigidity_metric(2, 1.0, "0");
    const Chart s = sphere_polar(2);
    const Chart r0 = rigidity_metric(2, 0.0, "0", 5.0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ur(0.05, pi - 0.05), ut(-3, 3);
    for (int k = 0; k < 50; ++k) {
        const Vec p = v2(ur(rng), ut(rng));
        CHECK((r1.metric(p) - s.metric(p)).cwiseAbs().maxCoeff() < 1e-10);
        const Mat g0 = r0.metric(p);
        CHECK(g0(1, 1) == doctest::Approx(p[0] * p[0]).epsilon(1e-10));
    }
}

TEST_CASE("rigidity metric with f = r/4: warping coefficient at r = 1") {
    const auto rad = rigidity_radial(2, 1.0, "r/4");
    const double s1 = 2.0 * (1.0 - std::exp(-0.5));
    CHECK(rad->s_of_r(1.0) == doctest::Approx(s1).epsilon(1e-12));
    CHECK(s1 == doctest::Approx(0.786939).epsilon(1e-6));
    const Chart c = rigidity_metric(2, 1.0, "r/4");
    const double coeff = c.metric(v2(1.0, 0.3))(1, 1);
    // e^{2f/(n-1)} sin^2(s(1)) with f(1) = 1/4.
    CHECK(coeff == doctest::Approx(std::exp(0.5) * std::pow(std::sin(s1), 2)).epsilon(1e-10));
    CHECK(coeff == doctest::Approx(0.8269).epsilon(1e-4));
}

TEST_CASE("metrics are symmetric positive definite across the catalog") {
    const char* calls[] = {"euclidean(3)", "sphere_polar(2)", "sphere_polar(3)", "hyperbolic_warped(3, 0.5)",
                           "warped_product(1, 1, x^2/4)", "twisted_product(1, 1, x*y/3)", "expansion_example(2, 3)",
                           "rigidity_metric(n=2, K=1, f=r/4)"};
    std::mt19937_64 rng(5);
    for (const char* call : calls) {
        const Chart c = catalog_build(call);
        for (int k = 0; k < 100; ++k) {
            const Vec p = c.domain().sample(rng, 1.5);
            if (!c.domain().contains(p, 1e-3)) continue;
            const MetricHealth h = metric_health(c, p);
            CHECK(h.symmetric);
            CHECK(h.min_eigenvalue > 0.0);
        }
    }
}

TEST_CASE("catalog errors") {
    CHECK_THROWS_AS((void)catalog_build("klein_bottle(2)"), InvalidArgument);
    CHECK_THROWS((void)catalog_build("euclidean(0)"));
    CHECK_THROWS((void)catalog_build("sphere_polar(1)"));
    CHECK_THROWS((void)catalog_build("rigidity_metric(n=2, K=1)"));
}

TEST_CASE("catalog call syntax with keywords and nested parentheses") {
    const auto [name, args] = split_call("rigidity_metric(n=2, K=1, f=sin(r)/(2 + r))");
    CHECK(name == "rigidity_metric");
    REQUIRE(args.size() == 3);
    CHECK(args[2] == "f=sin(r)/(2 + r)");
    const Chart c = catalog_build("rigidity_metric(n=2, K=1, f=sin(r)/(2 + r))");
    CHECK(c.dim() == 2);
}

TEST_CASE("manifest lists every entry with typed parameters") {
    const auto m = catalog_manifest();
    REQUIRE(m.contains("catalog"));
    std::set<std::string> names;
    for (const auto& e : m["catalog"]) {
        names.insert(e["name"].get<std::string>());
        for (const auto& p : e["parameters"]) CHECK(p.contains("type"));
    }
    for (const char* n : {"euclidean", "sphere_polar", "hyperbolic_warped", "warped_product", "twisted_product",
                          "rigidity_metric", "expansion_example"})
        CHECK(names.count(n) == 1);
}

#ifdef WGEOM_SOURCE_DIR
TEST_CASE("the shipped manifest matches the catalog") {
    std::ifstream in(std::string(WGEOM_SOURCE_DIR) + "/data/catalog_manifest.json");
    REQUIRE(in.good());
    CHECK(nlohmann::json::parse(in) == catalog_manifest());
}
#endif

TEST_CASE("density and potential are related by f = (n-1) phi") {
    const Chart a = sphere_polar(3).with_potential("cos(r)");
    const Chart b = sphere_polar(3).with_density("2*cos(r)");
    Vec p(3);
    p << 1.1, 0.4, 0.2;
    CHECK(a.f(p) == doctest::Approx(b.f(p)));
    CHECK((a.alpha(p) - b.alpha(p)).norm() < 1e-14);
    CHECK(a.phi(p) == doctest::Approx(std::cos(1.1)));
}

TEST_CASE("finite-difference metric derivatives agree with analytic ones") {
    const Chart c = catalog_build("rigidity_metric(n=3, K=1, f=r/4)");
    Vec p(3);
    p << 0.9, 1.0, 0.3;
    const auto an = c.metric_derivatives(p);
    const auto fd = c.metric_derivatives_fd(p);
    for (int k = 0; k < 3; ++k) CHECK((an[k] - fd[k]).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("inline expression charts") {
    const Chart c = expression_chart("polar plane", {"r", "t"}, std::vector<std::vector<std::string>>{{"1", "0"}, {"0", "r^2"}},
                                     Domain::unbounded(2));
    const Vec p = v2(2.0, 0.1);
    CHECK(c.metric(p)(1, 1) == doctest::Approx(4.0));
    CHECK(c.metric_derivatives(p)[0](1, 1) == doctest::Approx(4.0));
}

} // TEST_SUITE
