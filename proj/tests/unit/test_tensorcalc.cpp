#include "wgeom/catalog.hpp"
#include "wgeom/errors.hpp"
#include "wgeom/tensorcalc.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace wgeom;

namespace {

constexpr double pi = 3.14159265358979323846;

Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

Vec random_vec(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> d;
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = d(rng);
    return v;
}

// Catalog charts with a weight, used by the cross-validation sweeps.
std::vector<Chart> weighted_catalog() {
    return {euclidean(2).with_density("x*y/3 + sin(x)"),
            euclidean(3).with_potential("x^2/4 - y*z/5"),
            sphere_polar(2).with_potential("cos(r)"),
            sphere_polar(3).with_density("sin(r)*cos(theta1)/2"),
            hyperbolic_warped(2, 1.0).with_potential("r"),
            hyperbolic_warped(3, 0.5).with_density("r/2 + y1*y2/4"),
            warped_product(1, 1, "x^2/4").with_density("y^2/3"),
            twisted_product(1, 1, "x*y/3").with_density("x/2"),
            expansion_example(2, 3.0),
            rigidity_metric(2, 1.0, "r/4")};
}

} // namespace

TEST_SUITE("connection") {

TEST_CASE("flat charts have vanishing symbols") {
    const auto c = christoffel(euclidean(3), Vec::Zero(3));
    for (const auto& m : c.gamma) CHECK(m.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sphere: Gamma^r_thetatheta at r = 1") {
    const auto c = christoffel(sphere_polar(2), v2(1.0, 0.2));
    CHECK(c.gamma[0](1, 1) == doctest::Approx(-std::sin(1.0) * std::cos(1.0)).epsilon(1e-12));
    CHECK(c.gamma[0](1, 1) == doctest::Approx(-0.454649).epsilon(1e-6));
    CHECK(c.gamma[1](0, 1) == doctest::Approx(1.0 / std::tan(1.0)).epsilon(1e-12));
    CHECK(c.max_asymmetry() < 1e-12);
}

TEST_CASE("hyperbolic_warped(2,1) at r = 0") {
    const auto c = christoffel(hyperbolic_warped(2, 1.0), v2(0.0, 0.4));
    CHECK(c.gamma[1](0, 1) == doctest::Approx(1.0));
    CHECK(c.gamma[0](1, 1) == doctest::Approx(-1.0));
}

TEST_CASE("symbols from finite-difference metric derivatives agree with analytic ones") {
    const Chart a = hyperbolic_warped(2, 1.0);
    const Chart fd("fd copy", a.coords(), [a](const Vec& x) { return a.metric(x); }, a.domain());
    const Vec p = v2(0.3, -0.7);
    const auto s1 = christoffel_symbols(a, p), s2 = christoffel_symbols(fd, p);
    for (int k = 0; k < 2; ++k) CHECK((s1[k] - s2[k]).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("weighted coefficients") {
    SUBCASE("constant density leaves the symbols unchanged") {
        const Chart c = sphere_polar(2).with_density("2.5");
        const Vec p = v2(0.8, 0.1);
        const auto a = christoffel_symbols(c, p), b = weighted_symbols(c, p);
        for (int k = 0; k < 2; ++k) CHECK((a[k] - b[k]).cwiseAbs().maxCoeff() < 1e-15);
    }
    SUBCASE("plane with f = y") {
        const auto w = weighted_coeffs(euclidean(2).with_density("y"), v2(0.4, -0.3));
        CHECK(w.gamma[0](0, 1) == doctest::Approx(-1.0));
        CHECK(w.gamma[1](1, 1) == doctest::Approx(-2.0));
        CHECK(w.gamma[0](0, 0) == 0.0);
        CHECK(w.max_asymmetry() < 1e-15);
    }
    SUBCASE("sphere with f = cos r: Gamma^r_rr = 2 sin r") {
        for (double r : {0.3, 1.0, 2.2}) {
            const auto w = weighted_symbols(sphere_polar(2).with_density("cos(r)"), v2(r, 0.0));
            CHECK(w[0](0, 0) == doctest::Approx(2 * std::sin(r)).epsilon(1e-12));
        }
    }
}

TEST_CASE("weighted derivative of a constant field from first principles") {
    const Chart c = euclidean(2).with_density("y");
    const Vec p = v2(0.0, 0.0), dir = v2(1.0, 0.5);
    const auto w = weighted_symbols(c, p);
    const Vec v = v2(0.3, 1.0);
    // ∇^α_U V = ∇_U V − α(U)V − α(V)U with α = dy.
    const Vec first = -(dir[1] * v + v[1] * dir);
    CHECK((contract(w, dir, v) - first).norm() < 1e-14);
}

} // TEST_SUITE

TEST_SUITE("curvature") {

TEST_CASE("flat and unweighted: R^alpha vanishes") {
    std::mt19937_64 rng(1);
    const Chart e = euclidean(3);
    const Vec X = random_vec(rng, 3), Y = random_vec(rng, 3), Z = random_vec(rng, 3);
    CHECK(curvature_alpha(e, Vec::Zero(3), X, Y, Z).value.norm() == 0.0);
}

TEST_CASE("antisymmetry in X and Y") {
    std::mt19937_64 rng(2);
    const Chart c = sphere_polar(2).with_potential("cos(r)");
    const Vec p = v2(1.2, 0.3);
    const Vec X = random_vec(rng, 2), Y = random_vec(rng, 2), Z = random_vec(rng, 2);
    CHECK(curvature_alpha(c, p, X, X, Z).value.norm() < 1e-12);
    for (auto m : {CurvatureMethod::analytic_formula, CurvatureMethod::coefficient_oracle}) {
        const Vec a = curvature_alpha(c, p, X, Y, Z, m).value, b = curvature_alpha(c, p, Y, X, Z, m).value;
        CHECK((a + b).norm() < 1e-9);
    }
}

TEST_CASE("sphere with phi = cos r at the equator: R^alpha(dr, dtheta)dtheta") {
    const Chart c = sphere_polar(2).with_potential("cos(r)");
    const Vec p = v2(pi / 2, 0.0);
    const Vec v = curvature_alpha(c, p, v2(1, 0), v2(0, 1), v2(0, 1)).value;
    const Vec o = curvature_alpha(c, p, v2(1, 0), v2(0, 1), v2(0, 1), CurvatureMethod::coefficient_oracle).value;
    CHECK(v[0] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(o[0] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("analytic formula against the coefficient oracle on 50 samples per chart") {
    std::mt19937_64 rng(20240611);
    for (const Chart& c : weighted_catalog()) {
        const int n = c.dim();
        double worst = 0.0, worst_trace = 0.0;
        for (int k = 0; k < 50; ++k) {
            Vec p = c.domain().sample(rng, 1.0);
            if (!c.domain().contains(p, 0.05)) {
                --k;
                continue;
            }
            const Vec X = random_vec(rng, n), Y = random_vec(rng, n), Z = random_vec(rng, n);
            const Vec a = curvature_alpha(c, p, X, Y, Z).value;
            const Vec o = curvature_alpha(c, p, X, Y, Z, CurvatureMethod::coefficient_oracle).value;
            worst = std::max(worst, relative_difference(a, o));
            worst_trace = std::max(worst_trace, relative_difference(ricci_alpha_trace(c, p, Y, Z), ric_f(c, p, Y, Z, 1.0).value));
        }
        INFO(c.name());
        CHECK(worst < 1e-4);
        CHECK(worst_trace < 1e-4);
    }
}

TEST_CASE("first Bianchi identity for the Levi-Civita tensor") {
    std::mt19937_64 rng(4);
    const Chart c = sphere_polar(3);
    Vec p(3);
    p << 1.1, 0.9, 0.4;
    const Riemann R = riemann_tensor(c, p, Flavor::levi_civita);
    const Vec X = random_vec(rng, 3), Y = random_vec(rng, 3), Z = random_vec(rng, 3);
    CHECK((R.apply(X, Y, Z) + R.apply(Y, Z, X) + R.apply(Z, X, Y)).norm() < 1e-8);
}

TEST_CASE("Bakry-Emery Ricci tensor") {
    SUBCASE("f = 0 on the plane") {
        CHECK(ric_f(euclidean(2), v2(1, 2), v2(1, 0), v2(0, 1), 1.0).value == 0.0);
    }
    SUBCASE("expansion example: Ric_f^1(dr, dr) = -(n-1) + A^2/(n-1)") {
        const Chart c = expansion_example(2, 3.0);
        for (const Vec& p : {v2(0.3, 0.2), v2(-1.0, 4.0), v2(2.0, -1.5)}) {
            const RicciValue v = ric_f(c, p, v2(1, 0), v2(1, 0), 1.0);
            CHECK(v.ric == doctest::Approx(-1.0).epsilon(1e-9));
            CHECK(v.value == doctest::Approx(8.0).epsilon(1e-9));
        }
        Vec p(3);
        p << 0.1, 0.2, -0.3;
        CHECK(ric_f(expansion_example(3, 2.0), p, Vec::Unit(3, 0), Vec::Unit(3, 0), 1.0).value ==
              doctest::Approx(-2.0 + 4.0 / 2.0).epsilon(1e-9));
    }
    SUBCASE("rigidity metric f = r/4 attains the radial bound e^{-1} at r = 1") {
        const Chart c = rigidity_metric(2, 1.0, "r/4");
        CHECK(ric_f(c, v2(1.0, 0.0), v2(1, 0), v2(1, 0), 1.0).value == doctest::Approx(std::exp(-1.0)).epsilon(1e-6));
    }
    SUBCASE("symmetry and the infinite-N limit") {
        std::mt19937_64 rng(9);
        const Chart c = hyperbolic_warped(2, 1.0).with_density("r*y/2");
        const Vec p = v2(0.2, 0.5), Y = random_vec(rng, 2), Z = random_vec(rng, 2);
        CHECK(ric_f(c, p, Y, Z, 1.0).value == doctest::Approx(ric_f(c, p, Z, Y, 1.0).value).epsilon(1e-9));
        const RicciValue inf = ric_f(c, p, Y, Z, kInfiniteN);
        CHECK(inf.value == doctest::Approx(inf.ric + inf.hess_f).epsilon(1e-12));
    }
    SUBCASE("N = n is rejected") {
        CHECK_THROWS_AS((void)ric_f(euclidean(2), v2(0, 0), v2(1, 0), v2(1, 0), 2.0), InvalidArgument);
    }
}

TEST_CASE("weighted sectional curvature") {
    CHECK(weighted_sec(euclidean(2), v2(0, 0), v2(1, 0), v2(0, 1)) == 0.0);
    const Chart s = sphere_polar(2);
    const Vec p = v2(0.7, 0.0);
    const Vec X = v2(1, 0), Y = v2(0, 1.0 / std::sin(0.7));
    CHECK(weighted_sec(s, p, X, Y) == doctest::Approx(1.0).epsilon(1e-8));
    const Chart sc = sphere_polar(2).with_potential("cos(r)");
    const Vec q = v2(pi / 2, 0.0);
    CHECK(weighted_sec(sc, q, v2(1, 0), v2(0, 1)) == doctest::Approx(1.0).epsilon(1e-8));
    const Vec q2 = v2(1.0, 0.0), Y2 = v2(0, 1.0 / std::sin(1.0));
    const double via_curvature = curvature_alpha(sc, q2, v2(1, 0), Y2, Y2).value.dot(sc.metric(q2) * v2(1, 0));
    CHECK(weighted_sec(sc, q2, v2(1, 0), Y2) == doctest::Approx(via_curvature).epsilon(1e-6));
    CHECK_THROWS_AS((void)weighted_sec(s, p, v2(1, 0), v2(0, 1)), InvalidArgument);
}

TEST_CASE("drift Laplacian") {
    const std::vector<std::string> xy{"x", "y"};
    CHECK(drift_laplacian_scalar(euclidean(2), v2(0.3, 0.1), ScalarField::parse("x^2 + y^2", xy)) ==
          doctest::Approx(4.0));
    CHECK(drift_laplacian_scalar(euclidean(2).with_density("x"), v2(0.3, 0.1), ScalarField::parse("x", xy)) ==
          doctest::Approx(-1.0));
    const double lap = drift_laplacian_scalar(sphere_polar(2), v2(1.0, 0.0), ScalarField::parse("r", {"r", "theta"}));
    CHECK(lap == doctest::Approx(1.0 / std::tan(1.0)).epsilon(1e-9));
    CHECK(lap == doctest::Approx(0.642093).epsilon(1e-6));
}

TEST_CASE("parallel volume form") {
    CHECK(volume_form_parallel_residual(euclidean(2), v2(0, 0), v2(1, 0)) == 0.0);
    std::mt19937_64 rng(12);
    for (const Chart& c : weighted_catalog()) {
        for (int k = 0; k < 5; ++k) {
            Vec p = c.domain().sample(rng, 1.0);
            if (!c.domain().contains(p, 0.05)) continue;
            INFO(c.name());
            CHECK(volume_form_parallel_residual(c, p, random_vec(rng, c.dim())) < 1e-8);
        }
    }
    const Chart hooked = euclidean(2).with_one_form([](const Vec& x) { return v2(x[1], 0.0); });
    for (const Vec& p : {v2(0.3, 0.7), v2(-1.0, 0.4), v2(0.8, -0.9)}) {
        const double res = std::max(volume_form_parallel_residual(hooked, p, v2(1, 0)),
                                    volume_form_parallel_residual(hooked, p, v2(0, 1)));
        CHECK(res > 1e-3);
    }
}

TEST_CASE("Codazzi residuals vanish together") {
    const Chart c = sphere_polar(2).with_potential("cos(r)");
    const Vec p = v2(1.1, 0.3);
    const SymTensorField g = SymTensorField::metric_of(c);
    CHECK(codazzi_residual(c, p, g, false) < 1e-9);
    CHECK(codazzi_residual(c, p, g, true) < 1e-7);

    const Chart e = euclidean(2);
    const SymTensorField bad = SymTensorField::parse({{"1 + x*y", "y^2"}, {"y^2", "1 + x^3"}}, {"x", "y"});
    const Vec q = v2(0.6, -0.4);
    CHECK(codazzi_residual(e, q, bad, false) > 1e-3);
    CHECK(codazzi_residual(e, q, bad, true) > 1e-3);
}

TEST_CASE("the metric is not weighted-parallel unless alpha vanishes") {
    const Chart c = hyperbolic_warped(2, 1.0).with_potential("r");
    const MetricAlphaResidual m = metric_alpha_residual(c, v2(0.3, 0.2));
    CHECK(m.identity_residual < 1e-12);
    CHECK(m.raw_norm > 1e-2);
    CHECK(metric_alpha_residual(sphere_polar(2), v2(1.0, 0.0)).raw_norm < 1e-12);
}

TEST_CASE("curvature operator against a compatible metric") {
    const Chart c = sphere_polar(3);
    Vec p(3);
    p << 1.0, 0.8, 0.2;
    Vec Y(3);
    Y << 0.3, 0.5, -0.2;
    const CptCurvCheck k = cptcurv_check(c, p, Y, c.metric(p));
    CHECK(k.symmetry_defect < 1e-8);
    CHECK(k.signs_match);
    for (double e : k.eigenvalues) CHECK(e >= -1e-8);
}

TEST_CASE("covariant Hessian of r on the sphere") {
    const Mat H = covariant_hessian(sphere_polar(2), v2(1.0, 0.0), ScalarField::parse("r", {"r", "theta"}));
    CHECK(H(0, 0) == doctest::Approx(0.0));
    CHECK(H(1, 1) == doctest::Approx(std::sin(1.0) * std::cos(1.0)).epsilon(1e-10));
}

} // TEST_SUITE
