#include "wgeom/catalog.hpp"
#include "wgeom/errors.hpp"
#include "wgeom/transport.hpp"

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

Vec v3(double a, double b, double c) {
    Vec v(3);
    v << a, b, c;
    return v;
}

PiecewiseCurve square(double y0, double y1) {
    return PiecewiseCurve::polyline({v2(0, y0), v2(1, y0), v2(1, y1), v2(0, y1), v2(0, y0)});
}

// Open test curves: a polyline and a smooth arc.
std::vector<PiecewiseCurve> test_curves(const Vec& a) {
    std::vector<PiecewiseCurve> out;
    out.push_back(PiecewiseCurve::polyline({a, a + v2(0.4, 0.1), a + v2(0.2, 0.7), a + v2(-0.3, 0.5)}));
    out.push_back(PiecewiseCurve({Segment{[a](double t) { return Vec(a + v2(0.5 * std::sin(t), 0.3 * (1 - std::cos(2 * t)))); },
                                          [](double t) { return v2(0.5 * std::cos(t), 0.6 * std::sin(2 * t)); }, 0.0,
                                          2.0}}));
    return out;
}

} // namespace

TEST_SUITE("transport") {

TEST_CASE("flat and unweighted: vectors come back unchanged") {
    const Vec v = v2(0.3, -1.2);
    for (const auto& c : test_curves(v2(0, 0))) CHECK((parallel_transport(euclidean(2), c, v) - v).norm() < 1e-12);
}

TEST_CASE("linearity, composition and inverse") {
    const Chart c = sphere_polar(2).with_potential("cos(r)");
    const auto curves = test_curves(v2(1.0, 0.1));
    const Vec v = v2(0.4, 1.1), w = v2(-0.7, 0.2);
    const Vec lhs = parallel_transport(c, curves[0], 2.0 * v - 3.0 * w);
    const Vec rhs = 2.0 * parallel_transport(c, curves[0], v) - 3.0 * parallel_transport(c, curves[0], w);
    CHECK((lhs - rhs).norm() < 1e-9);

    const PiecewiseCurve loop1 = PiecewiseCurve::polyline({v2(1.0, 0.0), v2(1.4, 0.2), v2(1.2, 0.6), v2(1.0, 0.0)});
    const PiecewiseCurve loop2 = PiecewiseCurve::polyline({v2(1.0, 0.0), v2(0.8, -0.5), v2(1.3, -0.4), v2(1.0, 0.0)});
    const Mat h1 = holonomy_element(c, loop1).matrix, h2 = holonomy_element(c, loop2).matrix;
    const Mat h12 = holonomy_element(c, loop1.then(loop2)).matrix;
    CHECK((h12 - h2 * h1).cwiseAbs().maxCoeff() < 1e-7);
    const Mat back = holonomy_element(c, loop1.reversed()).matrix;
    CHECK((back * h1 - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("determinant one and orthogonality when alpha vanishes") {
    std::mt19937_64 rng(20240611);
    const Chart weighted = hyperbolic_warped(2, 1.0).with_density("y^2/3 + r/2");
    const Chart plain = sphere_polar(2);
    for (int k = 0; k < 6; ++k) {
        const PiecewiseCurve loop = k % 2 ? random_polygon_loop(rng, v2(1.0, 0.3), 0.4)
                                          : random_fourier_loop(rng, v2(1.0, 0.3), 0.4);
        const HolonomyElement hw = holonomy_element(weighted, loop);
        CHECK(std::abs(hw.det - 1.0) < 1e-6);
        const HolonomyElement hp = holonomy_element(plain, loop);
        CHECK(orthogonality_defect(plain, hp) < 1e-7);
        CHECK(std::abs(hp.det - 1.0) < 1e-6);
        const HolonomyElement ho = holonomy_element(plain, loop, FrameMode::orthonormal);
        CHECK((ho.matrix.transpose() * ho.matrix - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-7);
    }
}

TEST_CASE("open loops are rejected") {
    const PiecewiseCurve open = PiecewiseCurve::polyline({v2(0, 0), v2(1, 0), v2(1, 1)});
    CHECK_THROWS_AS((void)holonomy_element(euclidean(2), open), InvalidArgument);
}

TEST_CASE("periodic coordinates close a loop") {
    const Chart s = sphere_polar(2);
    const PiecewiseCurve around({Segment{[](double t) { return v2(1.0, t); }, [](double) { return v2(0.0, 1.0); }, 0.0,
                                         2 * pi}});
    const HolonomyElement h = holonomy_element(s, around, FrameMode::orthonormal);
    // Latitude circle at r = 1 rotates by 2 pi (1 - cos 1).
    const double angle = 2 * pi * (1 - std::cos(1.0));
    CHECK(h.matrix(0, 0) == doctest::Approx(std::cos(angle)).epsilon(1e-7));
    CHECK(std::abs(h.matrix(1, 0)) == doctest::Approx(std::abs(std::sin(angle))).epsilon(1e-7));
}

TEST_CASE("product with phi on the fiber: unipotent holonomy of the unit square") {
    // c = e^{-phi(y0)} (e^{phi(y0)} phi'(y0) - e^{phi(y1)} phi'(y1)) for phi = y^2.
    const Chart c = euclidean(2).with_potential("y^2");
    const HolonomyElement h = holonomy_element(c, square(0.0, 1.0));
    CHECK(h.matrix(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(h.matrix(1, 1) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(h.matrix(1, 0)) < 1e-9);
    CHECK(h.matrix(0, 1) == doctest::Approx(-2.0 * std::exp(1.0)).epsilon(1e-7));

    const HolonomyElement h2 = holonomy_element(c, square(0.5, 1.5));
    const double expected = std::exp(-0.25) * (std::exp(0.25) * 1.0 - std::exp(2.25) * 3.0);
    CHECK(h2.matrix(0, 1) == doctest::Approx(expected).epsilon(1e-7));
}

TEST_CASE("hyperbolic plane with phi = r: the radial and mixed fields are parallel") {
    const Chart c = hyperbolic_warped(2, 1.0).with_potential("r");
    for (const auto& curve : test_curves(v2(0.1, -0.2))) {
        const Vec a = curve.start(), b = curve.end();
        const Vec radial = parallel_transport(c, curve, v2(std::exp(2 * a[0]), 0.0));
        CHECK((radial - v2(std::exp(2 * b[0]), 0.0)).norm() < 1e-8 * std::exp(2 * b[0]));
        const Vec mixed = parallel_transport(c, curve, v2(a[1] * std::exp(2 * a[0]), 1.0));
        CHECK((mixed - v2(b[1] * std::exp(2 * b[0]), 1.0)).norm() < 1e-8 * std::max(1.0, std::exp(2 * b[0])));
    }
    std::mt19937_64 rng(3);
    for (int k = 0; k < 4; ++k) {
        const HolonomyElement h = holonomy_element(c, random_fourier_loop(rng, v2(0.2, 0.1), 0.6));
        CHECK((h.matrix - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-5);
    }
}

} // TEST_SUITE

TEST_SUITE("holonomy algebra") {

TEST_CASE("sphere rectangle family at s = 0") {
    const Chart c = sphere_polar(2).with_potential("cos(r)");
    CHECK(std::cos(rectangle_xi()) == doctest::Approx((1 - std::sqrt(5.0)) / 2).epsilon(1e-14));
    const AlgebraElement B = algebra_element(c, sphere_rectangle_family(), 0.0);
    const double b12 = (1 - std::sqrt(5.0)) / 2 * std::exp((std::sqrt(5.0) - 1) / 2);
    CHECK(std::abs(B.matrix(0, 0)) < 1e-6);
    CHECK(std::abs(B.matrix(1, 1)) < 1e-6);
    CHECK(B.matrix(0, 1) == doctest::Approx(b12).epsilon(1e-6));
    CHECK(B.matrix(0, 1) == doctest::Approx(-1.146585).epsilon(1e-4));
    CHECK(B.matrix(1, 0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK((B.holonomy - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("sphere latitude family at s = pi/2") {
    const Chart c = sphere_polar(2).with_potential("cos(r)");
    const AlgebraElement A = algebra_element(c, sphere_latitude_family(), pi / 2);
    // The equator loop itself has unipotent holonomy.
    CHECK(A.holonomy(0, 0) == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(A.holonomy(1, 0) == doctest::Approx(-2 * pi).epsilon(1e-7));
    const double p2 = pi * pi, p3 = p2 * pi;
    Mat expected(2, 2);
    expected << 2 * p2, -2 * pi, 4 * pi + 8 * p3 / 3, -2 * p2;
    CHECK((A.matrix - expected).cwiseAbs().maxCoeff() < 1e-5 * expected.cwiseAbs().maxCoeff());
    Mat raw(2, 2);
    raw << 2 * p2, -2 * pi, 4 * pi - 4 * p3 / 3, 2 * p2;
    CHECK((A.raw_derivative - raw).cwiseAbs().maxCoeff() < 1e-5 * raw.cwiseAbs().maxCoeff());
    CHECK(std::abs(A.trace()) < 1e-4);
}

TEST_CASE("generated dimensions") {
    const Chart c = sphere_polar(2).with_potential("cos(r)");
    const Mat A = algebra_element(c, sphere_latitude_family(), pi / 2).matrix;
    const Mat B = algebra_element(c, sphere_rectangle_family(), 0.0).matrix;
    CHECK(generated_algebra_dim({A, B}) == 3);
    CHECK(generated_algebra_dim({Mat::Zero(2, 2)}) == 0);
    Mat nil(2, 2);
    nil << 0, 1, 0, 0;
    CHECK(generated_algebra_dim({nil}) == 1);
    CHECK(generated_algebra_dim({nil, Mat(nil.transpose())}) == 3);
}

TEST_CASE("flat charts give a zero algebra element for any family") {
    const LoopFamily fam = expression_family(
        "ellipses", {{"s*cos(2*pi*t) - s", "0.5*sin(2*pi*t)"}});
    const AlgebraElement e = algebra_element(euclidean(2), fam, 0.7);
    CHECK(e.matrix.cwiseAbs().maxCoeff() < 1e-9);
}

} // TEST_SUITE

TEST_SUITE("parallel fields and distributions") {

TEST_CASE("warped product: V = e^{2 psi} e^{phi_N} d_x is parallel") {
    const Chart c = warped_product(1, 1, "x/2").with_potential("x/2 + y^2/4");
    const auto curves = test_curves(v2(0.2, 0.3));
    const VectorField V = VectorField::parse({"exp(x)*exp(y^2/4)", "0"}, c.coords());
    CHECK(parallel_field_residual(c, V, curves) < 1e-6);
    const VectorField W = VectorField::parse({"exp(2.1*x/2)*exp(y^2/4)", "0"}, c.coords());
    CHECK(parallel_field_residual(c, W, curves) > 1e-3);
    CHECK(parallel_field_residual(euclidean(2), VectorField::parse({"1", "2"}, {"x", "y"}), curves) == 0.0);
}

TEST_CASE("product with phi on the fiber: base directions are invariant and blocks split") {
    const Chart c = euclidean(3).with_potential("y^2/2 + z/3");
    const Chart fiber = euclidean(2).with_potential("x^2/2 + y/3");
    std::mt19937_64 rng(5);
    std::vector<PiecewiseCurve> loops;
    for (int k = 0; k < 4; ++k) loops.push_back(random_fourier_loop(rng, v3(0.1, 0.2, -0.1), 0.5));
    const VectorField base = VectorField::parse({"1", "0", "0"}, c.coords());
    DistributionReport rep = distribution_invariance(c, {base}, loops);
    CHECK(rep.max_angle < 1e-5);
    block_structure(c, 1, fiber, loops, rep);
    CHECK(rep.block_checked);
    CHECK(rep.lower_block < 1e-6);
    CHECK(rep.fiber_block_error < 1e-5);
    CHECK_THROWS_AS(block_structure(c, 2, fiber, loops, rep), InvalidArgument);
}

TEST_CASE("unweighted product: both factors invariant") {
    const Chart c = euclidean(3);
    std::mt19937_64 rng(6);
    std::vector<PiecewiseCurve> loops{random_polygon_loop(rng, v3(0, 0, 0), 0.5)};
    const VectorField x = VectorField::parse({"1", "0", "0"}, c.coords());
    const VectorField y = VectorField::parse({"0", "1", "0"}, c.coords());
    const VectorField z = VectorField::parse({"0", "0", "1"}, c.coords());
    CHECK(distribution_invariance(c, {x}, loops).max_angle < 1e-9);
    CHECK(distribution_invariance(c, {y, z}, loops).max_angle < 1e-9);
}

TEST_CASE("twisted product whose weight mixes the factors moves the base direction") {
    const Chart c = twisted_product(1, 1, "x*y/3").with_density("x/2");
    std::mt19937_64 rng(8);
    std::vector<PiecewiseCurve> loops;
    for (int k = 0; k < 3; ++k) loops.push_back(random_fourier_loop(rng, v2(0.3, 0.4), 0.8));
    const VectorField base = VectorField::parse({"1", "0"}, c.coords());
    CHECK(distribution_invariance(c, {base}, loops).max_angle > 1e-3);
}

TEST_CASE("principal angles") {
    const Mat g = Mat::Identity(2, 2);
    Mat a(2, 1), b(2, 1);
    a << 1, 0;
    b << 1, 1;
    CHECK(principal_angle(g, a, b) == doctest::Approx(pi / 4).epsilon(1e-12));
    CHECK(principal_angle(g, a, a) < 1e-12);
}

} // TEST_SUITE
