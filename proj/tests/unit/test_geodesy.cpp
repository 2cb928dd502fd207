#include "wgeom/catalog.hpp"
#include "wgeom/geodesy.hpp"

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

double speed(const Chart& c, const Vec& x, const Vec& v) { return std::sqrt(v.dot(c.metric(x) * v)); }

// Distance from x to a densely resampled path.
double distance_to_path(const CurvePath& path, const Vec& x) {
    double best = INFINITY;
    const int m = 4000;
    for (int i = 0; i <= m; ++i) {
        const double t = path.t_begin() + (path.t_end() - path.t_begin()) * i / m;
        best = std::min(best, (path.position(t) - x).norm());
    }
    return best;
}

} // namespace

TEST_SUITE("geodesics") {

TEST_CASE("straight segment in the plane") {
    Vec p = Vec::Zero(3), v = Vec::Unit(3, 0);
    const CurvePath path = integrate_geodesic(euclidean(3), p, v, 1.0, Connection::levi_civita);
    CHECK(!path.truncated);
    CHECK((path.nodes.back().x - Vec::Unit(3, 0)).norm() < 1e-12);
}

TEST_CASE("equator of the round sphere") {
    const Chart s = sphere_polar(2);
    const CurvePath path = integrate_geodesic(s, v2(pi / 2, 0.0), v2(0.0, 1.0), pi, Connection::levi_civita);
    CHECK((path.nodes.back().x - v2(pi / 2, pi)).norm() < 1e-8);
    for (const auto& n : path.nodes) CHECK(std::abs(n.x[0] - pi / 2) < 1e-10);
}

TEST_CASE("unit speed is preserved along Levi-Civita geodesics") {
    for (const Chart& c : {sphere_polar(2), hyperbolic_warped(2, 1.0), rigidity_metric(2, 1.0, "r/4")}) {
        const Vec p = v2(0.9, 0.3);
        Vec v = v2(0.6, 0.8);
        v /= speed(c, p, v);
        const CurvePath path = integrate_geodesic(c, p, v, 1.5, Connection::levi_civita);
        double drift = 0.0;
        for (const auto& n : path.nodes) drift = std::max(drift, std::abs(speed(c, n.x, n.v) - 1.0));
        INFO(c.name());
        CHECK(drift < 1e-7);
    }
}

TEST_CASE("weighted geodesic along the x-axis for phi = y") {
    const Chart c = euclidean(2).with_potential("y");
    const CurvePath path = integrate_geodesic(c, v2(0, 0), v2(1, 0), 2.0, Connection::weighted);
    for (const auto& n : path.nodes) {
        CHECK(std::abs(n.x[1]) < 1e-12);
        CHECK(n.v.norm() == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("speed law and image coincidence for weighted geodesics") {
    const std::vector<Chart> charts{euclidean(2).with_potential("x/2 + y^2/4"),
                                    sphere_polar(2).with_potential("cos(r)"),
                                    hyperbolic_warped(2, 1.0).with_potential("y/3")};
    for (const Chart& c : charts) {
        const Vec p = v2(1.0, 0.2);
        const Vec v = v2(0.3, 0.7);
        const CurvePath w = integrate_geodesic(c, p, v, 1.0, Connection::weighted);
        const int n = c.dim();
        std::vector<double> law;
        for (const auto& node : w.nodes) law.push_back(speed(c, node.x, node.v) * std::exp(-2 * c.f(node.x) / (n - 1)));
        double mean = 0.0, var = 0.0;
        for (double x : law) mean += x;
        mean /= law.size();
        for (double x : law) var += (x - mean) * (x - mean);
        INFO(c.name());
        CHECK(std::sqrt(var / law.size()) < 1e-6 * mean);

        // Same direction under g covers the weighted image.
        const Vec u = v / speed(c, p, v);
        double L = 0.0;
        for (std::size_t i = 1; i < w.nodes.size(); ++i) {
            const double dt = w.nodes[i].t - w.nodes[i - 1].t;
            L += 0.5 * dt * (speed(c, w.nodes[i].x, w.nodes[i].v) + speed(c, w.nodes[i - 1].x, w.nodes[i - 1].v));
        }
        const CurvePath g = integrate_geodesic(c, p, u, L * 1.05, Connection::levi_civita);
        double haus = 0.0;
        for (const auto& node : w.nodes) haus = std::max(haus, distance_to_path(g, node.x));
        CHECK(haus < 1e-3 * std::max(1.0, L));
    }
}

TEST_CASE("leaving the chart truncates the path") {
    const CurvePath path = integrate_geodesic(sphere_polar(2), v2(0.5, 0.0), v2(-1.0, 0.0), 2.0, Connection::levi_civita);
    CHECK(path.truncated);
    CHECK(!path.reason.empty());
}

} // TEST_SUITE

TEST_SUITE("reparametrization") {

TEST_CASE("constant density scales length") {
    const Chart c = euclidean(2).with_density("0.3");
    const CurvePath path = integrate_geodesic(c, v2(0, 0), v2(0.6, 0.8), 2.0, Connection::levi_civita);
    CHECK(reparametrize(path, c).total_s == doctest::Approx(std::exp(-0.6) * 2.0).epsilon(1e-10));
}

TEST_CASE("equator with f = cos r has s equal to length") {
    const Chart c = sphere_polar(2).with_density("cos(r)");
    const CurvePath path = integrate_geodesic(c, v2(pi / 2, 0.0), v2(0, 1), 1.3, Connection::levi_civita);
    CHECK(reparametrize(path, c).total_s == doctest::Approx(1.3).epsilon(1e-9));
}

TEST_CASE("radial ray with f = r: total s = (1 - e^{-2})/2") {
    const Chart c = euclidean(2).with_density("sqrt(x^2 + y^2)");
    const CurvePath path = integrate_geodesic(c, v2(1e-9, 0), v2(1, 0), 1.0, Connection::levi_civita);
    const ReparRecord rec = reparametrize(path, c);
    CHECK(rec.total_s == doctest::Approx((1 - std::exp(-2.0)) / 2).epsilon(1e-8));
    CHECK(rec.total_s == doctest::Approx(0.432332).epsilon(1e-6));
    for (std::size_t i = 1; i < rec.s.size(); ++i) CHECK(rec.s[i] >= rec.s[i - 1]);
}

TEST_CASE("conformal length of a unit-speed geodesic equals s") {
    const Chart c = hyperbolic_warped(2, 1.0).with_density("r/2 + y/5");
    const CurvePath path = integrate_geodesic(c, v2(0.2, 0.1), v2(1.0, 0.0), 1.0, Connection::levi_civita);
    CHECK(conformal_length(path, c) == doctest::Approx(reparametrize(path, c).total_s).epsilon(1e-10));
}

} // TEST_SUITE

TEST_SUITE("distance") {

TEST_CASE("unweighted plane: s is Euclidean distance") {
    const DistanceResult d = repar_distance(euclidean(2), v2(0.1, 0.2), v2(1.3, -0.7));
    CHECK(d.s == doctest::Approx(std::hypot(1.2, 0.9)).epsilon(1e-8));
    CHECK(d.minimal_count >= 1);
}

TEST_CASE("constant f scales the distance by e^{-2c}") {
    const Chart c = sphere_polar(2).with_density("0.25");
    const DistanceResult d = repar_distance(c, v2(1.0, 0.0), v2(1.4, 0.8));
    CHECK(d.s == doctest::Approx(std::exp(-0.5) * d.d_g).epsilon(1e-8));
}

TEST_CASE("symmetry on random pairs") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const Chart c = euclidean(2).with_density("x/2 + y^2/3");
    for (int k = 0; k < 5; ++k) {
        const Vec p = v2(U(rng), U(rng)), q = v2(U(rng), U(rng));
        CHECK(repar_distance(c, p, q).s == doctest::Approx(repar_distance(c, q, p).s).epsilon(1e-7));
    }
}

TEST_CASE("s bounds the conformal distance from above") {
    const Chart c = euclidean(2).with_density("x");
    const Vec p = v2(0, 0), q = v2(1, 0);
    const double dh = conformal_distance(c, p, q);
    CHECK(repar_distance(c, p, q).s >= dh - 1e-6);
    const Vec x = v2(0.5, 0.8);
    CHECK(repar_distance(c, p, x).s + repar_distance(c, q, x).s >= dh - 1e-6);

    // A detour: half-disc arc over the segment.
    std::vector<Vec> pts;
    for (int i = 0; i <= 400; ++i) {
        const double t = pi * (1.0 - i / 400.0);
        pts.push_back(v2(0.5 + 0.5 * std::cos(t), 0.5 * std::sin(t)));
    }
    CHECK(conformal_length(CurvePath::polyline(pts), c) > dh + 1e-3);
}

TEST_CASE("rigidity metric K = 4, f = r/4: s from the pole follows the defining integral") {
    const Chart c = rigidity_metric(2, 4.0, "r/4");
    const double far = c.domain().hi[0];
    const double antipode = -2.0 * std::log(1.0 - pi / 4);  // 2(1 - e^{-D/2}) = pi/2
    CHECK(far < antipode);
    CHECK(far > antipode - 0.01);
    for (double r : {0.5, 1.7, far}) {
        const DistanceResult d = repar_distance(c, v2(0.0, 0.0), v2(r, 0.3));
        CHECK(d.s == doctest::Approx(2.0 * (1.0 - std::exp(-r / 2))).epsilon(1e-7));
        CHECK(d.s <= pi / 2);
    }
}

TEST_CASE("completeness diagnostic on the expansion example records both rays") {
    const auto rays = completeness_diagnostic(expansion_example(2, 3.0), v2(0, 0), v2(1, 0), 16.0);
    REQUIRE(rays.size() == 2);
    for (const auto& r : rays) {
        CHECK(r.T.size() == r.s.size());
        for (std::size_t i = 1; i < r.s.size(); ++i) CHECK(r.s[i] >= r.s[i - 1] - 1e-12);
    }
    CHECK(rays[0].converging != rays[1].converging);
    const auto& fin = rays[0].converging ? rays[0] : rays[1];
    CHECK(fin.limit_estimate == doctest::Approx(1.0 / 6.0).epsilon(1e-6));
}

TEST_CASE("sphere directions are unit vectors") {
    for (int n : {2, 3, 5})
        for (const Vec& d : sphere_directions(n, 16)) CHECK(d.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

} // TEST_SUITE
