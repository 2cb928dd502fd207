#include "wgeom/catalog.hpp"
#include "wgeom/comparison.hpp"
#include "wgeom/experiment.hpp"
#include "wgeom/tensorcalc.hpp"
#include "wgeom/transport.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace wgeom;

namespace {

constexpr double pi = 3.14159265358979323846;

struct Outcome {
    bool pass = true;
    std::string detail;
};

struct Criterion {
    int id;
    std::string title;
    std::function<Outcome()> run;
};

std::string fmt(double v, int digits = 6) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

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

// Interior sample at least `margin` inside the chart domain.
Vec interior_point(const Chart& c, std::mt19937_64& rng, double scale = 1.0, double margin = 0.05) {
    for (;;) {
        Vec p = c.domain().sample(rng, scale);
        if (c.domain().contains(p, margin)) return p;
    }
}

// Charts with an exact one-form, one per catalog constructor and several densities.
std::vector<Chart> weighted_catalog() {
    return {euclidean(2).with_density("x*y/3 + sin(x)"),
            euclidean(3).with_potential("x^2/4 - y*z/5"),
            sphere_polar(2).with_potential("cos(r)"),
            sphere_polar(3).with_density("sin(r)*cos(theta1)/2"),
            hyperbolic_warped(2, 1.0).with_potential("r"),
            hyperbolic_warped(3, 0.5).with_density("r/2 + y1*y2/4"),
            warped_product(1, 1, "x^2/4").with_density("y^2/3"),
            warped_product(1, 2, "sin(x)/2").with_potential("x/3 + y1*y2/5"),
            twisted_product(1, 1, "x*y/3").with_density("x/2"),
            expansion_example(2, 3.0),
            expansion_example(3, 2.0),
            rigidity_metric(2, 1.0, "r/4"),
            rigidity_metric(3, 1.0, "r/4")};
}

Outcome check_matrix(const std::string& label, const Mat& got, const Mat& want, double tol, Outcome out) {
    const double err = (got - want).cwiseAbs().maxCoeff();
    out.pass = out.pass && err <= tol;
    out.detail += label + " max|diff| " + fmt(err, 3) + (err <= tol ? " ok" : " FAIL") + "; ";
    return out;
}

Mat mat2(double a, double b, double c, double d) {
    Mat m(2, 2);
    m << a, b, c, d;
    return m;
}

// ---------------------------------------------------------------------------------------------

Outcome criterion_s2() {
    const Chart c = sphere_polar(2).with_potential("cos(r)");
    const Mat A = algebra_element(c, sphere_latitude_family(), pi / 2).matrix;
    const Mat B = algebra_element(c, sphere_rectangle_family(), 0.0).matrix;
    const double golden = (1 - std::sqrt(5.0)) / 2;
    Outcome o;
    o = check_matrix("A", A, mat2(1, -1, 2 / pi + 4 * pi / 3, -1), 1e-3, o);
    o = check_matrix("B", B, mat2(0, golden * std::exp(-golden), 1, 0), 1e-3, o);
    const int dim = generated_algebra_dim({A, B});
    o.pass = o.pass && dim == 3;
    o.detail += "dim <A,B> = " + std::to_string(dim);
    return o;
}

Outcome criterion_warped() {
    const Chart c = euclidean(2).with_potential("y^2");
    const PiecewiseCurve square = PiecewiseCurve::polyline({v2(0, 0), v2(1, 0), v2(1, 1), v2(0, 1), v2(0, 0)});
    const Mat h = holonomy_element(c, square).matrix;
    Outcome o = check_matrix("h", h, mat2(1, -2 / std::exp(1.0), 0, 1), 1e-5, {});
    o.detail += "h12 = " + fmt(h(0, 1), 9);
    return o;
}

Outcome criterion_hyperbolic() {
    const Chart c = hyperbolic_warped(2, 1.0).with_potential("r");
    const VectorField radial = VectorField::parse({"exp(2*r)", "0"}, c.coords());
    const VectorField mixed = VectorField::parse({"y*exp(2*r)", "1"}, c.coords());
    std::mt19937_64 rng(20240611);
    std::vector<PiecewiseCurve> loops;
    for (int k = 0; k < 20; ++k)
        loops.push_back(k % 2 ? random_polygon_loop(rng, v2(0.0, 0.0), 0.5) : random_fourier_loop(rng, v2(0.0, 0.0), 0.5));
    const double r1 = parallel_field_residual(c, radial, loops), r2 = parallel_field_residual(c, mixed, loops);
    double dev = 0.0;
    for (const auto& loop : loops)
        dev = std::max(dev, (holonomy_element(c, loop).matrix - Mat::Identity(2, 2)).cwiseAbs().maxCoeff());
    return {r1 < 1e-6 && r2 < 1e-6 && dev < 1e-5, "residuals " + fmt(r1, 3) + ", " + fmt(r2, 3) +
                                                       "; max |h - I| " + fmt(dev, 3) + " over 20 loops"};
}

Outcome criterion_unimodular() {
    std::mt19937_64 rng(20240611);
    double det_dev = 0.0, orth = 0.0;
    int runs = 0;
    for (const Chart& c : weighted_catalog()) {
        for (int k = 0; k < 4; ++k) {
            const Vec center = interior_point(c, rng, 1.0, 0.4);
            const PiecewiseCurve loop = k % 2 ? random_polygon_loop(rng, center, 0.3) : random_fourier_loop(rng, center, 0.3);
            det_dev = std::max(det_dev, std::abs(holonomy_element(c, loop).det - 1.0));
            const Chart plain(c.name() + " unweighted", c.coords(), [c](const Vec& x) { return c.metric(x); }, c.domain());
            orth = std::max(orth, orthogonality_defect(plain, holonomy_element(plain, loop)));
            ++runs;
        }
    }
    return {det_dev < 1e-6 && orth < 1e-7, "max |det h - 1| " + fmt(det_dev, 3) + ", max |h^T G h - G| " + fmt(orth, 3) +
                                              " over " + std::to_string(runs) + " loops"};
}

Outcome criterion_curvature() {
    std::mt19937_64 rng(20240611);
    double worst = 0.0, worst_trace = 0.0;
    std::string where;
    for (const Chart& c : weighted_catalog()) {
        const int n = c.dim();
        for (int k = 0; k < 50; ++k) {
            const Vec p = interior_point(c, rng);
            const Vec X = random_vec(rng, n), Y = random_vec(rng, n), Z = random_vec(rng, n);
            const double d = relative_difference(curvature_alpha(c, p, X, Y, Z).value,
                                                 curvature_alpha(c, p, X, Y, Z, CurvatureMethod::coefficient_oracle).value);
            if (d > worst) {
                worst = d;
                where = c.name();
            }
            worst_trace = std::max(worst_trace, relative_difference(ricci_alpha_trace(c, p, Y, Z), ric_f(c, p, Y, Z, 1.0).value));
        }
    }
    return {worst < 1e-4 && worst_trace < 1e-4, "formula vs oracle " + fmt(worst, 3) + " (" + where + "), trace vs Ric_f^1 " +
                                                    fmt(worst_trace, 3)};
}

Outcome criterion_expansion() {
    double err = 0.0;
    for (auto [n, A] : {std::pair{2, 3.0}, {3, 2.0}, {4, 1.5}}) {
        const Chart c = expansion_example(n, A);
        std::mt19937_64 rng(n);
        for (int k = 0; k < 5; ++k) {
            const Vec p = interior_point(c, rng);
            const double v = ric_f(c, p, Vec::Unit(n, 0), Vec::Unit(n, 0), 1.0).value;
            err = std::max(err, std::abs(v - (-(n - 1) + A * A / (n - 1))));
        }
    }
    const double eight = ric_f(expansion_example(2, 3.0), v2(0.3, 0.2), v2(1, 0), v2(1, 0), 1.0).value;
    return {err < 1e-6, "n=2, A=3: " + fmt(eight, 12) + "; max error " + fmt(err, 3)};
}

Outcome criterion_rigidity() {
    double worst = 0.0;
    int rays = 0;
    for (auto [n, K, f] : {std::tuple{2, 1.0, "r/4"}, {2, 4.0, "r/4"}, {2, 1.0, "-r/4"}, {3, 1.0, "r/4"}}) {
        const Chart c = rigidity_metric(n, K, f);
        const double r_max = c.domain().hi[0];
        for (int k = 0; k < 4; ++k) {
            // Pole rays; the angular coordinates pick the direction.
            Vec p = Vec::Zero(n);
            p[1] = 0.4 + 0.7 * k;
            if (n > 2) p[2] = 0.9 * k;
            const RadialProfile pr = radial_profile(c, p, Vec::Unit(n, 0), r_max);
            for (const auto& smp : pr.samples()) {
                const double m = m_k({n, K}, smp.s);
                worst = std::max(worst, std::abs(smp.lambda - m) / std::max(1.0, std::abs(m)));
            }
            ++rays;
        }
    }
    Outcome o{worst < 1e-5, "max |lambda - m_K(s)| / max(1, |m_K|) " + fmt(worst, 3) + " on " + std::to_string(rays) + " rays; "};
    for (auto [K, f] : {std::pair{4.0, "r/4"}, {1.0, "-r/4"}}) {
        const ComparisonReport rep = myers_check(rigidity_metric(2, K, f), v2(0, 0), K, 8);
        const double err = std::abs(rep.measured - pi / std::sqrt(K));
        o.pass = o.pass && rep.verdict != Verdict::fail && err < 1e-4;
        o.detail += "Myers K=" + fmt(K) + " f=" + f + ": s = " + fmt(rep.measured, 10) + " (" + to_string(rep.verdict) + "); ";
    }
    return o;
}

Outcome criterion_comparison() {
    struct Case {
        std::string label;
        Chart chart;
        Vec p;
        Vec dir;
        double K;
        double r_max;
        std::vector<Vec> points;
    };
    const std::vector<Case> cases{
        {"euclidean", euclidean(2), v2(0, 0), v2(1, 0), 0.0, 2.0, {v2(1.0, 0.5), v2(-0.3, 0.8)}},
        {"sphere", sphere_polar(2), v2(pi / 2, 0), v2(0, 1), 1.0, 2.0, {v2(1.2, 0.5), v2(2.0, -0.4)}},
        {"sphere+cos r", sphere_polar(2).with_density("cos(r)"), v2(pi / 2, 0), v2(0, 1), kSampledK, 1.0,
         {v2(1.2, 0.5), v2(2.0, -0.4), v2(1.0, -0.7)}},
        {"rigidity K=1 f=r/4", rigidity_metric(2, 1.0, "r/4"), v2(0, 0), v2(1, 0), 1.0, 4.0,
         {v2(1.0, 0.3), v2(2.5, -1.0)}},
    };
    Outcome o;
    double slowest = 0.0;
    for (const Case& cs : cases) {
        std::vector<ComparisonReport> reps;
        auto timed = [&](const std::function<ComparisonReport()>& f) {
            const auto t0 = std::chrono::steady_clock::now();
            reps.push_back(f());
            slowest = std::max(slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        };
        const int n = cs.chart.dim();
        const ModelParams mp{n, cs.K};
        const RadialProfile pr = radial_profile(cs.chart, cs.p, cs.dir, cs.r_max);
        timed([&] { return riccati_check(pr); });
        timed([&] { return mean_curvature_check(pr, mp); });
        timed([&] { return volume_element_monotone(pr, mp); });
        timed([&] { return laplacian_comparison_check(cs.chart, cs.p, cs.points, mp); });
        timed([&] {
            return volume_comparison_check(cs.chart, cs.p, VolumeMode::f_volume_annuli, {0.0, 0.5, 0.0, 1.0}, mp);
        });
        timed([&] { return volume_comparison_check(cs.chart, cs.p, VolumeMode::mu_level_sets, {0.0, 0.2, 0.0, 0.4}, mp); });
        timed([&] { return bounded_f_bounds(cs.chart, cs.p, 0.5, {n, 0.0}); });
        std::string failed;
        for (const auto& r : reps)
            if (!r.passed()) failed += " " + r.theorem + "(" + to_string(r.verdict) + ", margin " + fmt(r.margin, 3) + ")";
        o.pass = o.pass && failed.empty();
        o.detail += cs.label + (failed.empty() ? " all pass" : ":" + failed) + "; ";
    }
    o.pass = o.pass && slowest < 120.0;
    o.detail += "slowest check " + fmt(slowest, 3) + " s";
    return o;
}

Outcome criterion_one_dim() {
    double worst = 0.0;
    worst = std::max(worst, one_dim_closed_forms(1, 1.0, pi / 2, 0.2, 3.0).max_error);
    worst = std::max(worst, one_dim_closed_forms(0, 0.5, 1.0, 0.0, 2.0).max_error);
    worst = std::max(worst, one_dim_closed_forms(-1, 1.0, pi / 2, 0.2, 2.0).max_error);
    return {worst < 1e-6, "max error " + fmt(worst, 3) + " for K = 1, 0, -1"};
}

Outcome criterion_volume_form() {
    std::mt19937_64 rng(20240611);
    double exact = 0.0;
    for (const Chart& c : weighted_catalog())
        for (int k = 0; k < 10; ++k) {
            const Vec p = interior_point(c, rng);
            exact = std::max(exact, volume_form_parallel_residual(c, p, random_vec(rng, c.dim())));
        }
    const Chart hooked = euclidean(2).with_one_form([](const Vec& x) { return v2(x[1], 0.0); });
    double injected = INFINITY;
    for (int k = 0; k < 10; ++k) {
        const Vec p = random_vec(rng, 2);
        injected = std::min(injected, std::max(volume_form_parallel_residual(hooked, p, v2(1, 0)),
                                               volume_form_parallel_residual(hooked, p, v2(0, 1))));
    }
    return {exact < 1e-8 && injected > 1e-3,
            "exact alpha max residual " + fmt(exact, 3) + "; non-closed alpha min residual " + fmt(injected, 3)};
}

Outcome criterion_determinism() {
    int mismatched = 0;
    std::size_t bytes = 0;
    for (const auto& e : reproduction_bundle()) {
        const ExperimentSpec s = parse_spec(e.spec);
        const RunResult a = run_experiment(s), b = run_experiment(s);
        if (a.csv != b.csv || a.csv.empty()) ++mismatched;
        bytes += a.csv.size();
    }
    return {mismatched == 0, std::to_string(reproduction_bundle().size()) + " entries, " + std::to_string(bytes) +
                                 " CSV bytes, " + std::to_string(mismatched) + " differing"};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria: one pass/fail line each"};
    std::vector<int> only;
    app.add_option("--only", only, "run only these criteria")->check(CLI::Range(1, 11));
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> all{
        {1, "sphere holonomy algebra A, B and dim 3 (1e-3, < 30 s)", criterion_s2},
        {2, "unipotent product holonomy [[1, -2/e], [0, 1]] (1e-5)", criterion_warped},
        {3, "hyperbolic parallel fields and trivial holonomy (1e-6, 1e-5)", criterion_hyperbolic},
        {4, "det h = 1 (1e-6) and orthogonal Levi-Civita holonomy (1e-7)", criterion_unimodular},
        {5, "R^alpha formula vs oracle and trace vs Ric_f^1 (1e-4 relative)", criterion_curvature},
        {6, "expansion example Ric_f^1 = -(n-1) + A^2/(n-1) (1e-6)", criterion_expansion},
        {7, "rigidity equality lambda = m_K(s) (1e-5), Myers saturation (1e-4)", criterion_rigidity},
        {8, "comparison suite on the hypothesis-satisfying set (< 120 s each)", criterion_comparison},
        {9, "one-dimensional closed forms vs u-equation (1e-6)", criterion_one_dim},
        {10, "parallel volume form (1e-8) and its failure for non-closed alpha (1e-3)", criterion_volume_form},
        {11, "bundle CSVs byte-identical across runs", criterion_determinism},
    };

    int failures = 0;
    for (const Criterion& c : all) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.id == 1 && secs >= 30.0) o.pass = false;
        failures += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << c.id << ": " << c.title << " | " << o.detail << " ["
                  << fmt(secs, 3) << " s]\n";
    }
    return failures == 0 ? 0 : 1;
}
