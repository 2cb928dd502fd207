#include "wgeom/comparison.hpp"

#include "wgeom/errors.hpp"
#include "wgeom/numerics.hpp"
#include "wgeom/parallel.hpp"
#include "wgeom/report.hpp"
#include "wgeom/tensorcalc.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace wgeom {

namespace {

constexpr double kPi = std::numbers::pi;

bool is_pole(const Chart& chart, const Vec& p) { return chart.polar() && p[0] <= 0.0; }

// g-orthonormal basis of v^⊥ (v assumed g-unit).
Mat normal_frame(const Mat& g, const Vec& v) {
    const int n = static_cast<int>(v.size());
    std::vector<Vec> basis{v};
    for (int k = 0; k < n && static_cast<int>(basis.size()) < n; ++k) {
        Vec w = Vec::Unit(n, k);
        for (const Vec& b : basis) w -= w.dot(g * b) * b;
        const double len = std::sqrt(std::max(0.0, w.dot(g * w)));
        if (len > 1e-8) basis.push_back(w / len);
    }
    Mat E(n, n - 1);
    for (int i = 1; i < n; ++i) E.col(i - 1) = basis[i];
    return E;
}

double near_edge(const Domain& d, const Vec& x) {
    double gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i < static_cast<int>(x.size()); ++i) {
        if (i < static_cast<int>(d.period.size()) && d.period[i] > 0) continue;
        if (std::isfinite(d.lo[i])) gap = std::min(gap, x[i] - d.lo[i]);
        if (std::isfinite(d.hi[i])) gap = std::min(gap, d.hi[i] - x[i]);
    }
    return gap;
}

struct Layout {
    int n;
    int m() const { return n - 1; }
    int x() const { return 0; }
    int v() const { return n; }
    int jx(int i) const { return 2 * n + 2 * n * i; }
    int jv(int i) const { return 2 * n + 2 * n * i + n; }
    int s() const { return 2 * n + 2 * n * (n - 1); }
    int size() const { return s() + 1; }
};

double frame_det(const Layout& L, const Vec& y) {
    Mat M(L.n, L.n);
    M.col(0) = y.segment(L.v(), L.n);
    for (int i = 0; i < L.m(); ++i) M.col(i + 1) = y.segment(L.jx(i), L.n);
    return M.determinant();
}

// Chebyshev-clustered grid on [a, b].
std::vector<double> cluster_grid(double a, double b, int count) {
    std::vector<double> r(count);
    for (int i = 0; i < count; ++i) r[i] = a + (b - a) * 0.5 * (1.0 - std::cos(kPi * i / (count - 1)));
    return r;
}

double clamped_sn_power(double K, double s, int e) { return std::pow(std::max(0.0, sn_k(K, s)), e); }

} // namespace

// ---------------------------------------------------------------------------------------------
// Profiles

ProfileSample RadialProfile::at(double r) const {
    const Layout L{n_};
    const Chart& c = *chart_;
    const Vec y = (*dense_)(r);
    ProfileSample out;
    out.r = r;
    out.x = y.segment(L.x(), n_);
    out.v = y.segment(L.v(), n_);
    out.s = y[L.s()];
    out.f = c.f(out.x);
    const Mat g = c.metric(out.x);
    const Symbols gamma = christoffel_symbols(c, out.x);
    Mat J(n_, L.m()), DJ(n_, L.m());
    for (int i = 0; i < L.m(); ++i) {
        J.col(i) = y.segment(L.jx(i), n_);
        DJ.col(i) = y.segment(L.jv(i), n_) + contract(gamma, out.v, J.col(i));
    }
    const Mat G = J.transpose() * g * J;
    const Mat B = DJ.transpose() * g * J;
    const double detG = G.determinant();
    out.A = std::sqrt(std::max(0.0, detG)) / pole_jacobian_;
    out.A_f = std::exp(-out.f) * out.A;
    out.lap = (G.inverse() * B.transpose()).trace();
    out.lap_f = out.lap - c.df(out.x).dot(out.v);
    out.lambda = std::exp(2.0 * out.f / (n_ - 1)) * out.lap_f;
    return out;
}

double RadialProfile::s_at(double r) const {
    if (r <= r_begin_ && pole_) return (*dense_)(r_begin_)[Layout{n_}.s()] * std::max(0.0, r) / r_begin_;
    return (*dense_)(r)[Layout{n_}.s()];
}

double RadialProfile::A_f_at(double r) const {
    if (!pole_ && r <= 1e-12) return 0.0;
    if (pole_ && r < r_begin_) return at(r_begin_).A_f * std::pow(std::max(0.0, r) / r_begin_, n_ - 1);
    const Layout L{n_};
    const Vec y = (*dense_)(r);
    const Vec x = y.segment(L.x(), n_);
    Mat J(n_, L.m());
    for (int i = 0; i < L.m(); ++i) J.col(i) = y.segment(L.jx(i), n_);
    const double detG = (J.transpose() * chart_->metric(x) * J).determinant();
    return std::exp(-chart_->f(x)) * std::sqrt(std::max(0.0, detG)) / pole_jacobian_;
}

double RadialProfile::lambda_at(double r) const { return at(r).lambda; }

std::optional<double> RadialProfile::r_of_s(double target) const {
    const double lo = 0.0;
    if (target <= 0.0) return lo;
    const double s_end = s_at(r_end_);
    if (target > s_end) return std::nullopt;
    if (target == s_end) return r_end_;
    return num::find_root([&](double r) { return s_at(r) - target; }, lo, r_end_, 1e-14);
}

RadialProfile radial_profile(const Chart& chart, const Vec& p, const Vec& direction, double r_max,
                             const Settings& settings) {
    const int n = chart.dim();
    if (n < 2) throw InvalidArgument("comparison", "radial profiles need n >= 2");
    if (p.size() != n) throw InvalidArgument("comparison", "basepoint has wrong dimension");
    if (!(r_max > 0)) throw InvalidArgument("comparison", "r_max must be positive");
    const Layout L{n};
    const double delta = settings.chart_margin;

    RadialProfile prof;
    prof.chart_ = std::make_shared<const Chart>(chart);
    prof.n_ = n;
    prof.p_ = p;
    prof.pole_ = is_pole(chart, p);

    Vec y0 = Vec::Zero(L.size());
    double t0 = 0.0;
    if (prof.pole_) {
        Vec x0 = p;
        x0[0] = delta;
        const Mat S = chart.polar()->sphere_gram(x0);
        prof.pole_jacobian_ = std::sqrt(S.determinant());
        y0.segment(L.x(), n) = x0;
        y0[L.v()] = 1.0 / std::sqrt(chart.metric(x0)(0, 0));
        for (int i = 0; i < L.m(); ++i) y0[L.jx(i) + i + 1] = 1.0;
        y0[L.s()] = num::gauss_kronrod(
            [&](double r) {
                Vec x = p;
                x[0] = r;
                return std::exp(-2.0 * chart.f(x) / (n - 1));
            },
            0.0, delta, 1e-15);
        t0 = delta;
        if (r_max <= delta) throw InvalidArgument("comparison", "r_max must exceed the inner cutoff");
    } else {
        chart.require_inside(p, "comparison");
        const Mat g = chart.metric(p);
        const double len = std::sqrt(direction.dot(g * direction));
        if (direction.size() != n || std::abs(len - 1.0) > 1e-8)
            throw InvalidArgument("comparison", "direction must be a unit vector at p");
        const Mat E = normal_frame(g, direction);
        y0.segment(L.x(), n) = p;
        y0.segment(L.v(), n) = direction;
        for (int i = 0; i < L.m(); ++i) y0.segment(L.jv(i), n) = E.col(i);
    }

    // Linearized geodesic equation; ∂Γ along each Jacobi field by central differences.
    auto rhs = [&chart, n, L](double, const Vec& y, Vec& dy) {
        dy.resize(L.size());
        const Vec x = y.segment(L.x(), n), v = y.segment(L.v(), n);
        const Symbols gamma = christoffel_symbols(chart, x);
        dy.segment(L.x(), n) = v;
        dy.segment(L.v(), n) = -contract(gamma, v, v);
        const double h = 1e-5 * std::max(1.0, x.lpNorm<Eigen::Infinity>());
        for (int i = 0; i < L.m(); ++i) {
            const Vec dx = y.segment(L.jx(i), n), dv = y.segment(L.jv(i), n);
            dy.segment(L.jx(i), n) = dv;
            Vec acc = -2.0 * contract(gamma, v, dv);
            const double len = dx.norm();
            if (len > 0) {
                const Vec u = dx / len;
                const Vec plus = contract(christoffel_symbols(chart, x + h * u), v, v);
                const Vec minus = contract(christoffel_symbols(chart, x - h * u), v, v);
                acc -= len * (plus - minus) / (2 * h);
            }
            dy.segment(L.jv(i), n) = acc;
        }
        dy[L.s()] = std::exp(-2.0 * chart.f(x) / (n - 1)) * std::sqrt(std::max(0.0, v.dot(chart.metric(x) * v)));
    };

    double ref_sign = 1.0;
    {
        Vec probe = y0;
        if (!prof.pole_)
            for (int i = 0; i < L.m(); ++i) probe.segment(L.jx(i), n) = y0.segment(L.jv(i), n);
        ref_sign = frame_det(L, probe) > 0 ? 1.0 : -1.0;
    }
    const Domain& dom = chart.domain();
    const bool pole = prof.pole_;
    auto inside = [&, ref_sign, pole](double t, const Vec& y) {
        if (!dom.contains(y.segment(L.x(), n))) return false;
        if (!pole && t < 1e-9) return true;
        return frame_det(L, y) * ref_sign > 0;
    };

    ode::Options opts;
    opts.rtol = std::min(settings.ode_rtol, 1e-11);
    opts.atol = std::min(settings.ode_atol, 1e-13);
    opts.initial_step = 1e-4;
    const ode::Result res = ode::integrate(rhs, t0, y0, r_max, opts, inside);
    if (res.status == ode::Status::step_underflow)
        throw IntegrationError("comparison", "radial profile: " + res.message);
    prof.dense_ = res.solution;
    prof.r_begin_ = pole ? delta : std::min(delta, 0.5 * r_max);
    prof.r_end_ = res.solution->t_end();

    double r_hi = prof.r_end_;
    if (res.status == ode::Status::left_domain) {
        prof.truncated_ = true;
        const Vec y_end = (*res.solution)(prof.r_end_);
        const Vec x_end = y_end.segment(L.x(), n);
        if (near_edge(dom, x_end) < 1e-6) {
            prof.reason_ = "domain edge at r = " + report::number(prof.r_end_);
        } else {
            prof.conjugate_ = true;
            prof.reason_ = "conjugate point at r = " + report::number(prof.r_end_);
            r_hi = prof.r_end_ - std::min(1e-3, 0.01 * prof.r_end_);
        }
        // Closed rotational charts: continue 𝒜^{1/(n-1)} to its zero beyond the collar.
        if (pole && !prof.conjugate_ && std::isfinite(chart.polar()->antipode) && x_end[0] > dom.hi[0] - 1e-6) {
            const double h = 5e-4;
            const double r2 = prof.r_end_, r1 = r2 - h, r0 = r2 - 2 * h;
            const double e = 1.0 / (n - 1);
            const double w0 = std::pow(prof.at(r0).A, e), w1 = std::pow(prof.at(r1).A, e),
                         w2 = std::pow(prof.at(r2).A, e);
            // Newton form through (r0,w0), (r1,w1), (r2,w2), solved for w = 0 beyond r2.
            const double d1 = (w2 - w1) / h, d2 = (w2 - 2 * w1 + w0) / (2 * h * h);
            auto w = [&](double r) { return w2 + d1 * (r - r2) + d2 * (r - r2) * (r - r1); };
            double guess = r2 - w2 / d1;
            if (d1 < 0 && guess > r2) {
                double hi = r2 + 4 * (guess - r2) + 1e-6;
                if (w(hi) < 0) guess = num::find_root(w, r2, hi, 1e-15);
                const Vec v_end = y_end.segment(L.v(), n);
                const double tail = num::gauss_kronrod(
                    [&](double r) {
                        const Vec x = x_end + (r - r2) * v_end;
                        return std::exp(-2.0 * chart.f(x) / (n - 1));
                    },
                    r2, guess, 1e-15);
                prof.end_r_ = guess;
                prof.end_s_ = y_end[L.s()] + tail;
            }
        }
    }

    if (r_hi <= prof.r_begin_) throw DomainError("comparison", "radial profile ends before the inner cutoff");
    const auto grid = cluster_grid(prof.r_begin_, r_hi, std::max(10, settings.profile_samples));
    prof.samples_.reserve(grid.size());
    for (double r : grid) prof.samples_.push_back(prof.at(r));

    CurvePath path;
    path.tag = Parametrization::unit_speed_g;
    path.truncated = prof.truncated_;
    path.reason = prof.reason_;
    for (std::size_t k = 0; k < res.solution->times().size(); ++k) {
        const Vec& y = res.solution->states()[k];
        path.nodes.push_back({res.solution->times()[k], y.segment(L.x(), n), y.segment(L.v(), n)});
    }
    path.dense = res.solution;
    prof.geodesic_ = std::move(path);
    return prof;
}

double sphere_area(int n) {
    if (n < 1) throw InvalidArgument("comparison", "n must be at least 1");
    return 2.0 * std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n);
}

double ball_volume(int n) { return sphere_area(n) / n; }

RayFamily ray_family(const Chart& chart, const Vec& p, double r_max, int count, const Settings& settings) {
    const int n = chart.dim();
    if (count <= 0) count = settings.angular_samples;
    RayFamily fam;
    fam.solid_angle = sphere_area(n);
    const bool pole = is_pole(chart, p);
    std::vector<Vec> starts, dirs;
    if (pole) {
        if (n > 3) throw InvalidArgument("comparison", "pole ray families are implemented for n <= 3");
        for (const Vec& d : sphere_directions(n, count, settings.seed)) {
            Vec q = Vec::Zero(n);
            if (n == 2) {
                q[1] = std::atan2(d[1], d[0]);
            } else {
                q[1] = std::acos(std::clamp(d[2], -1.0, 1.0));
                q[2] = std::atan2(d[1], d[0]);
            }
            if (q[n - 1] < 0) q[n - 1] += 2 * kPi;
            starts.push_back(q);
            dirs.push_back(Vec::Unit(n, 0));
        }
    } else {
        const Mat E = orthonormal_frame(chart.metric(p));
        for (const Vec& d : sphere_directions(n, count, settings.seed)) {
            starts.push_back(p);
            dirs.push_back(E * d);
        }
    }
    fam.profiles = parallel_map(starts.size(), [&](std::size_t j) {
        return radial_profile(chart, starts[j], dirs[j], r_max, settings);
    });
    fam.weights.assign(starts.size(), fam.solid_angle / static_cast<double>(starts.size()));
    return fam;
}

// ---------------------------------------------------------------------------------------------
// Reports

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::hypothesis_unmet: return "hypothesis-unmet";
    }
    return "?";
}

void ComparisonReport::add(ComparisonRow row) {
    row.margin = row.bound - row.value;
    samples.push_back(row);
}

void ComparisonReport::finish() {
    if (samples.empty()) {
        log.push_back("no samples");
        if (verdict != Verdict::hypothesis_unmet) verdict = Verdict::fail;
        return;
    }
    // Binding row: the one closest to violating its own tolerance.
    std::size_t bind = 0;
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double slack = samples[i].margin + samples[i].tolerance;
        if (slack < worst || std::isnan(slack)) {
            worst = slack;
            bind = i;
            if (std::isnan(slack)) break;
        }
    }
    margin = samples[bind].margin;
    tolerance = samples[bind].tolerance;
    if (verdict == Verdict::hypothesis_unmet) return;
    verdict = margin >= -tolerance ? Verdict::pass : Verdict::fail;
}

std::string ComparisonReport::csv() const {
    report::Csv out({"theorem", "ray", "r", "s", "value", "bound", "margin", "tolerance"});
    for (const auto& row : samples)
        out.row({theorem, std::to_string(row.ray), report::number(row.r), report::number(row.s),
                 report::number(row.value), report::number(row.bound), report::number(row.margin),
                 report::number(row.tolerance)});
    return out.str();
}

std::string ComparisonReport::summary() const {
    std::ostringstream os;
    os << theorem << ": " << to_string(verdict) << ", min margin " << report::number(margin) << ", tolerance "
       << report::number(tolerance) << ", samples " << samples.size();
    if (hypothesis.checked)
        os << ", hypothesis " << (hypothesis.satisfied ? "satisfied" : "unmet") << " (K = "
           << report::number(hypothesis.K) << ", sampled " << report::number(hypothesis.sampled_K) << " over "
           << hypothesis.points << " points)";
    else
        os << ", hypothesis not sampled";
    return os.str();
}

// ---------------------------------------------------------------------------------------------
// Hypothesis sampling

namespace {

// min over unit u of e^{4f/(n-1)} Ric_f^1(u,u)/(n-1) at x, and the same over random unit vectors.
std::pair<double, double> local_bound(const Chart& chart, const Vec& x, std::mt19937_64& rng, int vectors) {
    const int n = chart.dim();
    const Mat R = ric_f_matrix(chart, x, 1.0);
    const Mat g = chart.metric(x);
    const double scale = std::exp(4.0 * chart.f(x) / (n - 1)) / (n - 1);
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(0.5 * (R + R.transpose()), g, Eigen::EigenvaluesOnly);
    const double eig = scale * es.eigenvalues().minCoeff();
    std::normal_distribution<double> normal;
    double sampled = std::numeric_limits<double>::infinity();
    for (int k = 0; k < vectors; ++k) {
        Vec u(n);
        for (int i = 0; i < n; ++i) u[i] = normal(rng);
        u /= std::sqrt(u.dot(g * u));
        sampled = std::min(sampled, scale * u.dot(R * u));
    }
    return {eig, sampled};
}

} // namespace

HypothesisReport sample_hypothesis(const Chart& chart, const std::vector<Vec>& points, double K,
                                   const Settings& settings, double tol) {
    HypothesisReport h;
    h.checked = true;
    h.K = K;
    h.points = static_cast<int>(points.size());
    h.vectors = settings.hypothesis_vectors;
    std::mt19937_64 rng(settings.seed);
    double best = std::numeric_limits<double>::infinity();
    for (const Vec& x : points) {
        const auto [eig, sampled] = local_bound(chart, x, rng, settings.hypothesis_vectors);
        best = std::min({best, eig, sampled});
    }
    h.sampled_K = best;
    h.satisfied = points.empty() || best >= K - tol * std::max(1.0, std::abs(K));
    return h;
}

std::vector<Vec> profile_points(const std::vector<RadialProfile>& profiles, int count) {
    std::vector<const ProfileSample*> all;
    for (const auto& pr : profiles)
        for (const auto& s : pr.samples()) all.push_back(&s);
    std::vector<Vec> out;
    if (all.empty() || count <= 0) return out;
    const std::size_t take = std::min<std::size_t>(count, all.size());
    for (std::size_t k = 0; k < take; ++k) {
        const std::size_t idx = take == 1 ? 0 : k * (all.size() - 1) / (take - 1);
        out.push_back(all[idx]->x);
    }
    return out;
}

double sampled_curvature_bound(const Chart& chart, const std::vector<Vec>& points, const Settings& settings) {
    std::mt19937_64 rng(settings.seed);
    const auto vals = parallel_map(points.size(), [&](std::size_t i) {
        std::mt19937_64 local(settings.seed + i);
        return local_bound(chart, points[i], local, 0).first;
    });
    double best = std::numeric_limits<double>::infinity();
    for (double v : vals) best = std::min(best, v);
    return best;
}

static ModelParams resolve_sampled(const ModelParams& params, const Chart& chart, const std::vector<RadialProfile>& profiles,
                            const Settings& settings, std::vector<std::string>& log) {
    if (!std::isnan(params.K)) return params;
    std::vector<Vec> pts;
    for (const auto& pr : profiles)
        for (const auto& smp : pr.samples()) pts.push_back(smp.x);
    ModelParams out = params;
    out.K = sampled_curvature_bound(chart, pts, settings);
    log.push_back("sampled K = " + report::number(out.K) + " over " + std::to_string(pts.size()) + " points");
    return out;
}

// ---------------------------------------------------------------------------------------------
// Local comparisons along one profile

ComparisonReport riccati_check(const RadialProfile& profile, const Settings& settings) {
    const auto& samples = profile.samples();
    if (samples.size() < 10) throw InvalidArgument("comparison", "riccati_check needs at least 10 samples");
    const Chart& chart = profile.chart();
    const int n = profile.dim();
    const double lo = samples.front().r, hi = samples.back().r;
    ComparisonReport rep;
    rep.theorem = "riccati";
    for (const ProfileSample& smp : samples) {
        const double r = smp.r;
        // λ behaves like (n−1)/distance near either singular end; keep the stencil well inside that scale.
        const double h = std::min({1e-2, 0.01 * r, 0.01 * (n - 1) / std::max(1e-300, std::abs(smp.lambda)), 0.2 * (hi - lo)});
        int shift = 0;
        if (r - 2 * h < lo) shift = static_cast<int>(std::ceil((lo - (r - 2 * h)) / h - 1e-12));
        if (r + 2 * h > hi) shift = -static_cast<int>(std::ceil(((r + 2 * h) - hi) / h - 1e-12));
        std::vector<double> nodes;
        for (int k = -2; k <= 2; ++k) nodes.push_back(std::clamp(r + (k + shift) * h, lo, hi));
        const auto w = num::fornberg_weights(r, nodes, 1);
        double dl = 0.0;
        for (std::size_t k = 0; k < nodes.size(); ++k) dl += w[k] * profile.lambda_at(nodes[k]);
        const Mat g = chart.metric(smp.x);
        const double speed = std::sqrt(smp.v.dot(g * smp.v));
        const double ds_dr = std::exp(-2.0 * smp.f / (n - 1)) * speed;
        const double lhs = dl / ds_dr;
        const double ric = ric_f(chart, smp.x, smp.v, smp.v, 1.0).value / (speed * speed);
        const double rhs = -smp.lambda * smp.lambda / (n - 1) - std::exp(4.0 * smp.f / (n - 1)) * ric;
        ComparisonRow row;
        row.r = r;
        row.s = smp.s;
        row.value = lhs;
        row.bound = rhs;
        row.tolerance = settings.riccati_tol * std::max(1.0, smp.lambda * smp.lambda / (n - 1));
        rep.add(row);
    }
    if (profile.truncated()) rep.log.push_back("profile truncated: " + profile.reason());
    rep.finish();
    return rep;
}

ComparisonReport mean_curvature_check(const RadialProfile& profile, const ModelParams& given,
                                      const Settings& settings) {
    ComparisonReport rep;
    rep.theorem = "mean_curvature";
    const ModelParams params = resolve_sampled(given, profile.chart(), {profile}, settings, rep.log);
    const double s_cap = params.K > 0 ? kPi / std::sqrt(params.K) : std::numeric_limits<double>::infinity();
    for (const ProfileSample& smp : profile.samples()) {
        if (!(smp.s > 0) || smp.s >= s_cap) continue;
        ComparisonRow row;
        row.r = smp.r;
        row.s = smp.s;
        row.value = smp.lambda;
        row.bound = m_k(params, smp.s);
        row.tolerance = settings.mean_curvature_tol * std::max(1.0, std::abs(row.bound));
        rep.add(row);
    }
    rep.hypothesis = sample_hypothesis(profile.chart(), profile_points({profile}, settings.hypothesis_points),
                                       params.K, settings);
    if (profile.truncated()) rep.log.push_back("profile truncated: " + profile.reason());
    rep.finish();
    return rep;
}

ComparisonReport volume_element_monotone(const RadialProfile& profile, const ModelParams& given,
                                         const Settings& settings) {
    ComparisonReport rep;
    rep.theorem = "volume_element";
    const ModelParams params = resolve_sampled(given, profile.chart(), {profile}, settings, rep.log);
    const int e = params.n - 1;
    const double s_cap = params.K > 0 ? kPi / std::sqrt(params.K) : std::numeric_limits<double>::infinity();
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (const ProfileSample& smp : profile.samples()) {
        if (!(smp.s > 0) || smp.s >= s_cap) continue;
        const double ratio = smp.A_f / std::pow(sn_k(params.K, smp.s), e);
        if (!std::isnan(prev)) {
            ComparisonRow row;
            row.r = smp.r;
            row.s = smp.s;
            row.value = ratio - prev;
            row.bound = 0.0;
            row.tolerance = settings.monotone_tol * std::max(std::abs(prev), std::abs(ratio));
            rep.add(row);
        }
        prev = ratio;
    }
    rep.hypothesis = sample_hypothesis(profile.chart(), profile_points({profile}, settings.hypothesis_points),
                                       params.K, settings);
    rep.finish();
    return rep;
}

ComparisonReport laplacian_comparison_check(const Chart& chart, const Vec& p, const std::vector<Vec>& points,
                                            const ModelParams& given, const Settings& settings) {
    const int n = chart.dim();
    ComparisonReport rep;
    rep.theorem = "laplacian";
    struct Hit {
        std::size_t k;
        double L, s;
        ProfileSample smp;
    };
    std::vector<Hit> hits;
    std::vector<RadialProfile> used;
    for (std::size_t k = 0; k < points.size(); ++k) {
        const Vec& q = points[k];
        DistanceResult d;
        try {
            d = repar_distance(chart, p, q, settings);
        } catch (const Error& e) {
            rep.log.push_back("point " + std::to_string(k) + " skipped: " + e.what());
            continue;
        }
        const Connector* best = nullptr;
        for (const auto& c : d.connectors)
            if (c.minimal && (!best || c.s < best->s)) best = &c;
        if (!best) {
            rep.log.push_back("point " + std::to_string(k) + " skipped: no minimal connector");
            continue;
        }
        Vec start = p;
        if (is_pole(chart, p)) {
            start = q;
            start[0] = 0.0;
        }
        const double L = best->length;
        RadialProfile prof;
        try {
            prof = radial_profile(chart, start, best->direction, L * (1 + 1e-9) + 1e-12, settings);
        } catch (const Error& e) {
            rep.log.push_back("point " + std::to_string(k) + " skipped: " + e.what());
            continue;
        }
        if (prof.r_end() < L * (1 - 1e-9)) {
            rep.log.push_back("point " + std::to_string(k) + " skipped: ray ends before the point (" + prof.reason() + ")");
            continue;
        }
        hits.push_back({k, L, d.s, prof.at(L)});
        used.push_back(std::move(prof));
    }
    const ModelParams params = resolve_sampled(given, chart, used, settings, rep.log);
    for (const Hit& h : hits) {
        if (params.K > 0 && h.s >= kPi / std::sqrt(params.K)) {
            rep.log.push_back("point " + std::to_string(h.k) + " skipped: s beyond pi/sqrt(K)");
            continue;
        }
        ComparisonRow row;
        row.ray = static_cast<int>(h.k);
        row.r = h.L;
        row.s = h.s;
        row.value = h.smp.lap_f;
        row.bound = std::exp(-2.0 * chart.f(h.smp.x) / (n - 1)) * m_k(params, h.s);
        row.tolerance = settings.mean_curvature_tol * std::max(1.0, std::abs(row.bound));
        rep.add(row);
        if (std::abs(h.smp.s - h.s) > 1e-6 * std::max(1.0, h.s))
            rep.log.push_back("point " + std::to_string(h.k) + ": profile s " + report::number(h.smp.s) +
                              " differs from repar_distance " + report::number(h.s));
    }
    rep.hypothesis = sample_hypothesis(chart, profile_points(used, settings.hypothesis_points), params.K, settings);
    rep.finish();
    return rep;
}

// ---------------------------------------------------------------------------------------------
// Volumes

namespace {

// ∫_a^b g dr along one ray, with the leading-order r^{n-1} law below the inner cutoff of a pole ray.
double ray_integral(const RadialProfile& pr, const std::function<double(double)>& g, double a, double b,
                    double tol) {
    b = std::min(b, pr.r_end());
    if (!(b > a)) return 0.0;
    double total = 0.0;
    const double rb = pr.r_begin();
    if (pr.from_pole() && a < rb) {
        const double top = std::min(b, rb);
        const int n = pr.dim();
        total += g(rb) * (std::pow(top, n) - std::pow(a, n)) / (n * std::pow(rb, n - 1));
        a = top;
    }
    if (b > a) total += num::adaptive_simpson(g, a, b, tol);
    return total;
}

double ray_end(const RadialProfile& pr) { return pr.conjugate() ? pr.samples().back().r : pr.r_end(); }

} // namespace

VolumeTotals volume_totals(const RayFamily& rays, VolumeMode mode, const VolumeIntervals& iv, const ModelParams& params,
                           const Settings& settings) {
    VolumeTotals t;
    const int e = params.n - 1;
    const double tol = settings.simpson_tol;
    struct Part {
        double inner = 0, outer = 0, m_inner = 0, m_outer = 0, end = 0;
    };
    const auto parts = parallel_map(rays.profiles.size(), [&](std::size_t j) {
        const RadialProfile& pr = rays.profiles[j];
        Part part;
        part.end = ray_end(pr);
        const double n1 = pr.dim() - 1;
        if (mode == VolumeMode::f_volume_annuli) {
            auto af = [&](double r) { return pr.A_f_at(r); };
            auto nu = [&](double r) { return clamped_sn_power(params.K, pr.s_at(r), e); };
            const double top_a = std::min(iv.a1, part.end), top_b = std::min(iv.b1, part.end);
            part.inner = ray_integral(pr, af, iv.a0, top_a, tol);
            part.outer = ray_integral(pr, af, iv.b0, top_b, tol);
            part.m_inner = ray_integral(pr, nu, iv.a0, top_a, tol);
            part.m_outer = ray_integral(pr, nu, iv.b0, top_b, tol);
        } else {
            auto mu = [&](double r) {
                const double af = pr.A_f_at(r);
                const Vec x = pr.geodesic().position(std::max(r, pr.r_begin()));
                return af * std::exp(-2.0 * pr.chart().f(x) / n1);
            };
            auto range = [&](double s0, double s1) {
                const auto r0 = pr.r_of_s(s0);
                if (!r0) return 0.0;
                const auto r1 = pr.r_of_s(s1);
                return ray_integral(pr, mu, *r0, r1 ? std::min(*r1, part.end) : part.end, tol);
            };
            part.inner = range(iv.a0, iv.a1);
            part.outer = range(iv.b0, iv.b1);
        }
        return part;
    });
    for (std::size_t j = 0; j < parts.size(); ++j) {
        const double w = rays.weights[j];
        t.inner += w * parts[j].inner;
        t.outer += w * parts[j].outer;
        t.model_inner += w * parts[j].m_inner;
        t.model_outer += w * parts[j].m_outer;
        t.truncation.push_back(parts[j].end);
    }
    if (mode == VolumeMode::mu_level_sets) {
        t.model_inner = rays.solid_angle * model_volume_density(params, iv.a0, iv.a1);
        t.model_outer = rays.solid_angle * model_volume_density(params, iv.b0, iv.b1);
    }
    return t;
}

namespace {

void require_nested(const VolumeIntervals& iv) {
    const bool ok = 0 <= iv.a0 && iv.a0 <= iv.a1 && iv.a1 <= iv.b1 && iv.a0 <= iv.b0 && iv.b0 <= iv.b1 && iv.b1 > iv.b0;
    if (!ok) throw InvalidArgument("comparison", "intervals must satisfy 0 <= a0 <= a1 <= b1 and a0 <= b0 < b1");
}

void log_truncation(ComparisonReport& rep, const std::vector<double>& ends, double top) {
    int cut = 0;
    double lo = std::numeric_limits<double>::infinity();
    for (double e : ends)
        if (e < top) {
            ++cut;
            lo = std::min(lo, e);
        }
    if (cut) rep.log.push_back(std::to_string(cut) + " rays truncated before " + report::number(top) +
                               " (smallest end " + report::number(lo) + ")");
}

} // namespace

ComparisonReport volume_comparison_check(const Chart& chart, const Vec& p, VolumeMode mode, const VolumeIntervals& iv,
                                         const ModelParams& given, int directions, const Settings& settings) {
    require_nested(iv);
    const int n = chart.dim();
    ComparisonReport rep;
    rep.theorem = mode == VolumeMode::f_volume_annuli ? "volume_annuli" : "volume_mu";
    // Level sets need rays long enough to reach s = b1; grow the radius until every untruncated ray does.
    double extent = iv.b1;
    if (mode == VolumeMode::mu_level_sets) extent = 1.5 * iv.b1 * std::exp(2.0 * chart.f(p) / (n - 1)) + 0.1;
    RayFamily rays = ray_family(chart, p, extent, directions, settings);
    for (int grow = 0; mode == VolumeMode::mu_level_sets && grow < 4; ++grow) {
        bool short_ray = false;
        for (const auto& pr : rays.profiles)
            if (!pr.truncated() && pr.s_at(pr.r_end()) < iv.b1) short_ray = true;
        if (!short_ray) break;
        extent *= 2;
        rays = ray_family(chart, p, extent, directions, settings);
    }
    const ModelParams params = resolve_sampled(given, chart, rays.profiles, settings, rep.log);
    const VolumeTotals t = volume_totals(rays, mode, iv, params, settings);
    const double ratio = t.inner / t.outer, model = t.model_inner / t.model_outer;
    ComparisonRow row;
    row.r = iv.a1;
    row.s = iv.b1;
    row.value = model;
    row.bound = ratio;
    row.tolerance = settings.volume_tol * std::max(1.0, std::abs(model));
    rep.add(row);

    // Ball corollaries at the outer radius.
    const double fp = chart.f(p);
    ComparisonRow ball;
    ball.ray = 1;
    ball.r = iv.b1;
    if (mode == VolumeMode::f_volume_annuli) {
        VolumeIntervals whole{0.0, iv.b1, 0.0, iv.b1};
        const VolumeTotals b = volume_totals(rays, mode, whole, params, settings);
        ball.value = b.inner;
        ball.bound = std::exp(fp) * b.model_inner;
    } else {
        VolumeIntervals whole{0.0, iv.b1, 0.0, iv.b1};
        const VolumeTotals b = volume_totals(rays, mode, whole, params, settings);
        ball.s = iv.b1;
        ball.value = b.inner;
        ball.bound = std::exp(fp) * rays.solid_angle * model_volume_density(params, 0.0, iv.b1);
        rep.log.push_back("level-set ball constant e^{f(p)} = " + report::number(std::exp(fp)) +
                          "; e^{-(n+1)f(p)/(n-1)} would give " +
                          report::number(std::exp(-(n + 1) * fp / (n - 1))));
    }
    ball.tolerance = settings.volume_tol * std::max(1.0, std::abs(ball.bound));
    rep.add(ball);
    rep.measured = ratio;

    rep.log.push_back("ratio " + report::number(ratio) + " vs model " + report::number(model));
    log_truncation(rep, t.truncation, mode == VolumeMode::f_volume_annuli ? iv.b1 : extent);
    rep.hypothesis = sample_hypothesis(chart, profile_points(rays.profiles, settings.hypothesis_points), params.K,
                                       settings);
    rep.finish();
    return rep;
}

FExtremes f_extremes(const RayFamily& rays, double r) {
    FExtremes e;
    e.f_min = std::numeric_limits<double>::infinity();
    e.f_max = -e.f_min;
    for (const auto& pr : rays.profiles) {
        const auto& smp = pr.samples();
        std::size_t imin = 0, imax = 0;
        bool any = false;
        for (std::size_t i = 0; i < smp.size(); ++i) {
            if (smp[i].r > r) break;
            if (!any || smp[i].f < smp[imin].f) imin = i;
            if (!any || smp[i].f > smp[imax].f) imax = i;
            any = true;
            ++e.samples;
        }
        if (!any) continue;
        // Golden-section refinement between the neighbours of each grid extremum.
        auto refine = [&](std::size_t i, double sign) {
            const double a0 = smp[i > 0 ? i - 1 : i].r;
            const double b0 = std::min(r, smp[std::min(i + 1, smp.size() - 1)].r);
            double a = a0, b = b0;
            const double gr = (std::sqrt(5.0) - 1) / 2;
            auto F = [&](double t) { return sign * pr.chart().f(pr.geodesic().position(t)); };
            double c = b - gr * (b - a), d = a + gr * (b - a);
            for (int it = 0; it < 60 && b - a > 1e-12; ++it) {
                if (F(c) < F(d)) b = d;
                else a = c;
                c = b - gr * (b - a);
                d = a + gr * (b - a);
            }
            return sign * std::min({F(0.5 * (a + b)), F(a0), F(b0)});
        };
        e.f_min = std::min({e.f_min, smp[imin].f, refine(imin, 1.0)});
        e.f_max = std::max({e.f_max, smp[imax].f, refine(imax, -1.0)});
    }
    const Vec p0 = rays.profiles.front().from_pole() ? Vec() : rays.profiles.front().basepoint();
    if (p0.size()) {
        const double fp = rays.profiles.front().chart().f(p0);
        e.f_min = std::min(e.f_min, fp);
        e.f_max = std::max(e.f_max, fp);
    }
    return e;
}

ComparisonReport bounded_f_bounds(const Chart& chart, const Vec& p, double r, const ModelParams& given, int directions,
                                  const Settings& settings) {
    if (!(r > 0)) throw InvalidArgument("comparison", "radius must be positive");
    const int n = chart.dim(), e = n - 1;
    ComparisonReport rep;
    rep.theorem = "bounded_f";
    const RayFamily rays = ray_family(chart, p, r, directions, settings);
    const ModelParams params = resolve_sampled(given, chart, rays.profiles, settings, rep.log);
    const FExtremes fx = f_extremes(rays, r);
    const double c_min = std::exp(-2.0 * fx.f_min / e);  // s ≤ c_min r
    const double c_max = std::exp(-2.0 * fx.f_max / e);  // s ≥ c_max r
    rep.log.push_back("f_min ~ " + report::number(fx.f_min) + ", f_max ~ " + report::number(fx.f_max) + " from " +
                      std::to_string(fx.samples) + " grid samples with golden-section refinement (approximate)");
    const double fp = chart.f(p);
    const double quarter = params.K > 0 ? 0.5 * kPi / std::sqrt(params.K) : std::numeric_limits<double>::infinity();
    auto scaled_model = [&](double c, double a, double b) {
        return rays.solid_angle *
               num::gauss_kronrod([&](double t) { return clamped_sn_power(params.K, c * t, e); }, a, b, 1e-13);
    };

    VolumeIntervals whole{0.0, 0.5 * r, 0.0, r};
    const VolumeTotals vt = volume_totals(rays, VolumeMode::f_volume_annuli, whole, params, settings);
    log_truncation(rep, vt.truncation, r);

    if (c_min * r <= quarter) {
        ComparisonRow ball;
        ball.r = r;
        ball.value = vt.outer;
        ball.bound = std::exp(fp) * scaled_model(c_min, 0.0, r);
        ball.tolerance = settings.volume_tol * std::max(1.0, std::abs(ball.bound));
        rep.add(ball);
        if (params.K == 0.0)
            rep.log.push_back("omega_n r^n e^{f(p) - 2 f_min} = " +
                              report::number(ball_volume(n) * std::pow(r, n) * std::exp(fp - 2 * fx.f_min)));

        ComparisonRow ratio;
        ratio.ray = 1;
        ratio.r = 0.5 * r;
        ratio.value = scaled_model(c_max, 0.0, 0.5 * r) / scaled_model(c_min, 0.0, r);
        ratio.bound = vt.inner / vt.outer;
        ratio.tolerance = settings.volume_tol * std::max(1.0, std::abs(ratio.value));
        rep.add(ratio);
    } else {
        rep.log.push_back("volume bounds skipped: e^{-2 f_min/(n-1)} r exceeds pi/(2 sqrt K)");
    }

    // Laplacian corollary on the sampled rays.
    for (std::size_t j = 0; j < rays.profiles.size(); ++j) {
        for (const auto& smp : rays.profiles[j].samples()) {
            if (smp.r > r) break;
            const double arg = c_max * smp.r;
            if (params.K > 0 && arg >= quarter) continue;
            ComparisonRow row;
            row.ray = static_cast<int>(j) + 2;
            row.r = smp.r;
            row.s = smp.s;
            row.value = smp.lap_f;
            row.bound = std::exp(-2.0 * fx.f_min / e) * m_k(params, arg);
            row.tolerance = settings.mean_curvature_tol * std::max(1.0, std::abs(row.bound));
            rep.add(row);
        }
    }
    rep.hypothesis = sample_hypothesis(chart, profile_points(rays.profiles, settings.hypothesis_points), params.K,
                                       settings);
    rep.finish();
    return rep;
}

ComparisonReport myers_check(const Chart& chart, const Vec& p, double K, int directions, const Settings& settings) {
    if (!(K > 0)) throw InvalidArgument("comparison", "myers_check needs K > 0");
    ComparisonReport rep;
    rep.theorem = "myers";
    const double cap = kPi / std::sqrt(K);
    double r_max = 4 * cap;
    if (chart.polar() && std::isfinite(chart.polar()->antipode)) r_max = chart.polar()->antipode + 1.0;
    const bool pole = is_pole(chart, p);
    const double inj = pole ? std::numeric_limits<double>::infinity() : chart.injectivity_radius(p);
    const RayFamily rays = ray_family(chart, p, r_max, directions, settings);
    rep.hypothesis = sample_hypothesis(chart, profile_points(rays.profiles, settings.hypothesis_points), K, settings);
    double total = 0.0;
    for (std::size_t j = 0; j < rays.profiles.size(); ++j) {
        const RadialProfile& pr = rays.profiles[j];
        double reach_r = std::min(pr.r_end(), inj);
        double reach_s = pr.s_at(reach_r);
        if (pr.extrapolated_end_s() && reach_r >= pr.r_end()) {
            reach_r = *pr.extrapolated_end_r();
            reach_s = *pr.extrapolated_end_s();
        }
        total = std::max(total, reach_s);
        ComparisonRow row;
        row.ray = static_cast<int>(j);
        row.r = reach_r;
        row.s = reach_s;
        row.value = reach_s;
        row.bound = cap;
        row.tolerance = settings.myers_tol;
        rep.add(row);
    }
    rep.measured = total;
    rep.log.push_back("largest s reached: " + report::number(total) + " against pi/sqrt(K) = " + report::number(cap));
    if (chart.name().rfind("rigidity_metric", 0) == 0) {
        ComparisonRow sat;
        sat.ray = -1;
        sat.s = total;
        sat.value = std::abs(total - cap);
        sat.bound = 0.0;
        sat.tolerance = settings.myers_tol;
        rep.add(sat);
        rep.log.push_back("saturation |s_total - pi/sqrt(K)| = " + report::number(std::abs(total - cap)));
    }
    if (!rep.hypothesis.satisfied) {
        rep.verdict = Verdict::hypothesis_unmet;
        rep.log.push_back("hypothesis violated at sampled points (min " + report::number(rep.hypothesis.sampled_K) +
                          "); conclusion not asserted");
    }
    rep.finish();
    return rep;
}

ComparisonReport finite_volume_check(const Chart& chart, const Vec& p, double K, int directions,
                                     const Settings& settings) {
    if (!(K > 0)) throw InvalidArgument("comparison", "finite_volume_check needs K > 0");
    if (!is_pole(chart, p) || !std::isfinite(chart.polar()->antipode))
        throw InvalidArgument("comparison", "finite_volume_check needs the pole of a closed rotational chart");
    const int n = chart.dim();
    ComparisonReport rep;
    rep.theorem = "finite_volume";
    const RayFamily rays = ray_family(chart, p, chart.polar()->antipode + 1.0, directions, settings);
    const auto parts = parallel_map(rays.profiles.size(), [&](std::size_t j) {
        const RadialProfile& pr = rays.profiles[j];
        auto mu = [&](double r) {
            const Vec x = pr.geodesic().position(std::max(r, pr.r_begin()));
            return pr.A_f_at(r) * std::exp(-2.0 * pr.chart().f(x) / (n - 1));
        };
        const double end = ray_end(pr);
        double v = ray_integral(pr, mu, 0.0, end, settings.simpson_tol);
        if (pr.extrapolated_end_r()) v += 0.5 * mu(end) * (*pr.extrapolated_end_r() - end);
        return v;
    });
    double mu_total = 0.0;
    for (std::size_t j = 0; j < parts.size(); ++j) mu_total += rays.weights[j] * parts[j];
    const double fp = chart.f(p);
    ComparisonRow row;
    row.value = mu_total;
    row.bound = std::exp(fp) * rays.solid_angle * model_volume_density({n, K}, 0.0, kPi / std::sqrt(K));
    row.tolerance = settings.myers_tol;
    rep.add(row);
    rep.measured = mu_total;
    rep.log.push_back("mu(M) = " + report::number(mu_total) + ", e^{f(p)} v(n,K,pi/sqrt K) = " +
                      report::number(row.bound));
    rep.hypothesis = sample_hypothesis(chart, profile_points(rays.profiles, settings.hypothesis_points), K, settings);
    rep.finish();
    return rep;
}

// ---------------------------------------------------------------------------------------------
// n = 1

namespace {

struct Closed {
    int K;
    double a, c;
    double density(double s) const {
        const double x = s + kPi / 2 - c;
        if (K == 1) return a * std::sin(x);
        if (K == -1) return a * std::sinh(x);
        return a * s + c;
    }
    double lambda(double s) const {
        const double x = s + kPi / 2 - c;
        if (K == 1) return 1.0 / std::tan(x);
        if (K == -1) return 1.0 / std::tanh(x);
        return a / (a * s + c);
    }
};

} // namespace

OneDimTable one_dim_closed_forms(int K, double a, double c, double s0, double s1, int samples) {
    if (K != -1 && K != 0 && K != 1) throw InvalidArgument("comparison", "K must be -1, 0 or 1");
    if (!(s1 > s0)) throw InvalidArgument("comparison", "empty s range");
    if (samples < 2) throw InvalidArgument("comparison", "need at least two samples");
    const Closed cf{K, a, c};
    for (int i = 0; i <= 400; ++i) {
        const double s = s0 + (s1 - s0) * i / 400.0;
        if (!(cf.density(s) > 0)) throw DomainError("comparison", "e^{-f} vanishes at s = " + report::number(s));
    }
    // u = e^f: ü = K u^{-3}, ds/dr = u^{-2}; state (u, u̇, s).
    auto rhs = [K](double, const Vec& y, Vec& dy) {
        dy.resize(3);
        dy[0] = y[1];
        dy[1] = K / (y[0] * y[0] * y[0]);
        dy[2] = 1.0 / (y[0] * y[0]);
    };
    Vec y0(3);
    y0[0] = 1.0 / cf.density(s0);
    y0[1] = -cf.lambda(s0) / y0[0];
    y0[2] = s0;
    const double r_total =
        num::gauss_kronrod([&](double s) { return 1.0 / (cf.density(s) * cf.density(s)); }, s0, s1, 1e-14);
    ode::Options opts;
    opts.rtol = 1e-12;
    opts.atol = 1e-14;
    const ode::Result res = ode::integrate(rhs, 0.0, y0, r_total * (1 + 1e-6) + 1e-9, opts);
    if (res.status != ode::Status::completed) throw IntegrationError("comparison", "u-equation: " + res.message);
    const auto& sol = *res.solution;

    OneDimTable table;
    table.K = K;
    table.a = a;
    table.c = c;
    for (int i = 0; i < samples; ++i) {
        const double s = s0 + (s1 - s0) * i / (samples - 1);
        double r = 0.0;
        if (i > 0) r = num::find_root([&](double t) { return sol(t)[2] - s; }, 0.0, sol.t_end(), 1e-15);
        const Vec y = sol(r);
        OneDimRow row;
        row.s = s;
        row.lambda_closed = cf.lambda(s);
        row.density_closed = cf.density(s);
        row.lambda_ode = -y[1] * y[0];
        row.density_ode = 1.0 / y[0];
        const double err = std::max(std::abs(row.lambda_ode - row.lambda_closed) / std::max(1.0, std::abs(row.lambda_closed)),
                                    std::abs(row.density_ode - row.density_closed) /
                                        std::max(1.0, std::abs(row.density_closed)));
        table.max_error = std::max(table.max_error, err);
        table.rows.push_back(row);
    }
    return table;
}

std::string OneDimTable::csv() const {
    report::Csv out({"s", "lambda_closed", "density_closed", "lambda_ode", "density_ode"});
    for (const auto& r : rows) out.row({r.s, r.lambda_closed, r.density_closed, r.lambda_ode, r.density_ode});
    return out.str();
}

} // namespace wgeom
