#include "wgeom/geodesy.hpp"

#include "wgeom/errors.hpp"
#include "wgeom/parallel.hpp"
#include "wgeom/tensorcalc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

namespace wgeom {

std::string to_string(Parametrization p) {
    switch (p) {
    case Parametrization::unit_speed_g: return "unit_speed_g";
    case Parametrization::alpha_normalized: return "alpha_normalized";
    case Parametrization::raw: return "raw";
    case Parametrization::polyline: return "polyline";
    }
    return "raw";
}

namespace {

std::size_t segment_of(const std::vector<PathNode>& nodes, double t) {
    auto it = std::upper_bound(nodes.begin(), nodes.end(), t, [](double v, const PathNode& nd) { return v < nd.t; });
    std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, it - nodes.begin()));
    return std::min(i, nodes.size() - 1);
}

double g_norm(const Chart& chart, const Vec& x, const Vec& v) { return std::sqrt(std::max(0.0, v.dot(chart.metric(x) * v))); }

} // namespace

Vec CurvePath::position(double t) const {
    if (dense) return (*dense)(t).head(dim());
    if (nodes.size() == 1) return nodes.front().x;
    const std::size_t i = segment_of(nodes, t);
    const PathNode &a = nodes[i - 1], &b = nodes[i];
    const double u = std::clamp((t - a.t) / (b.t - a.t), 0.0, 1.0);
    return (1 - u) * a.x + u * b.x;
}

Vec CurvePath::velocity(double t) const {
    if (dense) return (*dense)(t).segment(dim(), dim());
    if (nodes.size() == 1) return nodes.front().v;
    const std::size_t i = segment_of(nodes, t);
    return (nodes[i].x - nodes[i - 1].x) / (nodes[i].t - nodes[i - 1].t);
}

CurvePath CurvePath::reversed() const {
    CurvePath r;
    r.tag = tag;
    r.truncated = truncated;
    r.reason = reason;
    const double T = t_end();
    for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) r.nodes.push_back({T - it->t, it->x, -it->v});
    if (dense) {
        // Resample the dense output onto the reversed clock.
        const int n = dim();
        auto sol = std::make_shared<ode::DenseSolution>();
        std::vector<double> ts;
        for (const auto& nd : r.nodes) ts.push_back(nd.t);
        Vec y0(2 * n);
        y0 << r.nodes.front().x, r.nodes.front().v;
        sol->start(ts.front(), y0);
        auto src = dense;
        const double t0 = t_begin();
        for (std::size_t i = 1; i < ts.size(); ++i) {
            const double a = ts[i - 1], b = ts[i], h = b - a;
            auto state = [&](double tau) {
                Vec y = (*src)(t0 + T - tau);
                y.tail(n) = -y.tail(n);
                return y;
            };
            // Quartic through five equispaced samples, expressed in the nested Hermite basis.
            const Vec y0s = state(a), y1s = state(b);
            const Vec ym = state(a + 0.5 * h), yq = state(a + 0.25 * h), y3q = state(a + 0.75 * h);
            // Fit y(θ) = c0 + θ c1 + θ² c2 + θ³ c3 + θ⁴ c4.
            Eigen::Matrix<double, 5, 5> V;
            const double th[5] = {0.0, 0.25, 0.5, 0.75, 1.0};
            for (int r0 = 0; r0 < 5; ++r0)
                for (int c = 0; c < 5; ++c) V(r0, c) = std::pow(th[r0], c);
            const auto lu = V.partialPivLu();
            const Eigen::Index m = y0s.size();
            Mat rhsm(5, m);
            rhsm.row(0) = y0s.transpose();
            rhsm.row(1) = yq.transpose();
            rhsm.row(2) = ym.transpose();
            rhsm.row(3) = y3q.transpose();
            rhsm.row(4) = y1s.transpose();
            const Mat coef = lu.solve(rhsm);
            // Nested form y0 + θ(n1 + (1−θ)(n2 + θ(n3 + (1−θ)n4))) matching DenseSolution's layout.
            const Vec m1 = coef.row(1).transpose(), m2 = coef.row(2).transpose(), m3 = coef.row(3).transpose(),
                      m4 = coef.row(4).transpose();
            const Vec n4 = m4;
            const Vec n3 = -m3 - 2 * n4;
            const Vec n2 = n3 + n4 - m2;
            const Vec n1 = m1 - n2;
            sol->push(b, y1s, {y0s, n1, n2, n3, n4});
        }
        r.dense = sol;
    }
    return r;
}

CurvePath CurvePath::polyline(const std::vector<Vec>& points) {
    if (points.size() < 2) throw InvalidArgument("geodesy", "a polyline needs at least two points");
    CurvePath c;
    c.tag = Parametrization::polyline;
    double t = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (i > 0) {
            const double len = (points[i] - points[i - 1]).norm();
            if (len == 0.0) continue;
            t += len;
        }
        const Vec v = i + 1 < points.size() ? Vec(points[i + 1] - points[i]) : Vec(points[i] - points[i - 1]);
        const double nv = v.norm();
        c.nodes.push_back({t, points[i], nv > 0 ? Vec(v / nv) : v});
    }
    if (c.nodes.size() < 2) throw InvalidArgument("geodesy", "a polyline needs two distinct points");
    return c;
}

CurvePath integrate_geodesic(const Chart& chart, const Vec& p, const Vec& v, double T, Connection connection,
                             const Settings& settings) {
    const int n = chart.dim();
    chart.require_inside(p, "geodesy");
    if (v.size() != n) throw InvalidArgument("geodesy", "initial velocity has wrong dimension");
    if (v.norm() == 0.0) throw InvalidArgument("geodesy", "initial velocity must be nonzero");
    if (!(T > 0)) throw InvalidArgument("geodesy", "integration length T must be positive");
    const Flavor flavor = connection == Connection::weighted ? Flavor::weighted : Flavor::levi_civita;
    auto rhs = [&](double, const Vec& y, Vec& dy) {
        const Vec x = y.head(n), u = y.tail(n);
        dy.resize(2 * n);
        dy.head(n) = u;
        dy.tail(n) = -contract(connection_symbols(chart, x, flavor), u, u);
    };
    const Domain& dom = chart.domain();
    auto inside = [&](double, const Vec& y) { return dom.contains(y.head(n)); };
    ode::Options opts;
    opts.rtol = settings.ode_rtol;
    opts.atol = settings.ode_atol;
    Vec y0(2 * n);
    y0 << p, v;
    const ode::Result res = ode::integrate(rhs, 0.0, y0, T, opts, inside);
    if (res.status == ode::Status::step_underflow)
        throw IntegrationError("geodesy", "geodesic integration failed: " + res.message);
    CurvePath path;
    path.dense = res.solution;
    path.tag = connection == Connection::levi_civita && std::abs(g_norm(chart, p, v) - 1.0) < 1e-12
                   ? Parametrization::unit_speed_g
                   : Parametrization::raw;
    path.truncated = res.status != ode::Status::completed;
    path.reason = res.message;
    const auto& ts = res.solution->times();
    const auto& ys = res.solution->states();
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (i > 0 && !(ts[i] > ts[i - 1])) continue;
        path.nodes.push_back({ts[i], ys[i].head(n), ys[i].tail(n)});
    }
    if (path.nodes.size() < 2) {
        path.truncated = true;
        if (path.reason.empty()) path.reason = "no progress inside the chart domain";
    }
    return path;
}

// Eight-point rule on [a, b], checked against its two halves; falls back to adaptive quadrature on disagreement.
static double segment_integral(const std::function<double(double)>& rate, double a, double b) {
    const double whole = num::gauss_legendre8(rate, a, b);
    const double m = 0.5 * (a + b);
    const double split = num::gauss_legendre8(rate, a, m) + num::gauss_legendre8(rate, m, b);
    if (std::abs(whole - split) <= 1e-13 * std::max(1.0, std::abs(split))) return split;
    return num::gauss_kronrod(rate, a, b, 1e-13 * std::max(1.0, std::abs(split)));
}

ReparRecord reparametrize(const CurvePath& path, const Chart& chart) {
    const int n = chart.dim();
    if (n < 2) throw InvalidArgument("geodesy", "the reparametrization needs n >= 2");
    if (path.nodes.size() < 2) throw InvalidArgument("geodesy", "path has fewer than two nodes");
    const double c = -2.0 / (n - 1);
    auto rate = [&](double t) {
        const Vec x = path.position(t);
        return std::exp(c * chart.f(x)) * g_norm(chart, x, path.velocity(t));
    };
    ReparRecord rec;
    rec.path = path;
    std::vector<double> slope;
    double s = 0.0;
    for (std::size_t i = 0; i < path.nodes.size(); ++i) {
        const double t = path.nodes[i].t;
        if (i > 0) {
            const double a = path.nodes[i - 1].t;
            if (path.dense) s += segment_integral(rate, a, t);
            else s += num::gauss_kronrod(rate, a, t, 1e-13);
        }
        rec.t.push_back(t);
        rec.s.push_back(s);
        const Vec& x = path.nodes[i].x;
        const Vec& v = path.dense ? path.nodes[i].v : path.velocity(t);
        slope.push_back(std::exp(c * chart.f(x)) * g_norm(chart, x, v));
    }
    rec.total_s = s;
    rec.s_of_t = num::HermiteSpline(rec.t, rec.s, slope);
    return rec;
}

double conformal_length(const CurvePath& path, const Chart& chart) {
    if (path.nodes.size() < 2) return 0.0;
    const int n = chart.dim();
    if (n < 2) throw InvalidArgument("geodesy", "the conformal metric needs n >= 2");
    const double c = -2.0 / (n - 1);
    auto rate = [&](double t) {
        const Vec x = path.position(t);
        return std::exp(c * chart.f(x)) * g_norm(chart, x, path.velocity(t));
    };
    double L = 0.0;
    for (std::size_t i = 1; i < path.nodes.size(); ++i) {
        const double a = path.nodes[i - 1].t, b = path.nodes[i].t;
        L += path.dense ? segment_integral(rate, a, b) : num::gauss_kronrod(rate, a, b, 1e-13);
    }
    return L;
}

std::vector<Vec> sphere_directions(int n, int count, std::uint64_t seed) {
    std::vector<Vec> dirs;
    constexpr double pi = std::numbers::pi;
    if (n == 1) {
        dirs.push_back(Vec::Constant(1, 1.0));
        dirs.push_back(Vec::Constant(1, -1.0));
        return dirs;
    }
    if (n == 2) {
        for (int j = 0; j < count; ++j) {
            const double a = 2 * pi * j / count;
            Vec d(2);
            d << std::cos(a), std::sin(a);
            dirs.push_back(d);
        }
        return dirs;
    }
    if (n == 3) {
        const double golden = pi * (3.0 - std::sqrt(5.0));
        for (int j = 0; j < count; ++j) {
            const double z = 1.0 - (2.0 * j + 1.0) / count;
            const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
            Vec d(3);
            d << rho * std::cos(golden * j), rho * std::sin(golden * j), z;
            dirs.push_back(d);
        }
        return dirs;
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    for (int j = 0; j < count; ++j) {
        Vec d(n);
        for (int i = 0; i < n; ++i) d[i] = normal(rng);
        dirs.push_back(d / d.norm());
    }
    return dirs;
}

namespace {

bool is_pole(const Chart& chart, const Vec& x) { return chart.polar() && x[0] <= 0.0; }

// Radial connector from the pole of a rotational chart to q.
Connector radial_connector(const Chart& chart, const Vec& q) {
    const int n = chart.dim();
    const int pieces = 64;
    std::vector<Vec> pts;
    for (int i = 0; i <= pieces; ++i) {
        Vec x = q;
        x[0] = q[0] * i / pieces;
        pts.push_back(x);
    }
    Connector c;
    c.path = CurvePath::polyline(pts);
    c.path.tag = Parametrization::unit_speed_g;
    c.direction = Vec::Unit(n, 0);
    c.length = q[0];
    const double k = -2.0 / (n - 1);
    c.s = num::gauss_kronrod(
        [&](double r) {
            Vec x = q;
            x[0] = r;
            return std::exp(k * chart.f(x));
        },
        0.0, q[0], 1e-13);
    c.minimal = true;
    return c;
}

struct Shot {
    bool ok = false;
    Vec end;
};

Shot shoot(const Chart& chart, const Vec& p, const Vec& w, const Settings& settings) {
    Shot s;
    if (w.norm() == 0.0) {
        s.ok = true;
        s.end = p;
        return s;
    }
    const CurvePath path = integrate_geodesic(chart, p, w, 1.0, Connection::levi_civita, settings);
    if (path.truncated) return s;
    s.ok = true;
    s.end = path.nodes.back().x;
    return s;
}

double straight_length(const Chart& chart, const Vec& p, const Vec& q) {
    const Vec d = chart.domain().difference(p, q);
    return num::gauss_legendre8([&](double u) { return g_norm(chart, p + u * d, d); }, 0.0, 0.5) +
           num::gauss_legendre8([&](double u) { return g_norm(chart, p + u * d, d); }, 0.5, 1.0);
}

struct Candidate {
    std::size_t index = 0;
    double t = 0.0;
    double dist = 0.0;
};

Candidate closest_approach(const Chart& chart, const Vec& p, const Vec& v, const Vec& q, double T,
                           const Settings& settings, std::size_t index) {
    Candidate c{index, 0.0, std::numeric_limits<double>::infinity()};
    const CurvePath path = integrate_geodesic(chart, p, v, T, Connection::levi_civita, settings);
    if (path.nodes.size() < 2) return c;
    const Domain& dom = chart.domain();
    auto dist = [&](double t) { return dom.difference(q, path.position(t)).norm(); };
    const double t1 = path.t_end();
    const int samples = 256;
    int best = 0;
    double bd = dist(0.0);
    for (int i = 1; i <= samples; ++i) {
        const double d = dist(t1 * i / samples);
        if (d < bd) {
            bd = d;
            best = i;
        }
    }
    double a = t1 * std::max(0, best - 1) / samples, b = t1 * std::min(samples, best + 1) / samples;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 60; ++it) {
        const double m1 = b - gr * (b - a), m2 = a + gr * (b - a);
        if (dist(m1) < dist(m2)) b = m2;
        else a = m1;
    }
    c.t = 0.5 * (a + b);
    c.dist = dist(c.t);
    return c;
}

std::optional<Vec> newton_connect(const Chart& chart, const Vec& p, const Vec& q, Vec w, const Settings& settings,
                                  double* residual) {
    const int n = chart.dim();
    const Domain& dom = chart.domain();
    auto F = [&](const Vec& ww) -> std::optional<Vec> {
        const Shot s = shoot(chart, p, ww, settings);
        if (!s.ok) return std::nullopt;
        return dom.difference(q, s.end);
    };
    auto Fw = F(w);
    if (!Fw) return std::nullopt;
    for (int it = 0; it < settings.newton_max_iter; ++it) {
        const double r = Fw->norm();
        if (r < 1e-12) break;
        Mat J(n, n);
        bool ok = true;
        for (int j = 0; j < n; ++j) {
            const double h = 1e-7 * std::max(1.0, w.norm());
            Vec wp = w, wm = w;
            wp[j] += h;
            wm[j] -= h;
            const auto fp = F(wp), fm = F(wm);
            if (!fp || !fm) {
                ok = false;
                break;
            }
            J.col(j) = (*fp - *fm) / (2 * h);
        }
        if (!ok) return std::nullopt;
        const Vec step = J.colPivHouseholderQr().solve(-*Fw);
        if (!step.allFinite()) return std::nullopt;
        double lambda = 1.0;
        bool improved = false;
        for (int ls = 0; ls < 12; ++ls) {
            const Vec trial = w + lambda * step;
            const auto ft = F(trial);
            if (ft && ft->norm() < r) {
                w = trial;
                Fw = ft;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!improved) break;
    }
    *residual = Fw->norm();
    if (*residual > settings.endpoint_tol) return std::nullopt;
    return w;
}

} // namespace

DistanceResult repar_distance(const Chart& chart, const Vec& p, const Vec& q, const Settings& settings) {
    const int n = chart.dim();
    if (p.size() != n || q.size() != n) throw InvalidArgument("geodesy", "points have wrong dimension");
    DistanceResult out;
    const bool p_pole = is_pole(chart, p), q_pole = is_pole(chart, q);
    if (p_pole && q_pole) return out;
    if (p_pole || q_pole) {
        const Vec& other = p_pole ? q : p;
        if (!(other[0] <= chart.polar()->antipode)) throw DomainError("geodesy", "point beyond the antipode");
        Connector c = radial_connector(chart, other);
        out.s = c.s;
        out.d_g = c.length;
        out.minimal_count = 1;
        out.connectors.push_back(std::move(c));
        out.log.push_back("radial connector from the pole");
        return out;
    }
    chart.require_inside(p, "geodesy");
    chart.require_inside(q, "geodesy");
    if (chart.domain().difference(p, q).norm() == 0.0) return out;

    const Mat g = chart.metric(p);
    const Mat E = orthonormal_frame(g);
    const double inj = chart.injectivity_radius(p);
    const double L0 = straight_length(chart, p, q);
    double T = 1.05 * L0 + 1e-3;
    if (std::isfinite(inj)) T = std::min(T, 1.05 * inj);
    const auto unit = sphere_directions(n, settings.shooting_directions, settings.seed);

    std::vector<Candidate> cands = parallel_map(unit.size(), [&](std::size_t j) {
        return closest_approach(chart, p, E * unit[j], q, T, settings, j);
    });
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        return a.dist != b.dist ? a.dist < b.dist : a.index < b.index;
    });
    const std::size_t starts = std::min<std::size_t>(8, cands.size());

    struct Found {
        bool ok = false;
        Vec w;
        double residual = 0.0;
    };
    const std::vector<Found> found = parallel_map(starts, [&](std::size_t i) {
        Found fd;
        const Candidate& c = cands[i];
        if (!std::isfinite(c.dist)) return fd;
        double res = 0.0;
        const auto w = newton_connect(chart, p, q, c.t * (E * unit[c.index]), settings, &res);
        if (w) {
            fd.ok = true;
            fd.w = *w;
            fd.residual = res;
        }
        return fd;
    });

    for (const Found& fd : found) {
        if (!fd.ok) continue;
        const double len = g_norm(chart, p, fd.w);
        const Vec dir = fd.w / len;
        bool dup = false;
        for (const Connector& c : out.connectors)
            if ((c.direction - dir).norm() < 1e-6 && std::abs(c.length - len) < 1e-6) dup = true;
        if (dup) continue;
        Connector c;
        c.direction = dir;
        c.length = len;
        c.endpoint_error = fd.residual;
        c.path = integrate_geodesic(chart, p, dir, len, Connection::levi_civita, settings);
        c.path.tag = Parametrization::unit_speed_g;
        c.s = reparametrize(c.path, chart).total_s;
        out.connectors.push_back(std::move(c));
    }
    if (out.connectors.empty())
        throw ConvergenceError("geodesy", "no geodesic from " + format_point(to_std(p)) + " to " +
                                              format_point(to_std(q)) + " found within the iteration budget");
    double min_len = std::numeric_limits<double>::infinity();
    for (const Connector& c : out.connectors) min_len = std::min(min_len, c.length);
    out.s = std::numeric_limits<double>::infinity();
    for (Connector& c : out.connectors) {
        c.minimal = c.length <= min_len + settings.minimal_length_tol &&
                    (!std::isfinite(inj) || c.length <= inj * (1 + 1e-9));
        if (!c.minimal) continue;
        ++out.minimal_count;
        out.s = std::min(out.s, c.s);
    }
    if (out.minimal_count == 0)
        throw ConvergenceError("geodesy", "no connector shorter than the injectivity radius was found");
    out.d_g = min_len;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%zu connector(s) found, %d minimal, d_g = %.17g", out.connectors.size(),
                  out.minimal_count, out.d_g);
    out.log.push_back(buf);
    return out;
}

double conformal_distance(const Chart& chart, const Vec& p, const Vec& q, const Settings& settings) {
    return repar_distance(conformal_chart(chart), p, q, settings).s;
}

std::vector<RayDiagnostic> completeness_diagnostic(const Chart& chart, const Vec& p, const Vec& v, double T_max,
                                                   const Settings& settings) {
    std::vector<RayDiagnostic> out;
    const Vec u = v / g_norm(chart, p, v);
    for (double sign : {1.0, -1.0}) {
        RayDiagnostic d;
        d.direction = sign * u;
        const CurvePath path = integrate_geodesic(chart, p, d.direction, T_max, Connection::levi_civita, settings);
        const ReparRecord rec = reparametrize(path, chart);
        const int n = chart.dim();
        auto rate = [&](double t) {
            const Vec x = path.position(t);
            return std::exp(-2.0 * chart.f(x) / (n - 1)) * g_norm(chart, x, path.velocity(t));
        };
        std::size_t node = 0;
        for (double T = 1.0; T <= path.t_end() + 1e-12; T *= 2) {
            while (node + 1 < rec.t.size() && rec.t[node + 1] <= T) ++node;
            d.T.push_back(T);
            d.s.push_back(rec.s[node] + (T > rec.t[node] ? segment_integral(rate, rec.t[node], std::min(T, path.t_end())) : 0.0));
        }
        const std::size_t m = d.s.size();
        if (m >= 3) {
            const double d1 = d.s[m - 2] - d.s[m - 3], d2 = d.s[m - 1] - d.s[m - 2];
            d.converging = d2 < 0.5 * d1 || d2 < 1e-9;
            d.limit_estimate = d.converging ? d.s[m - 1] + (d2 < d1 && d1 > 0 ? d2 * d2 / (d1 - d2) : 0.0)
                                            : std::numeric_limits<double>::infinity();
        }
        out.push_back(std::move(d));
    }
    return out;
}

std::string path_csv(const ReparRecord& record) {
    const CurvePath& path = record.path;
    const int n = path.dim();
    std::ostringstream os;
    os << "t,s";
    for (int i = 1; i <= n; ++i) os << ",x" << i;
    for (int i = 1; i <= n; ++i) os << ",v" << i;
    os << "\n";
    char buf[40];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << buf;
    };
    for (std::size_t k = 0; k < path.nodes.size(); ++k) {
        const PathNode& nd = path.nodes[k];
        put(nd.t);
        os << ",";
        put(record.s[k]);
        for (int i = 0; i < n; ++i) {
            os << ",";
            put(nd.x[i]);
        }
        const Vec v = path.dense ? nd.v : path.velocity(nd.t);
        for (int i = 0; i < n; ++i) {
            os << ",";
            put(v[i]);
        }
        os << "\n";
    }
    return os.str();
}

} // namespace wgeom
