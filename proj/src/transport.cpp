#include "wgeom/transport.hpp"

#include "wgeom/errors.hpp"
#include "wgeom/expr.hpp"
#include "wgeom/ode.hpp"
#include "wgeom/tensorcalc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace wgeom {

namespace {

constexpr double kPi = std::numbers::pi;

Vec vec2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

} // namespace

PiecewiseCurve::PiecewiseCurve(std::vector<Segment> segments) : segments_(std::move(segments)) {}

Segment PiecewiseCurve::line(const Vec& a, const Vec& b) {
    const Vec d = b - a;
    return {[a, d](double t) { return Vec(a + t * d); }, [d](double) { return d; }, 0.0, 1.0};
}

PiecewiseCurve PiecewiseCurve::polyline(const std::vector<Vec>& points) {
    if (points.size() < 2) throw InvalidArgument("transport", "a polyline needs at least two points");
    std::vector<Segment> segs;
    for (std::size_t i = 1; i < points.size(); ++i)
        if ((points[i] - points[i - 1]).norm() > 0) segs.push_back(line(points[i - 1], points[i]));
    return PiecewiseCurve(std::move(segs));
}

PiecewiseCurve PiecewiseCurve::from_path(const CurvePath& path) {
    if (path.nodes.size() < 2) throw InvalidArgument("transport", "path has fewer than two nodes");
    if (!path.dense) {
        std::vector<Vec> pts;
        for (const auto& nd : path.nodes) pts.push_back(nd.x);
        return polyline(pts);
    }
    auto shared = std::make_shared<CurvePath>(path);
    Segment s{[shared](double t) { return shared->position(t); }, [shared](double t) { return shared->velocity(t); },
              path.t_begin(), path.t_end()};
    return PiecewiseCurve({s});
}

Vec PiecewiseCurve::start() const {
    if (segments_.empty()) throw InvalidArgument("transport", "empty curve");
    return segments_.front().x(segments_.front().t0);
}

Vec PiecewiseCurve::end() const {
    if (segments_.empty()) throw InvalidArgument("transport", "empty curve");
    return segments_.back().x(segments_.back().t1);
}

PiecewiseCurve PiecewiseCurve::reversed() const {
    std::vector<Segment> segs;
    for (auto it = segments_.rbegin(); it != segments_.rend(); ++it) {
        const Segment s = *it;
        segs.push_back({[s](double u) { return s.x(s.t0 + s.t1 - u); },
                        [s](double u) { return Vec(-s.dx(s.t0 + s.t1 - u)); }, s.t0, s.t1});
    }
    return PiecewiseCurve(std::move(segs));
}

PiecewiseCurve PiecewiseCurve::then(const PiecewiseCurve& other) const {
    std::vector<Segment> segs = segments_;
    segs.insert(segs.end(), other.segments_.begin(), other.segments_.end());
    return PiecewiseCurve(std::move(segs));
}

CurvePath PiecewiseCurve::sample(int per_segment) const {
    CurvePath c;
    c.tag = Parametrization::raw;
    double offset = 0.0;
    for (std::size_t k = 0; k < segments_.size(); ++k) {
        const Segment& s = segments_[k];
        for (int i = (k == 0 ? 0 : 1); i <= per_segment; ++i) {
            const double t = s.t0 + (s.t1 - s.t0) * i / per_segment;
            c.nodes.push_back({offset + (t - s.t0), s.x(t), s.dx(t)});
        }
        offset += s.t1 - s.t0;
    }
    return c;
}

Mat transport_matrix(const Chart& chart, const PiecewiseCurve& curve, const Settings& settings) {
    const int n = chart.dim();
    Mat P = Mat::Identity(n, n);
    ode::Options opts;
    opts.rtol = settings.ode_rtol;
    opts.atol = settings.ode_atol;
    for (const Segment& seg : curve.segments()) {
        if (seg.t1 == seg.t0) continue;
        auto rhs = [&](double t, const Vec& y, Vec& dy) {
            const Vec x = seg.x(t), u = seg.dx(t);
            const Symbols gamma = weighted_symbols(chart, x);
            Mat G(n, n);  // G(k, j) = Γ^k_ij u^i
            for (int k = 0; k < n; ++k) G.row(k) = u.transpose() * gamma[k];
            const Eigen::Map<const Mat> Y(y.data(), n, n);
            dy.resize(n * n);
            Eigen::Map<Mat>(dy.data(), n, n) = -G * Y;
        };
        Vec y0 = Eigen::Map<const Vec>(P.data(), n * n);
        const ode::Result res = ode::integrate(rhs, seg.t0, y0, seg.t1, opts);
        if (res.status != ode::Status::completed)
            throw IntegrationError("transport", "transport failed near " + format_point(to_std(seg.x(res.t_stop))) +
                                                    ": " + res.message);
        const Vec y1 = res.solution->states().back();
        P = Eigen::Map<const Mat>(y1.data(), n, n);
    }
    return P;
}

Vec parallel_transport(const Chart& chart, const PiecewiseCurve& curve, const Vec& v0, const Settings& settings) {
    return transport_matrix(chart, curve, settings) * v0;
}

Vec parallel_transport(const Chart& chart, const CurvePath& curve, const Vec& v0, const Settings& settings) {
    return parallel_transport(chart, PiecewiseCurve::from_path(curve), v0, settings);
}

HolonomyElement holonomy_element(const Chart& chart, const PiecewiseCurve& loop, FrameMode mode,
                                 const Settings& settings, std::string descriptor) {
    const Vec a = loop.start(), b = loop.end();
    const double gap = chart.domain().difference(a, b).norm();
    if (gap >= settings.closed_loop_tol)
        throw InvalidArgument("transport", "loop is not closed (gap " + std::to_string(gap) + ")");
    HolonomyElement h;
    h.basepoint = a;
    h.descriptor = std::move(descriptor);
    const int n = chart.dim();
    h.frame = mode == FrameMode::orthonormal ? orthonormal_frame(chart.metric(a)) : Mat::Identity(n, n);
    const Mat P = transport_matrix(chart, loop, settings);
    h.matrix = h.frame.inverse() * P * h.frame;
    h.det = h.matrix.determinant();
    return h;
}

double orthogonality_defect(const Chart& chart, const HolonomyElement& h) {
    const Mat G = chart.metric(h.basepoint);
    const Mat P = h.frame * h.matrix * h.frame.inverse();
    return (P.transpose() * G * P - G).cwiseAbs().maxCoeff();
}

double rectangle_xi() { return std::acos((1.0 - std::sqrt(5.0)) / 2.0); }

LoopFamily sphere_latitude_family() {
    LoopFamily fam;
    fam.name = "sphere_latitude_family";
    fam.loop = [](double s) {
        const Vec base = vec2(kPi / 2, 0.0);
        std::vector<Segment> segs;
        if (s != kPi / 2) segs.push_back(PiecewiseCurve::line(base, vec2(s, 0.0)));
        segs.push_back({[s](double t) { return vec2(s, t); }, [](double) { return vec2(0.0, 1.0); }, 0.0, 2 * kPi});
        if (s != kPi / 2) segs.push_back(PiecewiseCurve::line(vec2(s, 2 * kPi), vec2(kPi / 2, 2 * kPi)));
        return PiecewiseCurve(std::move(segs));
    };
    return fam;
}

LoopFamily sphere_rectangle_family() {
    LoopFamily fam;
    fam.name = "sphere_rectangle_family";
    fam.loop = [](double s) {
        const double xi = rectangle_xi();
        std::vector<Segment> segs;
        segs.push_back(PiecewiseCurve::line(vec2(kPi / 2, 0.0), vec2(xi, 0.0)));
        if (s != 0.0) segs.push_back(PiecewiseCurve::line(vec2(xi, 0.0), vec2(xi, s)));
        segs.push_back(PiecewiseCurve::line(vec2(xi, s), vec2(kPi / 2, s)));
        if (s != 0.0) segs.push_back(PiecewiseCurve::line(vec2(kPi / 2, s), vec2(kPi / 2, 0.0)));
        return PiecewiseCurve(std::move(segs));
    };
    return fam;
}

LoopFamily expression_family(std::string name, const std::vector<std::vector<std::string>>& segments) {
    if (segments.empty()) throw InvalidArgument("transport", "loop family needs at least one segment");
    struct Piece {
        std::vector<expr::Expr> x, dx;
    };
    auto pieces = std::make_shared<std::vector<Piece>>();
    const std::vector<std::string> vars{"t", "s"};
    const std::size_t n = segments.front().size();
    for (const auto& seg : segments) {
        if (seg.size() != n) throw InvalidArgument("transport", "loop family segments disagree in dimension");
        Piece p;
        for (const auto& src : seg) {
            const expr::Expr e = expr::parse(src, vars);
            p.x.push_back(e);
            p.dx.push_back(e.derivative(0));
        }
        pieces->push_back(std::move(p));
    }
    LoopFamily fam;
    fam.name = std::move(name);
    fam.loop = [pieces, n](double s) {
        std::vector<Segment> segs;
        for (std::size_t k = 0; k < pieces->size(); ++k) {
            auto eval = [pieces, k, n, s](bool deriv, double t) {
                const auto& es = deriv ? (*pieces)[k].dx : (*pieces)[k].x;
                Vec out(static_cast<Eigen::Index>(n));
                const double args[2] = {t, s};
                for (std::size_t i = 0; i < n; ++i)
                    out[static_cast<Eigen::Index>(i)] = es[i].is_constant() ? es[i].constant_value() : es[i].eval(args, 2);
                return out;
            };
            segs.push_back({[eval](double t) { return eval(false, t); }, [eval](double t) { return eval(true, t); },
                            0.0, 1.0});
        }
        return PiecewiseCurve(std::move(segs));
    };
    return fam;
}

AlgebraElement algebra_element(const Chart& chart, const LoopFamily& family, double s0, double ds, FrameMode mode,
                               const Settings& settings) {
    if (!(ds > 0)) throw InvalidArgument("transport", "ds must be positive");
    Settings tight = settings;
    tight.ode_rtol = std::min(settings.ode_rtol, 1e-12);
    tight.ode_atol = std::min(settings.ode_atol, 1e-14);
    auto h = [&](double s) {
        try {
            return holonomy_element(chart, family.loop(s), mode, tight, family.name).matrix;
        } catch (const Error& e) {
            throw Error("transport", "family " + family.name + " failed at s = " + std::to_string(s) + ": " + e.what());
        }
    };
    const Mat d1 = (h(s0 + ds) - h(s0 - ds)) / (2 * ds);
    const Mat d2 = (h(s0 + ds / 2) - h(s0 - ds / 2)) / ds;
    AlgebraElement out;
    out.raw_derivative = (4 * d2 - d1) / 3;
    out.holonomy = h(s0);
    out.matrix = out.holonomy.inverse() * out.raw_derivative;
    out.family_name = family.name;
    out.parameter_at = s0;
    return out;
}

namespace {

// Orthonormal basis (as flattened columns) of the span, by SVD with a relative threshold.
Mat span_basis(const std::vector<Mat>& mats, double threshold, double scale) {
    if (mats.empty()) return Mat();
    const Eigen::Index m = mats.front().size();
    Mat A(m, static_cast<Eigen::Index>(mats.size()));
    for (std::size_t i = 0; i < mats.size(); ++i) A.col(static_cast<Eigen::Index>(i)) = mats[i].reshaped();
    Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    Eigen::Index r = 0;
    while (r < sv.size() && sv[r] > threshold * scale) ++r;
    return svd.matrixU().leftCols(r);
}

} // namespace

int generated_algebra_dim(const std::vector<Mat>& elements, int depth, double threshold) {
    if (elements.empty()) throw InvalidArgument("transport", "need at least one algebra element");
    const Eigen::Index n = elements.front().rows();
    double scale = 0.0;
    for (const Mat& e : elements) scale = std::max(scale, e.norm());
    if (scale == 0.0) return 0;
    Mat basis = span_basis(elements, threshold, scale);
    for (int level = 0; level < depth; ++level) {
        std::vector<Mat> mats;
        for (Eigen::Index i = 0; i < basis.cols(); ++i) mats.push_back(basis.col(i).reshaped(n, n));
        const std::size_t count = mats.size();
        for (std::size_t i = 0; i < count; ++i)
            for (std::size_t j = i + 1; j < count; ++j) mats.push_back(mats[i] * mats[j] - mats[j] * mats[i]);
        const Mat next = span_basis(mats, threshold, 1.0);
        if (next.cols() == basis.cols()) break;
        basis = next;
    }
    return static_cast<int>(basis.cols());
}

VectorField VectorField::parse(const std::vector<std::string>& sources, const std::vector<std::string>& coords) {
    std::vector<ScalarField> comps;
    for (const auto& s : sources) comps.push_back(ScalarField::parse(s, coords));
    if (comps.size() != coords.size()) throw InvalidArgument("transport", "vector field has wrong number of components");
    return VectorField(std::move(comps));
}

Vec VectorField::value(const Vec& x) const {
    Vec v(dim());
    for (int k = 0; k < dim(); ++k) v[k] = comps_[k].value(x);
    return v;
}

Mat VectorField::jacobian(const Vec& x) const {
    Mat J(dim(), x.size());
    for (int k = 0; k < dim(); ++k) J.row(k) = comps_[k].gradient(x).transpose();
    return J;
}

double parallel_field_residual(const Chart& chart, const VectorField& field, const std::vector<PiecewiseCurve>& curves,
                               int per_segment) {
    if (field.dim() != chart.dim()) throw InvalidArgument("transport", "vector field dimension does not match chart");
    double worst = 0.0;
    for (const auto& curve : curves)
        for (const Segment& seg : curve.segments())
            for (int i = 0; i <= per_segment; ++i) {
                const double t = seg.t0 + (seg.t1 - seg.t0) * i / per_segment;
                const Vec x = seg.x(t), u = seg.dx(t);
                const Vec V = field.value(x);
                const Vec cov = field.jacobian(x) * u + contract(weighted_symbols(chart, x), u, V);
                worst = std::max(worst, std::sqrt(std::max(0.0, cov.dot(chart.metric(x) * cov))));
            }
    return worst;
}

double principal_angle(const Mat& g, const Mat& vs, const Mat& ws) {
    Eigen::LLT<Mat> llt(g);
    if (llt.info() != Eigen::Success) throw SingularMetricError("transport", "metric is not positive definite");
    const Mat Lt = llt.matrixU();
    auto orth = [&](const Mat& m) {
        const Mat a = Lt * m;
        Eigen::ColPivHouseholderQR<Mat> qr(a);
        if (qr.rank() < a.cols()) throw InvalidArgument("transport", "distribution is degenerate at the basepoint");
        return Mat(qr.householderQ() * Mat::Identity(a.rows(), a.cols()));
    };
    const Mat Qa = orth(vs), Qb = orth(ws);
    const Mat resid = Qb - Qa * (Qa.transpose() * Qb);
    if (resid.size() == 0) return 0.0;
    const double s = Eigen::JacobiSVD<Mat>(resid).singularValues()[0];
    return std::asin(std::min(1.0, s));
}

DistributionReport distribution_invariance(const Chart& chart, const std::vector<VectorField>& distribution,
                                           const std::vector<PiecewiseCurve>& loops, const Settings& settings) {
    if (distribution.empty()) throw InvalidArgument("transport", "distribution needs at least one field");
    DistributionReport rep;
    const int k = static_cast<int>(distribution.size());
    for (const auto& loop : loops) {
        const Vec b = loop.start();
        Mat V(chart.dim(), k);
        for (int i = 0; i < k; ++i) V.col(i) = distribution[i].value(b);
        const Mat P = transport_matrix(chart, loop, settings);
        const double ang = principal_angle(chart.metric(b), V, P * V);
        rep.angles.push_back(ang);
        rep.max_angle = std::max(rep.max_angle, ang);
    }
    return rep;
}

void block_structure(const Chart& chart, int base_dim, const Chart& fiber_chart, const std::vector<PiecewiseCurve>& loops,
                     DistributionReport& report, const Settings& settings) {
    const int n = chart.dim(), m = n - base_dim;
    if (m != fiber_chart.dim() || base_dim < 1 || m < 1)
        throw InvalidArgument("transport", "fiber chart dimension does not match the product splitting");
    report.block_checked = true;
    for (const auto& loop : loops) {
        const HolonomyElement h = holonomy_element(chart, loop, FrameMode::coordinate, settings);
        report.lower_block = std::max(report.lower_block, h.matrix.bottomLeftCorner(m, base_dim).cwiseAbs().maxCoeff());
        std::vector<Segment> proj;
        for (const Segment& s : loop.segments())
            proj.push_back({[s, m](double t) { return Vec(s.x(t).tail(m)); },
                            [s, m](double t) { return Vec(s.dx(t).tail(m)); }, s.t0, s.t1});
        const Mat h2 = transport_matrix(fiber_chart, PiecewiseCurve(std::move(proj)), settings);
        report.fiber_block_error =
            std::max(report.fiber_block_error, (h.matrix.bottomRightCorner(m, m) - h2).cwiseAbs().maxCoeff());
    }
}

PiecewiseCurve random_polygon_loop(std::mt19937_64& rng, const Vec& center, double radius, int vertices) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Vec> pts{center};
    for (int i = 0; i < vertices - 1; ++i) {
        Vec p = center;
        for (Eigen::Index k = 0; k < p.size(); ++k) p[k] += radius * u(rng);
        pts.push_back(p);
    }
    pts.push_back(center);
    return PiecewiseCurve::polyline(pts);
}

PiecewiseCurve random_fourier_loop(std::mt19937_64& rng, const Vec& center, double radius, int modes) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Eigen::Index n = center.size();
    Mat a(n, modes), b(n, modes);
    for (int k = 0; k < modes; ++k)
        for (Eigen::Index i = 0; i < n; ++i) {
            a(i, k) = radius * u(rng) / (2.0 * modes);
            b(i, k) = radius * u(rng) / (2.0 * modes);
        }
    const double w = 2 * kPi;
    Segment s{[=](double t) {
                  Vec x = center;
                  for (int k = 0; k < modes; ++k)
                      x += a.col(k) * (std::cos(w * (k + 1) * t) - 1.0) + b.col(k) * std::sin(w * (k + 1) * t);
                  return x;
              },
              [=](double t) {
                  Vec d = Vec::Zero(n);
                  for (int k = 0; k < modes; ++k)
                      d += w * (k + 1) * (-a.col(k) * std::sin(w * (k + 1) * t) + b.col(k) * std::cos(w * (k + 1) * t));
                  return d;
              },
              0.0, 1.0};
    return PiecewiseCurve({s});
}

std::string holonomy_csv(const Chart& chart, const std::vector<HolonomyElement>& elements,
                         const std::vector<double>& params) {
    std::ostringstream os;
    const int n = chart.dim();
    os << "loop,param";
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j) os << ",h" << i << j;
    os << ",det,dist_orthogonal\n";
    char buf[40];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << "," << buf;
    };
    for (std::size_t k = 0; k < elements.size(); ++k) {
        const auto& h = elements[k];
        os << h.descriptor;
        if (k < params.size()) put(params[k]);
        else os << ",";
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) put(h.matrix(i, j));
        put(h.det);
        put(orthogonality_defect(chart, h));
        os << "\n";
    }
    return os.str();
}

} // namespace wgeom
