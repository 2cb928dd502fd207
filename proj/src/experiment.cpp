#include "wgeom/experiment.hpp"

#include "wgeom/catalog.hpp"
#include "wgeom/comparison.hpp"
#include "wgeom/errors.hpp"
#include "wgeom/expr.hpp"
#include "wgeom/geodesy.hpp"
#include "wgeom/report.hpp"
#include "wgeom/tensorcalc.hpp"
#include "wgeom/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace wgeom {

using json = nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& message) { throw SchemaError(path, message); }

std::string at_key(const std::string& base, const std::string& key) { return base + "/" + key; }
std::string at_index(const std::string& base, std::size_t i) { return base + "/" + std::to_string(i); }

const std::map<std::string, std::set<std::string>>& task_args() {
    static const std::map<std::string, std::set<std::string>> table{
        {"build-manifold", {"point"}},
        {"curvature", {"quantity", "point", "X", "Y", "Z", "N", "flavor", "expect", "tolerance"}},
        {"geodesic", {"point", "vector", "T", "connection"}},
        {"repar-distance", {"point", "q", "expect", "tolerance"}},
        {"transport", {"curve", "vector"}},
        {"holonomy", {"loop", "family", "at", "frame", "expected", "tolerance"}},
        {"holonomy-algebra", {"families", "frame", "ds", "tolerance", "expected_dim"}},
        {"parallel-field", {"field", "loops", "center", "radius", "tolerance", "identity_tolerance", "check_identity"}},
        {"distribution", {"fields", "loops", "center", "radius", "expect", "tolerance", "block"}},
        {"check",
         {"theorem", "point", "direction", "K", "r_max", "intervals", "radius", "directions", "points"}},
        {"one-dim", {"K", "a", "c", "s0", "s1", "samples", "tolerance"}},
    };
    return table;
}

const std::set<std::string> kTheorems{"riccati",     "mean_curvature", "volume_element", "laplacian", "volume_annuli",
                                      "volume_mu",   "bounded_f",      "myers",          "finite_volume"};
const std::set<std::string> kStatuses{"pass", "fail", "hypothesis-unmet"};

// Settings fields that a spec may override, by name.
struct Override {
    double Settings::*real = nullptr;
    int Settings::*integer = nullptr;
};
const std::map<std::string, Override>& overrides() {
    static const std::map<std::string, Override> table{
        {"chart_margin", {&Settings::chart_margin, nullptr}},
        {"metric_fd_step", {&Settings::metric_fd_step, nullptr}},
        {"curvature_fd_step", {&Settings::curvature_fd_step, nullptr}},
        {"hessian_fd_step", {&Settings::hessian_fd_step, nullptr}},
        {"singular_condition", {&Settings::singular_condition, nullptr}},
        {"ode_rtol", {&Settings::ode_rtol, nullptr}},
        {"ode_atol", {&Settings::ode_atol, nullptr}},
        {"shooting_directions", {nullptr, &Settings::shooting_directions}},
        {"endpoint_tol", {&Settings::endpoint_tol, nullptr}},
        {"minimal_length_tol", {&Settings::minimal_length_tol, nullptr}},
        {"newton_max_iter", {nullptr, &Settings::newton_max_iter}},
        {"algebra_ds", {&Settings::algebra_ds, nullptr}},
        {"algebra_depth", {nullptr, &Settings::algebra_depth}},
        {"rank_threshold", {&Settings::rank_threshold, nullptr}},
        {"closed_loop_tol", {&Settings::closed_loop_tol, nullptr}},
        {"profile_samples", {nullptr, &Settings::profile_samples}},
        {"hypothesis_vectors", {nullptr, &Settings::hypothesis_vectors}},
        {"hypothesis_points", {nullptr, &Settings::hypothesis_points}},
        {"riccati_tol", {&Settings::riccati_tol, nullptr}},
        {"mean_curvature_tol", {&Settings::mean_curvature_tol, nullptr}},
        {"monotone_tol", {&Settings::monotone_tol, nullptr}},
        {"volume_tol", {&Settings::volume_tol, nullptr}},
        {"myers_tol", {&Settings::myers_tol, nullptr}},
        {"simpson_tol", {&Settings::simpson_tol, nullptr}},
        {"angular_samples", {nullptr, &Settings::angular_samples}},
    };
    return table;
}

void check_number(const json& j, const std::string& path) { (void)spec_number(j, path); }

void check_vector(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) bad(path, "expected a non-empty array of numbers");
    for (std::size_t i = 0; i < j.size(); ++i) check_number(j[i], at_index(path, i));
}

void check_string(const json& j, const std::string& path) {
    if (!j.is_string()) bad(path, "expected a string");
}

void check_manifold(const json& m, const std::string& path) {
    if (m.is_string()) {
        if (m.get<std::string>().empty()) bad(path, "empty catalog call");
        return;
    }
    if (!m.is_object()) bad(path, "expected a catalog call string or an object");
    if (m.contains("catalog")) {
        for (const auto& [k, v] : m.items())
            if (k != "catalog" && k != "params") bad(at_key(path, k), "unknown key");
        check_string(m["catalog"], at_key(path, "catalog"));
        if (m.contains("params")) {
            const json& p = m["params"];
            if (!p.is_object()) bad(at_key(path, "params"), "expected an object");
            for (const auto& [k, v] : p.items())
                if (!v.is_number() && !v.is_string()) bad(at_key(at_key(path, "params"), k), "expected a number or string");
        }
        return;
    }
    for (const auto& [k, v] : m.items())
        if (k != "coords" && k != "metric" && k != "domain" && k != "name") bad(at_key(path, k), "unknown key");
    if (!m.contains("coords")) bad(at_key(path, "coords"), "required");
    if (!m.contains("metric")) bad(at_key(path, "metric"), "required");
    const json& c = m["coords"];
    if (!c.is_array() || c.empty()) bad(at_key(path, "coords"), "expected a non-empty array of names");
    for (std::size_t i = 0; i < c.size(); ++i) check_string(c[i], at_index(at_key(path, "coords"), i));
    const json& g = m["metric"];
    const std::string gp = at_key(path, "metric");
    if (!g.is_array() || g.size() != c.size()) bad(gp, "expected an n x n array of expressions");
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!g[i].is_array() || g[i].size() != c.size()) bad(at_index(gp, i), "row length must equal the dimension");
        for (std::size_t k = 0; k < g[i].size(); ++k)
            if (!g[i][k].is_string() && !g[i][k].is_number()) bad(at_index(at_index(gp, i), k), "expected an expression");
    }
    if (m.contains("domain")) {
        const json& d = m["domain"];
        const std::string dp = at_key(path, "domain");
        if (!d.is_object()) bad(dp, "expected an object");
        for (const auto& [k, v] : d.items()) {
            if (k != "lo" && k != "hi" && k != "period") bad(at_key(dp, k), "unknown key");
            if (!v.is_array() || v.size() != c.size()) bad(at_key(dp, k), "expected one entry per coordinate");
            for (std::size_t i = 0; i < v.size(); ++i) check_number(v[i], at_index(at_key(dp, k), i));
        }
    }
}

// ---------------------------------------------------------------------------------------------
// Argument access

class Args {
public:
    Args(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

    bool has(const std::string& k) const { return j_.contains(k); }
    const json& raw(const std::string& k) const {
        if (!has(k)) bad(at(k), "required");
        return j_.at(k);
    }
    std::string at(const std::string& k) const { return at_key(path_, k); }

    double number(const std::string& k) const { return spec_number(raw(k), at(k)); }
    double number(const std::string& k, double fallback) const { return has(k) ? number(k) : fallback; }
    int integer(const std::string& k, int fallback) const {
        if (!has(k)) return fallback;
        const double v = number(k);
        if (v != std::floor(v) || std::abs(v) > 1e9) bad(at(k), "expected an integer");
        return static_cast<int>(v);
    }
    std::string text(const std::string& k, const std::string& fallback) const {
        if (!has(k)) return fallback;
        check_string(raw(k), at(k));
        return raw(k).get<std::string>();
    }
    bool flag(const std::string& k, bool fallback) const {
        if (!has(k)) return fallback;
        if (!raw(k).is_boolean()) bad(at(k), "expected true or false");
        return raw(k).get<bool>();
    }
    Vec vec(const std::string& k, int n) const { return to_vec(raw(k), at(k), n); }
    Vec vec(const std::string& k, int n, const Vec& fallback) const { return has(k) ? vec(k, n) : fallback; }

    static Vec to_vec(const json& j, const std::string& path, int n) {
        check_vector(j, path);
        if (n >= 0 && static_cast<int>(j.size()) != n)
            bad(path, "expected " + std::to_string(n) + " entries, got " + std::to_string(j.size()));
        Vec v(static_cast<int>(j.size()));
        for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<int>(i)] = spec_number(j[i], at_index(path, i));
        return v;
    }
    static Mat to_mat(const json& j, const std::string& path, int n) {
        if (!j.is_array() || static_cast<int>(j.size()) != n) bad(path, "expected " + std::to_string(n) + " rows");
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m.row(i) = to_vec(j[i], at_index(path, i), n).transpose();
        return m;
    }
    static std::vector<std::string> strings(const json& j, const std::string& path) {
        if (!j.is_array() || j.empty()) bad(path, "expected a non-empty array of expressions");
        std::vector<std::string> out;
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (j[i].is_number()) out.push_back(report::number(j[i].get<double>()));
            else if (j[i].is_string()) out.push_back(j[i].get<std::string>());
            else bad(at_index(path, i), "expected an expression");
        }
        return out;
    }
    std::vector<Vec> points(const std::string& k, int n) const {
        const json& j = raw(k);
        if (!j.is_array() || j.empty()) bad(at(k), "expected a non-empty array of points");
        std::vector<Vec> out;
        for (std::size_t i = 0; i < j.size(); ++i) out.push_back(to_vec(j[i], at_index(at(k), i), n));
        return out;
    }

private:
    const json& j_;
    std::string path_;
};

// ---------------------------------------------------------------------------------------------
// Shared task pieces

void set_verdict(RunResult& r, Verdict v) {
    r.status = to_string(v);
    r.exit_code = v == Verdict::pass ? exit_pass : v == Verdict::fail ? exit_fail : exit_hypothesis_unmet;
}

void set_pass(RunResult& r, bool ok) { set_verdict(r, ok ? Verdict::pass : Verdict::fail); }

std::string matrix_text(const Mat& m) {
    std::ostringstream os;
    os << "[";
    for (int i = 0; i < m.rows(); ++i) {
        os << (i ? ", [" : "[");
        for (int k = 0; k < m.cols(); ++k) os << (k ? ", " : "") << report::number(m(i, k));
        os << "]";
    }
    os << "]";
    return os.str();
}

std::vector<std::string> matrix_header(const std::string& prefix, int n) {
    std::vector<std::string> h;
    for (int i = 1; i <= n; ++i)
        for (int k = 1; k <= n; ++k) h.push_back(prefix + std::to_string(i) + std::to_string(k));
    return h;
}

void append_matrix(std::vector<std::string>& row, const Mat& m) {
    for (int i = 0; i < m.rows(); ++i)
        for (int k = 0; k < m.cols(); ++k) row.push_back(report::number(m(i, k)));
}

Vec basis(int n, int i) {
    Vec e = Vec::Zero(n);
    e[i] = 1.0;
    return e;
}

FrameMode frame_mode(const Args& a) {
    const std::string f = a.text("frame", "coordinate");
    if (f == "coordinate") return FrameMode::coordinate;
    if (f == "orthonormal") return FrameMode::orthonormal;
    bad(a.at("frame"), "expected coordinate or orthonormal");
}

LoopFamily resolve_family(const json& j, const std::string& path) {
    if (j.is_string()) {
        const std::string name = j.get<std::string>();
        if (name == "sphere_latitude" || name == "sphere_latitude_family") return sphere_latitude_family();
        if (name == "sphere_rectangle" || name == "sphere_rectangle_family") return sphere_rectangle_family();
        bad(path, "unknown loop family '" + name + "'");
    }
    if (!j.is_object() || !j.contains("segments")) bad(path, "expected a family name or {name, segments}");
    const json& s = j["segments"];
    if (!s.is_array() || s.empty()) bad(at_key(path, "segments"), "expected a non-empty array");
    std::vector<std::vector<std::string>> segments;
    for (std::size_t i = 0; i < s.size(); ++i) segments.push_back(Args::strings(s[i], at_index(at_key(path, "segments"), i)));
    std::string name = "custom";
    if (j.contains("name")) {
        check_string(j["name"], at_key(path, "name"));
        name = j["name"].get<std::string>();
    }
    return expression_family(name, segments);
}

std::vector<PiecewiseCurve> random_loops(const Chart& chart, const Args& a, const Vec& fallback_center, std::uint64_t seed) {
    const int n = chart.dim();
    const int count = a.integer("loops", 20);
    if (count < 1) bad(a.at("loops"), "expected at least one loop");
    const Vec center = a.vec("center", n, fallback_center);
    const double radius = a.number("radius", 0.5);
    if (!(radius > 0)) bad(a.at("radius"), "expected a positive radius");
    std::mt19937_64 rng(seed);
    std::vector<PiecewiseCurve> loops;
    for (int i = 0; i < count; ++i)
        loops.push_back(i % 2 == 0 ? random_fourier_loop(rng, center, radius) : random_polygon_loop(rng, center, radius));
    return loops;
}

// ---------------------------------------------------------------------------------------------
// Tasks

RunResult task_build(const Chart& chart, const Args& a) {
    RunResult r;
    const int n = chart.dim();
    report::Csv csv({"quantity", "value"});
    csv.row(std::vector<std::string>{"name", chart.name()});
    csv.row(std::vector<std::string>{"dimension", std::to_string(n)});
    std::string coords;
    for (const auto& c : chart.coords()) coords += (coords.empty() ? "" : " ") + c;
    csv.row(std::vector<std::string>{"coordinates", coords});
    csv.row(std::vector<std::string>{"weight", chart.weight_label()});
    csv.row(std::vector<std::string>{"analytic_derivatives", chart.analytic_derivatives() ? "yes" : "no"});
    if (a.has("point")) {
        const Vec p = a.vec("point", n);
        chart.require_inside(p, "manifold");
        const Mat g = chart.metric(p);
        for (int i = 0; i < n; ++i)
            for (int k = i; k < n; ++k)
                csv.row(std::vector<std::string>{"g" + std::to_string(i + 1) + std::to_string(k + 1), report::number(g(i, k))});
        const MetricHealth h = metric_health(chart, p);
        csv.row(std::vector<std::string>{"min_eigenvalue", report::number(h.min_eigenvalue)});
        csv.row(std::vector<std::string>{"condition", report::number(h.condition)});
        csv.row(std::vector<std::string>{"f", report::number(chart.f(p))});
        r.summary.push_back("metric at point: " + matrix_text(g));
    }
    r.csv = csv.str();
    r.summary.insert(r.summary.begin(), "built " + chart.name() + " (" + std::to_string(n) + " coordinates, " +
                                            chart.weight_label() + ")");
    return r;
}

RunResult task_curvature(const Chart& chart, const Args& a) {
    RunResult r;
    const int n = chart.dim();
    const Vec p = a.vec("point", n);
    chart.require_inside(p, "tensorcalc");
    const std::string q = a.text("quantity", "ric_f");
    const Vec X = a.vec("X", n, basis(n, 0));
    const Vec Y = a.vec("Y", n, basis(n, 0));
    const Vec Z = a.vec("Z", n, Y);
    std::optional<double> scalar;
    double tol = a.number("tolerance", 1e-6);
    bool ok = true;

    if (q == "ric_f") {
        double N = 1.0;
        if (a.has("N")) {
            const json& jn = a.raw("N");
            N = jn.is_string() && (jn.get<std::string>() == "inf" || jn.get<std::string>() == "infinity")
                    ? kInfiniteN
                    : a.number("N");
        }
        const RicciValue v = ric_f(chart, p, Y, Z, N);
        report::Csv csv({"quantity", "value"});
        csv.row(std::vector<std::string>{"ric", report::number(v.ric)});
        csv.row(std::vector<std::string>{"hess_f", report::number(v.hess_f)});
        csv.row(std::vector<std::string>{"df_df", report::number(v.df_df)});
        csv.row(std::vector<std::string>{"N", report::number(v.N)});
        csv.row(std::vector<std::string>{"ric_f", report::number(v.value)});
        r.csv = csv.str();
        scalar = v.value;
        r.summary.push_back("Ric_f^N(Y,Z) = " + report::number(v.value) + " (N = " + report::number(N) + ")");
    } else if (q == "curvature_alpha") {
        const CurvatureSlice an = curvature_alpha(chart, p, X, Y, Z, CurvatureMethod::analytic_formula);
        const CurvatureSlice orc = curvature_alpha(chart, p, X, Y, Z, CurvatureMethod::coefficient_oracle);
        report::Csv csv({"component", "analytic", "oracle", "difference"});
        for (int k = 0; k < n; ++k)
            csv.row({static_cast<double>(k + 1), an.value[k], orc.value[k], an.value[k] - orc.value[k]});
        r.csv = csv.str();
        const double rel = relative_difference(an.value, orc.value);
        tol = a.number("tolerance", 1e-4);
        ok = rel <= tol;
        r.summary.push_back("analytic vs oracle relative difference " + report::number(rel) + " (tolerance " +
                            report::number(tol) + ")");
    } else if (q == "ricci_trace") {
        const double tr = ricci_alpha_trace(chart, p, Y, Z);
        const double ric = ric_f(chart, p, Y, Z, 1.0).value;
        report::Csv csv({"quantity", "value"});
        csv.row(std::vector<std::string>{"trace_R_alpha", report::number(tr)});
        csv.row(std::vector<std::string>{"ric_f_1", report::number(ric)});
        r.csv = csv.str();
        const double rel = relative_difference(tr, ric);
        tol = a.number("tolerance", 1e-4);
        ok = rel <= tol;
        r.summary.push_back("trace vs Ric_f^1 relative difference " + report::number(rel));
    } else if (q == "weighted_sec") {
        Mat pair(n, 2);
        pair.col(0) = X;
        pair.col(1) = Y;
        const Mat g = chart.metric(p);
        Vec e1 = X / std::sqrt(X.dot(g * X));
        Vec e2 = Y - e1 * e1.dot(g * Y);
        const double len = std::sqrt(e2.dot(g * e2));
        if (!(len > 1e-12)) bad(a.at("Y"), "X and Y must be independent");
        e2 /= len;
        const double v = weighted_sec(chart, p, e1, e2);
        report::Csv csv({"quantity", "value"});
        csv.row(std::vector<std::string>{"weighted_sec", report::number(v)});
        r.csv = csv.str();
        scalar = v;
        r.summary.push_back("weighted sectional curvature " + report::number(v));
    } else if (q == "volume_form") {
        report::Csv csv({"direction", "residual"});
        double worst = 0.0;
        for (int i = 0; i < n; ++i) {
            const double res = volume_form_parallel_residual(chart, p, a.has("X") ? X : basis(n, i));
            worst = std::max(worst, res);
            csv.row({static_cast<double>(i + 1), res});
            if (a.has("X")) break;
        }
        r.csv = csv.str();
        tol = a.number("tolerance", 1e-8);
        ok = worst < tol;
        r.summary.push_back("volume form residual " + report::number(worst) + " (tolerance " + report::number(tol) + ")");
    } else if (q == "christoffel") {
        const std::string fl = a.text("flavor", "weighted");
        if (fl != "weighted" && fl != "levi_civita") bad(a.at("flavor"), "expected weighted or levi_civita");
        const Symbols s = connection_symbols(chart, p, fl == "weighted" ? Flavor::weighted : Flavor::levi_civita);
        report::Csv csv({"k", "i", "j", "value"});
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    csv.row({static_cast<double>(k + 1), static_cast<double>(i + 1), static_cast<double>(j + 1), s[k](i, j)});
        r.csv = csv.str();
        r.summary.push_back(fl + " connection coefficients at " + format_point(std::vector<double>(p.begin(), p.end())));
    } else {
        bad(a.at("quantity"), "expected ric_f, curvature_alpha, ricci_trace, weighted_sec, volume_form or christoffel");
    }
    if (scalar && a.has("expect")) {
        const double want = a.number("expect");
        const double err = std::abs(*scalar - want);
        ok = err <= tol;
        r.summary.push_back("expected " + report::number(want) + ", error " + report::number(err) + " (tolerance " +
                            report::number(tol) + ")");
    }
    set_pass(r, ok);
    return r;
}

RunResult task_geodesic(const Chart& chart, const Args& a, const Settings& st) {
    RunResult r;
    const int n = chart.dim();
    const Vec p = a.vec("point", n);
    const Vec v = a.vec("vector", n);
    const double T = a.number("T", 1.0);
    if (!(T > 0)) bad(a.at("T"), "expected T > 0");
    const std::string c = a.text("connection", "levi_civita");
    if (c != "levi_civita" && c != "weighted") bad(a.at("connection"), "expected levi_civita or weighted");
    const CurvePath path =
        integrate_geodesic(chart, p, v, T, c == "weighted" ? Connection::weighted : Connection::levi_civita, st);
    const ReparRecord rec = reparametrize(path, chart);
    r.csv = path_csv(rec);
    r.summary.push_back("geodesic to t = " + report::number(path.t_end()) + ", total s = " + report::number(rec.total_s));
    if (path.truncated) r.log.push_back("truncated: " + path.reason);
    return r;
}

RunResult task_distance(const Chart& chart, const Args& a, const Settings& st) {
    RunResult r;
    const int n = chart.dim();
    const Vec p = a.vec("point", n);
    const Vec q = a.vec("q", n);
    const DistanceResult d = repar_distance(chart, p, q, st);
    const double dh = conformal_distance(chart, p, q, st);
    report::Csv csv({"quantity", "value"});
    csv.row(std::vector<std::string>{"s", report::number(d.s)});
    csv.row(std::vector<std::string>{"d_g", report::number(d.d_g)});
    csv.row(std::vector<std::string>{"d_h", report::number(dh)});
    csv.row(std::vector<std::string>{"minimal_geodesics", std::to_string(d.minimal_count)});
    r.csv = csv.str();
    r.log = d.log;
    r.summary.push_back("s(p,q) = " + report::number(d.s) + ", d_g = " + report::number(d.d_g) +
                        ", d_h = " + report::number(dh));
    if (a.has("expect")) {
        const double want = a.number("expect");
        const double tol = a.number("tolerance", 1e-6);
        set_pass(r, std::abs(d.s - want) <= tol);
        r.summary.push_back("expected " + report::number(want) + " (tolerance " + report::number(tol) + ")");
    }
    return r;
}

RunResult task_transport(const Chart& chart, const Args& a, const Settings& st) {
    RunResult r;
    const int n = chart.dim();
    const PiecewiseCurve curve = PiecewiseCurve::polyline(a.points("curve", n));
    const Vec v0 = a.vec("vector", n);
    const Mat P = transport_matrix(chart, curve, st);
    const Vec v1 = P * v0;
    report::Csv csv({"component", "start", "end"});
    for (int k = 0; k < n; ++k) csv.row({static_cast<double>(k + 1), v0[k], v1[k]});
    r.csv = csv.str();
    r.summary.push_back("transported vector " + matrix_text(v1.transpose()) + ", det P = " + report::number(P.determinant()));
    return r;
}

RunResult task_holonomy(const Chart& chart, const Args& a, const Settings& st) {
    RunResult r;
    const int n = chart.dim();
    const FrameMode mode = frame_mode(a);
    HolonomyElement h;
    double param = 0.0;
    if (a.has("loop")) {
        h = holonomy_element(chart, PiecewiseCurve::polyline(a.points("loop", n)), mode, st, "polyline");
    } else if (a.has("family")) {
        const LoopFamily fam = resolve_family(a.raw("family"), a.at("family"));
        param = a.number("at");
        h = holonomy_element(chart, fam.loop(param), mode, st, fam.name);
    } else {
        bad(a.at("loop"), "either loop or family is required");
    }
    r.csv = holonomy_csv(chart, {h}, {param});
    r.summary.push_back("holonomy " + matrix_text(h.matrix) + ", det " + report::number(h.det));
    if (a.has("expected")) {
        const Mat want = Args::to_mat(a.raw("expected"), a.at("expected"), n);
        const double tol = a.number("tolerance", 1e-5);
        const double err = (h.matrix - want).cwiseAbs().maxCoeff();
        set_pass(r, err <= tol);
        r.summary.push_back("expected " + matrix_text(want) + ", max deviation " + report::number(err) + ", match ±" +
                            report::number(tol) + ": " + (err <= tol ? "yes" : "no"));
    }
    return r;
}

RunResult task_algebra(const Chart& chart, const Args& a, const Settings& st) {
    RunResult r;
    const int n = chart.dim();
    const FrameMode mode = frame_mode(a);
    const double ds = a.number("ds", st.algebra_ds);
    const double tol = a.number("tolerance", 1e-3);
    const json& fams = a.raw("families");
    if (!fams.is_array() || fams.empty()) bad(a.at("families"), "expected a non-empty array");

    std::vector<std::string> header{"element", "family", "at"};
    for (auto& h : matrix_header("m", n)) header.push_back(h);
    header.push_back("trace");
    header.push_back("max_deviation");
    report::Csv csv(header);

    std::vector<Mat> elements;
    bool all_match = true;
    bool any_expected = false;
    for (std::size_t i = 0; i < fams.size(); ++i) {
        const std::string path = at_index(a.at("families"), i);
        const json& item = fams[i];
        if (!item.is_object() || !item.contains("family") || !item.contains("at"))
            bad(path, "expected {family, at, expected?}");
        const LoopFamily fam = resolve_family(item["family"], at_key(path, "family"));
        const double s0 = spec_number(item["at"], at_key(path, "at"));
        const AlgebraElement el = algebra_element(chart, fam, s0, ds, mode, st);
        elements.push_back(el.matrix);
        double dev = std::numeric_limits<double>::quiet_NaN();
        if (item.contains("expected")) {
            any_expected = true;
            const Mat want = Args::to_mat(item["expected"], at_key(path, "expected"), n);
            dev = (el.matrix - want).cwiseAbs().maxCoeff();
            const bool match = dev <= tol;
            all_match = all_match && match;
            r.summary.push_back(fam.name + " at " + report::number(s0) + ": " + matrix_text(el.matrix) + " vs expected " +
                                matrix_text(want) + ", max deviation " + report::number(dev));
        } else {
            r.summary.push_back(fam.name + " at " + report::number(s0) + ": " + matrix_text(el.matrix));
        }
        if (!el.holonomy.isIdentity(1e-9))
            r.log.push_back(fam.name + ": h(s0) = " + matrix_text(el.holonomy) + ", raw dh/ds = " +
                            matrix_text(el.raw_derivative));
        std::vector<std::string> row{std::to_string(i + 1), fam.name, report::number(s0)};
        append_matrix(row, el.matrix);
        row.push_back(report::number(el.trace()));
        row.push_back(report::number(dev));
        csv.row(row);
    }
    r.csv = csv.str();
    bool ok = all_match;
    if (any_expected)
        r.summary.push_back(std::string("match expected ±") + report::number(tol) + ": " + (all_match ? "yes" : "no"));
    const int dim = generated_algebra_dim(elements, st.algebra_depth, st.rank_threshold);
    r.summary.push_back("generated algebra dimension " + std::to_string(dim));
    if (a.has("expected_dim")) {
        const int want = a.integer("expected_dim", 0);
        ok = ok && dim == want;
        r.summary.push_back("expected dimension " + std::to_string(want) + ": " + (dim == want ? "yes" : "no"));
    }
    set_pass(r, ok);
    return r;
}

RunResult task_parallel_field(const Chart& chart, const Args& a, const Settings& st, std::uint64_t seed) {
    RunResult r;
    const int n = chart.dim();
    const VectorField field = VectorField::parse(Args::strings(a.raw("field"), a.at("field")), chart.coords());
    if (field.dim() != n) bad(a.at("field"), "expected " + std::to_string(n) + " components");
    const auto loops = random_loops(chart, a, Vec::Zero(n), seed);
    const double tol = a.number("tolerance", 1e-6);
    const double id_tol = a.number("identity_tolerance", 1e-5);
    const bool check_identity = a.flag("check_identity", true);

    report::Csv csv({"loop", "residual", "identity_deviation", "det"});
    double worst_res = 0.0, worst_id = 0.0, worst_det = 0.0;
    for (std::size_t i = 0; i < loops.size(); ++i) {
        const double res = parallel_field_residual(chart, field, {loops[i]});
        const HolonomyElement h = holonomy_element(chart, loops[i], FrameMode::coordinate, st, "loop");
        const double id = (h.matrix - Mat::Identity(n, n)).cwiseAbs().maxCoeff();
        worst_res = std::max(worst_res, res);
        worst_id = std::max(worst_id, id);
        worst_det = std::max(worst_det, std::abs(h.det - 1.0));
        csv.row({static_cast<double>(i + 1), res, id, h.det});
    }
    r.csv = csv.str();
    r.summary.push_back("max residual " + report::number(worst_res) + " (tolerance " + report::number(tol) + ") over " +
                        std::to_string(loops.size()) + " loops");
    r.summary.push_back("max |h - I| " + report::number(worst_id) + ", max |det h - 1| " + report::number(worst_det));
    set_pass(r, worst_res < tol && (!check_identity || worst_id < id_tol));
    return r;
}

Chart build_from(const json& manifold, const json& owner, const std::string& path);

RunResult task_distribution(const Chart& chart, const Args& a, const Settings& st, std::uint64_t seed) {
    RunResult r;
    const int n = chart.dim();
    const json& fj = a.raw("fields");
    if (!fj.is_array() || fj.empty()) bad(a.at("fields"), "expected a non-empty array of vector fields");
    std::vector<VectorField> fields;
    for (std::size_t i = 0; i < fj.size(); ++i) {
        fields.push_back(VectorField::parse(Args::strings(fj[i], at_index(a.at("fields"), i)), chart.coords()));
        if (fields.back().dim() != n) bad(at_index(a.at("fields"), i), "expected " + std::to_string(n) + " components");
    }
    const auto loops = random_loops(chart, a, Vec::Zero(n), seed);
    DistributionReport rep = distribution_invariance(chart, fields, loops, st);
    const std::string expect = a.text("expect", "invariant");
    if (expect != "invariant" && expect != "not_invariant") bad(a.at("expect"), "expected invariant or not_invariant");
    const double tol = a.number("tolerance", 1e-5);
    bool ok = expect == "invariant" ? rep.max_angle < tol : rep.max_angle > 1e-3;
    if (a.has("block")) {
        const json& b = a.raw("block");
        const std::string bp = a.at("block");
        if (!b.is_object() || !b.contains("base_dim") || !b.contains("fiber")) bad(bp, "expected {base_dim, fiber}");
        const int base = static_cast<int>(spec_number(b["base_dim"], at_key(bp, "base_dim")));
        const Chart fiber = build_from(b["fiber"], b, at_key(bp, "fiber"));
        block_structure(chart, base, fiber, loops, rep, st);
        ok = ok && rep.lower_block < 1e-6 && rep.fiber_block_error < tol;
        r.summary.push_back("block structure: lower block " + report::number(rep.lower_block) + ", fiber block error " +
                            report::number(rep.fiber_block_error));
    }
    report::Csv csv({"loop", "angle"});
    for (std::size_t i = 0; i < rep.angles.size(); ++i) csv.row({static_cast<double>(i + 1), rep.angles[i]});
    r.csv = csv.str();
    r.summary.push_back("max principal angle " + report::number(rep.max_angle) + " rad, expected " + expect);
    set_pass(r, ok);
    return r;
}

double resolve_K(const Args& a) {
    if (!a.has("K")) return 0.0;
    const json& k = a.raw("K");
    if (k.is_string() && k.get<std::string>() == "sampled") return kSampledK;
    return a.number("K");
}

Vec default_direction(const Chart& chart, const Vec& p) {
    const Mat frame = orthonormal_frame(chart.metric(p));
    return frame.col(0);
}

RunResult task_check(const Chart& chart, const Args& a, const Settings& st) {
    RunResult r;
    const int n = chart.dim();
    const std::string theorem = a.text("theorem", "");
    if (!kTheorems.count(theorem)) bad(a.at("theorem"), "unknown theorem '" + theorem + "'");
    const Vec p = a.vec("point", n);
    const int directions = a.integer("directions", st.angular_samples);
    ComparisonReport rep;

    if (theorem == "riccati" || theorem == "mean_curvature" || theorem == "volume_element") {
        const bool pole = chart.polar() && p[0] <= 0.0;
        const Vec d = pole ? Vec() : a.vec("direction", n, default_direction(chart, p));
        const Vec dir = pole ? d : Vec(d / std::sqrt(d.dot(chart.metric(p) * d)));
        const RadialProfile pr = radial_profile(chart, p, dir, a.number("r_max", 1.0), st);
        if (pr.truncated()) r.log.push_back("profile ends at r = " + report::number(pr.r_end()) + ": " + pr.reason());
        if (theorem == "riccati") rep = riccati_check(pr, st);
        else if (theorem == "mean_curvature") rep = mean_curvature_check(pr, {n, resolve_K(a)}, st);
        else rep = volume_element_monotone(pr, {n, resolve_K(a)}, st);
    } else if (theorem == "laplacian") {
        rep = laplacian_comparison_check(chart, p, a.points("points", n), {n, resolve_K(a)}, st);
    } else if (theorem == "volume_annuli" || theorem == "volume_mu") {
        VolumeIntervals iv;
        if (a.has("intervals")) {
            const Vec v = a.vec("intervals", 4);
            iv = {v[0], v[1], v[2], v[3]};
        }
        rep = volume_comparison_check(chart, p, theorem == "volume_mu" ? VolumeMode::mu_level_sets : VolumeMode::f_volume_annuli,
                                      iv, {n, resolve_K(a)}, directions, st);
    } else if (theorem == "bounded_f") {
        rep = bounded_f_bounds(chart, p, a.number("radius", 1.0), {n, resolve_K(a)}, directions, st);
    } else {
        if (!a.has("K") || (a.raw("K").is_string() && a.raw("K").get<std::string>() == "sampled"))
            bad(a.at("K"), "a numeric K > 0 is required");
        const double K = a.number("K");
        if (!(K > 0)) bad(a.at("K"), "expected K > 0");
        rep = theorem == "myers" ? myers_check(chart, p, K, directions, st)
                                 : finite_volume_check(chart, p, K, directions, st);
        r.summary.push_back("measured " + report::number(rep.measured));
    }
    r.csv = rep.csv();
    r.summary.insert(r.summary.begin(), rep.summary());
    for (const auto& l : rep.log) r.log.push_back(l);
    set_verdict(r, rep.verdict);
    return r;
}

RunResult task_one_dim(const Args& a) {
    RunResult r;
    const int K = a.integer("K", 1);
    if (K < -1 || K > 1) bad(a.at("K"), "expected -1, 0 or 1");
    const OneDimTable t = one_dim_closed_forms(K, a.number("a", 1.0), a.number("c", K == 0 ? 1.0 : 1.5707963267948966),
                                               a.number("s0", 0.2), a.number("s1", 2.0), a.integer("samples", 41));
    const double tol = a.number("tolerance", 1e-6);
    r.csv = t.csv();
    r.summary.push_back("n = 1, K = " + std::to_string(K) + ": max deviation closed form vs ODE " +
                        report::number(t.max_error) + " (tolerance " + report::number(tol) + ")");
    set_pass(r, t.max_error <= tol);
    return r;
}

Chart build_from(const json& manifold, const json& owner, const std::string& path) {
    check_manifold(manifold, path);
    Chart chart = [&] {
        if (manifold.is_string()) return catalog_build(manifold.get<std::string>());
        if (manifold.contains("catalog")) {
            ParamMap params;
            if (manifold.contains("params"))
                for (const auto& [k, v] : manifold["params"].items()) {
                    if (v.is_number()) params[k] = v.get<double>();
                    else params[k] = v.get<std::string>();
                }
            return catalog_build(manifold["catalog"].get<std::string>(), params);
        }
        std::vector<std::string> coords;
        for (const auto& c : manifold["coords"]) coords.push_back(c.get<std::string>());
        const int n = static_cast<int>(coords.size());
        std::vector<std::vector<std::string>> entries(n);
        for (int i = 0; i < n; ++i)
            entries[i] = Args::strings(manifold["metric"][i], at_index(at_key(path, "metric"), i));
        Domain dom = Domain::unbounded(n);
        if (manifold.contains("domain")) {
            const json& d = manifold["domain"];
            if (d.contains("lo")) dom.lo = Args::to_vec(d["lo"], at_key(at_key(path, "domain"), "lo"), n);
            if (d.contains("hi")) dom.hi = Args::to_vec(d["hi"], at_key(at_key(path, "domain"), "hi"), n);
            if (d.contains("period")) {
                const Vec per = Args::to_vec(d["period"], at_key(at_key(path, "domain"), "period"), n);
                dom.period.assign(per.begin(), per.end());
            }
        }
        std::string name = "inline";
        if (manifold.contains("name")) name = manifold["name"].get<std::string>();
        return expression_chart(name, coords, entries, dom);
    }();
    if (owner.is_object()) {
        if (owner.contains("density")) chart = chart.with_density(owner["density"].get<std::string>());
        if (owner.contains("potential")) chart = chart.with_potential(owner["potential"].get<std::string>());
        if (owner.contains("fiber_density")) chart = chart.with_density(owner["fiber_density"].get<std::string>());
        if (owner.contains("fiber_potential")) chart = chart.with_potential(owner["fiber_potential"].get<std::string>());
    }
    return chart;
}

} // namespace

// ---------------------------------------------------------------------------------------------

double spec_number(const json& j, const std::string& path) {
    if (j.is_number()) return j.get<double>();
    if (!j.is_string()) bad(path, "expected a number or a constant expression");
    const std::string text = j.get<std::string>();
    if (text == "inf" || text == "infinity") return std::numeric_limits<double>::infinity();
    if (text == "-inf" || text == "-infinity") return -std::numeric_limits<double>::infinity();
    try {
        const expr::Expr e = expr::parse(text, {});
        if (!e.is_closed()) bad(path, "expression must be constant");
        const double v = e.eval(nullptr, 0);
        if (!std::isfinite(v)) bad(path, "expression is not finite");
        return v;
    } catch (const SchemaError&) {
        throw;
    } catch (const Error& e) {
        bad(path, e.what());
    }
}

const std::vector<std::string>& task_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& [k, v] : task_args()) out.push_back(k);
        return out;
    }();
    return names;
}

ExperimentSpec parse_spec(const json& j) {
    if (!j.is_object()) bad("", "expected a JSON object");
    static const std::set<std::string> keys{"name",   "manifold", "density", "potential",  "task",
                                            "output", "seed",     "tolerances", "expect"};
    for (const auto& [k, v] : j.items())
        if (!keys.count(k)) bad("/" + k, "unknown key");
    ExperimentSpec s;
    if (j.contains("name")) {
        check_string(j["name"], "/name");
        s.name = j["name"].get<std::string>();
    }
    if (!j.contains("manifold")) bad("/manifold", "required");
    check_manifold(j["manifold"], "/manifold");
    s.manifold = j["manifold"];
    if (j.contains("density") && j.contains("potential")) bad("/potential", "give either density or potential, not both");
    if (j.contains("density")) {
        check_string(j["density"], "/density");
        s.density = j["density"].get<std::string>();
    }
    if (j.contains("potential")) {
        check_string(j["potential"], "/potential");
        s.potential = j["potential"].get<std::string>();
    }

    if (!j.contains("task")) bad("/task", "required");
    const json& t = j["task"];
    if (!t.is_object()) bad("/task", "expected {op, args}");
    for (const auto& [k, v] : t.items())
        if (k != "op" && k != "args") bad("/task/" + k, "unknown key");
    if (!t.contains("op")) bad("/task/op", "required");
    check_string(t["op"], "/task/op");
    s.task = t["op"].get<std::string>();
    const auto it = task_args().find(s.task);
    if (it == task_args().end()) bad("/task/op", "unknown task '" + s.task + "'");
    if (t.contains("args")) {
        if (!t["args"].is_object()) bad("/task/args", "expected an object");
        for (const auto& [k, v] : t["args"].items())
            if (!it->second.count(k)) bad("/task/args/" + k, "not an argument of " + s.task);
        s.args = t["args"];
    }
    if (s.task == "check") {
        if (!s.args.contains("theorem")) bad("/task/args/theorem", "required");
        check_string(s.args["theorem"], "/task/args/theorem");
        if (!kTheorems.count(s.args["theorem"].get<std::string>())) bad("/task/args/theorem", "unknown theorem");
    }

    if (j.contains("output")) {
        const json& o = j["output"];
        if (!o.is_object()) bad("/output", "expected {path, format}");
        for (const auto& [k, v] : o.items())
            if (k != "path" && k != "format") bad("/output/" + k, "unknown key");
        if (o.contains("path")) {
            check_string(o["path"], "/output/path");
            s.output_path = o["path"].get<std::string>();
        }
        if (o.contains("format")) {
            check_string(o["format"], "/output/format");
            s.format = o["format"].get<std::string>();
            if (s.format != "csv" && s.format != "pretty-table") bad("/output/format", "expected csv or pretty-table");
        }
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_integer() || j["seed"].get<long long>() < 0) bad("/seed", "expected a non-negative integer");
        s.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("tolerances")) {
        const json& tol = j["tolerances"];
        if (!tol.is_object()) bad("/tolerances", "expected an object");
        for (const auto& [k, v] : tol.items()) {
            const auto o = overrides().find(k);
            if (o == overrides().end()) bad("/tolerances/" + k, "unknown setting");
            if (!v.is_number()) bad("/tolerances/" + k, "expected a number");
            if (o->second.integer && !v.is_number_integer()) bad("/tolerances/" + k, "expected an integer");
            if (!(v.get<double>() > 0)) bad("/tolerances/" + k, "expected a positive value");
        }
        s.tolerances = tol;
    }
    if (j.contains("expect")) {
        check_string(j["expect"], "/expect");
        s.expect = j["expect"].get<std::string>();
        if (!kStatuses.count(*s.expect)) bad("/expect", "expected pass, fail or hypothesis-unmet");
    }
    return s;
}

json to_json(const ExperimentSpec& s) {
    json j;
    if (!s.name.empty()) j["name"] = s.name;
    j["manifold"] = s.manifold;
    if (s.density) j["density"] = *s.density;
    if (s.potential) j["potential"] = *s.potential;
    j["task"] = {{"op", s.task}, {"args", s.args}};
    json out{{"format", s.format}};
    if (!s.output_path.empty()) out["path"] = s.output_path;
    j["output"] = out;
    j["seed"] = s.seed;
    if (!s.tolerances.empty()) j["tolerances"] = s.tolerances;
    if (s.expect) j["expect"] = *s.expect;
    return j;
}

Settings spec_settings(const ExperimentSpec& spec) {
    Settings st;
    st.seed = spec.seed;
    for (const auto& [k, v] : spec.tolerances.items()) {
        const auto o = overrides().find(k);
        if (o == overrides().end()) bad("/tolerances/" + k, "unknown setting");
        if (o->second.real) st.*(o->second.real) = v.get<double>();
        else st.*(o->second.integer) = v.get<int>();
    }
    return st;
}

Chart build_manifold(const ExperimentSpec& spec) {
    json owner = json::object();
    if (spec.density) owner["density"] = *spec.density;
    if (spec.potential) owner["potential"] = *spec.potential;
    return build_from(spec.manifold, owner, "/manifold");
}

RunResult run_experiment(const ExperimentSpec& spec) {
    try {
        const Settings st = spec_settings(spec);
        const Args a(spec.args, "/task/args");
        if (spec.task == "one-dim") return task_one_dim(a);
        const Chart chart = build_manifold(spec);
        if (spec.task == "build-manifold") return task_build(chart, a);
        if (spec.task == "curvature") return task_curvature(chart, a);
        if (spec.task == "geodesic") return task_geodesic(chart, a, st);
        if (spec.task == "repar-distance") return task_distance(chart, a, st);
        if (spec.task == "transport") return task_transport(chart, a, st);
        if (spec.task == "holonomy") return task_holonomy(chart, a, st);
        if (spec.task == "holonomy-algebra") return task_algebra(chart, a, st);
        if (spec.task == "parallel-field") return task_parallel_field(chart, a, st, spec.seed);
        if (spec.task == "distribution") return task_distribution(chart, a, st, spec.seed);
        if (spec.task == "check") return task_check(chart, a, st);
        bad("/task/op", "unknown task '" + spec.task + "'");
    } catch (const SchemaError& e) {
        RunResult r;
        r.exit_code = exit_invalid_spec;
        r.status = "invalid-spec";
        r.summary.push_back(std::string("invalid spec: ") + e.what());
        return r;
    } catch (const Error& e) {
        RunResult r;
        r.exit_code = exit_numerical_error;
        r.status = "error";
        r.summary.push_back("numerical error in module " + e.module() + ": " + e.what());
        return r;
    } catch (const std::exception& e) {
        RunResult r;
        r.exit_code = exit_numerical_error;
        r.status = "error";
        r.summary.push_back(std::string("numerical error: ") + e.what());
        return r;
    }
}

std::string render(const RunResult& result, const std::string& format) {
    if (format == "pretty-table") return report::pretty_table(result.csv);
    return result.csv;
}

// ---------------------------------------------------------------------------------------------
// Reproduction bundle

namespace {

json spec_json(const std::string& name, json manifold, const std::string& weight_key, const std::string& weight,
               const std::string& op, json args, const std::string& expect) {
    json j{{"name", name}, {"manifold", std::move(manifold)}, {"task", {{"op", op}, {"args", std::move(args)}}},
           {"seed", 20240611}, {"expect", expect}};
    if (!weight_key.empty()) j[weight_key] = weight;
    return j;
}

} // namespace

const std::vector<BundleEntry>& reproduction_bundle() {
    static const std::vector<BundleEntry> bundle = [] {
        std::vector<BundleEntry> b;
        auto add = [&](std::string name, std::string description, json spec) {
            const std::string expected = spec["expect"].get<std::string>();
            b.push_back({std::move(name), std::move(description), expected, std::move(spec)});
        };
        const json s2 = "sphere_polar(2)";
        const json sphere_point = json::array({"pi/2", 0});

        add("s2_latitude_A", "2-sphere, phi = cos r: algebra element of the latitude family at s = pi/2",
            spec_json("s2_latitude_A", s2, "potential", "cos(r)", "holonomy-algebra",
                      {{"families", json::array({{{"family", "sphere_latitude"},
                                                  {"at", "pi/2"},
                                                  {"expected", json::array({json::array({1, -1}),
                                                                            json::array({"2/pi+4*pi/3", -1})})}}})},
                       {"tolerance", 1e-3}},
                      "fail"));
        add("s2_rectangle_B", "2-sphere, phi = cos r: algebra element of the rectangle family at s = 0",
            spec_json("s2_rectangle_B", s2, "potential", "cos(r)", "holonomy-algebra",
                      {{"families",
                        json::array({{{"family", "sphere_rectangle"},
                                      {"at", 0},
                                      {"expected", json::array({json::array({0, "((1-sqrt(5))/2)*exp((sqrt(5)-1)/2)"}),
                                                                json::array({1, 0})})}}})},
                       {"tolerance", 1e-3}},
                      "pass"));
        add("s2_generated_algebra", "2-sphere, phi = cos r: both elements generate a 3-dimensional algebra",
            spec_json("s2_generated_algebra", s2, "potential", "cos(r)", "holonomy-algebra",
                      {{"families", json::array({{{"family", "sphere_latitude"}, {"at", "pi/2"}},
                                                 {{"family", "sphere_rectangle"}, {"at", 0}}})},
                       {"expected_dim", 3}},
                      "pass"));
        add("warped_unipotent", "plane, phi = y^2: holonomy of the unit square against [[1, -2/e], [0, 1]]",
            spec_json("warped_unipotent", "euclidean(2)", "potential", "y^2", "holonomy",
                      {{"loop", json::array({json::array({0, 0}), json::array({1, 0}), json::array({1, 1}),
                                             json::array({0, 1}), json::array({0, 0})})},
                       {"expected", json::array({json::array({1, "-2/e"}), json::array({0, 1})})},
                       {"tolerance", 1e-5}},
                      "fail"));
        add("hyperbolic_radial_field", "hyperbolic plane, phi = r: e^{2r} d/dr is parallel",
            spec_json("hyperbolic_radial_field", "hyperbolic_warped(2,1)", "potential", "r", "parallel-field",
                      {{"field", json::array({"exp(2*r)", "0"})}, {"loops", 20}, {"radius", 0.5}}, "pass"));
        add("hyperbolic_mixed_field", "hyperbolic plane, phi = r: d/dy + y e^{2r} d/dr is parallel",
            spec_json("hyperbolic_mixed_field", "hyperbolic_warped(2,1)", "potential", "r", "parallel-field",
                      {{"field", json::array({"y*exp(2*r)", "1"})}, {"loops", 20}, {"radius", 0.5}}, "pass"));
        add("expansion_ricci", "expansion example n = 2, A = 3: Ric_f^1(d/dr, d/dr) = 8",
            spec_json("expansion_ricci", "expansion_example(2,3)", "", "", "curvature",
                      {{"quantity", "ric_f"}, {"point", json::array({0.3, 0.2})}, {"N", 1}, {"expect", 8},
                       {"tolerance", 1e-6}},
                      "pass"));
        add("one_dim_K1", "n = 1, K = 1: closed forms against the ODE",
            spec_json("one_dim_K1", "euclidean(1)", "", "", "one-dim",
                      {{"K", 1}, {"a", 1}, {"c", "pi/2"}, {"s0", 0.2}, {"s1", 3.0}}, "pass"));
        add("one_dim_K0", "n = 1, K = 0: closed forms against the ODE",
            spec_json("one_dim_K0", "euclidean(1)", "", "", "one-dim",
                      {{"K", 0}, {"a", 0.5}, {"c", 1}, {"s0", 0}, {"s1", 2}}, "pass"));
        add("one_dim_Km1", "n = 1, K = -1: closed forms against the ODE",
            spec_json("one_dim_Km1", "euclidean(1)", "", "", "one-dim",
                      {{"K", -1}, {"a", 1}, {"c", "pi/2"}, {"s0", 0.2}, {"s1", 2}}, "pass"));
        add("riccati_sphere_cos", "2-sphere, f = cos r: Riccati inequality along a radial geodesic",
            spec_json("riccati_sphere_cos", s2, "density", "cos(r)", "check",
                      {{"theorem", "riccati"}, {"point", sphere_point}, {"direction", json::array({0, 1})},
                       {"r_max", 1.0}},
                      "pass"));
        add("mean_curvature_rigidity", "rigidity metric K = 1, f = r/4: lambda = m_K(s) from the pole",
            spec_json("mean_curvature_rigidity", "rigidity_metric(n=2, K=1, f=r/4)", "", "", "check",
                      {{"theorem", "mean_curvature"}, {"point", json::array({0, 0})}, {"K", 1}, {"r_max", 4.9}},
                      "pass"));
        add("volume_element_sphere_cos", "2-sphere, f = cos r: monotone volume-element ratio with sampled K",
            spec_json("volume_element_sphere_cos", s2, "density", "cos(r)", "check",
                      {{"theorem", "volume_element"}, {"point", sphere_point}, {"direction", json::array({0, 1})},
                       {"K", "sampled"}, {"r_max", 1.0}},
                      "pass"));
        add("laplacian_sphere_cos", "2-sphere, f = cos r: drift-Laplacian comparison with sampled K",
            spec_json("laplacian_sphere_cos", s2, "density", "cos(r)", "check",
                      {{"theorem", "laplacian"}, {"point", sphere_point}, {"K", "sampled"},
                       {"points", json::array({json::array({1.2, 0.5}), json::array({2.0, -0.4}),
                                               json::array({1.0, -0.7})})}},
                      "pass"));
        add("volume_annuli_sphere_cos", "2-sphere, f = cos r: weighted-volume annulus comparison with sampled K",
            spec_json("volume_annuli_sphere_cos", s2, "density", "cos(r)", "check",
                      {{"theorem", "volume_annuli"}, {"point", sphere_point}, {"K", "sampled"},
                       {"intervals", json::array({0, 0.5, 0, 1})}},
                      "pass"));
        add("volume_mu_sphere_cos", "2-sphere, f = cos r: mu-volume comparison over s-level sets with sampled K",
            spec_json("volume_mu_sphere_cos", s2, "density", "cos(r)", "check",
                      {{"theorem", "volume_mu"}, {"point", sphere_point}, {"K", "sampled"},
                       {"intervals", json::array({0, 0.2, 0, 0.4})}},
                      "pass"));
        add("bounded_f_sphere_cos", "2-sphere, f = cos r: bounded-density ball, ratio and Laplacian bounds with K = 0",
            spec_json("bounded_f_sphere_cos", s2, "density", "cos(r)", "check",
                      {{"theorem", "bounded_f"}, {"point", sphere_point}, {"K", 0}, {"radius", 0.5}}, "pass"));
        add("myers_sphere", "round 2-sphere, f = 0: largest s reached from the pole is at most pi",
            spec_json("myers_sphere", s2, "", "", "check",
                      {{"theorem", "myers"}, {"point", json::array({0, 0})}, {"K", 1}, {"directions", 16}}, "pass"));
        add("myers_flat", "plane, f = 0, K = 1: the curvature hypothesis fails",
            spec_json("myers_flat", "euclidean(2)", "", "", "check",
                      {{"theorem", "myers"}, {"point", json::array({0, 0})}, {"K", 1}, {"directions", 16}},
                      "hypothesis-unmet"));
        add("myers_rigidity", "rigidity metric K = 4, f = r/4: total s equals pi/2; tangential hypothesis fails",
            spec_json("myers_rigidity", "rigidity_metric(n=2, K=4, f=r/4)", "", "", "check",
                      {{"theorem", "myers"}, {"point", json::array({0, 0})}, {"K", 4}, {"directions", 16}},
                      "hypothesis-unmet"));
        add("finite_volume_rigidity", "rigidity metric K = 4, f = r/4: mu(M) against the model bound",
            spec_json("finite_volume_rigidity", "rigidity_metric(n=2, K=4, f=r/4)", "", "", "check",
                      {{"theorem", "finite_volume"}, {"point", json::array({0, 0})}, {"K", 4}, {"directions", 16}},
                      "pass"));
        add("volume_form_sphere_cos", "2-sphere, phi = cos r: the mu volume form is parallel",
            spec_json("volume_form_sphere_cos", s2, "potential", "cos(r)", "curvature",
                      {{"quantity", "volume_form"}, {"point", json::array({1.1, 0.4})}}, "pass"));
        return b;
    }();
    return bundle;
}

} // namespace wgeom
