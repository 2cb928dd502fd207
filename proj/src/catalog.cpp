#include "wgeom/catalog.hpp"

#include "wgeom/errors.hpp"
#include "wgeom/model.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>

namespace wgeom {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string num_text(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

expr::Expr parse_in(const std::string& src, const std::vector<std::string>& coords) { return expr::parse(src, coords); }

std::vector<std::vector<expr::Expr>> zero_matrix(int n) {
    return std::vector<std::vector<expr::Expr>>(n, std::vector<expr::Expr>(n, expr::Expr::constant(0.0)));
}

int as_int(double v, const std::string& entry, const std::string& name) {
    if (v != std::floor(v)) throw InvalidArgument("manifold", entry + ": parameter " + name + " must be an integer");
    return static_cast<int>(v);
}

void require(bool ok, const std::string& entry, const std::string& what) {
    if (!ok) throw InvalidArgument("manifold", entry + ": " + what);
}

Mat sphere_gram(const Vec& x, int n) {
    Mat S = Mat::Zero(n - 1, n - 1);
    double prod = 1.0;
    for (int a = 0; a < n - 1; ++a) {
        S(a, a) = prod;
        const double sa = std::sin(x[a + 1]);
        prod *= sa * sa;
    }
    return S;
}

/// ∂_{θ_c} S where c indexes angular coordinates 0..n-2.
Mat sphere_gram_derivative(const Vec& x, int n, int c) {
    Mat S = sphere_gram(x, n);
    Mat dS = Mat::Zero(n - 1, n - 1);
    const double cot = std::cos(x[c + 1]) / std::sin(x[c + 1]);
    for (int a = c + 1; a < n - 1; ++a) dS(a, a) = 2 * cot * S(a, a);
    return dS;
}

Domain polar_domain(int n, double r_lo, double r_hi, double delta) {
    Domain d;
    d.lo = Vec::Zero(n);
    d.hi = Vec::Zero(n);
    d.period.assign(n, 0.0);
    d.lo[0] = r_lo;
    d.hi[0] = r_hi;
    for (int a = 1; a < n; ++a) {
        if (a < n - 1) {
            d.lo[a] = delta;
            d.hi[a] = kPi - delta;
        } else {
            d.lo[a] = 0.0;
            d.hi[a] = 2 * kPi;
            d.period[a] = 2 * kPi;
        }
    }
    return d;
}

/// Rotational chart dr² + w(r)² S(θ) with analytic derivatives.
Chart rotational_chart(std::string name, int n, std::function<double(double)> w,
                       std::function<double(double)> wp, Domain domain, double antipode) {
    auto metric = [n, w](const Vec& x) {
        Mat g = Mat::Zero(n, n);
        g(0, 0) = 1.0;
        const double w2 = w(x[0]) * w(x[0]);
        g.bottomRightCorner(n - 1, n - 1) = w2 * sphere_gram(x, n);
        return g;
    };
    Chart chart(std::move(name), polar_names(n), metric, std::move(domain));
    chart.set_metric_derivatives([n, w, wp](const Vec& x) {
        std::vector<Mat> dg(n, Mat::Zero(n, n));
        const double wr = w(x[0]);
        dg[0].bottomRightCorner(n - 1, n - 1) = 2 * wr * wp(x[0]) * sphere_gram(x, n);
        for (int c = 0; c + 1 < n; ++c)
            dg[c + 1].bottomRightCorner(n - 1, n - 1) = wr * wr * sphere_gram_derivative(x, n, c);
        return dg;
    });
    PolarInfo info;
    info.antipode = antipode;
    info.sphere_gram = [n](const Vec& x) { return sphere_gram(x, n); };
    chart.set_polar(std::move(info));
    return chart;
}

double param_number(const ParamMap& p, const std::string& key, const std::string& entry) {
    auto it = p.find(key);
    if (it == p.end()) throw InvalidArgument("manifold", entry + ": missing parameter " + key);
    if (const double* v = std::get_if<double>(&it->second)) return *v;
    const std::string& s = std::get<std::string>(it->second);
    try {
        return expr::parse(s, {}).eval(nullptr, 0);
    } catch (const Error&) {
        throw InvalidArgument("manifold", entry + ": parameter " + key + " must be numeric");
    }
}

std::string param_text(const ParamMap& p, const std::string& key, const std::string& entry) {
    auto it = p.find(key);
    if (it == p.end()) throw InvalidArgument("manifold", entry + ": missing parameter " + key);
    if (const std::string* s = std::get_if<std::string>(&it->second)) return *s;
    return num_text(std::get<double>(it->second));
}

CatalogParam integer_param(std::string name, double min, std::optional<ParamValue> fallback, std::string doc) {
    return {std::move(name), "integer", min, std::nullopt, false, std::move(fallback), std::move(doc)};
}

CatalogParam real_param(std::string name, std::optional<double> min, std::optional<ParamValue> fallback,
                        std::string doc, bool exclusive = false) {
    return {std::move(name), "real", min, std::nullopt, exclusive, std::move(fallback), std::move(doc)};
}

CatalogParam optional_param(CatalogParam p) {
    p.optional = true;
    return p;
}

CatalogParam expression_param(std::string name, std::optional<ParamValue> fallback, std::string doc) {
    return {std::move(name), "expression", std::nullopt, std::nullopt, false, std::move(fallback), std::move(doc)};
}

ParamMap with_defaults(const CatalogEntry& e, const ParamMap& given) {
    ParamMap out = given;
    for (const auto& [k, v] : given) {
        bool known = false;
        for (const auto& p : e.params) known |= p.name == k;
        require(known, e.name, "unknown parameter " + k);
    }
    for (const auto& p : e.params) {
        if (out.count(p.name)) {
            if (p.type != "expression") {
                const double v = param_number(out, p.name, e.name);
                if (p.min) {
                    const bool bad = p.exclusive_min ? !(v > *p.min) : !(v >= *p.min);
                    require(!bad, e.name,
                            "parameter " + p.name + " must be " + (p.exclusive_min ? "> " : ">= ") + num_text(*p.min));
                }
                if (p.max) require(v <= *p.max, e.name, "parameter " + p.name + " must be <= " + num_text(*p.max));
                out[p.name] = v;
            }
            continue;
        }
        if (p.optional) continue;
        if (!p.fallback) throw InvalidArgument("manifold", e.name + ": missing parameter " + p.name);
        out[p.name] = *p.fallback;
    }
    return out;
}

} // namespace

std::vector<std::string> euclidean_names(int n) {
    static const char* small[] = {"x", "y", "z"};
    std::vector<std::string> names;
    for (int i = 0; i < n; ++i) names.push_back(n <= 3 ? small[i] : "x" + std::to_string(i + 1));
    return names;
}

std::vector<std::string> polar_names(int n) {
    std::vector<std::string> names{"r"};
    if (n == 2) names.push_back("theta");
    else
        for (int a = 1; a < n; ++a) names.push_back("theta" + std::to_string(a));
    return names;
}

namespace {

std::vector<std::string> fiber_names(const std::string& stem, int m) {
    if (m == 1) return {stem};
    std::vector<std::string> names;
    for (int i = 1; i <= m; ++i) names.push_back(stem + std::to_string(i));
    return names;
}

std::vector<std::string> product_names(int b, int m) {
    auto names = fiber_names("x", b);
    for (auto& s : fiber_names("y", m)) names.push_back(s);
    return names;
}

Chart product_chart(std::string name, int b, int m, const std::string& psi, bool base_only) {
    require(b >= 1 && m >= 1, name, "factor dimensions must be >= 1");
    const auto coords = product_names(b, m);
    const expr::Expr psi_e = parse_in(psi, coords);
    if (base_only) require(psi_e.max_variable() < b, name, "ψ must depend on base coordinates only");
    const expr::Expr warp = expr::call(expr::Fn::exp, expr::Expr::constant(2.0) * psi_e);
    auto entries = zero_matrix(b + m);
    for (int i = 0; i < b; ++i) entries[i][i] = expr::Expr::constant(1.0);
    for (int i = b; i < b + m; ++i) entries[i][i] = warp;
    return expression_chart(std::move(name), coords, entries, Domain::unbounded(b + m));
}

} // namespace

Chart euclidean(int n) {
    require(n >= 1, "euclidean", "n must be >= 1");
    const auto coords = euclidean_names(n);
    Chart c("euclidean(" + std::to_string(n) + ")", coords, [n](const Vec&) { return Mat::Identity(n, n).eval(); },
            Domain::unbounded(n));
    c.set_metric_derivatives([n](const Vec&) { return std::vector<Mat>(n, Mat::Zero(n, n)); });
    return c;
}

Chart sphere_polar(int n, double delta) {
    require(n >= 2, "sphere_polar", "n must be >= 2");
    require(delta > 0 && delta < 0.5, "sphere_polar", "delta must lie in (0, 0.5)");
    const auto coords = polar_names(n);
    auto entries = zero_matrix(n);
    entries[0][0] = expr::Expr::constant(1.0);
    expr::Expr prod = expr::pow(expr::call(expr::Fn::sin, expr::Expr::variable(0)), expr::Expr::constant(2.0));
    for (int a = 1; a < n; ++a) {
        entries[a][a] = prod;
        prod = prod * expr::pow(expr::call(expr::Fn::sin, expr::Expr::variable(a)), expr::Expr::constant(2.0));
    }
    Chart c = expression_chart("sphere_polar(" + std::to_string(n) + ")", coords, entries,
                               polar_domain(n, delta, kPi - delta, delta));
    PolarInfo info;
    info.antipode = kPi;
    info.sphere_gram = [n](const Vec& x) { return sphere_gram(x, n); };
    c.set_polar(std::move(info));
    c.set_injectivity([](const Vec&) { return kPi; });
    return c;
}

Chart hyperbolic_warped(int n, double k) {
    require(n >= 2, "hyperbolic_warped", "n must be >= 2");
    std::vector<std::string> coords{"r"};
    for (auto& s : fiber_names("y", n - 1)) coords.push_back(s);
    auto entries = zero_matrix(n);
    entries[0][0] = expr::Expr::constant(1.0);
    const expr::Expr warp =
        expr::call(expr::Fn::exp, expr::Expr::constant(2.0 * k) * expr::Expr::variable(0));
    for (int i = 1; i < n; ++i) entries[i][i] = warp;
    return expression_chart("hyperbolic_warped(" + std::to_string(n) + "," + num_text(k) + ")", coords, entries,
                            Domain::unbounded(n));
}

Chart warped_product(int b, int m, const std::string& psi) {
    return product_chart("warped_product(" + std::to_string(b) + "," + std::to_string(m) + "," + psi + ")", b, m, psi,
                         true);
}

Chart twisted_product(int b, int m, const std::string& psi) {
    return product_chart("twisted_product(" + std::to_string(b) + "," + std::to_string(m) + "," + psi + ")", b, m,
                         psi, false);
}

Chart expansion_example(int n, double A) {
    Chart c = hyperbolic_warped(n, 1.0).with_density(num_text(A) + "*r");
    c.set_name("expansion_example(" + std::to_string(n) + "," + num_text(A) + ")");
    return c;
}

double RigidityRadial::s_of_r(double r) const {
    if (r <= s.back()) return s(r);
    // Beyond the table: integrate the remainder directly.
    const double c = -2.0 / (n - 1);
    return s(s.back()) + num::gauss_kronrod(
                             [&](double t) {
                                 Vec x(1);
                                 x[0] = t;
                                 return std::exp(c * f.value(x));
                             },
                             s.back(), r, 1e-13);
}

double RigidityRadial::sn(double sv) const { return sn_k(K, sv); }

double RigidityRadial::w(double r) const {
    Vec x(1);
    x[0] = r;
    return std::exp(f.value(x) / (n - 1)) * sn_k(K, s_of_r(r));
}

double RigidityRadial::w_prime(double r) const {
    Vec x(1);
    x[0] = r;
    const double fr = f.value(x), fp = f.gradient(x)[0];
    const double sv = s_of_r(r);
    return fp / (n - 1) * std::exp(fr / (n - 1)) * sn_k(K, sv) + std::exp(-fr / (n - 1)) * cs_k(K, sv);
}

std::shared_ptr<const RigidityRadial> rigidity_radial(int n, double K, const std::string& f_source,
                                                      std::optional<double> r_max) {
    require(n >= 2, "rigidity_metric", "n must be >= 2");
    auto rad = std::make_shared<RigidityRadial>();
    rad->n = n;
    rad->K = K;
    const expr::Expr fe = parse_in(f_source, {"r"});
    rad->f = ScalarField::from_expr(fe, {"r"});
    const double c = -2.0 / (n - 1);
    auto integrand = [&](double t) {
        Vec x(1);
        x[0] = t;
        return std::exp(c * rad->f.value(x));
    };
    auto quad = [&](double a, double b) { return num::gauss_kronrod(integrand, a, b, 1e-14); };

    double D = kInf;
    if (K > 0) {
        const double target = kPi / std::sqrt(K);
        double r = 0.0, sr = 0.0;
        const double cap = r_max ? *r_max + 0.1 : 50.0;
        while (r < cap) {
            const double step = 0.1;
            const double next = sr + quad(r, r + step);
            if (next >= target) {
                const double r0 = r, s0 = sr;
                D = num::find_root([&](double t) { return s0 + quad(r0, t) - target; }, r0, r0 + step, 1e-15);
                break;
            }
            r += step;
            sr = next;
        }
        if (r_max && std::isfinite(D) && *r_max > D)
            throw DomainError("manifold", "s(r) exceeds π/√K at r = " + num_text(D) +
                                              " inside the declared radial domain");
    }
    double R = r_max ? *r_max : (std::isfinite(D) ? D : 5.0);
    require(R > 0, "rigidity_metric", "r_max must be positive");
    rad->antipode = D;
    rad->r_max = R;

    // Adaptive Hermite table on [0, R + margin] with interpolation error below 1e-11.
    const double end = R + 0.02;
    std::vector<double> xs{0.0}, ys{0.0}, ds{integrand(0.0)};
    std::function<void(double, double, double, double, int)> refine = [&](double a, double sa, double b, double sb,
                                                                          int depth) {
        const double m = 0.5 * (a + b);
        const double sm = sa + quad(a, m);
        const num::HermiteSpline probe({a, b}, {sa, sb}, {integrand(a), integrand(b)});
        if (depth < 30 && std::abs(probe(m) - sm) > 1e-11) {
            refine(a, sa, m, sm, depth + 1);
            refine(m, sm, b, sb, depth + 1);
            return;
        }
        xs.push_back(b);
        ys.push_back(sb);
        ds.push_back(integrand(b));
    };
    const int coarse = 32;
    double sa = 0.0;
    for (int i = 0; i < coarse; ++i) {
        const double a = end * i / coarse, b = end * (i + 1) / coarse;
        const double sb = sa + quad(a, b);
        refine(a, sa, b, sb, 0);
        sa = sb;
    }
    rad->s = num::HermiteSpline(std::move(xs), std::move(ys), std::move(ds));
    return rad;
}

Chart rigidity_metric(int n, double K, const std::string& f_source, std::optional<double> r_max, double delta) {
    auto rad = rigidity_radial(n, K, f_source, r_max);
    const double r_hi = std::isfinite(rad->antipode) && !r_max ? rad->antipode - delta : rad->r_max;
    require(r_hi > 2 * delta, "rigidity_metric", "radial domain is empty");
    Chart c = rotational_chart("rigidity_metric(" + std::to_string(n) + "," + num_text(K) + "," + f_source + ")", n,
                               [rad](double r) { return rad->w(r); }, [rad](double r) { return rad->w_prime(r); },
                               polar_domain(n, delta, r_hi, delta), rad->antipode);
    const auto coords = polar_names(n);
    const expr::Expr fe = parse_in(f_source, coords);
    require(fe.max_variable() <= 0, "rigidity_metric", "f must be a function of r only");
    return c.with_density(ScalarField::from_expr(fe, coords));
}

const std::vector<CatalogEntry>& catalog_entries() {
    static const std::vector<CatalogEntry> entries = [] {
        std::vector<CatalogEntry> e;
        e.push_back({"euclidean", "Flat space in Cartesian coordinates", {integer_param("n", 1, std::nullopt, "dimension")},
                     "x, y, z (x1..xn when n > 3)"});
        e.push_back({"sphere_polar",
                     "Unit sphere dr^2 + sin^2 r g_{S^{n-1}} in hyperspherical coordinates",
                     {integer_param("n", 2, std::nullopt, "dimension"),
                      real_param("delta", 0.0, ParamValue{1e-3}, "excluded collar at coordinate singularities", true)},
                     "r, theta (theta1..theta_{n-1} when n > 2)"});
        e.push_back({"hyperbolic_warped",
                     "Warped product dr^2 + e^{2kr} sum dy_i^2",
                     {integer_param("n", 2, std::nullopt, "dimension"), real_param("k", std::nullopt, std::nullopt, "warping rate")},
                     "r, y (y1..y_{n-1} when n > 2)"});
        e.push_back({"warped_product",
                     "Euclidean base and fiber, g_B + e^{2 psi(x)} g_F",
                     {integer_param("base", 1, std::nullopt, "base dimension"),
                      integer_param("fiber", 1, std::nullopt, "fiber dimension"),
                      expression_param("psi", std::nullopt, "warping function of the base coordinates")},
                     "x (x1..xb), y (y1..ym)"});
        e.push_back({"twisted_product",
                     "Euclidean base and fiber, g_B + e^{2 psi(x, y)} g_F",
                     {integer_param("base", 1, std::nullopt, "base dimension"),
                      integer_param("fiber", 1, std::nullopt, "fiber dimension"),
                      expression_param("psi", std::nullopt, "twisting function of all coordinates")},
                     "x (x1..xb), y (y1..ym)"});
        e.push_back({"rigidity_metric",
                     "dr^2 + e^{2f(r)/(n-1)} sn_K^2(s(r)) g_{S^{n-1}} with s(r) = int_0^r e^{-2f/(n-1)}",
                     {integer_param("n", 2, std::nullopt, "dimension"), real_param("K", std::nullopt, std::nullopt, "model curvature"),
                      expression_param("f", std::nullopt, "density as a function of r"),
                      optional_param(real_param("r_max", 0.0, std::nullopt,
                                                "outer radius (defaults to the antipode when K > 0, else 5)", true)),
                      real_param("delta", 0.0, ParamValue{1e-3}, "excluded collar at the poles", true)},
                     "r, theta (theta1..theta_{n-1} when n > 2)"});
        e.push_back({"expansion_example",
                     "dr^2 + e^{2r} sum dy_i^2 with density f = A r",
                     {integer_param("n", 2, std::nullopt, "dimension"), real_param("A", std::nullopt, std::nullopt, "density slope")},
                     "r, y (y1..y_{n-1} when n > 2)"});
        return e;
    }();
    return entries;
}

nlohmann::json catalog_manifest() {
    nlohmann::json out;
    out["version"] = 1;
    auto& list = out["catalog"] = nlohmann::json::array();
    for (const auto& e : catalog_entries()) {
        nlohmann::json entry{{"name", e.name}, {"description", e.description}, {"coordinates", e.coordinates}};
        auto& params = entry["parameters"] = nlohmann::json::array();
        for (const auto& p : e.params) {
            nlohmann::json j{{"name", p.name}, {"type", p.type}, {"doc", p.doc}, {"required", !p.fallback && !p.optional}};
            if (p.min) j[p.exclusive_min ? "exclusive_minimum" : "minimum"] = *p.min;
            if (p.max) j["maximum"] = *p.max;
            if (p.fallback) {
                if (const double* d = std::get_if<double>(&*p.fallback)) j["default"] = *d;
                else j["default"] = std::get<std::string>(*p.fallback);
            }
            params.push_back(std::move(j));
        }
        list.push_back(std::move(entry));
    }
    return out;
}

Chart catalog_build(const std::string& name, const ParamMap& given) {
    const CatalogEntry* entry = nullptr;
    for (const auto& e : catalog_entries())
        if (e.name == name) entry = &e;
    if (!entry) throw InvalidArgument("manifold", "unknown catalog entry '" + name + "'");
    const bool has_rmax = given.count("r_max") > 0;
    const ParamMap p = with_defaults(*entry, given);
    auto number = [&](const std::string& k) { return param_number(p, k, name); };
    auto integer = [&](const std::string& k) { return as_int(number(k), name, k); };
    if (name == "euclidean") return euclidean(integer("n"));
    if (name == "sphere_polar") return sphere_polar(integer("n"), number("delta"));
    if (name == "hyperbolic_warped") return hyperbolic_warped(integer("n"), number("k"));
    if (name == "warped_product") return warped_product(integer("base"), integer("fiber"), param_text(p, "psi", name));
    if (name == "twisted_product") return twisted_product(integer("base"), integer("fiber"), param_text(p, "psi", name));
    if (name == "expansion_example") return expansion_example(integer("n"), number("A"));
    if (name == "rigidity_metric") {
        std::optional<double> r_max;
        if (has_rmax) r_max = number("r_max");
        return rigidity_metric(integer("n"), number("K"), param_text(p, "f", name), r_max, number("delta"));
    }
    throw InvalidArgument("manifold", "unknown catalog entry '" + name + "'");
}

std::pair<std::string, std::vector<std::string>> split_call(const std::string& call) {
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\n");
        const auto e = s.find_last_not_of(" \t\n");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const auto open = call.find('(');
    if (open == std::string::npos) return {trim(call), {}};
    if (trim(call).back() != ')') throw ParseError("expected ')' closing the argument list", call.size());
    const std::string name = trim(call.substr(0, open));
    const std::string inner = call.substr(open + 1, call.rfind(')') - open - 1);
    std::vector<std::string> args;
    int depth = 0;
    std::string cur;
    for (std::size_t i = 0; i < inner.size(); ++i) {
        const char ch = inner[i];
        if (ch == '(') ++depth;
        if (ch == ')') {
            if (--depth < 0) throw ParseError("unbalanced ')'", open + 1 + i);
        }
        if (ch == ',' && depth == 0) {
            args.push_back(trim(cur));
            cur.clear();
            continue;
        }
        cur += ch;
    }
    if (depth != 0) throw ParseError("unbalanced '('", call.size());
    if (!trim(cur).empty() || !args.empty()) args.push_back(trim(cur));
    return {name, args};
}

Chart catalog_build(const std::string& call) {
    auto [name, args] = split_call(call);
    const CatalogEntry* entry = nullptr;
    for (const auto& e : catalog_entries())
        if (e.name == name) entry = &e;
    if (!entry) throw InvalidArgument("manifold", "unknown catalog entry '" + name + "'");
    ParamMap params;
    std::size_t positional = 0;
    for (const auto& a : args) {
        std::string key, value = a;
        const auto eq = a.find('=');
        if (eq != std::string::npos) {
            key = a.substr(0, eq);
            key.erase(key.find_last_not_of(" \t") + 1);
            value = a.substr(eq + 1);
            value.erase(0, value.find_first_not_of(" \t"));
        } else {
            if (positional >= entry->params.size()) throw InvalidArgument("manifold", name + ": too many arguments");
            key = entry->params[positional++].name;
        }
        const CatalogParam* spec = nullptr;
        for (const auto& p : entry->params)
            if (p.name == key) spec = &p;
        if (!spec) throw InvalidArgument("manifold", name + ": unknown parameter " + key);
        if (spec->type == "expression") params[key] = value;
        else params[key] = expr::parse(value, {}).eval(nullptr, 0);
    }
    return catalog_build(name, params);
}

} // namespace wgeom
