#include "wgeom/chart.hpp"

#include "wgeom/errors.hpp"

#include <cmath>

namespace wgeom {

Domain Domain::unbounded(int n) {
    Domain d;
    d.lo = Vec::Constant(n, -std::numeric_limits<double>::infinity());
    d.hi = Vec::Constant(n, std::numeric_limits<double>::infinity());
    d.period.assign(n, 0.0);
    return d;
}

bool Domain::contains(const Vec& x, double margin) const {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i])) return false;
        if (period[i] > 0) continue;
        if (x[i] < lo[i] + margin || x[i] > hi[i] - margin) return false;
    }
    return true;
}

Vec Domain::difference(const Vec& a, const Vec& b) const {
    Vec d = b - a;
    for (Eigen::Index i = 0; i < d.size(); ++i)
        if (period[i] > 0) d[i] -= period[i] * std::round(d[i] / period[i]);
    return d;
}

Vec Domain::sample(std::mt19937_64& rng, double extent) const {
    Vec x(lo.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double a = std::isfinite(lo[i]) ? lo[i] : -extent;
        const double b = std::isfinite(hi[i]) ? hi[i] : extent;
        x[i] = a + (b - a) * std::generate_canonical<double, 53>(rng);
    }
    return x;
}

Chart::Chart(std::string name, std::vector<std::string> coords, MetricFn metric, Domain domain)
    : name_(std::move(name)), coords_(std::move(coords)), metric_(std::move(metric)), domain_(std::move(domain)),
      weight_(ScalarField::constant(0.0, coords_)) {
    if (coords_.empty()) throw InvalidArgument("manifold", "chart dimension must be positive");
}

std::vector<Mat> Chart::metric_derivatives(const Vec& x) const {
    if (dmetric_) return dmetric_(x);
    return metric_derivatives_fd(x);
}

std::vector<Mat> Chart::metric_derivatives_fd(const Vec& x, double rel_step) const {
    const int n = dim();
    std::vector<Mat> dg(n);
    for (int k = 0; k < n; ++k) {
        const double h = rel_step * std::max(1.0, std::abs(x[k]));
        Vec xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        dg[k] = (metric_(xp) - metric_(xm)) / (2 * h);
    }
    return dg;
}

double Chart::f(const Vec& x) const {
    if (weight_kind_ == WeightKind::density) return weight_.value(x);
    return (dim() - 1) * weight_.value(x);
}

Vec Chart::df(const Vec& x) const {
    if (weight_kind_ == WeightKind::density) return weight_.gradient(x);
    return (dim() - 1) * weight_.gradient(x);
}

Mat Chart::hess_f(const Vec& x) const {
    if (weight_kind_ == WeightKind::density) return weight_.hessian(x);
    return (dim() - 1) * weight_.hessian(x);
}

double Chart::phi(const Vec& x) const {
    if (weight_kind_ == WeightKind::potential) return weight_.value(x);
    if (dim() < 2) throw InvalidArgument("manifold", "φ = f/(n-1) needs n >= 2; use a potential");
    return weight_.value(x) / (dim() - 1);
}

Mat Chart::hess_phi(const Vec& x) const {
    if (one_form_) throw InvalidArgument("tensorcalc", "Hess φ is undefined for a non-closed one-form");
    if (weight_kind_ == WeightKind::potential) return weight_.hessian(x);
    if (dim() < 2) throw InvalidArgument("manifold", "φ = f/(n-1) needs n >= 2; use a potential");
    return weight_.hessian(x) / (dim() - 1);
}

Vec Chart::alpha(const Vec& x) const {
    if (one_form_) return one_form_(x);
    return dphi(x);
}

Vec Chart::dphi(const Vec& x) const {
    if (weight_kind_ == WeightKind::potential) return weight_.gradient(x);
    if (dim() < 2) {
        if (weight_.is_constant()) return Vec::Zero(dim());
        throw InvalidArgument("manifold", "α = df/(n-1) needs n >= 2; use a potential");
    }
    return weight_.gradient(x) / (dim() - 1);
}

bool Chart::weight_is_constant() const { return !one_form_ && weight_.is_constant(); }

std::string Chart::weight_label() const {
    if (one_form_) return "alpha=<one-form>";
    return (weight_kind_ == WeightKind::density ? "f=" : "phi=") + weight_.source();
}

double Chart::injectivity_radius(const Vec& p) const {
    return injectivity_ ? injectivity_(p) : std::numeric_limits<double>::infinity();
}

Chart Chart::with_density(const ScalarField& f) const {
    Chart c = *this;
    c.weight_ = f;
    c.weight_kind_ = WeightKind::density;
    c.one_form_ = nullptr;
    return c;
}

Chart Chart::with_density(const std::string& source) const {
    return with_density(ScalarField::parse(source, coords_));
}

Chart Chart::with_potential(const ScalarField& phi) const {
    Chart c = *this;
    c.weight_ = phi;
    c.weight_kind_ = WeightKind::potential;
    c.one_form_ = nullptr;
    return c;
}

Chart Chart::with_potential(const std::string& source) const {
    return with_potential(ScalarField::parse(source, coords_));
}

Chart Chart::with_one_form(OneFormFn alpha) const {
    Chart c = *this;
    c.one_form_ = std::move(alpha);
    return c;
}

Chart& Chart::set_metric_derivatives(MetricDerivFn d) {
    dmetric_ = std::move(d);
    return *this;
}

Chart& Chart::set_injectivity(std::function<double(const Vec&)> inj) {
    injectivity_ = std::move(inj);
    return *this;
}

Chart& Chart::set_polar(PolarInfo info) {
    polar_ = std::move(info);
    return *this;
}

Chart& Chart::set_oriented(bool oriented) {
    oriented_ = oriented;
    return *this;
}

Chart& Chart::set_name(std::string name) {
    name_ = std::move(name);
    return *this;
}

void Chart::require_inside(const Vec& x, const std::string& module) const {
    if (x.size() != dim()) throw InvalidArgument(module, "point has wrong dimension");
    if (!domain_.contains(x)) throw DomainError(module, "point " + format_point(to_std(x)) + " outside chart domain");
}

namespace {

struct EntryTable {
    int n = 0;
    std::vector<std::pair<int, int>> slots;  // (i, j) with i <= j and non-zero entry
    std::vector<expr::Expr> value;
    std::vector<std::vector<expr::Expr>> deriv;  // deriv[slot][k]

    static double eval(const expr::Expr& e, const Vec& x) {
        return e.is_constant() ? e.constant_value() : e.eval(x.data(), static_cast<std::size_t>(x.size()));
    }
};

} // namespace

Chart expression_chart(std::string name, std::vector<std::string> coords,
                       const std::vector<std::vector<expr::Expr>>& entries, Domain domain) {
    const int n = static_cast<int>(coords.size());
    if (static_cast<int>(entries.size()) != n)
        throw InvalidArgument("manifold", "metric matrix must be " + std::to_string(n) + "x" + std::to_string(n));
    auto table = std::make_shared<EntryTable>();
    table->n = n;
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(entries[i].size()) != n)
            throw InvalidArgument("manifold", "metric matrix row " + std::to_string(i) + " has wrong length");
        for (int j = i; j < n; ++j) {
            const expr::Expr& e = entries[i][j];
            if (e.is_constant() && e.constant_value() == 0.0) continue;
            table->slots.emplace_back(i, j);
            table->value.push_back(e);
            std::vector<expr::Expr> d;
            for (int k = 0; k < n; ++k) d.push_back(e.derivative(k));
            table->deriv.push_back(std::move(d));
        }
    }
    auto metric = [table](const Vec& x) {
        Mat g = Mat::Zero(table->n, table->n);
        for (std::size_t s = 0; s < table->slots.size(); ++s) {
            const auto [i, j] = table->slots[s];
            g(i, j) = g(j, i) = EntryTable::eval(table->value[s], x);
        }
        return g;
    };
    Chart chart(std::move(name), std::move(coords), metric, std::move(domain));
    chart.set_metric_derivatives([table](const Vec& x) {
        std::vector<Mat> dg(table->n, Mat::Zero(table->n, table->n));
        for (std::size_t s = 0; s < table->slots.size(); ++s) {
            const auto [i, j] = table->slots[s];
            for (int k = 0; k < table->n; ++k) {
                const expr::Expr& d = table->deriv[s][k];
                if (d.is_constant() && d.constant_value() == 0.0) continue;
                dg[k](i, j) = dg[k](j, i) = EntryTable::eval(d, x);
            }
        }
        return dg;
    });
    return chart;
}

Chart expression_chart(std::string name, std::vector<std::string> coords,
                       const std::vector<std::vector<std::string>>& entries, Domain domain) {
    std::vector<std::vector<expr::Expr>> parsed;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        std::vector<expr::Expr> row;
        for (const auto& src : entries[i]) row.push_back(expr::parse(src, coords));
        parsed.push_back(std::move(row));
    }
    for (std::size_t i = 0; i < parsed.size(); ++i)
        for (std::size_t j = 0; j < i && j < parsed[i].size(); ++j) {
            const auto a = parsed[i][j].str(coords), b = parsed[j][i].str(coords);
            if (a != b) throw InvalidArgument("manifold", "metric matrix is not symmetric in entry (" +
                                                              std::to_string(i) + "," + std::to_string(j) + ")");
        }
    return expression_chart(std::move(name), std::move(coords), parsed, std::move(domain));
}

Chart conformal_chart(const Chart& base) {
    const int n = base.dim();
    if (n < 2) throw InvalidArgument("geodesy", "conformal metric needs n >= 2");
    auto src = std::make_shared<Chart>(base);
    const double c = -4.0 / (n - 1);
    Chart h("conformal(" + base.name() + ")", base.coords(),
            [src, c](const Vec& x) { return (std::exp(c * src->f(x)) * src->metric(x)).eval(); }, base.domain());
    h.set_metric_derivatives([src, c, n](const Vec& x) {
        const double w = std::exp(c * src->f(x));
        const Mat g = src->metric(x);
        const Vec df = src->df(x);
        std::vector<Mat> dg = src->metric_derivatives(x);
        for (int k = 0; k < n; ++k) dg[k] = w * (dg[k] + c * df[k] * g);
        return dg;
    });
    h.set_oriented(base.is_oriented());
    return h;
}

MetricHealth metric_health(const Chart& chart, const Vec& x) {
    const Mat g = chart.metric(x);
    MetricHealth h;
    h.symmetric = (g - g.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, g.cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (g + g.transpose()), Eigen::EigenvaluesOnly);
    h.min_eigenvalue = es.eigenvalues().minCoeff();
    const double mx = es.eigenvalues().cwiseAbs().maxCoeff();
    h.condition = h.min_eigenvalue > 0 ? mx / h.min_eigenvalue : std::numeric_limits<double>::infinity();
    return h;
}

} // namespace wgeom
