#include "wgeom/numerics.hpp"

#include "wgeom/errors.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>

namespace wgeom::num {

namespace {

struct SimpsonPanel {
    double a, b, fa, fm, fb, whole;
};

double simpson_rec(const std::function<double(double)>& f, const SimpsonPanel& p, double tol, int depth) {
    const double m = 0.5 * (p.a + p.b);
    const double lm = 0.5 * (p.a + m), rm = 0.5 * (m + p.b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - p.a) / 6 * (p.fa + 4 * flm + p.fm);
    const double right = (p.b - m) / 6 * (p.fm + 4 * frm + p.fb);
    const double delta = left + right - p.whole;
    if (std::abs(delta) <= 15 * tol) return left + right + delta / 15;
    if (depth <= 0) throw IntegrationError("comparison", "adaptive Simpson depth exhausted");
    return simpson_rec(f, {p.a, m, p.fa, flm, p.fm, left}, tol / 2, depth - 1) +
           simpson_rec(f, {m, p.b, p.fm, frm, p.fb, right}, tol / 2, depth - 1);
}

} // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double abs_tol, int max_depth) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6 * (fa + 4 * fm + fb);
    return simpson_rec(f, {a, b, fa, fm, fb, whole}, abs_tol, max_depth);
}

double gauss_kronrod(const std::function<double(double)>& f, double a, double b, double abs_tol, double* error_estimate) {
    if (a == b) {
        if (error_estimate) *error_estimate = 0.0;
        return 0.0;
    }
    double err = 0.0, l1 = 0.0;
    const double l1_guess = boost::math::quadrature::gauss<double, 15>::integrate(
        [&](double t) { return std::abs(f(t)); }, a, b);
    const double rel = std::max(abs_tol / std::max(l1_guess, 1e-300), 1e-14);
    const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 15, rel, &err, &l1);
    const double abs_err = err;
    if (error_estimate) *error_estimate = abs_err;
    if (!std::isfinite(value)) throw IntegrationError("manifold", "non-finite quadrature value");
    return value;
}

double gauss_legendre8(const std::function<double(double)>& f, double a, double b) {
    if (a == b) return 0.0;
    return boost::math::quadrature::gauss<double, 8>::integrate(f, a, b);
}

std::vector<double> fornberg_weights(double x0, const std::vector<double>& nodes, int m) {
    const int n = static_cast<int>(nodes.size()) - 1;
    std::vector<std::vector<double>> c(nodes.size(), std::vector<double>(m + 1, 0.0));
    double c1 = 1.0, c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i <= n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = nodes[i] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) w[i] = c[i][m];
    return w;
}

HermiteSpline::HermiteSpline(std::vector<double> x, std::vector<double> y, std::vector<double> dydx)
    : x_(std::move(x)), y_(std::move(y)), d_(std::move(dydx)) {
    if (x_.size() < 2 || y_.size() != x_.size() || d_.size() != x_.size())
        throw InvalidArgument("manifold", "Hermite spline needs matching arrays of size >= 2");
    for (std::size_t i = 1; i < x_.size(); ++i)
        if (!(x_[i] > x_[i - 1])) throw InvalidArgument("manifold", "Hermite knots must increase");
}

std::size_t HermiteSpline::interval(double t) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), t);
    std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    return std::min(i, x_.size() - 2);
}

double HermiteSpline::operator()(double t) const {
    const std::size_t i = interval(t);
    const double h = x_[i + 1] - x_[i];
    const double u = (t - x_[i]) / h;
    const double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
    const double h10 = u * (1 - u) * (1 - u);
    const double h01 = u * u * (3 - 2 * u);
    const double h11 = u * u * (u - 1);
    return h00 * y_[i] + h10 * h * d_[i] + h01 * y_[i + 1] + h11 * h * d_[i + 1];
}

double HermiteSpline::prime(double t) const {
    const std::size_t i = interval(t);
    const double h = x_[i + 1] - x_[i];
    const double u = (t - x_[i]) / h;
    const double d00 = 6 * u * (u - 1) / h;
    const double d10 = (1 - u) * (1 - 3 * u);
    const double d01 = -d00;
    const double d11 = u * (3 * u - 2);
    return d00 * y_[i] + d10 * d_[i] + d01 * y_[i + 1] + d11 * d_[i + 1];
}

double find_root(const std::function<double(double)>& f, double a, double b, double tol) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0) throw ConvergenceError("comparison", "root not bracketed");
    std::uintmax_t iters = 200;
    auto stop = [tol](double lo, double hi) { return std::abs(hi - lo) <= tol * std::max(1.0, std::abs(lo)); };
    auto [lo, hi] = boost::math::tools::toms748_solve(f, a, b, fa, fb, stop, iters);
    return 0.5 * (lo + hi);
}

} // namespace wgeom::num
