#pragma once

#include <functional>
#include <vector>

namespace wgeom::num {

/// Adaptive Simpson quadrature with Richardson correction; throws IntegrationError
/// when the depth budget is exhausted before the tolerance is met.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double abs_tol,
                        int max_depth = 48);

/// Adaptive 15-point Gauss-Kronrod quadrature.
double gauss_kronrod(const std::function<double(double)>& f, double a, double b, double abs_tol,
                     double* error_estimate = nullptr);

/// Fixed 8-point Gauss-Legendre rule on [a, b].
double gauss_legendre8(const std::function<double(double)>& f, double a, double b);

/// Fornberg weights for the m-th derivative at x0 from arbitrary nodes.
std::vector<double> fornberg_weights(double x0, const std::vector<double>& nodes, int m);

/// Cubic Hermite interpolant on strictly increasing knots.
class HermiteSpline {
public:
    HermiteSpline() = default;
    HermiteSpline(std::vector<double> x, std::vector<double> y, std::vector<double> dydx);

    double operator()(double t) const;
    double prime(double t) const;
    double front() const { return x_.front(); }
    double back() const { return x_.back(); }
    std::size_t size() const { return x_.size(); }
    bool empty() const { return x_.empty(); }

private:
    std::size_t interval(double t) const;
    std::vector<double> x_, y_, d_;
};

/// Brent-style bracketed root finder (TOMS 748 via Boost).
double find_root(const std::function<double(double)>& f, double a, double b, double tol = 1e-14);

} // namespace wgeom::num
