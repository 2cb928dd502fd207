#include "wgeom/field.hpp"

#include "wgeom/errors.hpp"

#include <algorithm>
#include <cmath>

namespace wgeom {

struct ScalarField::Impl {
    std::string source;
    std::vector<std::string> coords;
    std::optional<expr::Expr> e;
    std::vector<expr::Expr> grad;
    std::vector<std::vector<expr::Expr>> hess;
    Function fn;
    double scale = 1.0;
    bool constant = false;
};

namespace {

std::shared_ptr<ScalarField::Impl> symbolic_impl(const expr::Expr& e, const std::vector<std::string>& coords) {
    auto impl = std::make_shared<ScalarField::Impl>();
    const int n = std::max<int>(static_cast<int>(coords.size()), e.max_variable() + 1);
    impl->coords = coords;
    impl->e = e;
    impl->source = e.str(coords);
    impl->constant = e.is_closed();
    impl->grad.reserve(n);
    for (int i = 0; i < n; ++i) impl->grad.push_back(e.derivative(i));
    impl->hess.assign(n, std::vector<expr::Expr>(n));
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) impl->hess[i][j] = impl->hess[j][i] = impl->grad[i].derivative(j);
    return impl;
}

} // namespace

ScalarField::ScalarField() : impl_(symbolic_impl(expr::Expr::constant(0.0), {})) {}

ScalarField ScalarField::parse(const std::string& source, const std::vector<std::string>& coords) {
    auto impl = symbolic_impl(expr::parse(source, coords), coords);
    impl->source = source;
    ScalarField f;
    f.impl_ = std::move(impl);
    return f;
}

ScalarField ScalarField::from_expr(const expr::Expr& e, const std::vector<std::string>& coords) {
    ScalarField f;
    f.impl_ = symbolic_impl(e, coords);
    return f;
}

ScalarField ScalarField::constant(double c, const std::vector<std::string>& coords) {
    return from_expr(expr::Expr::constant(c), coords);
}

ScalarField ScalarField::from_function(Function fn, std::string label, Function) {
    auto impl = std::make_shared<Impl>();
    impl->fn = std::move(fn);
    impl->source = std::move(label);
    ScalarField f;
    f.impl_ = std::move(impl);
    return f;
}

double ScalarField::value(const Vec& x) const {
    if (impl_->e) return impl_->scale * impl_->e->eval(x.data(), static_cast<std::size_t>(x.size()));
    return impl_->scale * impl_->fn(x);
}

Vec ScalarField::gradient(const Vec& x) const {
    const auto n = x.size();
    Vec g = Vec::Zero(n);
    if (impl_->e) {
        for (Eigen::Index i = 0; i < n && i < static_cast<Eigen::Index>(impl_->grad.size()); ++i)
            g[i] = impl_->scale * impl_->grad[i].eval(x.data(), static_cast<std::size_t>(n));
        return g;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        g[i] = (value(xp) - value(xm)) / (2 * h);
    }
    return g;
}

Mat ScalarField::hessian(const Vec& x) const {
    const auto n = x.size();
    Mat H = Mat::Zero(n, n);
    if (impl_->e) {
        const auto m = std::min<Eigen::Index>(n, static_cast<Eigen::Index>(impl_->hess.size()));
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index j = 0; j < m; ++j)
                H(i, j) = impl_->scale * impl_->hess[i][j].eval(x.data(), static_cast<std::size_t>(n));
        return H;
    }
    const double h = 1e-4;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            auto at = [&](double si, double sj) {
                Vec y = x;
                y[i] += si * h;
                y[j] += sj * h;
                return value(y);
            };
            H(i, j) = H(j, i) = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4 * h * h);
        }
    }
    return H;
}

bool ScalarField::symbolic() const { return impl_->e.has_value(); }

bool ScalarField::is_constant() const { return impl_->constant; }

const std::string& ScalarField::source() const { return impl_->source; }

std::optional<expr::Expr> ScalarField::expression() const {
    if (!impl_->e) return std::nullopt;
    if (impl_->scale == 1.0) return impl_->e;
    return expr::Expr::constant(impl_->scale) * *impl_->e;
}

std::optional<expr::Expr> ScalarField::gradient_expr(int i) const {
    if (!impl_->e) return std::nullopt;
    if (i >= static_cast<int>(impl_->grad.size())) return expr::Expr::constant(0.0);
    return expr::Expr::constant(impl_->scale) * impl_->grad[i];
}

ScalarField ScalarField::scaled(double c) const {
    auto impl = std::make_shared<Impl>(*impl_);
    impl->scale *= c;
    ScalarField f;
    f.impl_ = std::move(impl);
    return f;
}

} // namespace wgeom
