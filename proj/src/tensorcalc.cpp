#include "wgeom/tensorcalc.hpp"

#include "wgeom/errors.hpp"

#include <algorithm>
#include <cmath>

namespace wgeom {

namespace {

Symbols levi_civita_from(const Mat& g, const std::vector<Mat>& dg) {
    const int n = static_cast<int>(g.rows());
    Eigen::LLT<Mat> llt(g);
    if (llt.info() != Eigen::Success) throw SingularMetricError("tensorcalc", "metric is not positive definite");
    // first-kind symbols Γ_{l,ij}
    Symbols gamma = zero_symbols(n);
    Vec lower(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            for (int l = 0; l < n; ++l) lower[l] = 0.5 * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
            const Vec upper = llt.solve(lower);
            for (int k = 0; k < n; ++k) gamma[k](i, j) = gamma[k](j, i) = upper[k];
        }
    return gamma;
}

void subtract_alpha(Symbols& gamma, const Vec& a) {
    const int n = static_cast<int>(gamma.size());
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i) {
            gamma[k](i, k) -= a[i];
            gamma[k](k, i) -= a[i];
        }
}

void check_condition(const Chart& chart, const Vec& p) {
    const MetricHealth h = metric_health(chart, p);
    if (!(h.condition <= 1e12))
        throw SingularMetricError("tensorcalc", "metric condition number " + std::to_string(h.condition) + " at " +
                                                    format_point(to_std(p)));
}

Mat covariant_hessian_from(const Symbols& gamma, const Vec& grad, const Mat& second) {
    Mat h = second;
    for (std::size_t k = 0; k < gamma.size(); ++k) h -= grad[static_cast<Eigen::Index>(k)] * gamma[k];
    return 0.5 * (h + h.transpose());
}

Mat hess_phi_cov(const Chart& chart, const Vec& p, const Symbols& lc) {
    return covariant_hessian_from(lc, chart.dphi(p), chart.hess_phi(p));
}

double scale_of(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

} // namespace

double ConnectionCoefficients::max_asymmetry() const {
    double m = 0.0;
    for (const Mat& gk : gamma) m = std::max(m, (gk - gk.transpose()).cwiseAbs().maxCoeff());
    return m;
}

Symbols christoffel_symbols(const Chart& chart, const Vec& p) {
    return levi_civita_from(chart.metric(p), chart.metric_derivatives(p));
}

Symbols weighted_symbols(const Chart& chart, const Vec& p) {
    Symbols gamma = christoffel_symbols(chart, p);
    subtract_alpha(gamma, chart.alpha(p));
    return gamma;
}

Symbols connection_symbols(const Chart& chart, const Vec& p, Flavor flavor) {
    return flavor == Flavor::weighted ? weighted_symbols(chart, p) : christoffel_symbols(chart, p);
}

ConnectionCoefficients christoffel(const Chart& chart, const Vec& p) {
    check_condition(chart, p);
    return {p, christoffel_symbols(chart, p), Flavor::levi_civita};
}

ConnectionCoefficients weighted_coeffs(const Chart& chart, const Vec& p) {
    check_condition(chart, p);
    return {p, weighted_symbols(chart, p), Flavor::weighted};
}

Vec Riemann::apply(const Vec& X, const Vec& Y, const Vec& Z) const {
    Vec out = Vec::Zero(n_);
    for (int l = 0; l < n_; ++l)
        for (int i = 0; i < n_; ++i) {
            if (X[i] == 0.0) continue;
            for (int j = 0; j < n_; ++j) {
                if (Y[j] == 0.0) continue;
                for (int k = 0; k < n_; ++k) out[l] += at(l, i, j, k) * X[i] * Y[j] * Z[k];
            }
        }
    return out;
}

Mat Riemann::ricci() const {
    Mat ric = Mat::Zero(n_, n_);
    for (int j = 0; j < n_; ++j)
        for (int k = 0; k < n_; ++k)
            for (int i = 0; i < n_; ++i) ric(j, k) += at(i, i, j, k);
    return ric;
}

Riemann riemann_tensor(const Chart& chart, const Vec& p, Flavor flavor, double h) {
    const int n = chart.dim();
    const Symbols g0 = connection_symbols(chart, p, flavor);
    std::vector<Symbols> dgamma(n);  // dgamma[i][l](j, k) = ∂_i Γ^l_jk
    for (int i = 0; i < n; ++i) {
        double step = h * std::max(1.0, std::abs(p[i]));
        // Symbols grow like 1/r near the pole and the antipode of a rotational chart.
        if (i == 0 && chart.polar() && p[0] > 0)
            step = std::min(step, 2e-3 * std::min(p[0], chart.polar()->antipode - p[0]));
        Vec xp = p, xm = p;
        xp[i] += step;
        xm[i] -= step;
        const Symbols gp = connection_symbols(chart, xp, flavor);
        const Symbols gm = connection_symbols(chart, xm, flavor);
        dgamma[i].resize(n);
        for (int l = 0; l < n; ++l) dgamma[i][l] = (gp[l] - gm[l]) / (2 * step);
    }
    Riemann R(n);
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    double v = dgamma[i][l](j, k) - dgamma[j][l](i, k);
                    for (int m = 0; m < n; ++m) v += g0[l](i, m) * g0[m](j, k) - g0[l](j, m) * g0[m](i, k);
                    R.at(l, i, j, k) = v;
                }
    return R;
}

CurvatureSlice curvature_alpha(const Chart& chart, const Vec& p, const Vec& X, const Vec& Y, const Vec& Z,
                               CurvatureMethod method) {
    CurvatureSlice out{p, Vec(), method};
    if (method == CurvatureMethod::coefficient_oracle) {
        out.value = riemann_tensor(chart, p, Flavor::weighted).apply(X, Y, Z);
        return out;
    }
    if (!chart.alpha_closed())
        throw InvalidArgument("tensorcalc", "the analytic curvature formula needs α = dφ; use the coefficient oracle");
    const Symbols lc = christoffel_symbols(chart, p);
    const Mat H = hess_phi_cov(chart, p, lc);
    const Vec a = chart.dphi(p);
    const Vec R = riemann_tensor(chart, p, Flavor::levi_civita).apply(X, Y, Z);
    out.value = R + (Y.dot(H * Z)) * X - (X.dot(H * Z)) * Y + a.dot(Y) * a.dot(Z) * X - a.dot(X) * a.dot(Z) * Y;
    return out;
}

double relative_difference(const Vec& a, const Vec& b) {
    const double s = std::max({1.0, scale_of(a), scale_of(b)});
    return scale_of(a - b) / s;
}

double relative_difference(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

RicciValue ric_f(const Chart& chart, const Vec& p, const Vec& Y, const Vec& Z, double N) {
    const int n = chart.dim();
    if (std::isfinite(N) && N == n) throw InvalidArgument("tensorcalc", "Ric_f^N is undefined for N = n");
    const Symbols lc = christoffel_symbols(chart, p);
    const Vec df = chart.df(p);
    const Mat H = covariant_hessian_from(lc, df, chart.hess_f(p));
    RicciValue r;
    r.point = p;
    r.N = N;
    r.ric = Y.dot(riemann_tensor(chart, p, Flavor::levi_civita).ricci() * Z);
    r.hess_f = Y.dot(H * Z);
    r.df_df = df.dot(Y) * df.dot(Z);
    r.value = r.ric + r.hess_f - (std::isfinite(N) ? r.df_df / (N - n) : 0.0);
    return r;
}

Mat ric_f_matrix(const Chart& chart, const Vec& p, double N) {
    const int n = chart.dim();
    if (std::isfinite(N) && N == n) throw InvalidArgument("tensorcalc", "Ric_f^N is undefined for N = n");
    const Symbols lc = christoffel_symbols(chart, p);
    const Vec df = chart.df(p);
    Mat ric = riemann_tensor(chart, p, Flavor::levi_civita).ricci();
    ric = 0.5 * (ric + ric.transpose());
    Mat out = ric + covariant_hessian_from(lc, df, chart.hess_f(p));
    if (std::isfinite(N)) out -= df * df.transpose() / (N - n);
    return out;
}

double ricci_alpha_trace(const Chart& chart, const Vec& p, const Vec& Y, const Vec& Z, CurvatureMethod method) {
    const int n = chart.dim();
    if (method == CurvatureMethod::coefficient_oracle)
        return Y.dot(riemann_tensor(chart, p, Flavor::weighted).ricci() * Z);
    double tr = 0.0;
    for (int i = 0; i < n; ++i) {
        const Vec e = Vec::Unit(n, i);
        tr += curvature_alpha(chart, p, e, Y, Z, method).value[i];
    }
    return tr;
}

double weighted_sec(const Chart& chart, const Vec& p, const Vec& X, const Vec& Y) {
    const Mat g = chart.metric(p);
    if (std::abs(X.dot(g * X) - 1) >= 1e-8 || std::abs(Y.dot(g * Y) - 1) >= 1e-8 || std::abs(X.dot(g * Y)) >= 1e-8)
        throw InvalidArgument("tensorcalc", "weighted_sec needs g-orthonormal X, Y");
    const Symbols lc = christoffel_symbols(chart, p);
    const double sec = X.dot(g * riemann_tensor(chart, p, Flavor::levi_civita).apply(X, Y, Y));
    const Vec a = chart.dphi(p);
    return sec + Y.dot(hess_phi_cov(chart, p, lc) * Y) + a.dot(Y) * a.dot(Y);
}

Mat covariant_hessian(const Chart& chart, const Vec& p, const ScalarField& u) {
    return covariant_hessian_from(christoffel_symbols(chart, p), u.gradient(p), u.hessian(p));
}

double laplacian_scalar(const Chart& chart, const Vec& p, const ScalarField& u) {
    const Mat ginv = chart.metric(p).inverse();
    return (ginv.cwiseProduct(covariant_hessian(chart, p, u))).sum();
}

double drift_laplacian_scalar(const Chart& chart, const Vec& p, const ScalarField& u) {
    const Mat ginv = chart.metric(p).inverse();
    return laplacian_scalar(chart, p, u) - chart.df(p).dot(ginv * u.gradient(p));
}

double volume_form_parallel_residual(const Chart& chart, const Vec& p, const Vec& X) {
    const int n = chart.dim();
    const Mat g = chart.metric(p);
    const std::vector<Mat> dg = chart.metric_derivatives(p);
    const Mat ginv = g.inverse();
    const Symbols wa = weighted_symbols(chart, p);
    const Vec dpsi = -(n + 1) * chart.dphi(p);
    const double psi = -(n + 1) * chart.phi(p);
    const double density = std::exp(psi) * std::sqrt(g.determinant());
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
        double trace_w = 0.0;
        for (int i = 0; i < n; ++i) trace_w += wa[i](k, i);
        const double d_log = dpsi[k] + 0.5 * ginv.cwiseProduct(dg[k]).sum();
        sum += X[k] * (d_log - trace_w);
    }
    return std::abs(density * sum);
}

SymTensorField::SymTensorField(std::vector<std::vector<ScalarField>> entries) : n_(static_cast<int>(entries.size())) {
    for (const auto& row : entries)
        if (static_cast<int>(row.size()) != n_) throw InvalidArgument("tensorcalc", "tensor entries must be square");
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < i; ++j)
            if (entries[i][j].symbolic() && entries[j][i].symbolic() &&
                entries[i][j].source() != entries[j][i].source())
                throw InvalidArgument("tensorcalc", "tensor is not symmetric in entry (" + std::to_string(i) + "," +
                                                        std::to_string(j) + ")");
    auto shared = std::make_shared<std::vector<std::vector<ScalarField>>>(std::move(entries));
    const int n = n_;
    value_ = [shared, n](const Vec& x) {
        Mat t(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) t(i, j) = (*shared)[i][j].value(x);
        if ((t - t.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, t.cwiseAbs().maxCoeff()))
            throw InvalidArgument("tensorcalc", "tensor is not symmetric at " + format_point(to_std(x)));
        return t;
    };
    deriv_ = [shared, n](const Vec& x) {
        std::vector<Mat> d(n, Mat(n, n));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const Vec grad = (*shared)[i][j].gradient(x);
                for (int k = 0; k < n; ++k) d[k](i, j) = grad[k];
            }
        return d;
    };
}

SymTensorField SymTensorField::parse(const std::vector<std::vector<std::string>>& sources,
                                     const std::vector<std::string>& coords) {
    std::vector<std::vector<ScalarField>> entries;
    for (const auto& row : sources) {
        std::vector<ScalarField> r;
        for (const auto& s : row) r.push_back(ScalarField::parse(s, coords));
        entries.push_back(std::move(r));
    }
    return SymTensorField(std::move(entries));
}

SymTensorField SymTensorField::metric_of(const Chart& chart) {
    SymTensorField t;
    auto c = std::make_shared<Chart>(chart);
    t.n_ = chart.dim();
    t.value_ = [c](const Vec& x) { return c->metric(x); };
    t.deriv_ = [c](const Vec& x) { return c->metric_derivatives(x); };
    return t;
}

Mat SymTensorField::value(const Vec& x) const { return value_(x); }

std::vector<Mat> SymTensorField::derivatives(const Vec& x) const { return deriv_(x); }

namespace {

// nabla[k](i, j) = (∇_k T)_ij
std::vector<Mat> covariant_derivative(const Symbols& gamma, const Mat& T, const std::vector<Mat>& dT) {
    const int n = static_cast<int>(T.rows());
    std::vector<Mat> out(n);
    for (int k = 0; k < n; ++k) {
        Mat m = dT[k];
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int l = 0; l < n; ++l) m(i, j) -= gamma[l](k, i) * T(l, j) + gamma[l](k, j) * T(i, l);
        out[k] = m;
    }
    return out;
}

} // namespace

double codazzi_residual(const Chart& chart, const Vec& p, const SymTensorField& T, bool weighted) {
    const int n = chart.dim();
    if (T.dim() != n) throw InvalidArgument("tensorcalc", "tensor dimension does not match the chart");
    Mat t = T.value(p);
    std::vector<Mat> dt = T.derivatives(p);
    Symbols gamma;
    if (weighted) {
        const double w = std::exp(-chart.phi(p));
        const Vec a = chart.dphi(p);
        for (int k = 0; k < n; ++k) dt[k] = w * (dt[k] - a[k] * t);
        t *= w;
        gamma = weighted_symbols(chart, p);
    } else {
        gamma = christoffel_symbols(chart, p);
    }
    const std::vector<Mat> nabla = covariant_derivative(gamma, t, dt);
    double r = 0.0;
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) r = std::max(r, std::abs(nabla[k](i, j) - nabla[j](i, k)));
    return r;
}

MetricAlphaResidual metric_alpha_residual(const Chart& chart, const Vec& p) {
    const int n = chart.dim();
    const Mat g = chart.metric(p);
    const Vec a = chart.alpha(p);
    const std::vector<Mat> nabla = covariant_derivative(weighted_symbols(chart, p), g, chart.metric_derivatives(p));
    MetricAlphaResidual out;
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double predicted = 2 * a[k] * g(i, j) + a[i] * g(k, j) + a[j] * g(i, k);
                out.identity_residual = std::max(out.identity_residual, std::abs(nabla[k](i, j) - predicted));
                out.raw_norm = std::max(out.raw_norm, std::abs(nabla[k](i, j)));
            }
    return out;
}

Mat orthonormal_frame(const Mat& g) {
    const int n = static_cast<int>(g.rows());
    Mat E = Mat::Identity(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < i; ++j) E.col(i) -= E.col(j).dot(g * E.col(i)) * E.col(j);
        E.col(i) /= std::sqrt(E.col(i).dot(g * E.col(i)));
    }
    return E;
}

CptCurvCheck cptcurv_check(const Chart& chart, const Vec& p, const Vec& Y, const Mat& g_tilde) {
    const int n = chart.dim();
    const Mat g = chart.metric(p);
    const Vec y = Y / std::sqrt(Y.dot(g * Y));
    const Riemann Ra = riemann_tensor(chart, p, Flavor::weighted);
    Mat M(n, n);
    for (int i = 0; i < n; ++i) M.col(i) = Ra.apply(Vec::Unit(n, i), y, y);
    CptCurvCheck out;
    const Mat gm = g_tilde * M;
    out.symmetry_defect = (gm - gm.transpose()).cwiseAbs().maxCoeff();

    // g-orthonormal basis of the complement of y, starting from y itself
    Mat start(n, n);
    start.col(0) = y;
    int filled = 1;
    for (int i = 0; i < n && filled < n; ++i) {
        Vec v = Vec::Unit(n, i);
        for (int j = 0; j < filled; ++j) v -= start.col(j).dot(g * v) * start.col(j);
        const double norm = std::sqrt(std::max(0.0, v.dot(g * v)));
        if (norm < 1e-8) continue;
        start.col(filled++) = v / norm;
    }
    const Mat E = start.rightCols(n - 1);
    const Mat B = E.transpose() * gm * E;
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (B + B.transpose()));
    for (int i = 0; i < n - 1; ++i) {
        const double ev = es.eigenvalues()[i];
        const Vec x = E * es.eigenvectors().col(i);
        const Vec xn = x / std::sqrt(x.dot(g * x));
        const double ws = weighted_sec(chart, p, xn, y);
        out.eigenvalues.push_back(ev);
        out.weighted_secs.push_back(ws);
        const double tol = 1e-6 * std::max(1.0, std::abs(ev));
        if (std::abs(ev) > tol && std::abs(ws) > tol && (ev > 0) != (ws > 0)) out.signs_match = false;
    }
    return out;
}

} // namespace wgeom
