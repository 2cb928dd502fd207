#pragma once

#include "wgeom/chart.hpp"
#include "wgeom/field.hpp"
#include "wgeom/linalg.hpp"

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace wgeom {

enum class Flavor { levi_civita, weighted };

struct ConnectionCoefficients {
    Vec point;
    Symbols gamma;  // gamma[k](i, j) = Γ^k_ij
    Flavor flavor = Flavor::levi_civita;

    double max_asymmetry() const;
};

/// Γ^k_ij = ½ g^{kl}(∂_i g_jl + ∂_j g_il − ∂_l g_ij). Throws SingularMetricError when cond(g) > 1e12.
ConnectionCoefficients christoffel(const Chart& chart, const Vec& p);
/// (Γ^α)^k_ij = Γ^k_ij − α_i δ^k_j − α_j δ^k_i.
ConnectionCoefficients weighted_coeffs(const Chart& chart, const Vec& p);

Symbols christoffel_symbols(const Chart& chart, const Vec& p);
Symbols weighted_symbols(const Chart& chart, const Vec& p);
/// Symbols of the requested connection.
Symbols connection_symbols(const Chart& chart, const Vec& p, Flavor flavor);

/// Components R(∂_i, ∂_j)∂_k = R^l_ijk ∂_l with R(X,Y) = [∇_X, ∇_Y] − ∇_[X,Y].
class Riemann {
public:
    explicit Riemann(int n) : n_(n), d_(static_cast<std::size_t>(n) * n * n * n, 0.0) {}
    int dim() const { return n_; }
    double& at(int l, int i, int j, int k) { return d_[((l * n_ + i) * n_ + j) * n_ + k]; }
    double at(int l, int i, int j, int k) const { return d_[((l * n_ + i) * n_ + j) * n_ + k]; }
    Vec apply(const Vec& X, const Vec& Y, const Vec& Z) const;
    /// Ric_jk = R^i_ijk.
    Mat ricci() const;

private:
    int n_;
    std::vector<double> d_;
};

/// Curvature of either connection from central differences of its symbols (step h); the radial step
/// shrinks near the singular ends of a rotational chart.
Riemann riemann_tensor(const Chart& chart, const Vec& p, Flavor flavor, double h = 1e-4);

enum class CurvatureMethod { analytic_formula, coefficient_oracle };

struct CurvatureSlice {
    Vec point;
    Vec value;
    CurvatureMethod method = CurvatureMethod::analytic_formula;
};

/// R^α(X,Y)Z. The analytic path adds the Hessian and dφ⊗dφ terms to R(X,Y)Z and needs a
/// closed α; the oracle differentiates the weighted coefficients directly.
CurvatureSlice curvature_alpha(const Chart& chart, const Vec& p, const Vec& X, const Vec& Y, const Vec& Z,
                               CurvatureMethod method = CurvatureMethod::analytic_formula);

/// |a − b| / max(1, |a|, |b|) in the max norm.
double relative_difference(const Vec& a, const Vec& b);
double relative_difference(double a, double b);

inline constexpr double kInfiniteN = std::numeric_limits<double>::infinity();

struct RicciValue {
    Vec point;
    double ric = 0.0;
    double hess_f = 0.0;
    double df_df = 0.0;
    double N = kInfiniteN;
    double value = 0.0;
};

/// Ric_f^N(Y,Z) = Ric + Hess f − df⊗df/(N−n).
RicciValue ric_f(const Chart& chart, const Vec& p, const Vec& Y, const Vec& Z, double N);
Mat ric_f_matrix(const Chart& chart, const Vec& p, double N);
/// tr[X → R^α(X,Y)Z].
double ricci_alpha_trace(const Chart& chart, const Vec& p, const Vec& Y, const Vec& Z,
                         CurvatureMethod method = CurvatureMethod::analytic_formula);

/// sec(X,Y) + Hess φ(Y,Y) + dφ(Y)² for g-orthonormal X, Y.
double weighted_sec(const Chart& chart, const Vec& p, const Vec& X, const Vec& Y);

/// Covariant Hessian ∂²u − Γ^k ∂_k u.
Mat covariant_hessian(const Chart& chart, const Vec& p, const ScalarField& u);
double laplacian_scalar(const Chart& chart, const Vec& p, const ScalarField& u);
/// Δu − g(∇f, ∇u).
double drift_laplacian_scalar(const Chart& chart, const Vec& p, const ScalarField& u);

/// |(∇^α_X ω)(∂_1,…,∂_n)| for ω = e^{−(n+1)φ} √det g dx¹∧…∧dxⁿ.
double volume_form_parallel_residual(const Chart& chart, const Vec& p, const Vec& X);

/// Symmetric 2-tensor field with scalar-field entries.
class SymTensorField {
public:
    SymTensorField() = default;
    explicit SymTensorField(std::vector<std::vector<ScalarField>> entries);
    static SymTensorField parse(const std::vector<std::vector<std::string>>& sources,
                                const std::vector<std::string>& coords);
    /// The metric itself as a tensor field.
    static SymTensorField metric_of(const Chart& chart);

    int dim() const { return n_; }
    Mat value(const Vec& x) const;
    /// d[k](i, j) = ∂_k T_ij.
    std::vector<Mat> derivatives(const Vec& x) const;

private:
    int n_ = 0;
    std::function<Mat(const Vec&)> value_;
    std::function<std::vector<Mat>(const Vec&)> deriv_;
};

/// Max over index triples of |(∇_k T)_ij − (∇_j T)_ik|; with `weighted`, the same for e^{−φ}T under ∇^α.
double codazzi_residual(const Chart& chart, const Vec& p, const SymTensorField& T, bool weighted);

struct MetricAlphaResidual {
    double identity_residual = 0.0;  // deviation from 2α(Z)g(X,Y) + α(X)g(Z,Y) + α(Y)g(X,Z)
    double raw_norm = 0.0;           // max |(∇^α g)_kij|
};
MetricAlphaResidual metric_alpha_residual(const Chart& chart, const Vec& p);

struct CptCurvCheck {
    double symmetry_defect = 0.0;
    std::vector<double> eigenvalues;
    std::vector<double> weighted_secs;
    bool signs_match = true;
};
/// R^α(·,Y)Y against a supplied ∇^α-compatible metric g̃ at p.
CptCurvCheck cptcurv_check(const Chart& chart, const Vec& p, const Vec& Y, const Mat& g_tilde);

/// Columns form a g-orthonormal basis obtained by Gram–Schmidt on the coordinate vectors.
Mat orthonormal_frame(const Mat& g);

} // namespace wgeom
