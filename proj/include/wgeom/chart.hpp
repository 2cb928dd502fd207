#pragma once

#include "wgeom/field.hpp"
#include "wgeom/linalg.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace wgeom {

/// Coordinate box; a coordinate with a nonzero period is unconstrained and
/// compared modulo that period.
struct Domain {
    Vec lo, hi;
    std::vector<double> period;

    static Domain unbounded(int n);
    bool contains(const Vec& x, double margin = 0.0) const;
    /// Coordinate difference b - a, wrapped to the shortest representative for periodic axes.
    Vec difference(const Vec& a, const Vec& b) const;
    /// Uniform point in the box; infinite sides are replaced by ±sample_extent.
    Vec sample(std::mt19937_64& rng, double sample_extent = 2.0) const;
};

/// Rotationally symmetric charts dr² + w(r)² S(θ): coordinate 0 is r and the pole sits at r = 0.
struct PolarInfo {
    double antipode = std::numeric_limits<double>::infinity();  // radius where w vanishes again
    std::function<Mat(const Vec&)> sphere_gram;                 // S(θ) on coordinates 1..n-1
};

enum class WeightKind { density, potential };

class Chart {
public:
    using MetricFn = std::function<Mat(const Vec&)>;
    using MetricDerivFn = std::function<std::vector<Mat>(const Vec&)>;
    using OneFormFn = std::function<Vec(const Vec&)>;

    Chart(std::string name, std::vector<std::string> coords, MetricFn metric, Domain domain);

    const std::string& name() const { return name_; }
    int dim() const { return static_cast<int>(coords_.size()); }
    const std::vector<std::string>& coords() const { return coords_; }
    const Domain& domain() const { return domain_; }

    Mat metric(const Vec& x) const { return metric_(x); }
    /// dg[k](i, j) = ∂_k g_ij; analytic when provided, else central differences.
    std::vector<Mat> metric_derivatives(const Vec& x) const;
    std::vector<Mat> metric_derivatives_fd(const Vec& x, double rel_step = 1e-5) const;
    bool analytic_derivatives() const { return static_cast<bool>(dmetric_); }

    double f(const Vec& x) const;
    Vec df(const Vec& x) const;
    Mat hess_f(const Vec& x) const;
    double phi(const Vec& x) const;
    Mat hess_phi(const Vec& x) const;
    /// dφ from the weight, ignoring any one-form override.
    Vec dphi(const Vec& x) const;
    /// α = dφ unless a one-form override is installed.
    Vec alpha(const Vec& x) const;
    bool alpha_closed() const { return !one_form_; }
    bool weight_is_constant() const;
    const ScalarField& weight_field() const { return weight_; }
    WeightKind weight_kind() const { return weight_kind_; }
    std::string weight_label() const;

    double injectivity_radius(const Vec& p) const;
    const std::optional<PolarInfo>& polar() const { return polar_; }
    bool is_oriented() const { return oriented_; }

    Chart with_density(const ScalarField& f) const;
    Chart with_density(const std::string& source) const;
    Chart with_potential(const ScalarField& phi) const;
    Chart with_potential(const std::string& source) const;
    /// Test hook: replaces α by an arbitrary (possibly non-closed) one-form.
    Chart with_one_form(OneFormFn alpha) const;

    Chart& set_metric_derivatives(MetricDerivFn d);
    Chart& set_injectivity(std::function<double(const Vec&)> inj);
    Chart& set_polar(PolarInfo info);
    Chart& set_oriented(bool oriented);
    Chart& set_name(std::string name);

    void require_inside(const Vec& x, const std::string& module) const;

private:
    std::string name_;
    std::vector<std::string> coords_;
    MetricFn metric_;
    MetricDerivFn dmetric_;
    Domain domain_;
    ScalarField weight_;
    WeightKind weight_kind_ = WeightKind::density;
    OneFormFn one_form_;
    std::function<double(const Vec&)> injectivity_;
    std::optional<PolarInfo> polar_;
    bool oriented_ = true;
};

/// Symmetric metric matrix from expression entries; derivatives are symbolic.
Chart expression_chart(std::string name, std::vector<std::string> coords,
                       const std::vector<std::vector<expr::Expr>>& entries, Domain domain);
Chart expression_chart(std::string name, std::vector<std::string> coords,
                       const std::vector<std::vector<std::string>>& entries, Domain domain);

/// The conformal metric h = e^{-4f/(n-1)} g with zero density.
Chart conformal_chart(const Chart& chart);

/// Smallest eigenvalue and condition number of the metric at x.
struct MetricHealth {
    bool symmetric = true;
    double min_eigenvalue = 0.0;
    double condition = 0.0;
};
MetricHealth metric_health(const Chart& chart, const Vec& x);

} // namespace wgeom
