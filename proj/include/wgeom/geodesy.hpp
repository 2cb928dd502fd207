#pragma once

#include "wgeom/chart.hpp"
#include "wgeom/numerics.hpp"
#include "wgeom/ode.hpp"
#include "wgeom/settings.hpp"

#include <memory>
#include <string>
#include <vector>

namespace wgeom {

enum class Connection { levi_civita, weighted };
enum class Parametrization { unit_speed_g, alpha_normalized, raw, polyline };

std::string to_string(Parametrization p);

struct PathNode {
    double t = 0.0;
    Vec x;
    Vec v;
};

/// Discretized curve in chart coordinates. Integrated curves keep their dense
/// output; polylines interpolate linearly between nodes.
struct CurvePath {
    std::vector<PathNode> nodes;
    Parametrization tag = Parametrization::raw;
    std::shared_ptr<const ode::DenseSolution> dense;  // state (x, v)
    bool truncated = false;
    std::string reason;

    int dim() const { return nodes.empty() ? 0 : static_cast<int>(nodes.front().x.size()); }
    double t_begin() const { return nodes.front().t; }
    double t_end() const { return nodes.back().t; }
    Vec position(double t) const;
    Vec velocity(double t) const;
    /// Same image traversed backwards, re-timed to start at 0.
    CurvePath reversed() const;

    static CurvePath polyline(const std::vector<Vec>& points);
};

/// Solves ẍ^k + Γ^k_ij ẋ^i ẋ^j = 0 for t ∈ [0, T]; stops at the chart boundary with `truncated` set.
CurvePath integrate_geodesic(const Chart& chart, const Vec& p, const Vec& v, double T, Connection connection,
                             const Settings& settings = {});

struct ReparRecord {
    CurvePath path;
    std::vector<double> t;
    std::vector<double> s;
    num::HermiteSpline s_of_t;
    double total_s = 0.0;
};

/// s(t) = ∫₀ᵗ e^{−2f(γ)/(n−1)} |γ̇|_g dt, with Gauss-Legendre quadrature between nodes.
ReparRecord reparametrize(const CurvePath& path, const Chart& chart);

/// Length in h = e^{−4f/(n−1)} g.
double conformal_length(const CurvePath& path, const Chart& chart);

struct Connector {
    CurvePath path;  // unit speed from p to q
    Vec direction;   // unit initial velocity
    double length = 0.0;
    double s = 0.0;
    double endpoint_error = 0.0;
    bool minimal = false;
};

struct DistanceResult {
    double s = 0.0;
    double d_g = 0.0;
    int minimal_count = 0;
    std::vector<Connector> connectors;
    std::vector<std::string> log;
};

/// s(p, q): minimum of the reparametrized length over the minimal geodesics found by shooting.
/// On rotational charts a point with r ≤ 0 denotes the pole; it is joined radially.
DistanceResult repar_distance(const Chart& chart, const Vec& p, const Vec& q, const Settings& settings = {});

/// d^h(p, q) through the conformal chart.
double conformal_distance(const Chart& chart, const Vec& p, const Vec& q, const Settings& settings = {});

/// Unit directions in ℝⁿ: equally spaced angles (n = 2), a Fibonacci lattice (n = 3), seeded Gaussians otherwise.
std::vector<Vec> sphere_directions(int n, int count, std::uint64_t seed = 20240611);

struct RayDiagnostic {
    Vec direction;
    std::vector<double> T;
    std::vector<double> s;
    bool converging = false;
    double limit_estimate = 0.0;
};

/// Accumulated s along the g-geodesic rays ±v for a doubling sequence of lengths.
std::vector<RayDiagnostic> completeness_diagnostic(const Chart& chart, const Vec& p, const Vec& v, double T_max = 64.0,
                                                   const Settings& settings = {});

/// CSV with columns t, s, x1..xn, v1..vn.
std::string path_csv(const ReparRecord& record);

} // namespace wgeom
