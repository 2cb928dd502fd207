#pragma once

#include "wgeom/chart.hpp"
#include "wgeom/geodesy.hpp"
#include "wgeom/model.hpp"
#include "wgeom/ode.hpp"
#include "wgeom/settings.hpp"

#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace wgeom {

struct ProfileSample {
    double r = 0.0;
    double s = 0.0;
    double f = 0.0;
    double A = 0.0;       // volume element 𝒜
    double A_f = 0.0;     // e^{-f} 𝒜
    double lap = 0.0;     // Δr
    double lap_f = 0.0;   // Δ_f r
    double lambda = 0.0;  // e^{2f/(n-1)} Δ_f r
    Vec x;
    Vec v;
};

/// Radial geodesic from p with n−1 normal Jacobi fields and the accumulated s.
/// A basepoint with r ≤ 0 on a rotational chart is the pole; its remaining
/// coordinates select the ray.
class RadialProfile {
public:
    int dim() const { return n_; }
    const Chart& chart() const { return *chart_; }
    const Vec& basepoint() const { return p_; }
    bool from_pole() const { return pole_; }
    /// Start of the sampled range (δ).
    double r_begin() const { return r_begin_; }
    double r_end() const { return r_end_; }
    bool truncated() const { return truncated_; }
    bool conjugate() const { return conjugate_; }
    const std::string& reason() const { return reason_; }

    /// Full profile quantities at r ∈ [r_begin, r_end].
    ProfileSample at(double r) const;
    double s_at(double r) const;
    double A_f_at(double r) const;
    double lambda_at(double r) const;
    /// Smallest r with s(r) = target, or nullopt when the ray ends first.
    std::optional<double> r_of_s(double target) const;

    const std::vector<ProfileSample>& samples() const { return samples_; }
    const CurvePath& geodesic() const { return geodesic_; }

    /// Zero of 𝒜 extrapolated past a domain edge (pole rays on closed rotational charts).
    std::optional<double> extrapolated_end_r() const { return end_r_; }
    std::optional<double> extrapolated_end_s() const { return end_s_; }

private:
    friend RadialProfile radial_profile(const Chart&, const Vec&, const Vec&, double, const Settings&);
    std::shared_ptr<const Chart> chart_;
    std::shared_ptr<const ode::DenseSolution> dense_;
    int n_ = 0;
    Vec p_;
    bool pole_ = false;
    double r_begin_ = 0.0, r_end_ = 0.0;
    double pole_jacobian_ = 1.0;  // sqrt det S(θ) on pole rays
    bool truncated_ = false, conjugate_ = false;
    std::string reason_;
    std::vector<ProfileSample> samples_;
    CurvePath geodesic_;
    std::optional<double> end_r_, end_s_;
};

/// `direction` must be g-unit at p (ignored on pole rays).
RadialProfile radial_profile(const Chart& chart, const Vec& p, const Vec& direction, double r_max,
                             const Settings& settings = {});

/// Rays from p in `count` directions with their angular quadrature weights.
struct RayFamily {
    std::vector<RadialProfile> profiles;
    std::vector<double> weights;
    double solid_angle = 0.0;  // |S^{n-1}|
};
RayFamily ray_family(const Chart& chart, const Vec& p, double r_max, int count, const Settings& settings = {});

double sphere_area(int n);   // |S^{n-1}|
double ball_volume(int n);   // ω_n

struct ComparisonRow {
    double r = 0.0;
    double s = 0.0;
    double value = 0.0;
    double bound = 0.0;
    double margin = 0.0;
    double tolerance = 0.0;
    int ray = 0;
};

struct HypothesisReport {
    bool checked = false;
    bool satisfied = true;
    double K = 0.0;
    double sampled_K = 0.0;  // min of e^{4f/(n-1)} Ric_f^1(u,u)/(n-1) over the samples
    int points = 0;
    int vectors = 0;
};

enum class Verdict { pass, fail, hypothesis_unmet };
std::string to_string(Verdict v);

struct ComparisonReport {
    std::string theorem;
    std::vector<ComparisonRow> samples;
    double margin = 0.0;     // min over samples of (bound − value − tolerance) + tolerance at the binding row
    double tolerance = 0.0;  // tolerance at the binding row
    Verdict verdict = Verdict::pass;
    HypothesisReport hypothesis;
    std::vector<std::string> log;
    double measured = 0.0;   // check-specific scalar (total s for Myers, μ(M) for finiteness)

    bool passed() const { return verdict == Verdict::pass; }
    void add(ComparisonRow row);
    /// Sets the verdict from the rows; keeps hypothesis_unmet when already set.
    void finish();
    std::string csv() const;
    std::string summary() const;
};

/// Samples the bound Ric_f^1 ≥ (n−1)K e^{−4f/(n−1)} g at the given points with random unit vectors
/// and the generalized eigenvalue minimum.
HypothesisReport sample_hypothesis(const Chart& chart, const std::vector<Vec>& points, double K,
                                   const Settings& settings = {}, double tol = 1e-6);
/// Points spread along the profiles (at most `count`).
std::vector<Vec> profile_points(const std::vector<RadialProfile>& profiles, int count);
/// Largest K satisfied at every sampled point.
double sampled_curvature_bound(const Chart& chart, const std::vector<Vec>& points, const Settings& settings = {});

/// Passing K = kSampledK to a check uses the largest K satisfied at every profile sample of its own rays.
inline constexpr double kSampledK = std::numeric_limits<double>::quiet_NaN();

ComparisonReport riccati_check(const RadialProfile& profile, const Settings& settings = {});
ComparisonReport mean_curvature_check(const RadialProfile& profile, const ModelParams& params,
                                      const Settings& settings = {});
ComparisonReport volume_element_monotone(const RadialProfile& profile, const ModelParams& params,
                                         const Settings& settings = {});
ComparisonReport laplacian_comparison_check(const Chart& chart, const Vec& p, const std::vector<Vec>& points,
                                            const ModelParams& params, const Settings& settings = {});

enum class VolumeMode { f_volume_annuli, mu_level_sets };

/// Nested intervals [a0, a1] and [b0, b1] in r (annuli) or s (level sets).
struct VolumeIntervals {
    double a0 = 0.0, a1 = 0.5;
    double b0 = 0.0, b1 = 1.0;
};

struct VolumeTotals {
    double inner = 0.0;        // Vol_f or μ over [a0, a1]
    double outer = 0.0;        // over [b0, b1]
    double model_inner = 0.0;  // ν_p or v over [a0, a1]
    double model_outer = 0.0;
    std::vector<double> truncation;  // per-ray end radius
};

/// Weighted-volume integrals over the rays.
VolumeTotals volume_totals(const RayFamily& rays, VolumeMode mode, const VolumeIntervals& iv, const ModelParams& params,
                           const Settings& settings = {});

ComparisonReport volume_comparison_check(const Chart& chart, const Vec& p, VolumeMode mode, const VolumeIntervals& iv,
                                         const ModelParams& params, int directions = 0, const Settings& settings = {});

struct FExtremes {
    double f_min = 0.0;
    double f_max = 0.0;
    int samples = 0;
};
FExtremes f_extremes(const RayFamily& rays, double r);

ComparisonReport bounded_f_bounds(const Chart& chart, const Vec& p, double r, const ModelParams& params,
                                  int directions = 0, const Settings& settings = {});

ComparisonReport myers_check(const Chart& chart, const Vec& p, double K, int directions = 0,
                             const Settings& settings = {});

/// μ(M) over the full chart from a pole, against e^{f(p)} v(n, K, π/√K).
ComparisonReport finite_volume_check(const Chart& chart, const Vec& p, double K, int directions = 0,
                                     const Settings& settings = {});

struct OneDimRow {
    double s = 0.0;
    double lambda_closed = 0.0;
    double density_closed = 0.0;  // e^{-f}
    double lambda_ode = 0.0;
    double density_ode = 0.0;
};
struct OneDimTable {
    int K = 0;
    double a = 0.0, c = 0.0;
    std::vector<OneDimRow> rows;
    double max_error = 0.0;
    std::string csv() const;
};

/// e^{-f} and λ = d/ds log e^{-f} in closed form against ü = K u^{-3} integrated in r.
OneDimTable one_dim_closed_forms(int K, double a, double c, double s0, double s1, int samples = 41);

} // namespace wgeom
