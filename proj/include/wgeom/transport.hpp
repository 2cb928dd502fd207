#pragma once

#include "wgeom/chart.hpp"
#include "wgeom/geodesy.hpp"
#include "wgeom/settings.hpp"

#include <functional>
#include <random>
#include <string>
#include <vector>

namespace wgeom {

/// One C¹ piece σ: [t0, t1] → chart.
struct Segment {
    std::function<Vec(double)> x;
    std::function<Vec(double)> dx;
    double t0 = 0.0;
    double t1 = 1.0;
};

/// Piecewise-C¹ curve; transport restarts at every corner with the carried vector.
class PiecewiseCurve {
public:
    PiecewiseCurve() = default;
    explicit PiecewiseCurve(std::vector<Segment> segments);

    static PiecewiseCurve polyline(const std::vector<Vec>& points);
    static PiecewiseCurve from_path(const CurvePath& path);
    /// Straight segment a → b in coordinates (parameter in [0, 1]).
    static Segment line(const Vec& a, const Vec& b);

    const std::vector<Segment>& segments() const { return segments_; }
    bool empty() const { return segments_.empty(); }
    Vec start() const;
    Vec end() const;
    PiecewiseCurve reversed() const;
    PiecewiseCurve then(const PiecewiseCurve& other) const;
    /// Polyline-style sampling with `per_segment` nodes per piece.
    CurvePath sample(int per_segment = 32) const;

private:
    std::vector<Segment> segments_;
};

/// Linear map P with v(end) = P v(start) for ∇^α transport along the curve.
Mat transport_matrix(const Chart& chart, const PiecewiseCurve& curve, const Settings& settings = {});
Vec parallel_transport(const Chart& chart, const PiecewiseCurve& curve, const Vec& v0, const Settings& settings = {});
Vec parallel_transport(const Chart& chart, const CurvePath& curve, const Vec& v0, const Settings& settings = {});

enum class FrameMode { coordinate, orthonormal };

struct HolonomyElement {
    Vec basepoint;
    Mat frame;   // columns: basis at the basepoint
    Mat matrix;  // transport expressed in that basis
    std::string descriptor;
    double det = 1.0;
};

/// Throws InvalidArgument when the loop does not close (modulo periodic coordinates).
HolonomyElement holonomy_element(const Chart& chart, const PiecewiseCurve& loop, FrameMode mode = FrameMode::coordinate,
                                 const Settings& settings = {}, std::string descriptor = "loop");

/// ‖hᵀ G h − G‖_max in the coordinate frame.
double orthogonality_defect(const Chart& chart, const HolonomyElement& h);

struct LoopFamily {
    std::string name;
    std::function<PiecewiseCurve(double)> loop;
};

/// Sphere loops based at (π/2, 0): out to latitude s, once around, back.
LoopFamily sphere_latitude_family();
/// Sphere loops based at (π/2, 0) through r = ξ with angular width s.
LoopFamily sphere_rectangle_family();
/// ξ = arccos((1 − √5)/2).
double rectangle_xi();
/// Family from expression segments in the variables t ∈ [0, 1] and s.
LoopFamily expression_family(std::string name, const std::vector<std::vector<std::string>>& segments);

struct AlgebraElement {
    Mat matrix;          // h(s0)⁻¹ dh/ds
    Mat raw_derivative;  // dh/ds
    Mat holonomy;        // h(s0)
    std::string family_name;
    double parameter_at = 0.0;
    double trace() const { return matrix.trace(); }
};

/// Central difference of h_s with step ds and ds/2, combined by one Richardson step.
AlgebraElement algebra_element(const Chart& chart, const LoopFamily& family, double s0, double ds = 1e-4,
                               FrameMode mode = FrameMode::coordinate, const Settings& settings = {});

/// Dimension of the span of the matrices closed under commutators to the given depth.
int generated_algebra_dim(const std::vector<Mat>& elements, int depth = 4, double threshold = 1e-6);

/// Expression-valued vector field V^k(x).
class VectorField {
public:
    VectorField() = default;
    explicit VectorField(std::vector<ScalarField> components) : comps_(std::move(components)) {}
    static VectorField parse(const std::vector<std::string>& sources, const std::vector<std::string>& coords);
    int dim() const { return static_cast<int>(comps_.size()); }
    Vec value(const Vec& x) const;
    /// J(k, i) = ∂_i V^k.
    Mat jacobian(const Vec& x) const;

private:
    std::vector<ScalarField> comps_;
};

/// max |∇^α_σ̇ V|_g over the sampled nodes of every curve.
double parallel_field_residual(const Chart& chart, const VectorField& field, const std::vector<PiecewiseCurve>& curves,
                               int per_segment = 64);

struct DistributionReport {
    double max_angle = 0.0;            // radians
    std::vector<double> angles;        // per loop
    double lower_block = 0.0;          // max |h_{FB}| when a block check ran
    double fiber_block_error = 0.0;    // max |h_FF − h₂|
    bool block_checked = false;
};

/// Largest principal angle (g-metric) between span(vs) and span(ws).
double principal_angle(const Mat& g, const Mat& vs, const Mat& ws);

DistributionReport distribution_invariance(const Chart& chart, const std::vector<VectorField>& distribution,
                                           const std::vector<PiecewiseCurve>& loops, const Settings& settings = {});

/// Block structure on a product chart: base coordinates come first. The fiber block is compared with the
/// holonomy of the projected loop on `fiber_chart`.
void block_structure(const Chart& chart, int base_dim, const Chart& fiber_chart, const std::vector<PiecewiseCurve>& loops,
                     DistributionReport& report, const Settings& settings = {});

/// Closed polygon through `vertices` random points near `center` (radius `radius`).
PiecewiseCurve random_polygon_loop(std::mt19937_64& rng, const Vec& center, double radius, int vertices = 4);
/// Closed smooth loop x(t) = center + Σ_k a_k cos(2πkt) + b_k sin(2πkt) with random coefficients.
PiecewiseCurve random_fourier_loop(std::mt19937_64& rng, const Vec& center, double radius, int modes = 3);

/// CSV with columns loop, param, h11..hnn, det, dist_orthogonal.
std::string holonomy_csv(const Chart& chart, const std::vector<HolonomyElement>& elements,
                         const std::vector<double>& params);

} // namespace wgeom
