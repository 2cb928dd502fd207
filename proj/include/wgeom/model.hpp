#pragma once

namespace wgeom {

struct ModelParams {
    int n = 2;
    double K = 0.0;
};

/// sn_K(s): solution of sn'' + K sn = 0 with sn(0) = 0, sn'(0) = 1.
double sn_k(double K, double s);
/// sn_K'(s).
double cs_k(double K, double s);
/// m_K(s) = (n-1) sn_K'(s)/sn_K(s); Laurent series below s = 1e-4.
double m_k(const ModelParams& params, double s);
/// ∫₀^s sn_K(t)^{n-1} dt, the model volume per unit solid angle.
double model_volume_density(const ModelParams& params, double s0, double s1);

} // namespace wgeom
