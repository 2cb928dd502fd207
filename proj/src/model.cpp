#include "wgeom/model.hpp"

#include "wgeom/errors.hpp"
#include "wgeom/numerics.hpp"

#include <cmath>
#include <numbers>

namespace wgeom {

double sn_k(double K, double s) {
    if (K > 0) {
        const double q = std::sqrt(K);
        return std::sin(q * s) / q;
    }
    if (K < 0) {
        const double q = std::sqrt(-K);
        return std::sinh(q * s) / q;
    }
    return s;
}

double cs_k(double K, double s) {
    if (K > 0) return std::cos(std::sqrt(K) * s);
    if (K < 0) return std::cosh(std::sqrt(-K) * s);
    return 1.0;
}

double m_k(const ModelParams& p, double s) {
    if (p.n < 1) throw InvalidArgument("comparison", "n must be at least 1");
    if (!(s > 0)) throw DomainError("comparison", "m_K needs s > 0");
    if (p.K > 0 && s >= std::numbers::pi / std::sqrt(p.K))
        throw DomainError("comparison", "m_K needs s < π/√K");
    const double c = p.n - 1;
    if (s < 1e-4) {
        const double K = p.K;
        return c * (1.0 / s - K * s / 3.0 - K * K * s * s * s / 45.0);
    }
    if (p.K > 0) {
        const double q = std::sqrt(p.K);
        return c * q / std::tan(q * s);
    }
    if (p.K < 0) {
        const double q = std::sqrt(-p.K);
        return c * q / std::tanh(q * s);
    }
    return c / s;
}

double model_volume_density(const ModelParams& p, double s0, double s1) {
    const int e = p.n - 1;
    if (p.K == 0.0) return (std::pow(s1, e + 1) - std::pow(s0, e + 1)) / (e + 1);
    return num::gauss_kronrod([&](double t) { return std::pow(sn_k(p.K, t), e); }, s0, s1, 1e-13);
}

} // namespace wgeom
