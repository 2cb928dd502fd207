#pragma once

#include <Eigen/Dense>
#include <vector>

namespace wgeom {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Γ^k_ij stored as gamma[k](i, j).
using Symbols = std::vector<Mat>;

inline std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

inline Vec from_std(const std::vector<double>& v) {
    return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline Symbols zero_symbols(int n) { return Symbols(n, Mat::Zero(n, n)); }

/// Contract Γ^k_ij u^i w^j.
inline Vec contract(const Symbols& gamma, const Vec& u, const Vec& w) {
    Vec out(static_cast<Eigen::Index>(gamma.size()));
    for (std::size_t k = 0; k < gamma.size(); ++k) out[k] = u.dot(gamma[k] * w);
    return out;
}

} // namespace wgeom
