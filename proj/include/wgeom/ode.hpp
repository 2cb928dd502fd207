#pragma once

#include "wgeom/linalg.hpp"

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace wgeom::ode {

struct Options {
    double rtol = 1e-9;
    double atol = 1e-11;
    double initial_step = 0.0;
    double min_step = 1e-13;
    std::size_t max_steps = 2'000'000;
};

using Rhs = std::function<void(double t, const Vec& y, Vec& dydt)>;
/// Returns false when the state has left the admissible region.
using Inside = std::function<bool(double t, const Vec& y)>;

/// Piecewise quartic dense output of an accepted Dormand-Prince trajectory.
class DenseSolution {
public:
    double t_begin() const { return t_.front(); }
    double t_end() const { return t_.back(); }
    std::size_t steps() const { return t_.size() - 1; }
    const std::vector<double>& times() const { return t_; }
    const std::vector<Vec>& states() const { return y_; }

    /// Clamps t into [t_begin, t_end].
    Vec operator()(double t) const;

    void start(double t0, const Vec& y0);
    void push(double t1, const Vec& y1, std::array<Vec, 5> coeffs);
    /// Drop everything after t, interpolating the final state.
    void truncate(double t);

private:
    std::size_t step_index(double t) const;
    std::vector<double> t_;
    std::vector<Vec> y_;
    std::vector<std::array<Vec, 5>> cont_;
};

enum class Status { completed, left_domain, step_underflow };

struct Result {
    std::shared_ptr<DenseSolution> solution;
    Status status = Status::completed;
    double t_stop = 0.0;
    std::string message;
};

/// Dormand-Prince 5(4) with native 4th-order dense output. Integrates from t0 to t1
/// (either direction). When `inside` reports an exit, the crossing is located by
/// bisection on the dense output and the trajectory is truncated there.
Result integrate(const Rhs& rhs, double t0, const Vec& y0, double t1, const Options& opts = {},
                 const Inside& inside = nullptr);

} // namespace wgeom::ode
