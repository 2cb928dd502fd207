#pragma once

#include <cstdint>

namespace wgeom {

/// Numerical tolerances and resolutions. Defaults are the documented ones.
struct Settings {
    double chart_margin = 1e-3;         // δ: excluded collar at coordinate singularities
    double metric_fd_step = 1e-5;       // relative step for metric derivative fallback
    double curvature_fd_step = 1e-4;    // step for differentiating connection coefficients
    double hessian_fd_step = 1e-4;
    double singular_condition = 1e12;
    double ode_rtol = 1e-9;
    double ode_atol = 1e-11;
    int shooting_directions = 64;
    double endpoint_tol = 1e-8;
    double minimal_length_tol = 1e-6;
    int newton_max_iter = 40;
    double algebra_ds = 1e-4;
    int algebra_depth = 4;
    double rank_threshold = 1e-6;
    double closed_loop_tol = 1e-9;
    int profile_samples = 400;
    int hypothesis_vectors = 200;
    int hypothesis_points = 50;
    double riccati_tol = 1e-4;
    double mean_curvature_tol = 1e-5;
    double monotone_tol = 1e-7;
    double volume_tol = 1e-6;
    double myers_tol = 1e-4;
    double simpson_tol = 1e-8;
    int angular_samples = 64;
    std::uint64_t seed = 20240611;
};

} // namespace wgeom
