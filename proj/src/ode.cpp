#include "wgeom/ode.hpp"

#include "wgeom/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace wgeom::ode {

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

double error_norm(const Vec& err, const Vec& y0, const Vec& y1, const Options& o) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
        const double sc = o.atol + o.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        acc += (err[i] / sc) * (err[i] / sc);
    }
    return std::sqrt(acc / std::max<Eigen::Index>(err.size(), 1));
}

double initial_step(const Rhs& rhs, double t0, const Vec& y0, const Vec& f0, double dir, const Options& o) {
    Vec sc = (o.atol + o.rtol * y0.array().abs()).matrix();
    const double d0 = std::sqrt((y0.array() / sc.array()).square().mean());
    const double d1n = std::sqrt((f0.array() / sc.array()).square().mean());
    double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
    Vec y1 = y0 + dir * h0 * f0, f1(y0.size());
    rhs(t0 + dir * h0, y1, f1);
    const double d2 = std::sqrt(((f1 - f0).array() / sc.array()).square().mean()) / h0;
    const double h1 = std::max(d1n, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                                  : std::pow(0.01 / std::max(d1n, d2), 1.0 / 5);
    return std::min(100 * h0, h1);
}

} // namespace

std::size_t DenseSolution::step_index(double t) const {
    const bool forward = t_.back() >= t_.front();
    std::size_t i;
    if (forward) {
        auto it = std::upper_bound(t_.begin(), t_.end(), t);
        i = it == t_.begin() ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
    } else {
        auto it = std::upper_bound(t_.begin(), t_.end(), t, std::greater<>());
        i = it == t_.begin() ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
    }
    return std::min(i, cont_.size() - 1);
}

Vec DenseSolution::operator()(double t) const {
    if (cont_.empty()) return y_.front();
    const double lo = std::min(t_.front(), t_.back()), hi = std::max(t_.front(), t_.back());
    t = std::clamp(t, lo, hi);
    const std::size_t i = step_index(t);
    const double h = t_[i + 1] - t_[i];
    const double th = h == 0.0 ? 0.0 : (t - t_[i]) / h;
    const double th1 = 1.0 - th;
    const auto& c = cont_[i];
    return c[0] + th * (c[1] + th1 * (c[2] + th * (c[3] + th1 * c[4])));
}

void DenseSolution::start(double t0, const Vec& y0) {
    t_.assign(1, t0);
    y_.assign(1, y0);
    cont_.clear();
}

void DenseSolution::push(double t1, const Vec& y1, std::array<Vec, 5> coeffs) {
    t_.push_back(t1);
    y_.push_back(y1);
    cont_.push_back(std::move(coeffs));
}

void DenseSolution::truncate(double t) {
    if (cont_.empty()) return;
    const std::size_t i = step_index(t);
    const Vec yt = (*this)(t);
    const double h = t_[i + 1] - t_[i];
    const double a = h == 0.0 ? 0.0 : (t - t_[i]) / h;
    const std::array<Vec, 5> c = cont_[i];
    t_.resize(i + 2);
    y_.resize(i + 2);
    cont_.resize(i + 1);
    t_[i + 1] = t;
    y_[i + 1] = yt;
    // Monomial form of the nested quartic, rescaled to the shortened step, then nested again.
    const Vec m1 = c[1] + c[2];
    const Vec m2 = -c[2] + c[3] + c[4];
    const Vec m3 = -c[3] - 2 * c[4];
    const Vec q1 = m1 * a, q2 = m2 * a * a, q3 = m3 * a * a * a, q4 = c[4] * a * a * a * a;
    const Vec n4 = q4;
    const Vec n3 = -q3 - 2 * n4;
    const Vec n2 = n3 + n4 - q2;
    const Vec n1 = q1 - n2;
    cont_[i] = {c[0], n1, n2, n3, n4};
}

Result integrate(const Rhs& rhs, double t0, const Vec& y0, double t1, const Options& o, const Inside& inside) {
    Result res;
    res.solution = std::make_shared<DenseSolution>();
    auto& sol = *res.solution;
    sol.start(t0, y0);
    res.t_stop = t0;
    if (t1 == t0) return res;
    const double dir = t1 > t0 ? 1.0 : -1.0;
    const Eigen::Index n = y0.size();

    Vec y = y0, k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), yt(n), ynew(n);
    double t = t0;
    rhs(t, y, k1);
    double h = o.initial_step > 0 ? o.initial_step : initial_step(rhs, t0, y0, k1, dir, o);
    h = std::min(h, std::abs(t1 - t0));
    double err_prev = 1e-4;
    bool last_rejected = false;

    for (std::size_t step = 0; step < o.max_steps; ++step) {
        if (dir * (t + dir * h - t1) > 0) h = std::abs(t1 - t);
        const double hs = dir * h;
        bool eval_ok = true;
        try {
            yt = y + hs * a21 * k1;
            rhs(t + c2 * hs, yt, k2);
            yt = y + hs * (a31 * k1 + a32 * k2);
            rhs(t + c3 * hs, yt, k3);
            yt = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
            rhs(t + c4 * hs, yt, k4);
            yt = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
            rhs(t + c5 * hs, yt, k5);
            yt = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
            rhs(t + hs, yt, k6);
            ynew = y + hs * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
            rhs(t + hs, ynew, k7);
            eval_ok = ynew.allFinite() && k7.allFinite();
        } catch (const Error&) {
            eval_ok = false;
        }
        if (!eval_ok) {
            h *= 0.25;
            if (h < o.min_step * std::max(1.0, std::abs(t))) {
                res.status = Status::left_domain;
                res.message = "right-hand side undefined ahead of t";
                res.t_stop = t;
                return res;
            }
            last_rejected = true;
            continue;
        }
        const Vec errv = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const double err = error_norm(errv, y, ynew, o);
        if (err <= 1.0) {
            const Vec ydiff = ynew - y;
            const Vec bspl = hs * k1 - ydiff;
            std::array<Vec, 5> cont{y, ydiff, bspl, ydiff - hs * k7 - bspl,
                                    hs * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7)};
            const double tnew = t + hs;
            sol.push(tnew, ynew, std::move(cont));
            if (inside && !inside(tnew, ynew)) {
                double lo = t, hi = tnew;
                for (int it = 0; it < 60; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if (inside(mid, sol(mid))) lo = mid;
                    else hi = mid;
                }
                sol.truncate(lo);
                res.status = Status::left_domain;
                res.message = "trajectory left the admissible region";
                res.t_stop = lo;
                return res;
            }
            t = tnew;
            y = ynew;
            k1 = k7;
            res.t_stop = t;
            if (dir * (t - t1) >= 0) return res;
            // Lund-stabilised PI controller.
            double fac = 0.9 * std::pow(err, -0.17) * std::pow(err_prev, 0.04);
            if (err == 0.0) fac = 10.0;
            fac = std::clamp(fac, 0.2, 10.0);
            if (last_rejected) fac = std::min(fac, 1.0);
            h *= fac;
            err_prev = std::max(err, 1e-4);
            last_rejected = false;
        } else {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            last_rejected = true;
        }
        if (h < o.min_step * std::max(1.0, std::abs(t))) {
            res.status = Status::step_underflow;
            res.message = "step size underflow";
            res.t_stop = t;
            return res;
        }
    }
    res.status = Status::step_underflow;
    res.message = "step budget exhausted";
    return res;
}

} // namespace wgeom::ode
