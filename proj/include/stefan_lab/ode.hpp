#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

#include "stefan_lab/errors.hpp"

namespace stefan_lab::ode {

template <std::size_t N>
using State = std::array<double, N>;

struct AdaptiveOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-10;
    double initial_step = 1e-3;
    double max_step = 0.25;
    double min_step = 1e-14;
    std::size_t max_steps = 2'000'000;
};

/// Dormand–Prince 5(4) with local error control.
///
/// `rhs(t, y)` returns dy/dt. `observer(t, y)` is called on the initial point and after
/// every accepted step; returning false stops the integration. Returns the final time.
template <std::size_t N, class Rhs, class Observer>
double integrate_dopri5(Rhs&& rhs, State<N>& y, double t0, double t1, const AdaptiveOptions& opt,
                        Observer&& observer) {
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                     b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    double t = t0;
    double h = std::min(opt.initial_step, t1 - t0);
    if (!observer(t, y)) return t;
    State<N> k1 = rhs(t, y), k2, k3, k4, k5, k6, k7, tmp, ynew;
    std::size_t steps = 0;
    while (t < t1) {
        if (++steps > opt.max_steps) throw NumericalError("dopri5: step budget exhausted");
        h = std::min(h, t1 - t);
        auto stage = [&](auto&& combine) -> const State<N>& {
            for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * combine(i);
            return tmp;
        };
        k2 = rhs(t + c2 * h, stage([&](std::size_t i) { return a21 * k1[i]; }));
        k3 = rhs(t + c3 * h, stage([&](std::size_t i) { return a31 * k1[i] + a32 * k2[i]; }));
        k4 = rhs(t + c4 * h, stage([&](std::size_t i) {
                     return a41 * k1[i] + a42 * k2[i] + a43 * k3[i];
                 }));
        k5 = rhs(t + c5 * h, stage([&](std::size_t i) {
                     return a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i];
                 }));
        k6 = rhs(t + h, stage([&](std::size_t i) {
                     return a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i];
                 }));
        for (std::size_t i = 0; i < N; ++i)
            ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        k7 = rhs(t + h, ynew);

        double err = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                                  e7 * k7[i]);
            const double scale = opt.abs_tol + opt.rel_tol * std::max(std::fabs(y[i]), std::fabs(ynew[i]));
            err = std::max(err, std::fabs(e) / scale);
        }
        if (!std::isfinite(err)) {
            h *= 0.25;
            if (h < opt.min_step) throw NumericalError("dopri5: non-finite state");
            continue;
        }
        if (err <= 1.0) {
            t += h;
            y = ynew;
            k1 = k7;  // FSAL
            if (!observer(t, y)) return t;
        }
        const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        h = std::min(h * factor, opt.max_step);
        if (h < opt.min_step) throw NumericalError("dopri5: step size underflow");
    }
    return t;
}

/// Classical RK4 with a fixed number of steps; used for short, high-accuracy hops
/// between stored profile nodes.
template <std::size_t N, class Rhs>
State<N> rk4_fixed(Rhs&& rhs, State<N> y, double t0, double t1, std::size_t steps) {
    const double h = (t1 - t0) / static_cast<double>(steps);
    State<N> tmp;
    double t = t0;
    for (std::size_t s = 0; s < steps; ++s) {
        const State<N> k1 = rhs(t, y);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
        const State<N> k2 = rhs(t + 0.5 * h, tmp);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
        const State<N> k3 = rhs(t + 0.5 * h, tmp);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * k3[i];
        const State<N> k4 = rhs(t + h, tmp);
        for (std::size_t i = 0; i < N; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        t += h;
    }
    return y;
}

}  // namespace stefan_lab::ode
