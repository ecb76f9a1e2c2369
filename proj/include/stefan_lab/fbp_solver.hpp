#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stefan_lab/errors.hpp"
#include "stefan_lab/nonlinearity.hpp"

namespace stefan_lab {

// Front-fixing solver for the symmetric free boundary problem
//
//   u_t = u_xx + f(u),  0 < x < h(t),   u(t, h(t)) = 0,   h'(t) = -μ u_x(t, h(t)).
//
// With y = x / h(t) the domain is the fixed interval [0, 1] and
//
//   u_t = u_yy / h² + y (h'/h) u_y + f(u).
//
// Diffusion is implicit (tridiagonal), advection and reaction explicit. The front speed
// uses a 3-point one-sided derivative at y = 1 and a predictor-corrector update.

enum class CenterCondition {
    symmetric,  ///< u_y(t, 0) = 0 (even extension to [-h, h])
    dirichlet,  ///< u(t, 0) = center_value (pure Stefan benchmark)
};

struct SolverControls {
    std::size_t N = 400;
    double c1 = 2.0;   ///< dt <= c1 Δx²
    double c2 = 0.5;   ///< dt <= c2 Δx / |h'|
    double t_start = 0.0;
    double trace_ratio = 1.05;
    /// First geometric trace time; 0 picks t_start when t_start > 0, else 1e-2.
    double trace_first = 0.0;
    CenterCondition center = CenterCondition::symmetric;
    double center_value = 0.0;
    double negativity_tol = 1e-10;
    /// run() halves a step whose front speed changes by more than this fraction.
    double max_speed_change = 0.25;
    std::vector<double> snapshot_times;
};

struct SolverState {
    double t = 0.0;
    double h = 0.0;
    double hdot = 0.0;
    std::vector<double> u;  ///< u(y_i), y_i = i / N, i = 0..N; u[N] = 0

    std::size_t N() const noexcept { return u.empty() ? 0 : u.size() - 1; }
    double max_u() const { return *std::max_element(u.begin(), u.end()); }
};

/// Initial profile on [0, h₀]; even in x, positive inside, zero at h₀.
class InitialDatum {
public:
    /// ν cos(πx / 2h₀).
    static InitialDatum cosine_bump(double h0, double nu) {
        if (!(h0 > 0.0)) throw DomainError("cosine_bump: h0 must be > 0");
        if (!(nu > 0.0)) throw DomainError("cosine_bump: nu must be > 0");
        InitialDatum d;
        d.h0_ = h0;
        d.nu_ = nu;
        d.kind_ = Kind::cosine;
        d.fn_ = [h0, nu](double x) { return nu * std::cos(std::numbers::pi * x / (2.0 * h0)); };
        return d;
    }

    /// Piecewise-linear interpolation of (x, u) samples; x must start at 0 and end at h₀
    /// with u(h₀) = 0.
    static InitialDatum from_table(std::vector<double> xs, std::vector<double> us) {
        if (xs.size() != us.size() || xs.size() < 3) throw DomainError("from_table: need >= 3 matched samples");
        if (xs.front() != 0.0) throw DomainError("from_table: first abscissa must be 0");
        for (std::size_t i = 1; i < xs.size(); ++i)
            if (!(xs[i] > xs[i - 1])) throw DomainError("from_table: abscissae must increase");
        if (us.back() != 0.0) throw DomainError("from_table: u(h0) must be 0");
        for (std::size_t i = 0; i + 1 < us.size(); ++i)
            if (!(us[i] > 0.0)) throw DomainError("from_table: u must be positive on [0, h0)");
        InitialDatum d;
        d.h0_ = xs.back();
        d.kind_ = Kind::table;
        d.nu_ = us.front();
        d.fn_ = [xs = std::move(xs), us = std::move(us)](double x) {
            const auto it = std::upper_bound(xs.begin(), xs.end(), x);
            if (it == xs.begin()) return us.front();
            if (it == xs.end()) return us.back();
            const std::size_t k = static_cast<std::size_t>(it - xs.begin());
            const double w = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
            return (1.0 - w) * us[k - 1] + w * us[k];
        };
        return d;
    }

    /// Arbitrary profile u₀(x) on [0, h₀] (evaluated at grid nodes only).
    static InitialDatum from_function(double h0, std::function<double(double)> fn) {
        if (!(h0 > 0.0)) throw DomainError("from_function: h0 must be > 0");
        InitialDatum d;
        d.h0_ = h0;
        d.kind_ = Kind::function;
        d.nu_ = fn(0.0);
        d.fn_ = std::move(fn);
        return d;
    }

    double h0() const noexcept { return h0_; }
    double nu() const noexcept { return nu_; }
    bool is_cosine_bump() const noexcept { return kind_ == Kind::cosine; }
    double operator()(double x) const { return fn_(x); }

private:
    enum class Kind { cosine, table, function };
    double h0_ = 0.0;
    double nu_ = 0.0;
    Kind kind_ = Kind::function;
    std::function<double(double)> fn_;
};

struct TraceRow {
    double t;
    double h;
    double hdot;
    double u0;
    std::optional<double> theta_pos;
};

struct TraceMetadata {
    double mu = 0.0;
    double theta = 0.0;
    double p = 0.0;
    double sigma = 0.0;
    std::size_t N = 0;
    double c1 = 0.0;
    double c2 = 0.0;
    double trace_ratio = 0.0;
    double h0 = 0.0;
    double nu = 0.0;
    std::size_t steps = 0;
};

struct FrontTrace {
    std::vector<TraceRow> rows;
    TraceMetadata meta;
    std::vector<SolverState> snapshots;

    /// Linear interpolation of a row field at time t (clamped to the trace range).
    template <class Field>
    double interpolate(double t, Field field) const {
        if (rows.empty()) throw DomainError("interpolate: empty trace");
        if (t <= rows.front().t) return field(rows.front());
        if (t >= rows.back().t) return field(rows.back());
        const auto it = std::upper_bound(rows.begin(), rows.end(), t,
                                         [](double v, const TraceRow& r) { return v < r.t; });
        const TraceRow& b = *it;
        const TraceRow& a = *std::prev(it);
        const double w = (t - a.t) / (b.t - a.t);
        return (1.0 - w) * field(a) + w * field(b);
    }
    double h_at(double t) const { return interpolate(t, [](const TraceRow& r) { return r.h; }); }
    double u0_at(double t) const { return interpolate(t, [](const TraceRow& r) { return r.u0; }); }
};

namespace solver_detail {

// Thomas algorithm; sub/diag/sup/rhs are overwritten.
inline void solve_tridiagonal(std::span<const double> sub, std::span<double> diag,
                              std::span<const double> sup, std::span<double> rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double m = sub[i] / diag[i - 1];
        diag[i] -= m * sup[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
}

// -μ u_x(h) from the 3-point one-sided stencil at y = 1.
inline double stefan_speed(std::span<const double> u, double h, double mu) {
    const std::size_t N = u.size() - 1;
    const double dy = 1.0 / static_cast<double>(N);
    const double uy = (3.0 * u[N] - 4.0 * u[N - 1] + u[N - 2]) / (2.0 * dy);
    return -mu * uy / h;
}

}  // namespace solver_detail

/// Level-set position θ(t) where u(t, ·) = θ, via monotone cubic (PCHIP) interpolation.
/// Absent when u(t, 0) < θ; 0 when u(t, 0) = θ.
inline std::optional<double> theta_level(const SolverState& s, double theta) {
    const auto& u = s.u;
    const std::size_t N = s.N();
    if (N < 2) throw DomainError("theta_level: state too small");
    if (u[0] < theta) return std::nullopt;
    if (u[0] == theta) return 0.0;
    std::size_t k = 0;
    while (k < N && u[k + 1] > theta) ++k;
    if (k >= N) return std::nullopt;  // no crossing on the grid
    const double dy = 1.0 / static_cast<double>(N);
    auto secant = [&](std::size_t i) { return (u[i + 1] - u[i]) / dy; };
    auto node_slope = [&](std::size_t i) {
        if (i == 0) return 0.0;  // symmetric profile
        if (i == N) return secant(N - 1);
        const double a = secant(i - 1), b = secant(i);
        if (a * b <= 0.0) return 0.0;
        return 2.0 / (1.0 / a + 1.0 / b);  // harmonic mean (Fritsch-Butland)
    };
    const double y0 = static_cast<double>(k) * dy;
    const double m0 = node_slope(k) * dy, m1 = node_slope(k + 1) * dy;
    const double p0 = u[k], p1 = u[k + 1];
    auto cubic = [&](double s) {
        const double s2 = s * s, s3 = s2 * s;
        return (2 * s3 - 3 * s2 + 1) * p0 + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * p1 +
               (s3 - s2) * m1;
    };
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (cubic(mid) > theta ? lo : hi) = mid;
    }
    return (y0 + 0.5 * (lo + hi) * dy) * s.h;
}

/// ∫_0^h u dx + h / μ by the trapezoid rule on the grid; conserved when f(u) ≡ 0 and
/// the center is symmetric.
inline double stefan_invariant(const SolverState& s, double mu) {
    const std::size_t N = s.N();
    double sum = 0.5 * (s.u[0] + s.u[N]);
    for (std::size_t i = 1; i < N; ++i) sum += s.u[i];
    return s.h * sum / static_cast<double>(N) + s.h / mu;
}

/// Sample the datum on the grid and apply the degenerate-corner floor.
inline SolverState initial_state(const InitialDatum& datum, const SolverControls& c, double mu) {
    if (c.N < 4) throw DomainError("solver: N must be >= 4");
    SolverState s;
    s.t = c.t_start;
    s.h = datum.h0();
    s.u.resize(c.N + 1);
    for (std::size_t i = 0; i <= c.N; ++i) {
        const double x = datum.h0() * static_cast<double>(i) / static_cast<double>(c.N);
        s.u[i] = i == c.N ? 0.0 : datum(x);
        if (!std::isfinite(s.u[i]) || s.u[i] < 0.0) throw DomainError("initial datum must be finite and >= 0");
    }
    if (c.center == CenterCondition::dirichlet) s.u[0] = c.center_value;
    // u₀'(h₀) = 0 numerically: lift the last interior node to a monotone floor
    if (s.u[c.N - 1] <= 0.0) s.u[c.N - 1] = 0.5 * s.u[c.N - 2];
    s.hdot = solver_detail::stefan_speed(s.u, s.h, mu);
    return s;
}

/// Step size budget: min(c₁ Δx², c₂ Δx / |h'|), Δx = h / N.
inline double stable_dt(const SolverState& s, const SolverControls& c) {
    const double dx = s.h / static_cast<double>(s.N());
    double dt = c.c1 * dx * dx;
    if (std::fabs(s.hdot) > 0.0) dt = std::min(dt, c.c2 * dx / std::fabs(s.hdot));
    return dt;
}

/// Reusable work arrays for transform_step.
struct StepWorkspace {
    std::vector<double> rhs, pivot;
};

/// One semi-implicit step of size dt, in place. With `speed_guard` > 0 a step whose front
/// speed changes by more than that fraction is not committed and false is returned.
inline bool advance(SolverState& state, double dt, const CombustionNonlinearity& nl, double mu,
                    const SolverControls& c, StepWorkspace& ws, double speed_guard = 0.0) {
    const std::size_t N = state.N();
    if (N < 4) throw DomainError("transform_step: N must be >= 4");
    if (!(dt >= 0.0)) throw DomainError("transform_step: dt must be >= 0");
    if (dt == 0.0) return true;

    const double dy = 1.0 / static_cast<double>(N);
    const double h_n = state.h;
    const double hdot_n = solver_detail::stefan_speed(state.u, h_n, mu);
    const double h_pred = h_n + dt * hdot_n;
    const double lam = dt / (dy * dy * h_pred * h_pred);
    const double adv = hdot_n / h_n / (2.0 * dy);
    const bool dirichlet = c.center == CenterCondition::dirichlet;

    // explicit part; unknowns u_0 .. u_{N-1}, u_N = 0
    ws.rhs.resize(N);
    const auto& u = state.u;
    ws.rhs[0] = dirichlet ? c.center_value : u[0] + dt * nl.f_unchecked(std::max(u[0], 0.0));
    // Centered advection while the cell Péclet number y h' Δx stays below 2, first-order
    // upwind (information enters from the front side) beyond that.
    const double peclet_unit = hdot_n * h_n * dy;
    for (std::size_t i = 1; i < N; ++i) {
        const double ui = std::max(u[i], 0.0);
        const double y = static_cast<double>(i) * dy;
        const double grad = y * peclet_unit <= 2.0 ? u[i + 1] - u[i - 1] : 2.0 * (u[i + 1] - u[i]);
        ws.rhs[i] = u[i] + dt * (nl.f_unchecked(ui) + y * adv * grad);
    }

    // Elimination for the constant-coefficient matrix [-lam, 1 + 2 lam, -lam] with the
    // center row [1 + 2 lam, -2 lam] (symmetric) or [1, 0] (Dirichlet). Pivots converge
    // geometrically; only the unsettled prefix is stored, the rest share one value.
    const double d = 1.0 + 2.0 * lam;
    const double sup0 = dirichlet ? 0.0 : -2.0 * lam;
    ws.pivot.clear();
    double piv = dirichlet ? 1.0 : d;
    ws.pivot.push_back(1.0 / piv);
    for (std::size_t i = 1; i < N; ++i) {
        const double up = i == 1 ? sup0 : -lam;
        const double next = d + lam * up * ws.pivot.back();
        if (next == piv) break;
        piv = next;
        ws.pivot.push_back(1.0 / piv);
    }
    const std::size_t head = ws.pivot.size();
    const double inv_tail = ws.pivot.back();
    const double couple_tail = lam * inv_tail;
    auto inv_pivot = [&](std::size_t i) { return i < head ? ws.pivot[i] : inv_tail; };

    double* r = ws.rhs.data();
    double carry = r[0];
    for (std::size_t i = 1; i < std::min(head + 1, N); ++i) r[i] = carry = r[i] + lam * ws.pivot[i - 1] * carry;
    for (std::size_t i = head + 1; i < N; ++i) r[i] = carry = r[i] + couple_tail * carry;
    double below = r[N - 1] * inv_pivot(N - 1);
    r[N - 1] = below;
    for (std::size_t i = N - 1; i-- > 1;) {
        const double ip = inv_pivot(i);
        r[i] = below = (r[i] + lam * below) * ip;
    }
    r[0] = (r[0] - sup0 * below) * ws.pivot[0];

    const double t_next = state.t + dt;
    double umax = 0.0, umin = 0.0;
    bool finite = true;
    for (std::size_t i = 0; i < N; ++i) {
        umax = std::max(umax, r[i]);
        umin = std::min(umin, r[i]);
        finite &= std::isfinite(r[i]);
    }
    if (!finite) {
        std::size_t bad = 0;
        while (std::isfinite(r[bad])) ++bad;
        throw NumericalError("transform_step: non-finite value at node " + std::to_string(bad) +
                             " (t = " + std::to_string(t_next) + ", h = " + std::to_string(h_n) + ")");
    }
    if (umin < -c.negativity_tol * std::max(1.0, umax)) {
        const std::size_t bad = static_cast<std::size_t>(std::min_element(r, r + N) - r);
        throw NumericalError("transform_step: negative value " + std::to_string(umin) + " at node " +
                             std::to_string(bad) + " (t = " + std::to_string(t_next) + ")");
    }
    const double uy_front = (-4.0 * std::max(r[N - 1], 0.0) + std::max(r[N - 2], 0.0)) / (2.0 * dy);
    const double hdot_new = -mu * uy_front / h_pred;
    if (speed_guard > 0.0 && std::fabs(hdot_new - hdot_n) > speed_guard * std::fabs(hdot_n) + 1e-12)
        return false;
    for (std::size_t i = 0; i < N; ++i) state.u[i] = std::max(r[i], 0.0);
    state.u[N] = 0.0;

    const double speed_floor = -1e-10 * std::max(1.0, std::fabs(hdot_n));
    if (hdot_new < speed_floor)
        throw NumericalError("transform_step: front speed " + std::to_string(hdot_new) +
                             " < 0 at t = " + std::to_string(t_next));
    state.t = t_next;
    state.h = h_n + 0.5 * dt * (hdot_n + hdot_new);
    state.hdot = std::max(hdot_new, 0.0);
    return true;
}

/// One semi-implicit step of size dt; returns the new state.
inline SolverState transform_step(const SolverState& state, double dt, const CombustionNonlinearity& nl,
                                  double mu, const SolverControls& c) {
    SolverState next = state;
    StepWorkspace ws;
    advance(next, dt, nl, mu, c, ws);
    return next;
}

/// Called after each accepted step; return true to stop the run.
using StepMonitor = std::function<bool(const SolverState&)>;

inline TraceRow make_row(const SolverState& s, double theta) {
    return {s.t, s.h, s.hdot, s.u[0], theta_level(s, theta)};
}

/// Integrate from the datum to t_end (or until the monitor stops the run), recording trace
/// rows at t_k = t_first · r^k and snapshots at the requested times.
inline FrontTrace run(const InitialDatum& datum, const CombustionNonlinearity& nl, double mu, double t_end,
                      const SolverControls& c, const StepMonitor& monitor = {},
                      SolverState* final_state = nullptr) {
    if (!(mu > 0.0)) throw DomainError("run: mu must be > 0");
    if (!(c.trace_ratio > 1.0)) throw DomainError("run: trace ratio must be > 1");
    if (!(t_end > c.t_start)) throw DomainError("run: t_end must exceed t_start");

    FrontTrace trace;
    trace.meta = {mu, nl.theta(), nl.p(), nl.sigma(), c.N, c.c1, c.c2, c.trace_ratio, datum.h0(), datum.nu(), 0};
    SolverState s = initial_state(datum, c, mu);
    trace.rows.push_back(make_row(s, nl.theta()));

    double next_row = c.trace_first > 0.0 ? c.trace_first : (c.t_start > 0.0 ? c.t_start : 1e-2);
    while (next_row <= c.t_start) next_row *= c.trace_ratio;
    std::vector<double> snaps = c.snapshot_times;
    std::sort(snaps.begin(), snaps.end());
    std::size_t next_snap = 0;
    while (next_snap < snaps.size() && snaps[next_snap] < c.t_start) ++next_snap;
    if (next_snap < snaps.size() && snaps[next_snap] == c.t_start) trace.snapshots.push_back(s), ++next_snap;

    StepWorkspace ws;
    std::size_t steps = 0;
    bool stopped = false;
    while (s.t < t_end && !stopped) {
        double target = std::min(next_row, t_end);
        if (next_snap < snaps.size()) target = std::min(target, snaps[next_snap]);
        double dt = stable_dt(s, c);
        bool lands = false;
        if (s.t + dt >= target * (1.0 - 1e-14)) {
            dt = target - s.t;
            lands = true;
        }
        int halvings = 0;
        while (!advance(s, dt, nl, mu, c, ws, c.max_speed_change)) {
            dt *= 0.5;
            lands = false;
            if (++halvings > 40) throw NumericalError("run: front speed does not settle at t = " + std::to_string(s.t));
        }
        ++steps;
        if (lands) s.t = target;
        if (monitor && monitor(s)) stopped = true;
        if (lands && s.t == next_row) {
            trace.rows.push_back(make_row(s, nl.theta()));
            next_row *= c.trace_ratio;
        }
        if (next_snap < snaps.size() && s.t >= snaps[next_snap]) {
            trace.snapshots.push_back(s);
            ++next_snap;
        }
    }
    if (trace.rows.back().t < s.t) trace.rows.push_back(make_row(s, nl.theta()));
    trace.meta.steps = steps;
    if (final_state) *final_state = std::move(s);
    return trace;
}

}  // namespace stefan_lab
