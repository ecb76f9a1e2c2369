#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "stefan_lab/errors.hpp"
#include "stefan_lab/fbp_solver.hpp"
#include "stefan_lab/nonlinearity.hpp"
#include "stefan_lab/profiles.hpp"
#include "stefan_lab/special_functions.hpp"

namespace stefan_lab {

// ---------------------------------------------------------------------------
// Front deviation d(t) = h(t) - 2ξ₀√t and its power-law fit
// ---------------------------------------------------------------------------

struct DeviationPoint {
    double t;
    double d;
};

inline std::vector<DeviationPoint> front_deviation(const FrontTrace& trace, double xi0, double t_min = 0.0) {
    std::vector<DeviationPoint> out;
    for (const auto& r : trace.rows)
        if (r.t > 0.0 && r.t >= t_min) out.push_back({r.t, r.h - 2.0 * xi0 * std::sqrt(r.t)});
    return out;
}

/// Proven exponent band for the deviation: (1/2 - 1/(p-1), 1/2 - 1/(p+1)) for p > 3;
/// for p ≤ 3 the lower end is 0 (bounded from below).
struct ExponentBounds {
    double lo;
    double hi;
};

inline ExponentBounds deviation_exponent_bounds(double p) {
    if (!(p >= 1.0)) throw DomainError("deviation_exponent_bounds: p must be >= 1");
    if (p > 3.0) return {0.5 - 1.0 / (p - 1.0), 0.5 - 1.0 / (p + 1.0)};
    return {0.0, p == 1.0 ? 0.0 : 0.5 - 1.0 / (p + 1.0)};
}

struct DeviationFit {
    double t_a = 0.0;
    double t_b = 0.0;
    double alpha = 0.0;
    double amplitude = 0.0;
    double r2 = 0.0;
    std::size_t rows = 0;
    ExponentBounds bounds{0.0, 0.0};
    bool fitted = false;
    bool nonpositive = false;  ///< some d ≤ 0 in the window
    std::string note;
};

struct FitWindow {
    double decades = 1.0;          ///< window = [t_b / 10^decades, t_b]
    std::size_t min_rows = 20;
    std::optional<double> t_end;   ///< defaults to the last series time
};

/// Least-squares slope of log d against log t over the last decade of the series.
inline DeviationFit fit_exponent(const std::vector<DeviationPoint>& series, double p, const FitWindow& w = {}) {
    DeviationFit fit;
    fit.bounds = deviation_exponent_bounds(p);
    if (series.empty()) {
        fit.note = "empty series";
        return fit;
    }
    fit.t_b = w.t_end.value_or(series.back().t);
    fit.t_a = fit.t_b / std::pow(10.0, w.decades);
    std::vector<DeviationPoint> win;
    for (const auto& s : series)
        if (s.t >= fit.t_a && s.t <= fit.t_b) win.push_back(s);
    fit.rows = win.size();
    if (win.size() < w.min_rows) {
        fit.note = "window holds " + std::to_string(win.size()) + " rows, need " + std::to_string(w.min_rows);
        return fit;
    }
    for (const auto& s : win)
        if (!(s.d > 0.0)) fit.nonpositive = true;
    if (fit.nonpositive) {
        fit.note = "non-positive deviation in window";
        return fit;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    const double n = static_cast<double>(win.size());
    for (const auto& s : win) {
        const double x = std::log(s.t), y = std::log(s.d);
        sx += x, sy += y, sxx += x * x, sxy += x * y, syy += y * y;
    }
    const double vx = sxx - sx * sx / n;
    const double vy = syy - sy * sy / n;
    const double cxy = sxy - sx * sy / n;
    if (!(vx > 0.0)) {
        fit.note = "degenerate time window";
        return fit;
    }
    fit.alpha = cxy / vx;
    fit.amplitude = std::exp((sy - fit.alpha * sx) / n);
    fit.r2 = vy > 0.0 ? cxy * cxy / (vx * vy) : 1.0;
    fit.fitted = true;
    return fit;
}

// ---------------------------------------------------------------------------
// Barrier certification by dense sampling
// ---------------------------------------------------------------------------

struct ConditionMargin {
    std::string name;
    double margin = std::numeric_limits<double>::infinity();  ///< minimum over the samples
    double scale = 0.0;       ///< size of the terms at the minimizing sample
    std::size_t samples = 0;
    bool evaluated = false;
    std::string note;

    void add(double m, double s) {
        ++samples;
        evaluated = true;
        if (m < margin) {
            margin = m;
            scale = s;
        }
    }
    /// Nonnegative up to rounding of the sampled terms.
    bool pass(double rel_tol) const { return !evaluated || margin >= -rel_tol * std::max(scale, 1e-300); }
};

struct BarrierReport {
    std::string kind;  ///< "super", "sub-p>3", "sub-p<=3"
    std::vector<ConditionMargin> conditions;
    std::size_t ordering_checked = 0;
    std::size_t ordering_violations = 0;
    double ordering_margin = std::numeric_limits<double>::infinity();
    std::vector<std::pair<std::string, double>> parameters;
    double rel_tol = 1e-12;

    bool margins_ok() const {
        return std::all_of(conditions.begin(), conditions.end(), [&](const auto& c) { return c.pass(rel_tol); });
    }
    bool pass() const { return margins_ok() && ordering_violations == 0; }
};

struct BarrierGrid {
    std::size_t nt = 400;
    std::size_t nx = 400;
    double t_end = 1e6;
};

/// Numerical solution a barrier is compared against.
struct BarrierEvidence {
    const FrontTrace* trace = nullptr;
    const SolverState* snapshot = nullptr;  ///< state at the barrier's start time T0
    const InitialDatum* datum = nullptr;    ///< initial profile (p ≤ 3 condition 03)
};

namespace barrier_detail {

inline std::vector<double> log_times(double t0, double t1, std::size_t n) {
    if (!(t0 > 0.0 && t1 > t0) || n < 2) throw DomainError("barrier grid: need 0 < t0 < t_end and >= 2 points");
    std::vector<double> ts(n);
    for (std::size_t k = 0; k < n; ++k)
        ts[k] = t0 * std::pow(t1 / t0, static_cast<double>(k) / static_cast<double>(n - 1));
    return ts;
}

inline double E_prime(double z) { return 2.0 / std::sqrt(std::numbers::pi) * std::exp(-z * z); }

// u at physical position x from a front-fixed state (linear interpolation, 0 beyond h)
inline double state_value(const SolverState& s, double x) {
    if (x >= s.h) return 0.0;
    const double y = x / s.h * static_cast<double>(s.N());
    const std::size_t i = std::min(static_cast<std::size_t>(y), s.N() - 1);
    const double w = y - static_cast<double>(i);
    return (1.0 - w) * s.u[i] + w * s.u[i + 1];
}

inline double trace_end(const BarrierEvidence& ev, const BarrierGrid& g) {
    return ev.trace && !ev.trace->rows.empty() ? ev.trace->rows.back().t : g.t_end;
}

}  // namespace barrier_detail

/// K, M of the upper barrier read off a trace: K = max θ(t)/t^{1/2-1/(p+1)} over t ≥ T0 and
/// M = margin · max(K, T0^{1/(p+1)-1/2} h(T0)).
struct SuperConstants {
    double K;
    double M;
};

inline SuperConstants super_constants_from_trace(const FrontTrace& tr, double p, double T0, double margin = 1.05) {
    if (!(p > 1.0)) throw DomainError("super_constants_from_trace: p must be > 1");
    const double e = 0.5 - 1.0 / (p + 1.0);
    double K = 0.0;
    for (const auto& r : tr.rows)
        if (r.t >= T0 && r.theta_pos) K = std::max(K, *r.theta_pos / std::pow(r.t, e));
    const double hT0 = tr.h_at(T0);
    return {K, margin * std::max(K, std::pow(T0, -e) * hT0)};
}

/// Upper barrier ū(t,x) = ρ(t, x - ξ(t)), h̄ = ξ + r, ξ = M t^{1/2-1/(p+1)}: conditions 6-11.
inline BarrierReport supersolution_certify(const CombustionNonlinearity& nl, double mu, double xi0, double M,
                                           double T0, const BarrierGrid& grid = {}, const BarrierEvidence& ev = {}) {
    const double p = nl.p();
    if (!(p > 1.0)) throw DomainError("supersolution_certify: requires p > 1");
    if (!(M > 0.0) || !(T0 > 0.0)) throw DomainError("supersolution_certify: M, T0 must be > 0");
    const double theta = nl.theta();
    const StefanSimilarity rho(theta, xi0);
    const double e = 0.5 - 1.0 / (p + 1.0);
    auto xi = [&](double t) { return M * std::pow(t, e); };
    auto xi_dot = [&](double t) { return M * (p - 1.0) / (2.0 * (p + 1.0)) * std::pow(t, -(p + 3.0) / (2.0 * (p + 1.0))); };
    auto hbar = [&](double t) { return xi(t) + rho.front(t); };

    BarrierReport rep;
    rep.kind = "super";
    rep.parameters = {{"M", M}, {"T0", T0}, {"xi0", xi0}};
    ConditionMargin c6{"6"}, c7{"7"}, c8{"8"}, c9{"9"}, c10{"10"}, c11{"11"};

    // (6): h̄(T0) ≥ ξ(T0) > h(T0)
    c6.add(hbar(T0) - xi(T0), hbar(T0));
    if (ev.trace) {
        const double hT0 = ev.trace->h_at(T0);
        c6.add(xi(T0) - hT0, xi(T0));
    } else {
        c6.note = "h(T0) not available; only the first inequality checked";
    }
    // (7): ū(T0, ·) ≥ 0 on [ξ, h̄], sampled uniformly in z = (x - ξ) / 2√T0
    for (std::size_t j = 0; j <= grid.nx; ++j)
        c7.add(rho.value_z(xi0 * static_cast<double>(j) / static_cast<double>(grid.nx)), theta);

    const auto ts = barrier_detail::log_times(T0, std::max(barrier_detail::trace_end(ev, grid), T0 * 10.0), grid.nt);
    for (double t : ts) {
        const double xt = xi(t), hb = hbar(t), xd = xi_dot(t);
        // (8): ū(t, ξ) = θ ≥ u(t, ξ) when ξ ≤ h; uses θ(t) ≤ ξ(t) and monotone profiles
        if (ev.trace && t <= ev.trace->rows.back().t) {
            const double h = ev.trace->h_at(t);
            if (xt > h) {
                c8.add(rho.value(t, 0.0), theta);
            } else {
                const auto it = std::lower_bound(ev.trace->rows.begin(), ev.trace->rows.end(), t,
                                                 [](const TraceRow& r, double v) { return r.t < v; });
                if (it != ev.trace->rows.end() && it->theta_pos) c8.add(xt - *it->theta_pos, xt);
            }
        } else {
            c8.add(rho.value(t, 0.0), theta);
        }
        // (9): ū(t, h̄) = 0
        c9.add(-std::fabs(rho.value_z(xi0)), theta);
        // (10): h̄' + μ ū_x(t, h̄) ≥ 0
        const double flux = -mu * rho.dx(t, hb - xt);
        c10.add(rho.front_speed(t) + xd - flux, flux);
        // (11): ū_t - ū_xx - f(ū) ≥ 0 on (ξ, h̄)
        for (std::size_t j = 1; j < grid.nx; ++j) {
            const double x = xt + (hb - xt) * static_cast<double>(j) / static_cast<double>(grid.nx);
            const double s = x - xt;
            const double ut = rho.dt(t, s) - xd * rho.dx(t, s);
            const double uxx = rho.dxx(t, s);
            const double fu = nl.f(std::max(0.0, rho.value(t, s)));
            c11.add(ut - uxx - fu, std::fabs(rho.dt(t, s)) + std::fabs(uxx) + fu);
        }
    }
    rep.conditions = {c6, c7, c8, c9, c10, c11};

    if (ev.trace) {
        for (const auto& r : ev.trace->rows) {
            if (r.t < T0) continue;
            ++rep.ordering_checked;
            const double m = hbar(r.t) - r.h;
            rep.ordering_margin = std::min(rep.ordering_margin, m);
            if (!(m > 0.0)) ++rep.ordering_violations;
        }
    }
    return rep;
}

/// Parameters of the p > 3 lower barrier. a = γ of a Haraux–Weissler profile.
struct SubBarrierParams {
    double a = 0.0;
    double T = 1.0;
    double T0 = 1.0;
    double b = 0.0;      ///< 0 selects half the admissible maximum
    double eps = 1e-3;

    double b_max(double p, double sigma) const {
        return std::min(a * std::pow(T / (T + T0), 1.0 / (p - 1.0)), sigma * std::pow(T, 1.0 / (p - 1.0)));
    }
};

/// Lower barrier u̲ = (θ + ξ)(1 - E(x/2√t)/E(β)), h̲ = 2β√t, ξ = b(t+T)^{-1/(p-1)}: conditions 1-5.
inline BarrierReport subsolution_certify_p_gt_3(const CombustionNonlinearity& nl, double mu, SubBarrierParams prm,
                                                const BarrierGrid& grid = {}, const BarrierEvidence& ev = {}) {
    const double p = nl.p(), theta = nl.theta();
    if (!(p > 3.0)) throw DomainError("subsolution_certify_p_gt_3: requires p > 3");
    if (!(prm.a > 0.0 && prm.T > 0.0 && prm.T0 > 0.0 && prm.eps > 0.0))
        throw DomainError("subsolution_certify_p_gt_3: a, T, T0, eps must be > 0");
    const double bmax = prm.b_max(p, nl.sigma());
    if (prm.b == 0.0) prm.b = 0.5 * bmax;
    if (!(prm.b > 0.0 && prm.b < bmax))
        throw DomainError("subsolution_certify_p_gt_3: b must lie in (0, " + std::to_string(bmax) + ")");
    const double q = 1.0 / (p - 1.0);
    auto xi = [&](double t) { return prm.b * std::pow(t + prm.T, -q); };
    auto xi_dot = [&](double t) { return -prm.b * q * std::pow(t + prm.T, -q - 1.0); };
    auto beta = [&](double t) { return solve_beta(mu, theta, xi(t)); };
    auto beta_dot = [&](double t, double bt) { return mu * xi_dot(t) / Phi_prime(bt); };
    auto ubar = [&](double t, double x, double bt) {
        return (theta + xi(t)) * (1.0 - E(x / (2.0 * std::sqrt(t))) / E(bt));
    };
    auto hbar = [&](double t) { return 2.0 * beta(t) * std::sqrt(t); };

    BarrierReport rep;
    rep.kind = "sub-p>3";
    rep.parameters = {{"a", prm.a}, {"T", prm.T}, {"T0", prm.T0}, {"b", prm.b}, {"eps", prm.eps}};
    ConditionMargin c1{"1"}, c2{"2"}, c3{"3"}, c4{"4"}, c5{"5"};

    const auto ts = barrier_detail::log_times(prm.eps, std::max(barrier_detail::trace_end(ev, grid), 10.0), grid.nt);
    for (double t : ts) {
        const double bt = beta(t), bd = beta_dot(t, bt);
        const double A = theta + xi(t), xd = xi_dot(t);
        const double Eb = E(bt), Ebp = barrier_detail::E_prime(bt);
        const double sq = std::sqrt(t), hb = 2.0 * bt * sq;
        // (1): u̲_t - u̲_xx - f(u̲) ≤ 0 on (0, h̲), from the separate derivatives
        for (std::size_t j = 0; j < grid.nx; ++j) {
            const double x = hb * static_cast<double>(j) / static_cast<double>(grid.nx);
            const double z = x / (2.0 * sq);
            const double Ez = E(z), Ezp = barrier_detail::E_prime(z);
            const double ut = xd * (1.0 - Ez / Eb) - A * (Ezp * (-z / (2.0 * t)) / Eb - Ez * Ebp * bd / (Eb * Eb));
            const double uxx = -A * (-2.0 * z * Ezp) / (4.0 * t * Eb);
            const double u = A * (1.0 - Ez / Eb);
            const double fu = nl.f(std::max(0.0, u));
            c1.add(-(ut - uxx - fu), std::fabs(ut) + std::fabs(uxx) + fu);
        }
        // (2): u̲(t, h̲) = 0
        c2.add(-std::fabs(A * (1.0 - E(bt) / Eb)), A);
        // (5): -μ u̲_x(t, h̲) - h̲' = -2β'√t
        const double flux = mu * A * Ebp / (2.0 * sq * Eb);
        const double hdot = 2.0 * bd * sq + bt / sq;
        c5.add(flux - hdot, flux);
        // (4): u̲(t, 0) ≤ u(t - ε + T0, 0)
        if (ev.trace) {
            const double ts4 = t - prm.eps + prm.T0;
            if (ts4 <= ev.trace->rows.back().t) c4.add(ev.trace->u0_at(ts4) - A, A);
        }
    }
    if (!ev.trace) c4.note = "no trace; decay bound of the self-similar barrier assumed";
    // (3): h̲(ε) ≤ h(T0) and u̲(ε, x) ≤ u(T0, x) on [0, h̲(ε)]
    if (ev.snapshot) {
        const SolverState& s = *ev.snapshot;
        const double be = beta(prm.eps), he = hbar(prm.eps);
        c3.add(s.h - he, s.h);
        for (std::size_t j = 0; j <= grid.nx; ++j) {
            const double x = he * static_cast<double>(j) / static_cast<double>(grid.nx);
            c3.add(barrier_detail::state_value(s, x) - ubar(prm.eps, x, be), theta);
        }
    } else if (ev.trace) {
        // the profile is decreasing, so u(T0, x) ≥ u(T0, h̲(ε)) is unknown without a snapshot;
        // fall back to the centre value and the front
        c3.add(ev.trace->h_at(prm.T0) - hbar(prm.eps), hbar(prm.eps));
        c3.note = "no snapshot at T0; only h(T0) checked";
    } else {
        c3.note = "no solution data";
    }
    rep.conditions = {c1, c2, c3, c4, c5};

    // ordering: h(s) ≥ h̲(s + ε - T0) for s ≥ T0
    if (ev.trace) {
        for (const auto& r : ev.trace->rows) {
            const double tb = r.t + prm.eps - prm.T0;
            if (r.t < prm.T0 || tb < prm.eps) continue;
            ++rep.ordering_checked;
            const double m = r.h - hbar(tb);
            rep.ordering_margin = std::min(rep.ordering_margin, m);
            if (m < 0.0) ++rep.ordering_violations;
        }
    }
    return rep;
}

/// Lower barrier u̲ = ρ, h̲ = 2ξ₀√t for 1 ≤ p ≤ 3: conditions 01-05.
inline BarrierReport subsolution_certify_p_le_3(const CombustionNonlinearity& nl, double mu, double xi0,
                                                double eps = 1e-3, const BarrierGrid& grid = {},
                                                const BarrierEvidence& ev = {}) {
    const double p = nl.p(), theta = nl.theta();
    if (!(p >= 1.0 && p <= 3.0)) throw DomainError("subsolution_certify_p_le_3: requires 1 <= p <= 3");
    if (!(eps > 0.0)) throw DomainError("subsolution_certify_p_le_3: eps must be > 0");
    const StefanSimilarity rho(theta, xi0);

    BarrierReport rep;
    rep.kind = "sub-p<=3";
    rep.parameters = {{"xi0", xi0}, {"eps", eps}};
    ConditionMargin c1{"01"}, c2{"02"}, c3{"03"}, c4{"04"}, c5{"05"};
    const auto ts = barrier_detail::log_times(eps, std::max(barrier_detail::trace_end(ev, grid), 10.0), grid.nt);
    for (double t : ts) {
        const double hb = rho.front(t);
        for (std::size_t j = 0; j < grid.nx; ++j) {
            const double x = hb * static_cast<double>(j) / static_cast<double>(grid.nx);
            const double fu = nl.f(std::max(0.0, rho.value(t, x)));
            c1.add(-(rho.dt(t, x) - rho.dxx(t, x) - fu), std::fabs(rho.dt(t, x)) + fu);
        }
        c2.add(-std::fabs(rho.value_z(xi0)), theta);
        const double flux = -mu * rho.dx(t, hb);
        c5.add(flux - rho.front_speed(t), flux);
        if (ev.trace && t - eps <= ev.trace->rows.back().t) c4.add(ev.trace->u0_at(t - eps) - theta, theta);
    }
    if (!ev.trace) c4.note = "no trace";
    if (ev.datum) {
        const double he = rho.front(eps);
        c3.add(ev.datum->h0() - he, ev.datum->h0());
        for (std::size_t j = 0; j <= grid.nx; ++j) {
            const double x = std::min(he, ev.datum->h0()) * static_cast<double>(j) / static_cast<double>(grid.nx);
            c3.add((*ev.datum)(x) - rho.value(eps, x), theta);
        }
    } else {
        c3.note = "no initial datum";
    }
    rep.conditions = {c1, c2, c3, c4, c5};
    if (ev.trace) {
        for (const auto& r : ev.trace->rows) {
            if (r.t <= 0.0) continue;
            ++rep.ordering_checked;
            const double m = r.h - rho.front(r.t + eps);
            rep.ordering_margin = std::min(rep.ordering_margin, m);
            if (m < 0.0) ++rep.ordering_violations;
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Level-set bound θ(t) ≤ l(b(t)), h(t) = L(b(t))
// ---------------------------------------------------------------------------

struct ThetaBoundReport {
    std::size_t rows_total = 0;
    std::size_t rows_checked = 0;
    std::size_t rows_skipped_range = 0;  ///< h(t) ≤ L(σ₁)
    std::size_t rows_skipped_absent = 0;
    std::size_t violations = 0;
    double worst_margin = std::numeric_limits<double>::infinity();
    double L_sigma1 = 0.0;
    DeviationFit theta_growth;        ///< fit of θ(t) over the last decade
    double theta_exponent_bound = 0.0; ///< 1/2 - 1/(p+1)
    std::optional<double> b_decay;     ///< fitted exponent of b(t), when enough rows were checked
};

inline ThetaBoundReport theta_bound_check(const FrontTrace& tr, const CombustionNonlinearity& nl,
                                          double tol = 1e-6, std::optional<double> sigma1 = {},
                                          double t_min = 1.0) {
    ThetaBoundReport rep;
    const double s1 = sigma1.value_or(nl.sigma() / 2.0);
    rep.L_sigma1 = L_of_b(nl, s1);
    rep.theta_exponent_bound = 0.5 - 1.0 / (nl.p() + 1.0);
    std::vector<DeviationPoint> theta_series, b_series;
    for (const auto& r : tr.rows) {
        if (r.t < t_min) continue;
        ++rep.rows_total;
        if (!r.theta_pos) {
            ++rep.rows_skipped_absent;
            continue;
        }
        if (*r.theta_pos > 0.0) theta_series.push_back({r.t, *r.theta_pos});
        if (!(r.h > rep.L_sigma1)) {
            ++rep.rows_skipped_range;
            continue;
        }
        const double b = invert_L(nl, r.h, s1);
        const double l = l_quadrature(nl, b);
        const double m = l + tol - *r.theta_pos;
        ++rep.rows_checked;
        rep.worst_margin = std::min(rep.worst_margin, m);
        if (m < 0.0) ++rep.violations;
        b_series.push_back({r.t, b});
    }
    rep.theta_growth = fit_exponent(theta_series, nl.p());
    if (b_series.size() >= 20) {
        const auto bf = fit_exponent(b_series, nl.p(), {std::log10(b_series.back().t / b_series.front().t), 20, {}});
        if (bf.fitted) rep.b_decay = bf.alpha;
    }
    return rep;
}

}  // namespace stefan_lab
