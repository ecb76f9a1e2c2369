#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "stefan_lab/errors.hpp"
#include "stefan_lab/nonlinearity.hpp"
#include "stefan_lab/ode.hpp"
#include "stefan_lab/quadrature.hpp"

namespace stefan_lab {

// ---------------------------------------------------------------------------
// Stationary profiles V'' + f(V) = 0, V(0) = θ + b, V'(0) = 0.
//
// With s = V - θ the energy identity gives V'² = G(b) - G(s), so the position at
// which V reaches θ + s is x(s) = ∫_s^b ds' / √(G(b) - G(s')). All quadratures use
// s = b(1 - w²), which turns the inverse-square-root endpoint singularity at s = b
// into a bounded integrand on w ∈ [0, 1].
// ---------------------------------------------------------------------------

namespace profile_detail {

inline void check_amplitude(const CombustionNonlinearity& nl, double b) {
    if (!(b > 0.0 && b < 1.0 - nl.theta()))
        throw DomainError("profile amplitude b must lie in (0, 1 - theta)");
}

// G(b) - G(b(1 - w²)), using w directly inside the germ to avoid forming 1 - w².
inline double energy_gap(const CombustionNonlinearity& nl, double b, double w) {
    if (b < nl.sigma()) {
        const double q = nl.p() + 1.0;
        return 2.0 / q * std::pow(b, q) * -std::expm1(q * std::log1p(-w * w));
    }
    return nl.G_gap(b, b * w * w);
}

// dx/dw along the profile.
inline double position_density(const CombustionNonlinearity& nl, double b, double w) {
    if (w < 1e-7) return std::sqrt(2.0 * b / nl.f_unchecked(nl.theta() + b));
    return 2.0 * b * w / std::sqrt(energy_gap(nl, b, w));
}

template <class F>
double relative_simpson(F&& fn, double a, double c, double rel_tol) {
    const double rough = quadrature::trapezoid(fn, a, c, 32);
    return quadrature::adaptive_simpson(fn, a, c, rel_tol * std::max(std::fabs(rough), 1e-300), 16);
}

}  // namespace profile_detail

/// C_p = √((p+1)/2) ∫_0^1 dx / √(1 - x^{p+1}); C_1 = π/2.
inline double C_p(double p) {
    if (!(p >= 1.0)) throw DomainError("C_p: p must be >= 1");
    const double q = p + 1.0;
    // x = 1 - w²: dx/√(1 - x^q) = 2w dw / √(1 - (1 - w²)^q)
    auto integrand = [q](double w) {
        if (w < 1e-7) return 2.0 / std::sqrt(q);
        return 2.0 * w / std::sqrt(-std::expm1(q * std::log1p(-w * w)));
    };
    return std::sqrt(q / 2.0) * profile_detail::relative_simpson(integrand, 0.0, 1.0, 1e-13);
}

/// Half-width l(b) at which V_b reaches θ, by desingularized quadrature.
inline double l_quadrature(const CombustionNonlinearity& nl, double b) {
    profile_detail::check_amplitude(nl, b);
    return profile_detail::relative_simpson(
        [&](double w) { return profile_detail::position_density(nl, b, w); }, 0.0, 1.0, 1e-12);
}

/// Germ closed form C_p b^{-(p-1)/2} (π/2 for p = 1); valid for b < σ.
inline double l_closed(const CombustionNonlinearity& nl, double b) {
    if (nl.p() == 1.0) return std::numbers::pi / 2.0;
    return C_p(nl.p()) * std::pow(b, -(nl.p() - 1.0) / 2.0);
}

/// Zero of V_b: L(b) = l(b) + θ / √G(b).
inline double L_of_b(const CombustionNonlinearity& nl, double b) {
    profile_detail::check_amplitude(nl, b);
    return l_quadrature(nl, b) + nl.theta() / std::sqrt(nl.G(b));
}

/// Germ closed form of L(b); valid for b < σ.
inline double L_closed(const CombustionNonlinearity& nl, double b) {
    const double p = nl.p();
    return l_closed(nl, b) + std::sqrt((p + 1.0) / 2.0) * nl.theta() * std::pow(b, -(p + 1.0) / 2.0);
}

/// Unique b ∈ (0, σ₁) with L(b) = h. σ₁ defaults to σ/2.
inline double invert_L(const CombustionNonlinearity& nl, double h, std::optional<double> sigma1 = {}) {
    const double s1 = sigma1.value_or(nl.sigma() / 2.0);
    if (!(s1 > 0.0 && s1 < nl.sigma())) throw DomainError("invert_L: sigma1 must lie in (0, sigma)");
    const double L_top = L_of_b(nl, s1);
    if (!(h > L_top))
        throw DomainError("invert_L: width " + std::to_string(h) + " not above L(sigma1) = " +
                          std::to_string(L_top));
    double hi = s1;  // L(hi) < h
    double lo = s1 / 2.0;
    while (L_of_b(nl, lo) < h) {
        hi = lo;
        lo /= 2.0;
        if (lo < 1e-300) throw NumericalError("invert_L: could not bracket");
    }
    // geometric bisection; L is monotone so the bracket is always valid
    for (int it = 0; it < 200 && hi / lo - 1.0 > 1e-15; ++it) {
        const double mid = std::sqrt(lo * hi);
        (L_of_b(nl, mid) > h ? lo : hi) = mid;
    }
    return std::sqrt(lo * hi);
}

/// Tabulated V_b with l, L and exact point evaluation.
class PhasePlaneProfile {
public:
    struct Sample {
        double x;
        double V;
    };

    PhasePlaneProfile(CombustionNonlinearity nl, double b, std::size_t nodes = 400)
        : nl_(std::move(nl)), b_(b) {
        profile_detail::check_amplitude(nl_, b_);
        if (nodes < 4) throw DomainError("solve_Vb: need at least 4 nodes");
        w_nodes_.resize(nodes + 1);
        x_nodes_.resize(nodes + 1);
        double x = 0.0;
        for (std::size_t k = 0; k <= nodes; ++k) {
            const double w = static_cast<double>(k) / static_cast<double>(nodes);
            if (k > 0) x += segment(w_nodes_[k - 1], w);
            w_nodes_[k] = w;
            x_nodes_[k] = x;
        }
        l_ = x_nodes_.back();
        slope_ = -std::sqrt(nl_.G(b_));
        L_ = l_ - nl_.theta() / slope_;

        samples_.reserve(nodes + 1 + nodes / 4);
        for (std::size_t k = 0; k <= nodes; ++k)
            samples_.push_back({x_nodes_[k], nl_.theta() + b_ * (1.0 - w_nodes_[k] * w_nodes_[k])});
        const std::size_t tail = std::max<std::size_t>(nodes / 4, 2);
        for (std::size_t k = 1; k <= tail; ++k) {
            const double xk = l_ + (L_ - l_) * static_cast<double>(k) / static_cast<double>(tail);
            samples_.push_back({xk, k == tail ? 0.0 : nl_.theta() + slope_ * (xk - l_)});
        }
    }

    double b() const noexcept { return b_; }
    double l() const noexcept { return l_; }
    double L() const noexcept { return L_; }
    double theta() const noexcept { return nl_.theta(); }
    /// V_b' on [l, L] (constant, equals -√G(b)).
    double linear_slope() const noexcept { return slope_; }
    const std::vector<Sample>& samples() const noexcept { return samples_; }
    const CombustionNonlinearity& nonlinearity() const noexcept { return nl_; }

    /// V_b(x) for x ∈ [0, L], exact up to quadrature tolerance.
    double value_at(double x) const {
        if (!(x >= 0.0 && x <= L_ * (1.0 + 1e-14))) throw DomainError("value_at: x outside [0, L]");
        if (x >= l_) return std::max(0.0, nl_.theta() + slope_ * (x - l_));
        const double w = w_at(x);
        return nl_.theta() + b_ * (1.0 - w * w);
    }

    /// V_b'(x) = -√(G(b) - G(V - θ)) on [0, l], the constant slope beyond.
    double derivative_at(double x) const {
        if (x >= l_) return slope_;
        const double w = w_at(x);
        return -std::sqrt(profile_detail::energy_gap(nl_, b_, w));
    }

private:
    double segment(double w0, double w1) const {
        return profile_detail::relative_simpson(
            [this](double w) { return profile_detail::position_density(nl_, b_, w); }, w0, w1, 1e-13);
    }

    // Newton in w on x(w) = x_k + ∫_{w_k}^{w} dx/dw, safeguarded by the node bracket.
    double w_at(double x) const {
        const auto it = std::upper_bound(x_nodes_.begin(), x_nodes_.end(), x);
        const std::size_t k = it == x_nodes_.begin() ? 0 : static_cast<std::size_t>(it - x_nodes_.begin()) - 1;
        if (k + 1 >= x_nodes_.size()) return 1.0;
        double lo = w_nodes_[k], hi = w_nodes_[k + 1];
        double w = lo + (hi - lo) * (x - x_nodes_[k]) / (x_nodes_[k + 1] - x_nodes_[k]);
        for (int it2 = 0; it2 < 60; ++it2) {
            const double r = x_nodes_[k] + (w > w_nodes_[k] ? segment(w_nodes_[k], w) : 0.0) - x;
            if (std::fabs(r) <= 1e-15 * std::max(1.0, l_)) break;
            (r > 0 ? hi : lo) = w;
            double next = w - r / profile_detail::position_density(nl_, b_, w);
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            if (std::fabs(next - w) < 1e-16) break;
            w = next;
        }
        return w;
    }

    CombustionNonlinearity nl_;
    double b_;
    double l_ = 0.0;
    double L_ = 0.0;
    double slope_ = 0.0;
    std::vector<double> w_nodes_;
    std::vector<double> x_nodes_;
    std::vector<Sample> samples_;
};

inline PhasePlaneProfile solve_Vb(const CombustionNonlinearity& nl, double b, std::size_t nodes = 400) {
    return PhasePlaneProfile(nl, b, nodes);
}

// ---------------------------------------------------------------------------
// Self-similar profile of v_t = v_xx + |v|^{p-1} v:
//   φ'' + (y/2) φ' + φ/(p-1) + |φ|^{p-1} φ = 0,  φ(0) = γ, φ'(0) = 0,
// v(t, x) = t^{-1/(p-1)} φ(x / √t).
// ---------------------------------------------------------------------------

/// Upper admissible amplitude ((p-3) / (2(p-1)))^{1/(p-1)} for p > 3.
inline double hw_admissible_bound(double p) {
    if (!(p > 3.0)) throw DomainError("Haraux-Weissler profile needs p > 3");
    return std::pow((p - 3.0) / (2.0 * (p - 1.0)), 1.0 / (p - 1.0));
}

struct HarauxWeisslerOptions {
    double rel_tol = 1e-10;
    double retry_tol = 1e-12;
    double y_max = 50.0;
    double y_cap = 200.0;
    double decay_floor = 1e-12;
};

class SelfSimilarProfile {
public:
    struct Sample {
        double y;
        double phi;
        double dphi;
    };

    double p() const noexcept { return p_; }
    double gamma() const noexcept { return gamma_; }
    double y_max() const noexcept { return y_max_; }
    bool positivity_verified() const noexcept { return positivity_verified_; }
    const std::vector<Sample>& samples() const noexcept { return samples_; }

    /// ODE right-hand side for (φ, φ').
    static ode::State<2> rhs(double p, double y, const ode::State<2>& s) {
        const double phi = s[0];
        const double power = std::pow(std::fabs(phi), p - 1.0) * phi;
        return {s[1], -phi / (p - 1.0) - 0.5 * y * s[1] - power};
    }

    /// (φ(y), φ'(y)) by a short fixed-step RK4 hop from the nearest stored node.
    ode::State<2> state_at(double y) const {
        if (!(y >= 0.0 && y <= y_max_)) throw DomainError("SelfSimilarProfile: y outside [0, y_max]");
        auto it = std::upper_bound(samples_.begin(), samples_.end(), y,
                                   [](double v, const Sample& s) { return v < s.y; });
        const Sample& s = *(it == samples_.begin() ? it : std::prev(it));
        const double span = y - s.y;
        if (span == 0.0) return {s.phi, s.dphi};
        const auto steps = static_cast<std::size_t>(std::ceil(std::fabs(span) / 1e-3)) + 1;
        const double pp = p_;
        return ode::rk4_fixed<2>([pp](double yy, const ode::State<2>& st) { return rhs(pp, yy, st); },
                                 {s.phi, s.dphi}, s.y, y, steps);
    }
    double value_at(double y) const { return state_at(y)[0]; }

    /// v(t, x) = t^{-1/(p-1)} φ(|x| / √t).
    double similarity_value(double t, double x) const {
        return std::pow(t, -1.0 / (p_ - 1.0)) * value_at(std::fabs(x) / std::sqrt(t));
    }

private:
    friend SelfSimilarProfile haraux_weissler(double, double, const HarauxWeisslerOptions&);

    double p_ = 0.0;
    double gamma_ = 0.0;
    double y_max_ = 0.0;
    bool positivity_verified_ = false;
    std::vector<Sample> samples_;
};

inline SelfSimilarProfile haraux_weissler(double p, double gamma, const HarauxWeisslerOptions& opt = {}) {
    const double bound = hw_admissible_bound(p);
    if (!(gamma > 0.0 && gamma < bound))
        throw DomainError("haraux_weissler: gamma must lie in (0, " + std::to_string(bound) + ")");

    auto attempt = [&](double tol) {
        SelfSimilarProfile prof;
        prof.p_ = p;
        prof.gamma_ = gamma;
        bool positive = true;
        ode::AdaptiveOptions ao;
        ao.rel_tol = tol;
        ao.abs_tol = tol * 1e-2;
        ao.max_step = 0.1;
        ode::State<2> y{gamma, 0.0};
        auto rhs = [p](double yy, const ode::State<2>& s) { return SelfSimilarProfile::rhs(p, yy, s); };
        auto observer = [&](double yy, const ode::State<2>& s) {
            if (!(s[0] > 0.0)) {
                positive = false;
                return false;
            }
            prof.samples_.push_back({yy, s[0], s[1]});
            return true;
        };
        double end = ode::integrate_dopri5<2>(rhs, y, 0.0, opt.y_max, ao, observer);
        if (positive && std::fabs(y[0]) >= opt.decay_floor && opt.y_cap > opt.y_max) {
            auto extend = [&](double yy, const ode::State<2>& s) {
                if (yy == end) return true;  // initial point already stored
                if (!observer(yy, s)) return false;
                return std::fabs(s[0]) >= opt.decay_floor;
            };
            end = ode::integrate_dopri5<2>(rhs, y, end, opt.y_cap, ao, extend);
        }
        prof.y_max_ = prof.samples_.back().y;
        prof.positivity_verified_ = positive;
        return prof;
    };

    SelfSimilarProfile prof = attempt(opt.rel_tol);
    if (!prof.positivity_verified()) prof = attempt(opt.retry_tol);
    return prof;
}

}  // namespace stefan_lab
