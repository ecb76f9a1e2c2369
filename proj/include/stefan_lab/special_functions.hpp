#pragma once

#include <cmath>
#include <numbers>

#include "stefan_lab/errors.hpp"

namespace stefan_lab {

namespace detail {

// erfc(x) for x >= 1.5 by the Laplace continued fraction (modified Lentz).
inline double erfc_continued_fraction(double x) {
    constexpr double tiny = 1e-300;
    double f = x;
    double c = x;
    double d = 0.0;
    for (int n = 1; n < 5000; ++n) {
        const double a = 0.5 * n;
        d = x + a * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = x + a / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::fabs(delta - 1.0) < 1e-17) break;
    }
    return std::exp(-x * x) / (std::sqrt(std::numbers::pi) * f);
}

// erf(x) for 0 <= x <= 3: exp(-x^2) * sum 2^n x^{2n+1} / (2n+1)!!, all terms positive, compensated sum.
inline double erf_series(double x) {
    const double x2 = x * x;
    double term = x;
    double sum = x;
    double comp = 0.0;
    for (int n = 1; n < 400; ++n) {
        term *= 2.0 * x2 / (2.0 * n + 1.0);
        const double y = term - comp;
        const double next = sum + y;
        comp = (next - sum) - y;
        sum = next;
        if (term < 1e-17 * sum) break;
    }
    return 2.0 / std::sqrt(std::numbers::pi) * std::exp(-x2) * sum;
}

}  // namespace detail

/// E(x) = (2/√π) ∫_0^x e^{-s²} ds for x >= 0.
inline double E(double x) {
    if (!(x >= 0.0)) throw DomainError("E: argument must be >= 0");
    if (std::isinf(x)) return 1.0;
    if (x <= 3.0) return detail::erf_series(x);
    return 1.0 - detail::erfc_continued_fraction(x);
}

/// 1 - E(x), accurate in the tail.
inline double E_complement(double x) {
    if (!(x >= 0.0)) throw DomainError("E_complement: argument must be >= 0");
    if (std::isinf(x)) return 0.0;
    if (x < 1.5) return 1.0 - detail::erf_series(x);
    return detail::erfc_continued_fraction(x);
}

/// E'(x) = (2/√π) e^{-x²}; valid for any real x.
inline double E_prime(double x) { return 2.0 / std::sqrt(std::numbers::pi) * std::exp(-x * x); }

/// Φ(x) = √π x e^{x²} E(x). Φ(ξ₀) = μθ defines the front constant.
inline double Phi(double x) {
    if (!(x >= 0.0)) throw DomainError("Phi: argument must be >= 0");
    return std::sqrt(std::numbers::pi) * x * std::exp(x * x) * E(x);
}

inline double Phi_prime(double x) {
    if (!(x >= 0.0)) throw DomainError("Phi_prime: argument must be >= 0");
    const double ex = std::exp(x * x);
    return std::sqrt(std::numbers::pi) * ex * E(x) * (1.0 + 2.0 * x * x) + 2.0 * x;
}

/// Unique x > 0 with Φ(x) = target: bracketed bisection to width 1e-13, then
/// three Newton steps kept inside the final bracket.
inline double solve_Phi(double target) {
    if (!(target > 0.0) || !std::isfinite(target)) throw DomainError("solve_Phi: target must be > 0");
    double lo = 0.0;
    double hi = 1.0;
    int guard = 0;
    while (Phi(hi) < target) {
        lo = hi;
        hi *= 2.0;
        if (++guard > 64) throw NumericalError("solve_Phi: could not bracket root");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        const double mid = 0.5 * (lo + hi);
        (Phi(mid) < target ? lo : hi) = mid;
    }
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 3; ++it) {
        const double next = x - (Phi(x) - target) / Phi_prime(x);
        if (next > 0.0 && std::fabs(next - x) <= 1e-12 + 1e-9 * x) x = next;
    }
    const double residual = std::fabs(Phi(x) - target);
    if (residual > 1e-12 * std::fmax(1.0, target))
        throw NumericalError("solve_Phi: residual " + std::to_string(residual) + " above tolerance");
    return x;
}

/// Root of 2ξ e^{ξ²} ∫_0^ξ e^{-s²} ds = μθ together with its achieved residual.
struct FrontConstant {
    double xi0 = 0.0;
    double mu = 0.0;
    double theta = 0.0;
    double residual = 0.0;
};

inline FrontConstant solve_xi0(double mu, double theta) {
    if (!(mu > 0.0)) throw DomainError("solve_xi0: mu must be > 0");
    if (!(theta > 0.0 && theta < 1.0)) throw DomainError("solve_xi0: theta must lie in (0, 1)");
    FrontConstant fc;
    fc.mu = mu;
    fc.theta = theta;
    fc.xi0 = solve_Phi(mu * theta);
    fc.residual = std::fabs(Phi(fc.xi0) - mu * theta);
    return fc;
}

/// β with Φ(β) = μ(θ + offset); offset = 0 reproduces ξ₀.
inline double solve_beta(double mu, double theta, double xi_offset) {
    if (!(xi_offset >= 0.0)) throw DomainError("solve_beta: offset must be >= 0");
    if (!(mu > 0.0) || !(theta > 0.0)) throw DomainError("solve_beta: mu, theta must be > 0");
    return solve_Phi(mu * (theta + xi_offset));
}

/// Pure Stefan similarity solution
///   ρ(t, x) = θ [1 - E(x / 2√t) / E(ξ₀)],   r(t) = 2 ξ₀ √t,
/// with closed-form derivatives.
class StefanSimilarity {
public:
    StefanSimilarity(double theta, double xi0) : theta_(theta), xi0_(xi0), E0_(E(xi0)) {
        if (!(xi0 > 0.0)) throw DomainError("StefanSimilarity: xi0 must be > 0");
    }

    double theta() const noexcept { return theta_; }
    double xi0() const noexcept { return xi0_; }

    double front(double t) const { return 2.0 * xi0_ * std::sqrt(check_t(t)); }
    double front_speed(double t) const { return xi0_ / std::sqrt(check_t(t)); }

    double value(double t, double x) const {
        const double z = x / (2.0 * std::sqrt(check_t(t)));
        return theta_ * (1.0 - E(std::fabs(z)) * (z < 0 ? -1.0 : 1.0) / E0_);
    }
    /// ρ in the similarity variable z = x / 2√t; exactly 0 at z = ξ₀.
    double value_z(double z) const { return theta_ * (1.0 - E(z) / E0_); }
    double dx(double t, double x) const {
        check_t(t);
        return -theta_ * std::exp(-x * x / (4.0 * t)) / (E0_ * std::sqrt(std::numbers::pi * t));
    }
    double dxx(double t, double x) const {
        check_t(t);
        const double z = x / (2.0 * std::sqrt(t));
        return theta_ * z * std::exp(-z * z) / (E0_ * std::sqrt(std::numbers::pi) * t);
    }
    double dt(double t, double x) const {
        check_t(t);
        const double z = x / (2.0 * std::sqrt(t));
        return theta_ * z * std::exp(-z * z) / (E0_ * std::sqrt(std::numbers::pi) * t);
    }

private:
    static double check_t(double t) {
        if (!(t > 0.0)) throw DomainError("StefanSimilarity: t must be > 0");
        return t;
    }

    double theta_;
    double xi0_;
    double E0_;
};

struct SimilarityPoint {
    double rho;
    double r;
};

inline SimilarityPoint stefan_similarity(double theta, double xi0, double t, double x) {
    if (!(x >= 0.0)) throw DomainError("stefan_similarity: x must be >= 0");
    const StefanSimilarity s(theta, xi0);
    return {s.value(t, x), s.front(t)};
}

}  // namespace stefan_lab
