#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "stefan_lab/errors.hpp"
#include "stefan_lab/quadrature.hpp"

namespace stefan_lab {

/// Combustion-type reaction term.
///
///   f(u) = 0                              on [0, theta]
///   f(u) = (u - theta)^p                  on [theta, theta + sigma)
///   f(u) = sigma^p (1 - u) / (1 - theta - sigma)   on [theta + sigma, inf)
///
/// The last piece is a linear bridge: continuous at theta + sigma, zero at 1 and
/// negative beyond, so f is locally Lipschitz with the required sign pattern.
///
/// With bridge_peak > sigma^p the bridge is a tent instead: linear from
/// (theta + sigma, sigma^p) up to (m, bridge_peak), m = (theta + sigma + 1) / 2,
/// then down to (1, 0) and continued with the same slope beyond 1.
class CombustionNonlinearity {
public:
    static constexpr double kQuadTol = 1e-12;

    CombustionNonlinearity(double theta, double p, double sigma, double bridge_peak = 0.0)
        : theta_(theta), p_(p), sigma_(sigma), bridge_peak_(bridge_peak) {
        if (!(theta > 0.0 && theta < 1.0)) throw DomainError("theta must lie in (0, 1)");
        if (!(p >= 1.0) || !std::isfinite(p)) throw DomainError("p must be a finite real >= 1");
        if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
        if (!(theta + sigma < 1.0)) throw DomainError("theta + sigma must be < 1");
        if (!(bridge_peak >= 0.0) || !std::isfinite(bridge_peak))
            throw DomainError("bridge_peak must be finite and >= 0");
        const double fs = std::pow(sigma_, p_);
        germ_top_ = fs;
        bridge_slope_ = fs / (1.0 - theta_ - sigma_);
        tent_ = bridge_peak_ > fs;
        if (tent_) {
            tent_mid_ = 0.5 * (theta_ + sigma_ + 1.0);
            tent_up_ = (bridge_peak_ - fs) / (tent_mid_ - theta_ - sigma_);
            bridge_slope_ = bridge_peak_ / (1.0 - tent_mid_);
        }
    }

    double theta() const noexcept { return theta_; }
    double p() const noexcept { return p_; }
    double sigma() const noexcept { return sigma_; }
    double germ_end() const noexcept { return theta_ + sigma_; }
    double bridge_peak() const noexcept { return bridge_peak_; }
    bool tent_bridge() const noexcept { return tent_; }

    /// f(u); u must be nonnegative.
    double f(double u) const {
        if (!(u >= 0.0)) throw DomainError("eval_f: negative state value " + std::to_string(u));
        return f_unchecked(u);
    }

    /// f without the domain check; for hot loops that have already clamped u.
    double f_unchecked(double u) const noexcept {
        if (u <= theta_) return 0.0;
        if (u < theta_ + sigma_) return p_ == 1.0 ? u - theta_ : std::pow(u - theta_, p_);
        if (tent_ && u < tent_mid_) return germ_top_ + tent_up_ * (u - theta_ - sigma_);
        return bridge_slope_ * (1.0 - u);
    }

    /// ∫_a^b f(s) ds for 0 <= a <= b. Germ pieces are integrated in closed form,
    /// everything beyond the germ by adaptive Simpson.
    double integral(double a, double b, double tol = kQuadTol) const {
        if (!(a >= 0.0) || !(b >= a)) throw DomainError("integral: need 0 <= a <= b");
        double total = 0.0;
        const double g0 = std::max(a, theta_);
        const double g1 = std::min(b, theta_ + sigma_);
        if (g1 > g0) {
            const double q = p_ + 1.0;
            total += (std::pow(g1 - theta_, q) - std::pow(g0 - theta_, q)) / q;
        }
        const double r0 = std::max(a, theta_ + sigma_);
        if (b > r0) {
            total += quadrature::adaptive_simpson([this](double s) { return f_unchecked(s); }, r0, b, tol);
        }
        return total;
    }

    /// F(u) = ∫_0^u f.
    double F(double u) const {
        if (!(u >= 0.0)) throw DomainError("eval_F: negative argument");
        return integral(0.0, u);
    }

    /// G(u) = 2 ∫_0^u f(theta + s) ds, defined for 0 <= u <= 1 - theta.
    double G(double u) const {
        if (!(u >= 0.0) || theta_ + u > 1.0) throw DomainError("eval_G: need 0 <= u <= 1 - theta");
        if (u < sigma_) return 2.0 / (p_ + 1.0) * std::pow(u, p_ + 1.0);
        return 2.0 * integral(theta_, theta_ + u);
    }

    /// G(b) - G(s) for 0 <= s <= b, evaluated without cancellation.
    double G_difference(double s, double b) const {
        if (!(s >= 0.0) || !(b >= s) || theta_ + b > 1.0)
            throw DomainError("G_difference: need 0 <= s <= b <= 1 - theta");
        if (b < sigma_) {
            // (2/(p+1)) b^{p+1} (1 - (s/b)^{p+1}) with the bracket via expm1/log1p
            const double q = p_ + 1.0;
            if (s == 0.0) return 2.0 / q * std::pow(b, q);
            const double one_minus = -std::expm1(q * std::log(s / b));
            return 2.0 / q * std::pow(b, q) * one_minus;
        }
        // tolerance scaled with the interval keeps the relative error small as s -> b
        return 2.0 * integral(theta_ + s, theta_ + b, std::max(1e-14 * (b - s), 1e-300));
    }

    /// G(b) - G(b - gap) = 2 ∫_0^gap f(θ + b - τ) dτ, parametrized by the gap so that
    /// tiny gaps keep full relative precision.
    double G_gap(double b, double gap) const {
        if (!(gap >= 0.0) || !(b >= gap) || theta_ + b > 1.0)
            throw DomainError("G_gap: need 0 <= gap <= b <= 1 - theta");
        const double q = p_ + 1.0;
        double total = 0.0;
        double germ_from = gap;  // τ at which the germ segment starts
        if (b > sigma_) {
            const double bridge_len = std::min(gap, b - sigma_);
            total += quadrature::adaptive_simpson(
                [this, b](double tau) { return f_unchecked(theta_ + b - tau); }, 0.0, bridge_len,
                std::max(1e-15 * bridge_len, 1e-300));
            germ_from = bridge_len;
        } else {
            germ_from = 0.0;
        }
        if (gap > germ_from) {
            const double top = std::min(b, sigma_);
            const double bottom = b - gap;
            if (b <= sigma_ && bottom > 0.0) {
                // top^q (1 - (bottom/top)^q) with the bracket in log1p form
                total += std::pow(top, q) * -std::expm1(q * std::log1p(-gap / top)) / q;
            } else {
                total += (std::pow(top, q) - std::pow(std::max(bottom, 0.0), q)) / q;
            }
        }
        return 2.0 * total;
    }

private:
    double theta_;
    double p_;
    double sigma_;
    double bridge_peak_;
    double bridge_slope_;
    bool tent_ = false;
    double tent_mid_ = 0.0;
    double tent_up_ = 0.0;
    double germ_top_ = 0.0;
};

}  // namespace stefan_lab
