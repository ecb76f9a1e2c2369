#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "stefan_lab/profiles.hpp"

using namespace stefan_lab;

namespace {

// l(b) = √((p+1)/2) b^{(1-p)/2} ∫_0^1 (1 - r^{p+1})^{-1/2} dr and the integral is B(1/q, 1/2)/q.
double oracle_Cp(double p) {
    const double q = p + 1.0;
    return std::sqrt(q / 2.0) * std::beta(1.0 / q, 0.5) / q;
}

}  // namespace

TEST(Profiles, CpMatchesBetaFunction) {
    for (double p : {1.0, 1.5, 2.0, 3.0, 5.0, 8.0}) EXPECT_NEAR(C_p(p) / oracle_Cp(p), 1.0, 1e-12) << p;
    EXPECT_NEAR(C_p(1.0), std::numbers::pi / 2.0, 1e-12);
}

TEST(Profiles, ClosedFormsInsideGerm) {
    for (double p : {1.5, 2.0, 3.0, 5.0}) {
        const CombustionNonlinearity nl(0.3, p, 0.1);
        for (int k = 0; k < 20; ++k) {
            const double b = 0.1 * std::pow(1e-3, k / 19.0);
            EXPECT_NEAR(l_quadrature(nl, b) / l_closed(nl, b), 1.0, 1e-6) << "p=" << p << " b=" << b;
            EXPECT_NEAR(L_of_b(nl, b) / L_closed(nl, b), 1.0, 1e-6) << "p=" << p << " b=" << b;
        }
    }
}

TEST(Profiles, LinearGermHasConstantSupport) {
    const CombustionNonlinearity nl(0.3, 1.0, 0.1);
    for (double b : {1e-4, 1e-3, 0.01, 0.05, 0.1}) EXPECT_NEAR(l_quadrature(nl, b), std::numbers::pi / 2.0, 1e-10);
}

TEST(Profiles, AmplitudeDomain) {
    const CombustionNonlinearity nl(0.3, 5.0, 0.1);
    EXPECT_THROW(l_quadrature(nl, 0.0), DomainError);
    EXPECT_THROW(l_quadrature(nl, 0.7), DomainError);
    EXPECT_THROW(C_p(0.5), DomainError);
}

TEST(Profiles, PhasePlaneProfileEnergy) {
    // (V')²/2 + F(V) = F(θ + b) along the profile
    const CombustionNonlinearity nl(0.3, 5.0, 0.1);
    for (double b : {0.05, 0.3, 0.6}) {
        const PhasePlaneProfile V = solve_Vb(nl, b);
        EXPECT_NEAR(V.value_at(0.0), 0.3 + b, 1e-14);
        EXPECT_NEAR(V.value_at(V.l()), 0.3, 1e-12);
        EXPECT_NEAR(V.value_at(V.L()), 0.0, 1e-12);
        const double E0 = nl.F(0.3 + b);
        for (int k = 1; k < 50; ++k) {
            const double x = V.l() * k / 50.0;
            const double v = V.value_at(x), dv = V.derivative_at(x);
            EXPECT_NEAR(0.5 * dv * dv + nl.F(v), E0, 1e-8 * std::max(E0, 1e-12) + 1e-14) << "b=" << b << " x=" << x;
        }
        EXPECT_NEAR(V.linear_slope(), -std::sqrt(nl.G(b)), 1e-15);
    }
}

TEST(Profiles, PhasePlaneProfileSolvesOde) {
    // V'' + f(V) = 0 by central differences inside (0, l)
    const CombustionNonlinearity nl(0.3, 2.0, 0.1);
    const PhasePlaneProfile V = solve_Vb(nl, 0.2);
    const double d = 1e-3;
    for (double frac : {0.2, 0.5, 0.8}) {
        const double x = frac * V.l();
        const double vxx = (V.value_at(x + d) - 2 * V.value_at(x) + V.value_at(x - d)) / (d * d);
        EXPECT_NEAR(vxx + nl.f(V.value_at(x)), 0.0, 1e-5) << x;
    }
}

TEST(Profiles, InvertL) {
    const CombustionNonlinearity nl(0.3, 5.0, 0.1);
    const double top = L_of_b(nl, 0.05);
    for (double h : {top * 1.01, top * 2.0, top * 10.0}) {
        const double b = invert_L(nl, h);
        EXPECT_NEAR(L_of_b(nl, b) / h, 1.0, 1e-10) << h;
        EXPECT_LT(b, 0.05);
    }
    EXPECT_THROW(invert_L(nl, top, 0.2), DomainError);
}

TEST(Profiles, HarauxWeisslerBound) {
    EXPECT_NEAR(hw_admissible_bound(5.0), std::pow(0.25, 0.25), 1e-15);
    EXPECT_THROW(hw_admissible_bound(3.0), DomainError);
    EXPECT_THROW(haraux_weissler(5.0, 0.8), DomainError);
}

TEST(Profiles, HarauxWeisslerPositiveAndSecondOrderResidual) {
    const double p = 5.0;
    const double gamma = 0.5 * hw_admissible_bound(p);
    const SelfSimilarProfile phi = haraux_weissler(p, gamma);
    ASSERT_TRUE(phi.positivity_verified());
    ASSERT_GE(phi.y_max(), 50.0);
    for (int k = 0; k <= 500; ++k) EXPECT_GT(phi.value_at(0.1 * k), 0.0);

    // central-difference residual of the profile ODE decays like step²
    auto residual = [&](double hs) {
        double worst = 0.0;
        for (double y = 1.0; y <= 20.0; y += 0.25) {
            const double a = phi.value_at(y - hs), m = phi.value_at(y), c = phi.value_at(y + hs);
            const double r = (a - 2 * m + c) / (hs * hs) + 0.5 * y * (c - a) / (2 * hs) + m / (p - 1.0) +
                             std::pow(m, p);
            worst = std::max(worst, std::fabs(r));
        }
        return worst;
    };
    const double r1 = residual(0.1), r2 = residual(0.05), r3 = residual(0.025);
    EXPECT_NEAR(std::log2(r1 / r2), 2.0, 0.1);
    EXPECT_NEAR(std::log2(r2 / r3), 2.0, 0.1);
}
