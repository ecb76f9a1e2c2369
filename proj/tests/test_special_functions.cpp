#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "stefan_lab/special_functions.hpp"

using namespace stefan_lab;

namespace {

// Φ(x) = √π x e^{x²} erf(x) via the C library erf, solved by plain bisection.
double oracle_phi(double x) { return std::sqrt(std::numbers::pi) * x * std::exp(x * x) * std::erf(x); }

double oracle_xi0(double mu, double theta) {
    double lo = 0.0, hi = 1.0;
    while (oracle_phi(hi) < mu * theta) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double m = 0.5 * (lo + hi);
        (oracle_phi(m) < mu * theta ? lo : hi) = m;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST(SpecialFunctions, ErfFrozenValue) { EXPECT_NEAR(E(1.0), 0.842700792949715, 1e-15); }

TEST(SpecialFunctions, ErfMatchesLibm) {
    for (int i = 0; i <= 600; ++i) {
        const double x = i * 0.01;
        EXPECT_NEAR(E(x), std::erf(x), 2e-16 * 4) << "x=" << x;
    }
}

TEST(SpecialFunctions, ErfcRelativeAccuracyInTail) {
    for (double x : {0.5, 2.0, 3.0, 3.5, 5.0, 10.0, 20.0, 26.0}) {
        const double ref = std::erfc(x);
        EXPECT_NEAR(E_complement(x) / ref, 1.0, 1e-13) << "x=" << x;
    }
}

TEST(SpecialFunctions, DomainErrors) {
    EXPECT_THROW(E(-0.1), DomainError);
    EXPECT_THROW(Phi(-1.0), DomainError);
    EXPECT_THROW(solve_xi0(0.0, 0.5), DomainError);
    EXPECT_THROW(solve_xi0(1.0, 1.0), DomainError);
    EXPECT_THROW(solve_beta(1.0, 0.3, -0.1), DomainError);
}

TEST(SpecialFunctions, Xi0FrozenValue) {
    // frozen from the bisection oracle above
    const double frozen = 0.46478592064624452;
    EXPECT_NEAR(oracle_xi0(1.0, 0.5), frozen, 1e-15);
    const FrontConstant fc = solve_xi0(1.0, 0.5);
    EXPECT_NEAR(fc.xi0, frozen, 1e-14);
    EXPECT_LE(fc.residual, 1e-12);
}

TEST(SpecialFunctions, Xi0ResidualOnGrid) {
    // 10 x 10 grid over mu in [0.1, 10], theta in [0.05, 0.95]
    for (int i = 0; i < 10; ++i) {
        for (int j = 0; j < 10; ++j) {
            const double mu = 0.1 * std::pow(100.0, i / 9.0);
            const double th = 0.05 + 0.1 * j;
            const FrontConstant fc = solve_xi0(mu, th);
            EXPECT_LE(fc.residual, 1e-12) << mu << "," << th;
            EXPECT_NEAR(fc.xi0, oracle_xi0(mu, th), 1e-12 * std::max(1.0, fc.xi0));
        }
    }
}

TEST(SpecialFunctions, SmallMuThetaLaw) {
    // Φ(x) ≈ 2x² near 0, so ξ₀ ≈ √(μθ/2)
    for (double mt : {1e-4, 1e-5, 1e-6}) {
        const double xi = solve_xi0(1.0, mt).xi0;
        EXPECT_NEAR(xi / std::sqrt(mt / 2.0), 1.0, 1e-3) << mt;
    }
}

TEST(SpecialFunctions, BetaIsXi0AtZeroOffset) {
    EXPECT_NEAR(solve_beta(1.0, 0.3, 0.0), solve_xi0(1.0, 0.3).xi0, 1e-15);
    EXPECT_GT(solve_beta(1.0, 0.3, 0.01), solve_xi0(1.0, 0.3).xi0);
}

TEST(SpecialFunctions, SimilaritySolvesStefanProblem) {
    const double theta = 0.5, mu = 1.0;
    const double xi0 = solve_xi0(mu, theta).xi0;
    const StefanSimilarity s(theta, xi0);
    const double t = 2.0, h = s.front(t);
    EXPECT_NEAR(h, 2.0 * xi0 * std::sqrt(t), 1e-15);
    EXPECT_NEAR(s.value(t, 0.0), theta, 1e-15);
    EXPECT_NEAR(s.value(t, h), 0.0, 1e-15);
    EXPECT_EQ(s.value_z(xi0), 0.0);
    // free boundary condition h' = -μ u_x(t, h)
    EXPECT_NEAR(s.front_speed(t), -mu * s.dx(t, h), 1e-13);
    // heat equation by central differences
    const double d = 1e-4;
    for (double x : {0.1, 0.7, 1.2}) {
        const double ut = (s.value(t + d, x) - s.value(t - d, x)) / (2 * d);
        const double uxx = (s.value(t, x + d) - 2 * s.value(t, x) + s.value(t, x - d)) / (d * d);
        EXPECT_NEAR(ut, uxx, 1e-6) << x;
        EXPECT_NEAR(s.dt(t, x), ut, 1e-7);
        EXPECT_NEAR(s.dxx(t, x), uxx, 1e-6);
    }
}
