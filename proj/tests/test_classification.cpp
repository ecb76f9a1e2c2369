#include <cmath>

#include <gtest/gtest.h>

#include "stefan_lab/classification.hpp"

using namespace stefan_lab;

namespace {

RunSetup p1_setup(std::size_t N) {
    RunSetup s{CombustionNonlinearity(0.3, 1.0, 0.1)};
    s.controls.N = N;
    s.t_max = 1e6;
    return s;
}

}  // namespace

TEST(Classification, SpreadingRegression) {
    // frozen regression values (p = 1, N = 100, default monitors)
    const ClassifiedRun r = classify(p1_setup(100), 10.0);
    EXPECT_EQ(r.outcome.verdict, Verdict::spreading);
    EXPECT_EQ(r.outcome.evidence, Evidence::center_value);
    EXPECT_NEAR(r.outcome.t_decided, 22.672473389695032, 1e-9);
    EXPECT_NEAR(r.outcome.h_decided, 7.4173828593496021, 1e-9);
    ASSERT_TRUE(r.outcome.barrier_b.has_value());
    EXPECT_GT(r.outcome.u0_decided, 0.4);
    EXPECT_GT(r.outcome.h_decided, BarrierFamily(CombustionNonlinearity(0.3, 1.0, 0.1), 24).smallest_L());
}

TEST(Classification, VanishingRegression) {
    const ClassifiedRun r = classify(p1_setup(100), 0.01);
    EXPECT_EQ(r.outcome.verdict, Verdict::vanishing);
    EXPECT_EQ(r.outcome.evidence, Evidence::max_value);
    EXPECT_LT(r.outcome.t_decided, 1e-3);
    const ClassifiedRun r4 = classify(p1_setup(100), 4.0);
    EXPECT_EQ(r4.outcome.verdict, Verdict::vanishing);
    EXPECT_NEAR(r4.outcome.t_decided, 6.2659516803017583, 1e-9);
}

TEST(Classification, UndeterminedAtHorizon) {
    RunSetup s = p1_setup(100);
    s.t_max = 2.0;
    const ClassifiedRun r = classify(s, 10.0);
    EXPECT_EQ(r.outcome.verdict, Verdict::undetermined);
    EXPECT_EQ(r.outcome.evidence, Evidence::t_max);
    EXPECT_EQ(r.outcome.t_decided, 2.0);
}

TEST(Classification, BarrierFamilyCertifiesOnlyAboveProfile) {
    const CombustionNonlinearity nl(0.3, 1.0, 0.1);
    const BarrierFamily fam(nl, 24);
    ASSERT_TRUE(std::isfinite(fam.smallest_L()));
    SolverState s;
    s.h = 20.0;  // well beyond L(b) for every tabulated amplitude at p = 1
    s.u.assign(201, 0.95);
    s.u.back() = 0.0;
    // a plateau at 0.95 with a steep edge lies above some V_b
    for (std::size_t i = 190; i < 200; ++i) s.u[i] = 0.95 * (200 - i) / 10.0;
    EXPECT_TRUE(fam.certify(s, 1e-3).has_value());
    s.u.assign(201, 0.35);
    s.u.back() = 0.0;
    EXPECT_FALSE(fam.certify(s, 1e-3).has_value());
}

TEST(Classification, BisectionHalvesLogWidth) {
    BisectionOptions bo;
    bo.target_width = 1e-6;
    const ThresholdBracket br = bisect_threshold(p1_setup(50), 4.0, 10.0, bo);
    EXPECT_LE(br.width(), 1e-6);
    EXPECT_EQ(br.lo_outcome.verdict, Verdict::vanishing);
    EXPECT_EQ(br.hi_outcome.verdict, Verdict::spreading);
    double w = std::log(10.0 / 4.0);
    for (const auto& st : br.history) {
        EXPECT_NEAR(std::log(st.nu_hi / st.nu_lo), w, 1e-12 * w + 1e-15);
        EXPECT_NEAR(st.nu_mid, std::sqrt(st.nu_lo * st.nu_hi), 1e-12 * st.nu_mid);
        EXPECT_FALSE(st.trace.rows.empty());
        w *= 0.5;
    }
    EXPECT_NEAR(br.log_width(), w, 1e-9 * w);
    EXPECT_FALSE(br.lo_trace.rows.empty());
    EXPECT_FALSE(br.hi_trace.rows.empty());
}

TEST(Classification, BisectionIndependentOfJobs) {
    BisectionOptions a, b;
    a.target_width = b.target_width = 1e-4;
    b.jobs = 3;
    const ThresholdBracket x = bisect_threshold(p1_setup(40), 4.0, 10.0, a);
    const ThresholdBracket y = bisect_threshold(p1_setup(40), 4.0, 10.0, b);
    EXPECT_EQ(x.nu_lo, y.nu_lo);
    EXPECT_EQ(x.nu_hi, y.nu_hi);
    ASSERT_EQ(x.history.size(), y.history.size());
    for (std::size_t k = 0; k < x.history.size(); ++k) EXPECT_EQ(x.history[k].nu_mid, y.history[k].nu_mid);
}

TEST(Classification, BadBracketIsConfigError) {
    try {
        bisect_threshold(p1_setup(40), 10.0, 20.0);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "classification.bracket.nu_lo");
    }
    try {
        bisect_threshold(p1_setup(40), 0.5, 1.0);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "classification.bracket.nu_hi");
    }
    EXPECT_THROW(bisect_threshold(p1_setup(40), 2.0, 1.0), ConfigError);
}

TEST(Classification, ScanFindsSignChange) {
    const auto br = scan_bracket(p1_setup(40), 1.0, 64.0);
    ASSERT_TRUE(br.has_value());
    EXPECT_LT(br->first, br->second);
    EXPECT_LE(br->second, 2.0 * br->first * (1 + 1e-12));
}

TEST(Classification, ShadowAgreesOnPrefix) {
    BisectionOptions bo;
    bo.target_width = 1e-8;
    RunSetup s = p1_setup(40);
    const ThresholdBracket br = bisect_threshold(s, 4.0, 10.0, bo);
    const ShadowTrace sh = near_critical_trace(s, br, 1e4);
    EXPECT_FALSE(sh.insufficient_precision);
    EXPECT_GT(sh.divergence_time, 10.0);
    ASSERT_FALSE(sh.trace.rows.empty());
    for (std::size_t i = 0; i < sh.trace.rows.size(); ++i) {
        const auto& a = sh.lo.rows[i];
        const auto& b = sh.hi.rows[i];
        EXPECT_LE(std::fabs(a.h - b.h), 1e-3 * std::max(a.h, b.h));
        EXPECT_EQ(sh.trace.rows[i].t, a.t);
    }
}
