#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "stefan_lab/fbp_solver.hpp"
#include "stefan_lab/special_functions.hpp"

using namespace stefan_lab;

namespace {

InitialDatum similarity_datum(double theta, double xi0, double t0) {
    const StefanSimilarity sim(theta, xi0);
    return InitialDatum::from_function(sim.front(t0), [sim, t0](double x) { return sim.value(t0, x); });
}

}  // namespace

TEST(FbpSolver, DatumValidation) {
    EXPECT_THROW(InitialDatum::cosine_bump(0.0, 1.0), DomainError);
    EXPECT_THROW(InitialDatum::cosine_bump(1.0, -1.0), DomainError);
    EXPECT_THROW(InitialDatum::from_table({0.0, 0.5, 1.0}, {1.0, 0.5, 0.1}), DomainError);
    EXPECT_THROW(InitialDatum::from_table({0.1, 0.5, 1.0}, {1.0, 0.5, 0.0}), DomainError);
    const InitialDatum d = InitialDatum::from_table({0.0, 0.5, 1.0}, {1.0, 0.5, 0.0});
    EXPECT_DOUBLE_EQ(d(0.25), 0.75);
    EXPECT_DOUBLE_EQ(d.h0(), 1.0);
}

TEST(FbpSolver, RunValidation) {
    const CombustionNonlinearity nl(0.3, 5, 0.1);
    const auto d = InitialDatum::cosine_bump(1, 1);
    SolverControls c;
    EXPECT_THROW(run(d, nl, 0.0, 1.0, c), DomainError);
    EXPECT_THROW(run(d, nl, 1.0, 0.0, c), DomainError);
    c.N = 3;
    EXPECT_THROW(run(d, nl, 1.0, 1.0, c), DomainError);
}

TEST(FbpSolver, SimilarityBenchmark) {
    const double theta = 0.5, mu = 1.0;
    const double xi0 = solve_xi0(mu, theta).xi0;
    SolverControls c;
    c.N = 200;
    c.t_start = 1.0;
    c.center = CenterCondition::dirichlet;
    c.center_value = theta;
    const CombustionNonlinearity nl(theta, 5, 0.1);
    SolverState s;
    run(similarity_datum(theta, xi0, 1.0), nl, mu, 20.0, c, {}, &s);
    EXPECT_NEAR(s.h / (2.0 * xi0 * std::sqrt(20.0)), 1.0, 1e-3);
    EXPECT_NEAR(s.hdot / (xi0 / std::sqrt(20.0)), 1.0, 1e-2);
}

TEST(FbpSolver, SecondOrderInSpace) {
    // h(1) for N = 50, 100, 200, 400: successive differences shrink by ~4
    const CombustionNonlinearity nl(0.3, 5, 0.1);
    const auto d = InitialDatum::cosine_bump(1, 0.9);
    std::vector<double> h;
    for (std::size_t N : {50, 100, 200, 400}) {
        SolverControls c;
        c.N = N;
        SolverState s;
        run(d, nl, 1.0, 1.0, c, {}, &s);
        h.push_back(s.h);
    }
    const double r1 = (h[0] - h[1]) / (h[1] - h[2]);
    const double r2 = (h[1] - h[2]) / (h[2] - h[3]);
    EXPECT_NEAR(std::log2(r1), 2.0, 0.15);
    EXPECT_NEAR(std::log2(r2), 2.0, 0.15);
}

TEST(FbpSolver, ConservationWithoutReaction) {
    // ν < θ keeps u below θ, so f ≡ 0 and ∫u + h/μ is conserved up to O(Δx²)
    const CombustionNonlinearity nl(0.3, 5, 0.1);
    const auto d = InitialDatum::cosine_bump(1, 0.2);
    std::vector<double> drift;
    for (std::size_t N : {200, 400, 800}) {
        SolverControls c;
        c.N = N;
        const double I0 = stefan_invariant(initial_state(d, c, 1.0), 1.0);
        SolverState s;
        run(d, nl, 1.0, 2.0, c, {}, &s);
        drift.push_back(std::fabs(stefan_invariant(s, 1.0) - I0) / 2.0);
        EXPECT_GT(s.h, 1.0);
        EXPECT_LT(s.max_u(), 0.3);
    }
    EXPECT_LT(drift[2], 1e-6);
    EXPECT_NEAR(std::log2(drift[0] / drift[1]), 2.0, 0.15);
    EXPECT_NEAR(std::log2(drift[1] / drift[2]), 2.0, 0.15);
}

TEST(FbpSolver, FrontMonotoneAndThetaLevelConsistent) {
    const CombustionNonlinearity nl(0.3, 1, 0.1);
    SolverControls c;
    c.N = 100;
    const FrontTrace tr = run(InitialDatum::cosine_bump(1, 10), nl, 1.0, 20.0, c);
    ASSERT_GT(tr.rows.size(), 10u);
    for (std::size_t i = 1; i < tr.rows.size(); ++i) {
        EXPECT_GT(tr.rows[i].t, tr.rows[i - 1].t);
        EXPECT_GE(tr.rows[i].h, tr.rows[i - 1].h);
    }
    for (const auto& r : tr.rows) {
        EXPECT_EQ(r.theta_pos.has_value(), r.u0 >= 0.3) << r.t;
        if (r.theta_pos) {
            EXPECT_TRUE(*r.theta_pos >= 0.0 && *r.theta_pos <= r.h);
        }
    }
}

TEST(FbpSolver, TraceTimesAreGeometric) {
    const CombustionNonlinearity nl(0.3, 5, 0.1);
    SolverControls c;
    c.N = 40;
    c.trace_ratio = 1.5;
    const FrontTrace tr = run(InitialDatum::cosine_bump(1, 1), nl, 1.0, 1.0, c);
    EXPECT_EQ(tr.rows.front().t, 0.0);
    EXPECT_DOUBLE_EQ(tr.rows[1].t, 1e-2);
    EXPECT_DOUBLE_EQ(tr.rows[2].t, 1.5e-2);
    EXPECT_EQ(tr.rows.back().t, 1.0);
}

TEST(FbpSolver, Deterministic) {
    const CombustionNonlinearity nl(0.3, 5, 0.1);
    SolverControls c;
    c.N = 60;
    c.snapshot_times = {0.5};
    const auto d = InitialDatum::cosine_bump(1, 2);
    const FrontTrace a = run(d, nl, 1.0, 3.0, c);
    const FrontTrace b = run(d, nl, 1.0, 3.0, c);
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        EXPECT_EQ(a.rows[i].h, b.rows[i].h);
        EXPECT_EQ(a.rows[i].u0, b.rows[i].u0);
    }
    ASSERT_EQ(a.snapshots.size(), 1u);
    EXPECT_EQ(a.snapshots[0].t, 0.5);
    EXPECT_EQ(a.snapshots[0].u, b.snapshots[0].u);
}

TEST(FbpSolver, MonitorStopsRun) {
    const CombustionNonlinearity nl(0.3, 5, 0.1);
    SolverControls c;
    c.N = 40;
    SolverState s;
    run(InitialDatum::cosine_bump(1, 1), nl, 1.0, 100.0, c, [](const SolverState& st) { return st.t > 0.5; }, &s);
    EXPECT_GT(s.t, 0.5);
    EXPECT_LT(s.t, 0.6);
}
