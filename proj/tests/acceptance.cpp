// Acceptance run: one PASS/FAIL line per criterion 1-8, exit status 1 if any fails.
// Shadows from criteria 4-5 feed the barrier certification of criterion 6.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "stefan_lab/stefan_lab.hpp"

using namespace stefan_lab;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
    if (!pass) ++failures;
    std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[1024];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

constexpr double kTheta = 0.3, kSigma = 0.1, kMu = 1.0, kH0 = 1.0;

RunSetup setup_for(double p, std::size_t N) {
    RunSetup s{CombustionNonlinearity(kTheta, p, kSigma)};
    s.mu = kMu;
    s.h0 = kH0;
    s.controls.N = N;
    s.controls.snapshot_times = {1.0};
    s.t_max = 1e9;
    return s;
}

struct ShadowRun {
    ThresholdBracket bracket;
    ShadowTrace shadow;
    double seconds = 0.0;
};

ShadowRun shadow_for(double p, double lo, double hi, std::size_t N) {
    const auto t0 = Clock::now();
    const RunSetup s = setup_for(p, N);
    ShadowRun r;
    r.bracket = bisect_threshold(s, lo, hi, {});
    r.shadow = near_critical_trace(s, r.bracket, 1e9);
    r.seconds = seconds_since(t0);
    return r;
}

// bracket invariant after every step: lo vanishes, hi spreads, log width halves
bool bracket_invariant(const ThresholdBracket& br, double lo0, double hi0, std::string& why) {
    double lo = lo0, hi = hi0;
    for (std::size_t k = 0; k < br.history.size(); ++k) {
        const auto& st = br.history[k];
        if (st.nu_lo != lo || st.nu_hi != hi || !(st.nu_mid > lo && st.nu_mid < hi)) {
            why = fmt("step %zu: midpoint outside the current bracket", k);
            return false;
        }
        if (st.tainted) {
            why = fmt("step %zu: undetermined midpoint", k);
            return false;
        }
        (st.outcome.verdict == Verdict::vanishing ? lo : hi) = st.nu_mid;
        const double expect = std::log(hi0 / lo0) / std::pow(2.0, static_cast<double>(k + 1));
        // ν is stored in double: allow a few ulps of rounding on the midpoint
        if (std::fabs(std::log(hi / lo) - expect) > 1e-9 * expect + 8.0 * std::numeric_limits<double>::epsilon()) {
            why = fmt("step %zu: log width %.3e, expected %.3e", k, std::log(hi / lo), expect);
            return false;
        }
    }
    if (br.lo_outcome.verdict != Verdict::vanishing || br.hi_outcome.verdict != Verdict::spreading) {
        why = "final endpoints not vanishing/spreading";
        return false;
    }
    return lo == br.nu_lo && hi == br.nu_hi;
}

void criterion1() {
    const auto t0 = Clock::now();
    const double theta = 0.5;
    const double xi0 = solve_xi0(kMu, theta).xi0;
    const StefanSimilarity sim(theta, xi0);
    SolverControls c;
    c.N = 800;
    c.t_start = 1.0;
    c.center = CenterCondition::dirichlet;
    c.center_value = theta;
    const auto datum = InitialDatum::from_function(sim.front(1.0), [&](double x) { return sim.value(1.0, x); });
    SolverState s;
    run(datum, CombustionNonlinearity(theta, 5.0, kSigma), kMu, 100.0, c, {}, &s);
    const double err = std::fabs(s.h / sim.front(100.0) - 1.0);
    const double secs = seconds_since(t0);
    report(1, err <= 5e-3 && secs < 30.0,
           fmt("Stefan similarity N=800 t=100: |h/2xi0 sqrt(t) - 1| = %.3e (<= 5e-3), %.1f s (< 30 s)", err, secs));
}

void criterion2() {
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j)
            worst = std::max(worst, solve_xi0(0.1 * std::pow(100.0, i / 9.0), 0.05 + 0.1 * j).residual);
    double law = 0.0;
    for (double mt : {1e-4, 1e-5, 1e-6}) law = std::max(law, std::fabs(solve_xi0(1.0, mt).xi0 / std::sqrt(mt / 2.0) - 1.0));
    const double secs = seconds_since(t0);
    report(2, worst <= 1e-12 && law <= 1e-3 && secs < 1.0,
           fmt("xi0 residual max %.2e on 100 points, small mu*theta law rel err %.2e (<= 1e-3), %.3f s", worst, law, secs));
}

void criterion3() {
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (double p : {1.5, 2.0, 3.0, 5.0}) {
        const CombustionNonlinearity nl(kTheta, p, kSigma);
        for (int k = 0; k < 20; ++k) {
            const double b = kSigma * std::pow(1e-3, k / 19.0);
            worst = std::max({worst, std::fabs(l_quadrature(nl, b) / l_closed(nl, b) - 1.0),
                              std::fabs(L_of_b(nl, b) / L_closed(nl, b) - 1.0)});
        }
    }
    double lin = 0.0;
    const CombustionNonlinearity nl1(kTheta, 1.0, kSigma);
    for (int k = 0; k < 20; ++k)
        lin = std::max(lin, std::fabs(l_quadrature(nl1, kSigma * std::pow(1e-3, k / 19.0)) - std::numbers::pi / 2.0));
    const double secs = seconds_since(t0);
    report(3, worst <= 1e-6 && lin <= 1e-10 && secs < 5.0,
           fmt("closed forms rel err %.2e (<= 1e-6), p=1 |l - pi/2| %.2e (<= 1e-10), %.2f s", worst, lin, secs));
}

void criterion4(const ShadowRun& r, double bisect_secs) {
    std::string why;
    const bool inv = bracket_invariant(r.bracket, 500.0, 1200.0, why);
    report(4, inv && r.bracket.width() <= 1e-10 && bisect_secs < 600.0,
           fmt("p=5 N=400 bracket [%.12f, %.12f] width %.2e (<= 1e-10), %zu steps, invariant %s, %.1f s", r.bracket.nu_lo,
               r.bracket.nu_hi, r.bracket.width(), r.bracket.history.size(), inv ? "held" : why.c_str(), bisect_secs));
}

void criterion5(const ShadowRun& r5, const ShadowRun& r1) {
    const double xi0 = solve_xi0(kMu, kTheta).xi0;
    const auto& tr = r5.shadow.trace;
    const TraceRow& last = tr.rows.back();
    const double ratio = last.h / (2.0 * xi0 * std::sqrt(last.t));
    const DeviationFit f5 = fit_exponent(front_deviation(tr, xi0, 1.0), 5.0);
    const bool band = f5.fitted && f5.alpha >= 0.10 && f5.alpha <= 0.483;
    const DeviationFit f1 = fit_exponent(front_deviation(r1.shadow.trace, xi0, 1.0), 1.0);
    const bool bounded = f1.fitted && f1.alpha <= 0.05;
    const bool ok = std::fabs(ratio - 1.0) <= 0.05 && band && bounded;
    report(5, ok,
           fmt("p=5 shadow to t=%.3g: h/(2xi0 sqrt t) = %.4f (within 5%%: %s), alpha = %.4f r2 %.2f (in [0.10, 0.483]: %s); "
               "p=1 shadow to t=%.3g: alpha = %.4f (<= 0.05: %s)",
               last.t, ratio, std::fabs(ratio - 1.0) <= 0.05 ? "yes" : "no", f5.alpha, f5.r2, band ? "yes" : "no",
               r1.shadow.trace.rows.back().t, f1.alpha, bounded ? "yes" : "no"));
}

std::string summarize(const BarrierReport& r) {
    double worst = INFINITY;
    for (const auto& c : r.conditions)
        if (c.evaluated) worst = std::min(worst, c.margin);
    return fmt("%s %s (min margin %.2e, ordering %zu/%zu violations)", r.kind.c_str(), r.pass() ? "ok" : "FAILED", worst,
               r.ordering_violations, r.ordering_checked);
}

void criterion6(const ShadowRun& r5, const ShadowRun& r1, const ShadowRun& r2, const ShadowRun& r3) {
    const auto t0 = Clock::now();
    const double xi0 = solve_xi0(kMu, kTheta).xi0;
    const BarrierGrid grid{400, 400, 1e6};
    bool all = true;
    std::string detail;

    auto evidence = [](const ShadowRun& r, const InitialDatum& d) {
        return BarrierEvidence{&r.shadow.trace, r.shadow.lo.snapshots.empty() ? nullptr : &r.shadow.lo.snapshots[0], &d};
    };
    {
        const CombustionNonlinearity nl(kTheta, 5.0, kSigma);
        const InitialDatum d = InitialDatum::cosine_bump(kH0, std::sqrt(r5.bracket.nu_lo * r5.bracket.nu_hi));
        const SuperConstants k = super_constants_from_trace(r5.shadow.trace, 5.0, 1.0);
        const BarrierReport sup = supersolution_certify(nl, kMu, xi0, k.M, 1.0, grid, evidence(r5, d));
        SubBarrierParams sp;
        sp.a = 0.5 * hw_admissible_bound(5.0);
        const BarrierReport sub = subsolution_certify_p_gt_3(nl, kMu, sp, grid, evidence(r5, d));
        all = all && sup.pass() && sub.pass() && sup.conditions.size() == 6 && sub.conditions.size() == 5;
        detail += "p=5 " + summarize(sup) + ", " + summarize(sub);
    }
    for (const auto* r : {&r1, &r2, &r3}) {
        const double p = r->shadow.trace.meta.p;
        const CombustionNonlinearity nl(kTheta, p, kSigma);
        const InitialDatum d = InitialDatum::cosine_bump(kH0, std::sqrt(r->bracket.nu_lo * r->bracket.nu_hi));
        const BarrierReport sub = subsolution_certify_p_le_3(nl, kMu, xi0, 1e-3, grid, evidence(*r, d));
        all = all && sub.pass() && sub.conditions.size() == 5;
        detail += fmt("; p=%g ", p) + summarize(sub);
    }
    const double secs = seconds_since(t0);
    report(6, all && secs < 60.0, detail + fmt("; certification %.2f s (< 60 s)", secs));
}

void criterion7() {
    const double p = 5.0;
    const double gamma = 0.5 * hw_admissible_bound(p);
    const SelfSimilarProfile phi = haraux_weissler(p, gamma);
    double min_phi = INFINITY;
    for (int k = 0; k <= 5000; ++k) min_phi = std::min(min_phi, phi.value_at(0.01 * k));
    auto residual = [&](double hs) {
        double worst = 0.0;
        for (double y = 1.0; y <= 20.0; y += 0.25) {
            const double a = phi.value_at(y - hs), m = phi.value_at(y), c = phi.value_at(y + hs);
            worst = std::max(worst, std::fabs((a - 2 * m + c) / (hs * hs) + 0.5 * y * (c - a) / (2 * hs) + m / (p - 1.0) +
                                              std::pow(m, p)));
        }
        return worst;
    };
    const double r1 = residual(0.1), r2 = residual(0.05), r3 = residual(0.025);
    const double o1 = std::log2(r1 / r2), o2 = std::log2(r2 / r3);
    const bool ok = phi.positivity_verified() && min_phi > 0.0 && std::fabs(o1 - 2.0) < 0.1 && std::fabs(o2 - 2.0) < 0.1;
    report(7, ok,
           fmt("p=5 gamma=%.4f: min phi on [0,50] = %.3e, FD residual %.2e -> %.2e -> %.2e, observed orders %.3f, %.3f",
               gamma, min_phi, r1, r2, r3, o1, o2));
}

void criterion8() {
    const auto t0 = Clock::now();
    const CombustionNonlinearity nl(kTheta, 5.0, kSigma);
    const auto d = InitialDatum::cosine_bump(kH0, 0.2);  // ν < θ: f(u) = 0 throughout
    SolverControls c;
    c.N = 800;
    const double I0 = stefan_invariant(initial_state(d, c, kMu), kMu);
    SolverState s;
    const double T = 5.0;
    run(d, nl, kMu, T, c, {}, &s);
    const double drift = std::fabs(stefan_invariant(s, kMu) - I0) / T;
    report(8, drift < 1e-6 && s.max_u() < kTheta,
           fmt("N=800 nu=0.2 t in [0,%g]: invariant drift %.3e per unit time (< 1e-6), max u %.3f < theta, %.1f s", T,
               drift, s.max_u(), seconds_since(t0)));
}

void guarded(int id, const std::function<void()>& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        report(id, false, std::string("exception: ") + e.what());
    }
}

}  // namespace

int main() {
    guarded(1, criterion1);
    guarded(2, criterion2);
    guarded(3, criterion3);

    std::optional<ShadowRun> r5, r1, r2, r3;
    double bisect5 = 0.0;
    try {
        const auto t0 = Clock::now();
        const RunSetup s = setup_for(5.0, 400);
        ShadowRun r;
        r.bracket = bisect_threshold(s, 500.0, 1200.0, {});
        bisect5 = seconds_since(t0);
        r.shadow = near_critical_trace(s, r.bracket, 1e9);
        r.seconds = seconds_since(t0);
        r5 = std::move(r);
        r1 = shadow_for(1.0, 4.0, 10.0, 400);
        r2 = shadow_for(2.0, 16.0, 32.0, 400);
        r3 = shadow_for(3.0, 64.0, 128.0, 400);
    } catch (const std::exception& e) {
        std::printf("shadow generation failed: %s\n", e.what());
    }
    if (r5) guarded(4, [&] { criterion4(*r5, bisect5); });
    else report(4, false, "no bracket");
    if (r5 && r1) guarded(5, [&] { criterion5(*r5, *r1); });
    else report(5, false, "no shadow traces");
    if (r5 && r1 && r2 && r3) guarded(6, [&] { criterion6(*r5, *r1, *r2, *r3); });
    else report(6, false, "no shadow traces");
    guarded(7, criterion7);
    guarded(8, criterion8);

    if (r5 && r1 && r2 && r3)
        std::printf("shadows: p=5 divergence t=%.3g (%.0f s), p=1 t=%.3g, p=2 t=%.3g, p=3 t=%.3g (%.0f s total)\n",
                    r5->shadow.divergence_time, r5->seconds, r1->shadow.divergence_time, r2->shadow.divergence_time,
                    r3->shadow.divergence_time, r5->seconds + r1->seconds + r2->seconds + r3->seconds);
    std::printf("%d of 8 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
