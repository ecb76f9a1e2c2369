#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stefan_lab/errors.hpp"
#include "stefan_lab/fbp_solver.hpp"
#include "stefan_lab/nonlinearity.hpp"
#include "stefan_lab/profiles.hpp"
#include "stefan_lab/special_functions.hpp"

namespace stefan_lab {

enum class Verdict { spreading, vanishing, undetermined };

enum class Evidence {
    none,
    max_value,     ///< max u < θ - δ_v
    center_value,  ///< dwell + front rate, confirmed by a stationary barrier (width)
    t_max,         ///< horizon reached
};

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::spreading: return "spreading";
        case Verdict::vanishing: return "vanishing";
        default: return "undetermined";
    }
}

inline const char* to_string(Evidence e) {
    switch (e) {
        case Evidence::max_value: return "max-value";
        case Evidence::center_value: return "center-value+width";
        case Evidence::t_max: return "t_max";
        default: return "none";
    }
}

struct MonitorConstants {
    double delta_v_factor = 0.02;  ///< δ_v = factor · θ
    double dwell = 5.0;
    double rate_factor = 2.0;      ///< h' > rate_factor · ξ₀ / √t
    /// Spreading also needs u ≥ V_b on [0, L(b)] with L(b) < h for some tabulated b.
    bool barrier = true;
    std::size_t barrier_profiles = 24;
    double barrier_margin = 1e-3;  ///< required excess of u over V_b, relative to b
};

struct ClassificationOutcome {
    Verdict verdict = Verdict::undetermined;
    double t_decided = 0.0;
    Evidence evidence = Evidence::none;
    double h_decided = 0.0;
    double u0_decided = 0.0;
    std::optional<double> barrier_b;  ///< amplitude of the stationary barrier that confirmed spreading
};

/// Stationary profiles V_b tabulated once per nonlinearity; u ≥ V_b with h > L(b) keeps
/// u(t, 0) ≥ θ + b forever, which rules out vanishing and transition.
class BarrierFamily {
public:
    BarrierFamily(const CombustionNonlinearity& nl, std::size_t count) {
        const double top = 1.0 - nl.theta();
        // amplitudes spaced geometrically toward 1 - θ, where L(b) is smallest
        for (std::size_t k = 0; k < count; ++k) {
            const double frac = (static_cast<double>(k) + 1.0) / (static_cast<double>(count) + 1.0);
            const double b = top * (1.0 - std::pow(0.02, frac));
            try {
                profiles_.push_back(std::make_shared<const PhasePlaneProfile>(nl, b, 200));
            } catch (const std::exception&) {
                // amplitude too close to 1 - θ for the quadrature; skip it
            }
        }
        std::sort(profiles_.begin(), profiles_.end(), [](const auto& a, const auto& b) { return a->L() < b->L(); });
    }

    double smallest_L() const { return profiles_.empty() ? INFINITY : profiles_.front()->L(); }

    /// Largest-support profile lying under the state, if any.
    std::optional<double> certify(const SolverState& s, double margin) const {
        for (const auto& pr : profiles_) {
            if (pr->L() >= s.h) break;
            if (lies_below(*pr, s, margin)) return pr->b();
        }
        return std::nullopt;
    }

private:
    static bool lies_below(const PhasePlaneProfile& pr, const SolverState& s, double margin) {
        const auto& smp = pr.samples();
        const std::size_t N = s.N();
        const double tol = margin * pr.b();
        std::size_t k = 0;
        for (std::size_t i = 0; i <= N; ++i) {
            const double x = s.h * static_cast<double>(i) / static_cast<double>(N);
            if (x >= pr.L()) break;
            while (k + 1 < smp.size() && smp[k + 1].x < x) ++k;
            const auto& a = smp[k];
            const auto& c = smp[std::min(k + 1, smp.size() - 1)];
            const double V = c.x > a.x ? a.V + (c.V - a.V) * (x - a.x) / (c.x - a.x) : a.V;
            if (s.u[i] < V + tol) return false;
        }
        return true;
    }

    std::vector<std::shared_ptr<const PhasePlaneProfile>> profiles_;
};

/// Everything needed to produce one run of the ν-family.
struct RunSetup {
    CombustionNonlinearity nl;
    double mu = 1.0;
    double h0 = 1.0;
    SolverControls controls;
    MonitorConstants monitors;
    double t_max = 1e6;
    std::shared_ptr<const BarrierFamily> barriers;  ///< built on demand when null

    std::shared_ptr<const BarrierFamily> barrier_family() const {
        if (barriers) return barriers;
        return std::make_shared<const BarrierFamily>(nl, monitors.barrier_profiles);
    }
};

struct ClassifiedRun {
    ClassificationOutcome outcome;
    FrontTrace trace;
};

/// Run u₀ = ν·cos(πx/2h₀) under the trichotomy monitors.
inline ClassifiedRun classify(const RunSetup& setup, double nu, const InitialDatum* datum_override = nullptr) {
    const CombustionNonlinearity& nl = setup.nl;
    const MonitorConstants& m = setup.monitors;
    const double theta = nl.theta();
    const double xi0 = solve_xi0(setup.mu, theta).xi0;
    const double delta_v = m.delta_v_factor * theta;
    std::shared_ptr<const BarrierFamily> fam = m.barrier ? setup.barrier_family() : nullptr;

    ClassificationOutcome out;
    std::optional<double> dwell_start;
    double next_barrier_check = 0.0;

    auto monitor = [&](const SolverState& s) {
        if (s.max_u() < theta - delta_v) {
            out = {Verdict::vanishing, s.t, Evidence::max_value, s.h, s.u[0], std::nullopt};
            return true;
        }
        if (s.u[0] > theta + nl.sigma()) {
            if (!dwell_start) dwell_start = s.t;
        } else {
            dwell_start.reset();
        }
        if (!dwell_start || s.t - *dwell_start < m.dwell) return false;
        if (!(s.t > 0.0) || !(s.hdot > m.rate_factor * xi0 / std::sqrt(s.t))) return false;
        if (!fam) {
            out = {Verdict::spreading, s.t, Evidence::center_value, s.h, s.u[0], std::nullopt};
            return true;
        }
        if (s.h <= fam->smallest_L() || s.t < next_barrier_check) return false;
        next_barrier_check = s.t * 1.01;
        if (auto b = fam->certify(s, m.barrier_margin)) {
            out = {Verdict::spreading, s.t, Evidence::center_value, s.h, s.u[0], b};
            return true;
        }
        return false;
    };

    const InitialDatum datum = datum_override ? *datum_override : InitialDatum::cosine_bump(setup.h0, nu);
    SolverState last;
    ClassifiedRun result;
    result.trace = run(datum, nl, setup.mu, setup.t_max, setup.controls, monitor, &last);
    if (out.verdict == Verdict::undetermined) out = {Verdict::undetermined, last.t, Evidence::t_max, last.h, last.u[0], std::nullopt};
    result.outcome = out;
    return result;
}

struct BisectionStep {
    double nu_lo;
    double nu_hi;
    double nu_mid;
    ClassificationOutcome outcome;
    bool tainted;  ///< midpoint was undetermined and assigned to the spreading side
    FrontTrace trace;
};

struct ThresholdBracket {
    double nu_lo = 0.0;
    double nu_hi = 0.0;
    ClassificationOutcome lo_outcome;
    ClassificationOutcome hi_outcome;
    FrontTrace lo_trace;  ///< traces of the initial endpoint runs
    FrontTrace hi_trace;
    std::vector<BisectionStep> history;

    double width() const { return (nu_hi - nu_lo) / nu_hi; }
    /// ln(nu_hi / nu_lo); halves exactly with every log-ν bisection step.
    double log_width() const { return std::log(nu_hi / nu_lo); }
};

struct BisectionOptions {
    double target_width = 1e-10;
    std::size_t max_steps = 200;
    unsigned jobs = 1;  ///< concurrent runs (endpoints, then speculative midpoints)
};

/// Log-ν bisection. The initial endpoints are verified (in parallel) before any step.
inline ThresholdBracket bisect_threshold(const RunSetup& setup_in, double nu_lo0, double nu_hi0,
                                         const BisectionOptions& opt = {}) {
    if (!(nu_lo0 > 0.0 && nu_hi0 > nu_lo0)) throw ConfigError("classification.bracket", "need 0 < nu_lo < nu_hi");
    RunSetup setup = setup_in;
    if (setup.monitors.barrier && !setup.barriers) setup.barriers = setup.barrier_family();

    auto launch = [&](double nu) {
        return std::async(opt.jobs > 1 ? std::launch::async : std::launch::deferred,
                          [&setup, nu] { return classify(setup, nu); });
    };
    auto f_lo = launch(nu_lo0);
    auto f_hi = launch(nu_hi0);
    ThresholdBracket br;
    br.nu_lo = nu_lo0;
    br.nu_hi = nu_hi0;
    ClassifiedRun r_lo = f_lo.get();
    ClassifiedRun r_hi = f_hi.get();
    br.lo_outcome = r_lo.outcome;
    br.hi_outcome = r_hi.outcome;
    br.lo_trace = std::move(r_lo.trace);
    br.hi_trace = std::move(r_hi.trace);
    if (br.lo_outcome.verdict != Verdict::vanishing)
        throw ConfigError("classification.bracket.nu_lo",
                          "nu_lo = " + std::to_string(nu_lo0) + " does not vanish (" + to_string(br.lo_outcome.verdict) + ")");
    if (br.hi_outcome.verdict != Verdict::spreading)
        throw ConfigError("classification.bracket.nu_hi",
                          "no spreading at nu_hi = " + std::to_string(nu_hi0) + " (" + to_string(br.hi_outcome.verdict) + ")");

    // Speculative tree bisection: with J jobs, the next floor(log2(J+1)) levels of midpoints
    // are solved concurrently and then walked in order, so the bracket does not depend on J.
    std::size_t levels = 1;
    while ((std::size_t{2} << levels) - 1 <= opt.jobs) ++levels;
    while (br.history.size() < opt.max_steps && br.width() > opt.target_width) {
        // heap-ordered nodes: node k covers the interval reached by the path bits of k
        const std::size_t count = (std::size_t{1} << levels) - 1;
        std::vector<double> lo(count + 1), hi(count + 1), mid(count + 1);
        std::vector<std::future<ClassifiedRun>> fut(count + 1);
        lo[1] = br.nu_lo;
        hi[1] = br.nu_hi;
        for (std::size_t k = 1; k <= count; ++k) {
            mid[k] = std::sqrt(lo[k] * hi[k]);
            if (2 * k + 1 <= count) {
                lo[2 * k] = lo[k], hi[2 * k] = mid[k];      // midpoint spreads
                lo[2 * k + 1] = mid[k], hi[2 * k + 1] = hi[k];  // midpoint vanishes
            }
            fut[k] = launch(mid[k]);
        }
        std::size_t k = 1;
        bool stalled = false;
        while (k <= count && br.history.size() < opt.max_steps && br.width() > opt.target_width) {
            if (!(mid[k] > br.nu_lo && mid[k] < br.nu_hi)) {  // bracket at floating-point resolution
                stalled = true;
                break;
            }
            ClassifiedRun run_k = fut[k].get();
            const ClassificationOutcome oc = run_k.outcome;
            const bool tainted = oc.verdict == Verdict::undetermined;
            br.history.push_back({br.nu_lo, br.nu_hi, mid[k], oc, tainted, std::move(run_k.trace)});
            if (oc.verdict == Verdict::vanishing) {
                br.nu_lo = mid[k];
                br.lo_outcome = oc;
                k = 2 * k + 1;
            } else {
                br.nu_hi = mid[k];
                br.hi_outcome = oc;
                k = 2 * k;
            }
        }
        for (auto& f : fut)
            if (f.valid()) f.wait();  // speculative runs off the taken path are discarded
        if (stalled) break;
    }
    if (br.width() > opt.target_width)
        throw NumericalError("bisect_threshold: width " + std::to_string(br.width()) + " above target");
    return br;
}

/// Scan ν geometrically for the first sign change; nullopt when no spreading is seen.
inline std::optional<std::pair<double, double>> scan_bracket(const RunSetup& setup, double nu_min, double nu_max,
                                                             double factor = 2.0) {
    double prev = nu_min;
    if (classify(setup, prev).outcome.verdict != Verdict::vanishing) return std::nullopt;
    for (double nu = nu_min * factor; nu <= nu_max * (1.0 + 1e-12); nu *= factor) {
        const Verdict v = classify(setup, nu).outcome.verdict;
        if (v == Verdict::spreading) return std::make_pair(prev, nu);
        if (v == Verdict::vanishing) prev = nu;
    }
    return std::nullopt;
}

struct ShadowTrace {
    FrontTrace trace;       ///< agreeing prefix of the two endpoint traces (row-wise mean)
    double divergence_time = 0.0;
    bool insufficient_precision = false;
    FrontTrace lo;
    FrontTrace hi;
};

struct ShadowOptions {
    double rel_h_tol = 1e-3;
    double t0 = 1.0;  ///< analysis start; divergence before 10·t0 is insufficient precision
};

/// Prefix on which the endpoint traces agree in h to rel_h_tol. Both endpoints are rerun
/// under the monitors (so each stops at its verdict) up to t_horizon.
inline ShadowTrace near_critical_trace(const RunSetup& setup_in, const ThresholdBracket& br, double t_horizon,
                                       const ShadowOptions& opt = {}, unsigned jobs = 1) {
    RunSetup setup = setup_in;
    setup.t_max = t_horizon;
    if (setup.monitors.barrier && !setup.barriers) setup.barriers = setup.barrier_family();
    auto go = [&setup](double nu) { return classify(setup, nu).trace; };
    const auto pol = jobs > 1 ? std::launch::async : std::launch::deferred;
    auto f_lo = std::async(pol, go, br.nu_lo);
    auto f_hi = std::async(pol, go, br.nu_hi);
    ShadowTrace sh;
    sh.lo = f_lo.get();
    sh.hi = f_hi.get();
    sh.trace.meta = sh.lo.meta;
    sh.trace.meta.nu = std::sqrt(br.nu_lo * br.nu_hi);
    const std::size_t n = std::min(sh.lo.rows.size(), sh.hi.rows.size());
    sh.divergence_time = sh.lo.rows[n - 1].t;
    for (std::size_t i = 0; i < n; ++i) {
        const TraceRow& a = sh.lo.rows[i];
        const TraceRow& b = sh.hi.rows[i];
        if (std::fabs(a.h - b.h) > opt.rel_h_tol * std::max(a.h, b.h)) {
            sh.divergence_time = a.t;
            break;
        }
        TraceRow r{a.t, 0.5 * (a.h + b.h), 0.5 * (a.hdot + b.hdot), 0.5 * (a.u0 + b.u0), std::nullopt};
        if (a.theta_pos && b.theta_pos) r.theta_pos = 0.5 * (*a.theta_pos + *b.theta_pos);
        sh.trace.rows.push_back(r);
    }
    sh.insufficient_precision = sh.divergence_time < 10.0 * opt.t0;
    return sh;
}

}  // namespace stefan_lab
