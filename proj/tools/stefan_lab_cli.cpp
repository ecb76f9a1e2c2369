// stefan_lab: batch front-end for the free boundary combustion toolkit.
//
//   stefan_lab <subcommand> [--config FILE] [--set key.path=value ...] [shortcut flags]
//
// Every subcommand writes into <root>/<subcommand>-<UTC timestamp>, where root is
// $STEFAN_LAB_OUT if set, else the config's `output`. The directory holds the artifacts
// and manifest.json (resolved config, version, wall-clock, file list, results).
// Exit codes: 0 ok, 2 configuration error, 3 numerical failure, 1 anything else.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stefan_lab/stefan_lab.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace stefan_lab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

// ---------------------------------------------------------------------------
// Config plumbing
// ---------------------------------------------------------------------------

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> sets;
    std::map<std::string, std::string> shortcuts;  // dotted key -> value, filled by CLI11
};

void add_common(CLI::App* sub, CommonArgs& a) {
    sub->add_option("--config", a.config_path, "Run configuration file")->check(CLI::ExistingFile);
    sub->add_option("--set", a.sets, "Override a config key, e.g. --set solver.N=800 (repeatable)");
}

// Shortcut flag `--name` bound to a dotted config key.
void add_shortcut(CLI::App* sub, CommonArgs& a, const std::string& flag, const std::string& key,
                  const std::string& help) {
    sub->add_option_function<std::string>(
        "--" + flag, [&a, key](const std::string& v) { a.shortcuts[key] = v; }, help + " (" + key + ")");
}

void add_physics_shortcuts(CLI::App* sub, CommonArgs& a) {
    add_shortcut(sub, a, "theta", "nonlinearity.theta", "Ignition threshold");
    add_shortcut(sub, a, "p", "nonlinearity.p", "Germ exponent");
    add_shortcut(sub, a, "sigma", "nonlinearity.sigma", "Germ width");
    add_shortcut(sub, a, "mu", "problem.mu", "Stefan coefficient");
}

void add_solver_shortcuts(CLI::App* sub, CommonArgs& a) {
    add_shortcut(sub, a, "N", "solver.N", "Grid intervals");
    add_shortcut(sub, a, "t-end", "solver.t_end", "Final time");
    add_shortcut(sub, a, "h0", "problem.h0", "Initial half-width");
}

RunConfig resolve_config(const CommonArgs& a) {
    std::string text;
    if (!a.config_path.empty()) {
        std::ifstream in(a.config_path);
        if (!in) throw ConfigError("--config", "cannot open " + a.config_path);
        std::stringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    ConfigOverrides ov;
    for (const auto& s : a.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("--set", "expected key.path=value, got '" + s + "'");
        ov.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    for (const auto& [k, v] : a.shortcuts) ov.emplace_back(k, v);
    return parse_run_config(text, ov);
}

json config_json(const RunConfig& c) {
    const auto& n = c.nonlinearity;
    const auto& pr = c.problem;
    const auto& s = c.solver;
    const auto& k = c.classification;
    const auto& a = c.asymptotics;
    return {
        {"output", c.output},
        {"nonlinearity", {{"theta", n.theta}, {"p", n.p}, {"sigma", n.sigma}, {"bridge_peak", n.bridge_peak}}},
        {"problem", {{"mu", pr.mu}, {"h0", pr.h0}, {"nu", pr.nu}, {"datum", pr.datum}}},
        {"solver",
         {{"N", s.N}, {"t_start", s.t_start}, {"t_end", s.t_end}, {"c1", s.c1}, {"c2", s.c2},
          {"trace_ratio", s.trace_ratio}, {"max_speed_change", s.max_speed_change}}},
        {"classification",
         {{"delta_v_factor", k.delta_v_factor}, {"dwell", k.dwell}, {"rate_factor", k.rate_factor},
          {"barrier", k.barrier}, {"nu_lo", k.nu_lo}, {"nu_hi", k.nu_hi}, {"target_width", k.target_width},
          {"t_max", k.t_max}, {"shadow_horizon", k.shadow_horizon}}},
        {"asymptotics",
         {{"fit_decades", a.fit_decades}, {"fit_min_rows", a.fit_min_rows}, {"grid_nt", a.grid_nt},
          {"grid_nx", a.grid_nx}, {"T0", a.T0}, {"T", a.T}, {"eps", a.eps},
          {"gamma_fraction", a.gamma_fraction}, {"sigma1_fraction", a.sigma1_fraction}}},
    };
}

CombustionNonlinearity make_nonlinearity(const RunConfig& c) {
    return CombustionNonlinearity(c.nonlinearity.theta, c.nonlinearity.p, c.nonlinearity.sigma,
                                  c.nonlinearity.bridge_peak);
}

SolverControls make_controls(const RunConfig& c) {
    SolverControls sc;
    sc.N = c.solver.N;
    sc.c1 = c.solver.c1;
    sc.c2 = c.solver.c2;
    sc.t_start = c.solver.t_start;
    sc.trace_ratio = c.solver.trace_ratio;
    sc.max_speed_change = c.solver.max_speed_change;
    return sc;
}

RunSetup make_setup(const RunConfig& c) {
    RunSetup s{make_nonlinearity(c)};
    s.mu = c.problem.mu;
    s.h0 = c.problem.h0;
    s.controls = make_controls(c);
    s.monitors.delta_v_factor = c.classification.delta_v_factor;
    s.monitors.dwell = c.classification.dwell;
    s.monitors.rate_factor = c.classification.rate_factor;
    s.monitors.barrier = c.classification.barrier;
    s.t_max = c.classification.t_max;
    return s;
}

json outcome_json(const ClassificationOutcome& o) {
    json j = {{"verdict", to_string(o.verdict)},
              {"evidence", to_string(o.evidence)},
              {"t_decided", o.t_decided},
              {"h_decided", o.h_decided},
              {"u0_decided", o.u0_decided}};
    j["barrier_b"] = o.barrier_b ? json(*o.barrier_b) : json(nullptr);
    return j;
}

json fit_json(const DeviationFit& f) {
    return {{"fitted", f.fitted}, {"alpha", f.alpha},  {"amplitude", f.amplitude}, {"r2", f.r2},
            {"rows", f.rows},     {"t_a", f.t_a},      {"t_b", f.t_b},           {"nonpositive", f.nonpositive},
            {"note", f.note}};
}

json barrier_json(const BarrierReport& r) {
    json conds = json::array();
    for (const auto& c : r.conditions)
        conds.push_back({{"name", c.name},
                         {"margin", c.margin},
                         {"scale", c.scale},
                         {"samples", c.samples},
                         {"evaluated", c.evaluated},
                         {"pass", c.pass(r.rel_tol)},
                         {"note", c.note}});
    json params = json::object();
    for (const auto& [k, v] : r.parameters) params[k] = v;
    return {{"kind", r.kind},
            {"pass", r.pass()},
            {"rel_tol", r.rel_tol},
            {"parameters", params},
            {"conditions", conds},
            {"ordering", {{"checked", r.ordering_checked}, {"violations", r.ordering_violations}, {"margin", r.ordering_margin}}}};
}

// ---------------------------------------------------------------------------
// Run directory with manifest and failure sentinel
// ---------------------------------------------------------------------------

class RunDirectory {
public:
    RunDirectory(const RunConfig& cfg, const std::string& subcommand, std::vector<std::string> argv)
        : subcommand_(subcommand), argv_(std::move(argv)), config_(cfg), start_(std::chrono::steady_clock::now()) {
        const char* env = std::getenv("STEFAN_LAB_OUT");
        const fs::path root = env && *env ? fs::path(env) : fs::path(cfg.output);
        const std::time_t now = std::time(nullptr);
        std::tm tm{};
        gmtime_r(&now, &tm);
        char stamp[32];
        std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &tm);
        started_ = stamp;
        fs::create_directories(root);
        // suffix keeps concurrent or same-second runs apart
        for (int k = 0;; ++k) {
            fs::path cand = root / (subcommand + "-" + started_ + (k ? "-" + std::to_string(k) : ""));
            std::error_code ec;
            if (fs::create_directory(cand, ec)) {
                dir_ = cand;
                break;
            }
            if (ec) throw std::runtime_error("cannot create run directory " + cand.string() + ": " + ec.message());
        }
    }

    const fs::path& dir() const { return dir_; }

    /// Open an output file and record it in the manifest.
    std::ofstream open(const std::string& rel) {
        const fs::path p = dir_ / rel;
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        std::ofstream os(p);
        if (!os) throw std::runtime_error("cannot write " + p.string());
        files_.push_back(rel);
        return os;
    }

    void write_json(const std::string& rel, const json& j) {
        auto os = open(rel);
        os << j.dump(2) << '\n';
    }

    json& results() { return results_; }
    json& extra() { return extra_; }

    void finish(int code, const std::string& error = {}) {
        if (code != kExitOk) {
            std::ofstream(dir_ / ".failed") << error << '\n';
            files_.push_back(".failed");
        }
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        json m;
        m["tool"] = "stefan_lab";
        m["version"] = kVersion;
        m["subcommand"] = subcommand_;
        m["argv"] = argv_;
        m["started_utc"] = started_;
        m["wall_clock_seconds"] = wall;
        m["status"] = code == kExitOk ? "ok" : "failed";
        m["exit_code"] = code;
        if (!error.empty()) m["error"] = error;
        m["config"] = config_json(config_);
        m["config_text"] = serialize(config_);
        for (auto& [k, v] : extra_.items()) m[k] = v;
        m["results"] = results_;
        m["files"] = files_;
        std::ofstream(dir_ / "manifest.json") << m.dump(2) << '\n';
    }

private:
    std::string subcommand_;
    std::vector<std::string> argv_;
    RunConfig config_;
    std::chrono::steady_clock::time_point start_;
    std::string started_;
    fs::path dir_;
    std::vector<std::string> files_;
    json results_ = json::object();
    json extra_ = json::object();
};

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

void write_trace(RunDirectory& rd, const std::string& rel, const FrontTrace& tr) {
    auto os = rd.open(rel);
    io::write_trace_csv(os, tr);
}

InitialDatum make_datum(const RunConfig& c, SolverControls& sc, double xi0) {
    if (c.problem.datum == "similarity") {
        const StefanSimilarity sim(c.nonlinearity.theta, xi0);
        const double t0 = c.solver.t_start;
        sc.center = CenterCondition::dirichlet;
        sc.center_value = c.nonlinearity.theta;
        return InitialDatum::from_function(sim.front(t0), [sim, t0](double x) { return sim.value(t0, x); });
    }
    return InitialDatum::cosine_bump(c.problem.h0, c.problem.nu);
}

void cmd_xi0(const RunConfig& c, RunDirectory& rd) {
    const FrontConstant fc = solve_xi0(c.problem.mu, c.nonlinearity.theta);
    json j = {{"mu", fc.mu}, {"theta", fc.theta}, {"xi0", fc.xi0}, {"residual", fc.residual},
              {"small_mu_theta_estimate", std::sqrt(fc.mu * fc.theta / 2.0)}};
    rd.write_json("xi0.json", j);
    rd.results() = j;
}

struct ProfilesArgs {
    std::size_t count = 20;
    double b_min = 0.0;  // 0: sigma / 100
    double b_max = 0.0;  // 0: sigma
};

void cmd_profiles(const RunConfig& c, RunDirectory& rd, const ProfilesArgs& a) {
    const CombustionNonlinearity nl = make_nonlinearity(c);
    const double lo = a.b_min > 0.0 ? a.b_min : nl.sigma() / 100.0;
    const double hi = a.b_max > 0.0 ? a.b_max : nl.sigma();
    if (!(lo < hi)) throw ConfigError("--b-min", "must be below --b-max");
    if (a.count < 2) throw ConfigError("--count", "must be >= 2");
    std::vector<io::ProfileRow> rows;
    double worst = 0.0;
    for (std::size_t k = 0; k < a.count; ++k) {
        const double b = lo * std::pow(hi / lo, static_cast<double>(k) / static_cast<double>(a.count - 1));
        io::ProfileRow r{b, l_quadrature(nl, b), l_closed(nl, b), L_of_b(nl, b), L_closed(nl, b)};
        if (b <= nl.sigma())
            worst = std::max({worst, std::fabs(r.l_quad - r.l_closed) / r.l_closed,
                              std::fabs(r.L_quad - r.L_closed) / r.L_closed});
        rows.push_back(r);
    }
    auto os = rd.open("profiles.csv");
    io::write_profiles_csv(os, rows);
    rd.results() = {{"count", rows.size()}, {"b_min", lo}, {"b_max", hi}, {"C_p", C_p(nl.p())},
                    {"max_rel_closed_form_gap_in_germ", worst}};
}

struct HwArgs {
    double gamma = 0.0;  // 0: gamma_fraction * bound
    double dy = 0.05;
};

void cmd_hw_profile(const RunConfig& c, RunDirectory& rd, const HwArgs& a) {
    const double p = c.nonlinearity.p;
    const double bound = hw_admissible_bound(p);
    const double gamma = a.gamma > 0.0 ? a.gamma : c.asymptotics.gamma_fraction * bound;
    if (!(a.dy > 0.0)) throw ConfigError("--dy", "must be > 0");
    const SelfSimilarProfile prof = haraux_weissler(p, gamma);
    auto os = rd.open("hw_profile.csv");
    os << "y,phi\n";
    const auto n = static_cast<std::size_t>(std::floor(prof.y_max() / a.dy + 1e-9));
    double min_phi = INFINITY;
    for (std::size_t k = 0; k <= n; ++k) {
        const double y = std::min(static_cast<double>(k) * a.dy, prof.y_max());
        const double phi = prof.value_at(y);
        min_phi = std::min(min_phi, phi);
        os << io::num(y) << ',' << io::num(phi) << '\n';
    }
    rd.results() = {{"p", p},
                    {"gamma", gamma},
                    {"admissible_bound", bound},
                    {"y_max", prof.y_max()},
                    {"positivity_verified", prof.positivity_verified()},
                    {"min_sampled_phi", min_phi}};
    if (!prof.positivity_verified()) throw NumericalError("hw-profile: phi changed sign before y_max");
}

void cmd_solve(const RunConfig& c, RunDirectory& rd) {
    const CombustionNonlinearity nl = make_nonlinearity(c);
    const FrontConstant fc = solve_xi0(c.problem.mu, nl.theta());
    SolverControls sc = make_controls(c);
    const InitialDatum datum = make_datum(c, sc, fc.xi0);
    const double inv0 = stefan_invariant(initial_state(datum, sc, c.problem.mu), c.problem.mu);
    SolverState last;
    const FrontTrace tr = run(datum, nl, c.problem.mu, c.solver.t_end, sc, {}, &last);
    write_trace(rd, "trace.csv", tr);
    const double inv1 = stefan_invariant(last, c.problem.mu);
    const double span = last.t - c.solver.t_start;
    const double h_sim = 2.0 * fc.xi0 * std::sqrt(last.t);
    rd.results() = {{"t", last.t},
                    {"h", last.h},
                    {"hdot", last.hdot},
                    {"u0", last.u[0]},
                    {"steps", tr.meta.steps},
                    {"rows", tr.rows.size()},
                    {"h_similarity", h_sim},
                    {"h_rel_error_vs_similarity", std::fabs(last.h - h_sim) / h_sim},
                    {"invariant_start", inv0},
                    {"invariant_end", inv1},
                    {"invariant_drift_per_time", std::fabs(inv1 - inv0) / span}};
}

struct ThresholdArgs {
    unsigned jobs = 1;
};

json bracket_json(const ThresholdBracket& br) {
    return {{"nu_lo", br.nu_lo},
            {"nu_hi", br.nu_hi},
            {"nu_star", std::sqrt(br.nu_lo * br.nu_hi)},
            {"width", br.width()},
            {"log_width", br.log_width()},
            {"steps", br.history.size()},
            {"lo_outcome", outcome_json(br.lo_outcome)},
            {"hi_outcome", outcome_json(br.hi_outcome)}};
}

ThresholdBracket run_bisection(const RunConfig& c, const RunSetup& setup, unsigned jobs) {
    BisectionOptions bo;
    bo.target_width = c.classification.target_width;
    bo.jobs = jobs;
    return bisect_threshold(setup, c.classification.nu_lo, c.classification.nu_hi, bo);
}

void cmd_threshold(const RunConfig& c, RunDirectory& rd, const ThresholdArgs& a) {
    if (a.jobs < 1) throw ConfigError("--jobs", "must be >= 1");
    const RunSetup setup = make_setup(c);
    const ThresholdBracket br = run_bisection(c, setup, a.jobs);
    write_trace(rd, "runs/endpoint_lo.csv", br.lo_trace);
    write_trace(rd, "runs/endpoint_hi.csv", br.hi_trace);
    json hist = json::array();
    for (std::size_t k = 0; k < br.history.size(); ++k) {
        const auto& st = br.history[k];
        char name[40];
        std::snprintf(name, sizeof name, "runs/step_%03zu.csv", k);
        write_trace(rd, name, st.trace);
        json h = {{"nu_lo", st.nu_lo}, {"nu_hi", st.nu_hi}, {"nu_mid", st.nu_mid}, {"tainted", st.tainted},
                  {"trace", name}};
        h["outcome"] = outcome_json(st.outcome);
        hist.push_back(h);
    }
    json j = bracket_json(br);
    j["history"] = hist;
    rd.write_json("bracket.json", j);
    rd.results() = bracket_json(br);
    rd.extra()["jobs"] = a.jobs;
}

struct ShadowArgs {
    std::string bracket_path;
    unsigned jobs = 1;
};

void cmd_shadow(const RunConfig& c, RunDirectory& rd, const ShadowArgs& a) {
    RunSetup setup = make_setup(c);
    setup.controls.snapshot_times = {c.asymptotics.T0};
    ThresholdBracket br;
    if (!a.bracket_path.empty()) {
        std::ifstream in(a.bracket_path);
        if (!in) throw ConfigError("--bracket", "cannot open " + a.bracket_path);
        json j;
        try {
            j = json::parse(in);
            br.nu_lo = j.at("nu_lo").get<double>();
            br.nu_hi = j.at("nu_hi").get<double>();
        } catch (const json::exception& e) {
            throw ConfigError("--bracket", std::string("not a bracket file: ") + e.what());
        }
        if (!(br.nu_lo > 0.0 && br.nu_hi > br.nu_lo)) throw ConfigError("--bracket", "need 0 < nu_lo < nu_hi");
    } else {
        br = run_bisection(c, setup, a.jobs);
    }
    ShadowOptions so;
    so.t0 = c.asymptotics.T0;
    const ShadowTrace sh = near_critical_trace(setup, br, c.classification.shadow_horizon, so, a.jobs);
    write_trace(rd, "shadow.csv", sh.trace);
    write_trace(rd, "shadow_lo.csv", sh.lo);
    write_trace(rd, "shadow_hi.csv", sh.hi);
    const double xi0 = solve_xi0(c.problem.mu, c.nonlinearity.theta).xi0;
    json j = {{"nu_lo", br.nu_lo},
              {"nu_hi", br.nu_hi},
              {"divergence_time", sh.divergence_time},
              {"insufficient_precision", sh.insufficient_precision},
              {"rows", sh.trace.rows.size()},
              {"xi0", xi0}};
    if (!sh.trace.rows.empty()) {
        const TraceRow& r = sh.trace.rows.back();
        j["t_end"] = r.t;
        j["h_end"] = r.h;
        j["front_ratio_end"] = r.t > 0.0 ? r.h / (2.0 * xi0 * std::sqrt(r.t)) : 0.0;
    }
    rd.write_json("shadow.json", j);
    rd.results() = j;
    if (sh.insufficient_precision)
        throw NumericalError("shadow: endpoint traces diverge at t = " + std::to_string(sh.divergence_time) +
                             ", before 10 T0; narrow the bracket");
}

struct AsymptoticsArgs {
    std::string trace_path;
    double band_tol = 0.15;
    double ratio_tol = 0.05;
    double bounded_alpha = 0.05;
};

void cmd_asymptotics(const RunConfig& c, RunDirectory& rd, const AsymptoticsArgs& a) {
    const FrontTrace tr = io::read_trace_csv(a.trace_path);
    if (tr.rows.empty()) throw ConfigError("--trace", "trace has no rows");
    const CombustionNonlinearity nl = make_nonlinearity(c);
    const double p = nl.p();
    const double xi0 = solve_xi0(c.problem.mu, nl.theta()).xi0;
    const auto dev = front_deviation(tr, xi0, c.asymptotics.T0);
    const DeviationFit fit = fit_exponent(dev, p, {c.asymptotics.fit_decades, c.asymptotics.fit_min_rows, {}});
    const ExponentBounds bd = fit.bounds;

    // envelopes C t^lo, C t^hi through the fitted curve at the window start
    double anchor_t = fit.t_a, anchor_d = fit.fitted ? fit.amplitude * std::pow(fit.t_a, fit.alpha) : 0.0;
    if (!fit.fitted && !dev.empty()) anchor_t = dev.back().t, anchor_d = std::fabs(dev.back().d);
    std::vector<io::DeviationRow> rows;
    for (const auto& d : dev) {
        const double env_lo = anchor_t > 0.0 ? anchor_d * std::pow(d.t / anchor_t, bd.lo) : 0.0;
        const double env_hi = anchor_t > 0.0 ? anchor_d * std::pow(d.t / anchor_t, bd.hi) : 0.0;
        rows.push_back({d.t, d.d, env_lo, env_hi});
    }
    {
        auto os = rd.open("deviation.csv");
        io::write_deviation_csv(os, rows);
    }

    const TraceRow& last = tr.rows.back();
    const double ratio = last.t > 0.0 ? last.h / (2.0 * xi0 * std::sqrt(last.t)) : 0.0;
    json verdicts = json::object();
    verdicts["front_ratio"] = {{"value", ratio}, {"tolerance", a.ratio_tol},
                               {"pass", std::fabs(ratio - 1.0) <= a.ratio_tol}};
    if (p > 3.0) {
        const double lo = bd.lo - a.band_tol, hi = bd.hi + a.band_tol;
        verdicts["exponent_band"] = {{"alpha", fit.alpha}, {"band", {lo, hi}}, {"fitted", fit.fitted},
                                     {"pass", fit.fitted && fit.alpha >= lo && fit.alpha <= hi}};
    } else if (p == 1.0) {
        // bounded deviation: no growth above a small exponent (a non-positive d counts as bounded)
        const bool bounded = fit.fitted ? fit.alpha <= a.bounded_alpha : fit.nonpositive;
        verdicts["bounded_deviation"] = {{"alpha", fit.alpha}, {"max_alpha", a.bounded_alpha},
                                         {"fitted", fit.fitted}, {"pass", bounded}};
    } else {
        verdicts["exponent_band"] = {{"alpha", fit.alpha}, {"band", {bd.lo, bd.hi}}, {"fitted", fit.fitted},
                                     {"pass", nullptr}, {"note", "no proven band for 1 < p <= 3; reported only"}};
    }
    const ThetaBoundReport tb =
        theta_bound_check(tr, nl, 1e-6, c.asymptotics.sigma1_fraction * nl.sigma(), c.asymptotics.T0);
    verdicts["theta_bound"] = {{"rows_total", tb.rows_total},
                               {"rows_checked", tb.rows_checked},
                               {"rows_skipped_range", tb.rows_skipped_range},
                               {"rows_skipped_absent", tb.rows_skipped_absent},
                               {"violations", tb.violations},
                               {"worst_margin", tb.worst_margin},
                               {"L_sigma1", tb.L_sigma1},
                               {"theta_growth_alpha", tb.theta_growth.alpha},
                               {"theta_growth_fitted", tb.theta_growth.fitted},
                               {"theta_exponent_bound", tb.theta_exponent_bound},
                               {"b_decay", tb.b_decay ? json(*tb.b_decay) : json(nullptr)},
                               {"pass", tb.rows_checked > 0 ? json(tb.violations == 0) : json(nullptr)}};
    if (tb.rows_checked == 0) verdicts["theta_bound"]["note"] = "no row with h > L(sigma1); nothing checked";
    json rep = {{"trace", fs::absolute(a.trace_path).string()},
                {"xi0", xi0},
                {"fit", fit_json(fit)},
                {"bounds", {{"lo", bd.lo}, {"hi", bd.hi}}},
                {"verdicts", verdicts}};
    rd.write_json("report.json", rep);
    rd.results() = rep;
}

struct CertifyArgs {
    std::string kind;
    std::string trace_path;
};

void cmd_certify(const RunConfig& c, RunDirectory& rd, const CertifyArgs& a) {
    const CombustionNonlinearity nl = make_nonlinearity(c);
    const double p = nl.p(), mu = c.problem.mu;
    const double xi0 = solve_xi0(mu, nl.theta()).xi0;
    const double T0 = c.asymptotics.T0;
    SolverControls sc = make_controls(c);
    const InitialDatum datum = make_datum(c, sc, xi0);

    // evidence: the given trace (typically a shadow) or a fresh solve of the configured problem
    FrontTrace tr;
    if (!a.trace_path.empty()) {
        tr = io::read_trace_csv(a.trace_path);
        if (tr.rows.empty()) throw ConfigError("--trace", "trace has no rows");
    } else {
        tr = run(datum, nl, mu, c.solver.t_end, sc);
        write_trace(rd, "evidence_trace.csv", tr);
    }
    SolverState snap;
    run(datum, nl, mu, T0, sc, {}, &snap);

    BarrierGrid grid{c.asymptotics.grid_nt, c.asymptotics.grid_nx, tr.rows.back().t};
    BarrierEvidence ev{&tr, &snap, &datum};
    BarrierReport rep;
    json extra = json::object();
    if (a.kind == "super") {
        if (!(p > 1.0)) throw ConfigError("nonlinearity.p", "super barrier needs p > 1");
        const SuperConstants k = super_constants_from_trace(tr, p, T0);
        extra = {{"K", k.K}, {"M", k.M}};
        rep = supersolution_certify(nl, mu, xi0, k.M, T0, grid, ev);
    } else if (a.kind == "sub") {
        if (p > 3.0) {
            SubBarrierParams sp;
            sp.a = c.asymptotics.gamma_fraction * hw_admissible_bound(p);
            sp.T = c.asymptotics.T;
            sp.T0 = T0;
            sp.eps = c.asymptotics.eps;
            rep = subsolution_certify_p_gt_3(nl, mu, sp, grid, ev);
        } else {
            rep = subsolution_certify_p_le_3(nl, mu, xi0, c.asymptotics.eps, grid, ev);
        }
    } else {
        throw ConfigError("--kind", "must be super or sub");
    }
    json j = barrier_json(rep);
    j["constants"] = extra;
    j["grid"] = {{"nt", grid.nt}, {"nx", grid.nx}, {"t_end", grid.t_end}};
    j["xi0"] = xi0;
    rd.write_json("barrier.json", j);
    rd.results() = {{"kind", rep.kind}, {"pass", rep.pass()}};
    if (!rep.pass()) throw NumericalError("certify-barrier: negative margin or ordering violation");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Free boundary combustion toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    CommonArgs common;
    ProfilesArgs prof_args;
    HwArgs hw_args;
    ThresholdArgs thr_args;
    ShadowArgs sh_args;
    AsymptoticsArgs as_args;
    CertifyArgs cb_args;

    auto* xi0 = app.add_subcommand("xi0", "Front constant of the pure Stefan problem");
    add_common(xi0, common);
    add_physics_shortcuts(xi0, common);

    auto* profiles = app.add_subcommand("profiles", "Stationary profile support l(b), L(b) by quadrature and closed form");
    add_common(profiles, common);
    add_physics_shortcuts(profiles, common);
    profiles->add_option("--count", prof_args.count, "Number of amplitudes");
    profiles->add_option("--b-min", prof_args.b_min, "Smallest amplitude (default sigma/100)");
    profiles->add_option("--b-max", prof_args.b_max, "Largest amplitude (default sigma)");

    auto* hw = app.add_subcommand("hw-profile", "Self-similar decaying profile phi(y)");
    add_common(hw, common);
    add_physics_shortcuts(hw, common);
    hw->add_option("--gamma", hw_args.gamma, "phi(0) (default gamma_fraction times the admissible bound)");
    hw->add_option("--dy", hw_args.dy, "Output spacing in y");

    auto* solve = app.add_subcommand("solve", "Integrate one free boundary run and write its trace");
    add_common(solve, common);
    add_physics_shortcuts(solve, common);
    add_solver_shortcuts(solve, common);
    add_shortcut(solve, common, "nu", "problem.nu", "Datum amplitude");
    add_shortcut(solve, common, "datum", "problem.datum", "cosine or similarity");

    auto* threshold = app.add_subcommand("threshold", "Bisect the spreading/vanishing threshold in nu");
    add_common(threshold, common);
    add_physics_shortcuts(threshold, common);
    add_solver_shortcuts(threshold, common);
    add_shortcut(threshold, common, "nu-lo", "classification.nu_lo", "Vanishing endpoint");
    add_shortcut(threshold, common, "nu-hi", "classification.nu_hi", "Spreading endpoint");
    add_shortcut(threshold, common, "target-width", "classification.target_width", "Relative bracket width");
    add_shortcut(threshold, common, "t-max", "classification.t_max", "Classification horizon");
    threshold->add_option("--jobs", thr_args.jobs, "Concurrent solves")->check(CLI::PositiveNumber);

    auto* shadow = app.add_subcommand("shadow", "Near-critical trace from a threshold bracket");
    add_common(shadow, common);
    add_physics_shortcuts(shadow, common);
    add_solver_shortcuts(shadow, common);
    add_shortcut(shadow, common, "nu-lo", "classification.nu_lo", "Vanishing endpoint");
    add_shortcut(shadow, common, "nu-hi", "classification.nu_hi", "Spreading endpoint");
    add_shortcut(shadow, common, "horizon", "classification.shadow_horizon", "Last time of the endpoint reruns");
    shadow->add_option("--bracket", sh_args.bracket_path, "bracket.json from a threshold run")
        ->check(CLI::ExistingFile);

    auto* asym = app.add_subcommand("asymptotics", "Front deviation fit and bound checks on a trace CSV");
    add_common(asym, common);
    add_physics_shortcuts(asym, common);
    asym->add_option("--trace", as_args.trace_path, "Trace CSV")->required()->check(CLI::ExistingFile);
    asym->add_option("--band-tol", as_args.band_tol, "Widening of the exponent band (p > 3)");
    asym->add_option("--ratio-tol", as_args.ratio_tol, "Tolerance on h / (2 xi0 sqrt t) - 1");
    asym->add_option("--bounded-alpha", as_args.bounded_alpha, "Largest exponent counted as bounded (p = 1)");

    auto* cert = app.add_subcommand("certify-barrier", "Sample barrier inequalities on a space-time grid");
    add_common(cert, common);
    add_physics_shortcuts(cert, common);
    add_solver_shortcuts(cert, common);
    add_shortcut(cert, common, "nu", "problem.nu", "Datum amplitude");
    cert->add_option("--kind", cb_args.kind, "super or sub")->required()->check(CLI::IsMember({"super", "sub"}));
    cert->add_option("--trace", cb_args.trace_path, "Evidence trace CSV (default: solve the configured problem)")
        ->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();

    RunConfig cfg;
    try {
        cfg = resolve_config(common);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    std::unique_ptr<RunDirectory> rd;
    try {
        rd = std::make_unique<RunDirectory>(cfg, name, std::vector<std::string>(argv, argv + argc));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitOther;
    }

    int code = kExitOk;
    std::string err;
    try {
        if (name == "xi0") cmd_xi0(cfg, *rd);
        else if (name == "profiles") cmd_profiles(cfg, *rd, prof_args);
        else if (name == "hw-profile") cmd_hw_profile(cfg, *rd, hw_args);
        else if (name == "solve") cmd_solve(cfg, *rd);
        else if (name == "threshold") cmd_threshold(cfg, *rd, thr_args);
        else if (name == "shadow") cmd_shadow(cfg, *rd, sh_args);
        else if (name == "asymptotics") cmd_asymptotics(cfg, *rd, as_args);
        else if (name == "certify-barrier") cmd_certify(cfg, *rd, cb_args);
    } catch (const ConfigError& e) {
        code = kExitConfig, err = std::string("config error: ") + e.what();
    } catch (const DomainError& e) {
        code = kExitConfig, err = std::string("domain error: ") + e.what();
    } catch (const NumericalError& e) {
        code = kExitNumerical, err = std::string("numerical failure: ") + e.what();
    } catch (const std::exception& e) {
        code = kExitOther, err = std::string("error: ") + e.what();
    }
    rd->finish(code, err);
    if (code != kExitOk) std::cerr << err << '\n';
    std::cout << rd->dir().string() << '\n';
    return code;
}
