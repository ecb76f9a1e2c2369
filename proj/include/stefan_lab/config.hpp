#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "stefan_lab/errors.hpp"

namespace stefan_lab {

// Run configuration text format:
//
//   # comment
//   output = "runs"
//   nonlinearity = { theta = 0.3, p = 5, sigma = 0.1 }
//   solver = {
//     N = 400
//     t_end = 100
//   }
//
// Entries inside a block are separated by commas or newlines. Values are numbers, bare
// words (true, false, symmetric, ...) or double-quoted strings.

struct ConfigNode {
    std::string scalar;
    std::vector<std::pair<std::string, std::shared_ptr<ConfigNode>>> children;  // insertion order
    bool is_block = false;
    int line = 0;

    const ConfigNode* find(const std::string& key) const {
        for (const auto& [k, v] : children)
            if (k == key) return v.get();
        return nullptr;
    }
};

namespace config_detail {

class Parser {
public:
    explicit Parser(std::string text) : s_(std::move(text)) {}

    ConfigNode parse_document() {
        ConfigNode root;
        root.is_block = true;
        parse_entries(root, '\0', "");
        return root;
    }

private:
    [[noreturn]] void fail(const std::string& path, const std::string& what) const {
        throw ConfigError(path.empty() ? "<root>" : path, "line " + std::to_string(line_) + ": " + what);
    }

    void skip_blank(bool newlines) {
        while (pos_ < s_.size()) {
            const char c = s_[pos_];
            if (c == '#') {
                while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
            } else if (c == '\n' && newlines) {
                ++line_, ++pos_;
            } else if (c == ' ' || c == '\t' || c == '\r') {
                ++pos_;
            } else {
                break;
            }
        }
    }

    static bool key_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; }

    void parse_entries(ConfigNode& block, char close, const std::string& path) {
        while (true) {
            skip_blank(true);
            if (pos_ >= s_.size()) {
                if (close) fail(path, "unterminated block");
                return;
            }
            if (close && s_[pos_] == close) {
                ++pos_;
                return;
            }
            if (s_[pos_] == ',') {
                ++pos_;
                continue;
            }
            const std::size_t k0 = pos_;
            while (pos_ < s_.size() && key_char(s_[pos_])) ++pos_;
            if (pos_ == k0) fail(path, std::string("expected a key, found '") + s_[pos_] + "'");
            const std::string key = s_.substr(k0, pos_ - k0);
            const std::string sub = path.empty() ? key : path + "." + key;
            if (block.find(key)) fail(sub, "duplicate key");
            skip_blank(false);
            if (pos_ >= s_.size() || s_[pos_] != '=') fail(sub, "expected '='");
            ++pos_;
            skip_blank(false);
            auto node = std::make_shared<ConfigNode>();
            node->line = line_;
            if (pos_ < s_.size() && s_[pos_] == '{') {
                ++pos_;
                node->is_block = true;
                parse_entries(*node, '}', sub);
            } else {
                node->scalar = parse_scalar(sub);
            }
            block.children.emplace_back(key, std::move(node));
            skip_blank(false);
            if (pos_ < s_.size() && !(s_[pos_] == ',' || s_[pos_] == '\n' || s_[pos_] == '#' || (close && s_[pos_] == close)))
                fail(sub, "unexpected text after value");
        }
    }

    std::string parse_scalar(const std::string& path) {
        if (pos_ < s_.size() && s_[pos_] == '"') {
            std::string out;
            ++pos_;
            while (pos_ < s_.size() && s_[pos_] != '"') {
                if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) ++pos_;
                if (s_[pos_] == '\n') fail(path, "newline in string");
                out += s_[pos_++];
            }
            if (pos_ >= s_.size()) fail(path, "unterminated string");
            ++pos_;
            return out;
        }
        const std::size_t v0 = pos_;
        while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) && s_[pos_] != ',' &&
               s_[pos_] != '}' && s_[pos_] != '#')
            ++pos_;
        if (pos_ == v0) fail(path, "missing value");
        return s_.substr(v0, pos_ - v0);
    }

    std::string s_;
    std::size_t pos_ = 0;
    int line_ = 1;
};

inline std::string format_double(double v) {
    // shortest representation that reads back to the same double
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

}  // namespace config_detail

inline ConfigNode parse_config_text(const std::string& text) { return config_detail::Parser(text).parse_document(); }

struct NonlinearityConfig {
    double theta = 0.3;
    double p = 5.0;
    double sigma = 0.1;
    double bridge_peak = 0.0;
    bool operator==(const NonlinearityConfig&) const = default;
};

struct ProblemConfig {
    double mu = 1.0;
    double h0 = 1.0;
    double nu = 1.0;
    std::string datum = "cosine";  ///< cosine | similarity (pure Stefan profile at solver.t_start)
    bool operator==(const ProblemConfig&) const = default;
};

struct SolverConfig {
    std::size_t N = 400;
    double t_start = 0.0;
    double t_end = 100.0;
    double c1 = 2.0;
    double c2 = 0.5;
    double trace_ratio = 1.05;
    double max_speed_change = 0.25;
    bool operator==(const SolverConfig&) const = default;
};

struct ClassificationConfig {
    double delta_v_factor = 0.02;
    double dwell = 5.0;
    double rate_factor = 2.0;
    bool barrier = true;
    double nu_lo = 500.0;
    double nu_hi = 1200.0;
    double target_width = 1e-10;
    double t_max = 1e9;
    double shadow_horizon = 1e9;
    bool operator==(const ClassificationConfig&) const = default;
};

struct AsymptoticsConfig {
    double fit_decades = 1.0;
    std::size_t fit_min_rows = 20;
    std::size_t grid_nt = 400;
    std::size_t grid_nx = 400;
    double T0 = 1.0;
    double T = 1.0;
    double eps = 1e-3;
    double gamma_fraction = 0.5;  ///< a = γ = fraction · admissibility bound
    double sigma1_fraction = 0.5; ///< σ₁ = fraction · σ for invert_L
    bool operator==(const AsymptoticsConfig&) const = default;
};

struct RunConfig {
    std::string output = "runs";
    NonlinearityConfig nonlinearity;
    ProblemConfig problem;
    SolverConfig solver;
    ClassificationConfig classification;
    AsymptoticsConfig asymptotics;
    bool operator==(const RunConfig&) const = default;

    /// Domain checks with field-path diagnostics.
    void validate() const {
        const auto& n = nonlinearity;
        if (!(n.theta > 0.0 && n.theta < 1.0)) throw ConfigError("nonlinearity.theta", "must lie in (0, 1)");
        if (!(n.p >= 1.0) || !std::isfinite(n.p)) throw ConfigError("nonlinearity.p", "must be a finite real >= 1");
        if (!(n.sigma > 0.0)) throw ConfigError("nonlinearity.sigma", "must be > 0");
        if (!(n.theta + n.sigma < 1.0)) throw ConfigError("nonlinearity.sigma", "theta + sigma must be < 1");
        if (!(n.bridge_peak >= 0.0) || !std::isfinite(n.bridge_peak))
            throw ConfigError("nonlinearity.bridge_peak", "must be finite and >= 0");
        if (!(problem.mu > 0.0)) throw ConfigError("problem.mu", "must be > 0");
        if (!(problem.h0 > 0.0)) throw ConfigError("problem.h0", "must be > 0");
        if (!(problem.nu > 0.0)) throw ConfigError("problem.nu", "must be > 0");
        if (problem.datum != "cosine" && problem.datum != "similarity")
            throw ConfigError("problem.datum", "must be cosine or similarity");
        if (problem.datum == "similarity" && !(solver.t_start > 0.0))
            throw ConfigError("solver.t_start", "similarity datum needs t_start > 0");
        if (!(solver.t_start >= 0.0)) throw ConfigError("solver.t_start", "must be >= 0");
        if (solver.N < 4) throw ConfigError("solver.N", "must be >= 4");
        if (!(solver.t_end > solver.t_start)) throw ConfigError("solver.t_end", "must exceed t_start");
        if (!(solver.c1 > 0.0)) throw ConfigError("solver.c1", "must be > 0");
        if (!(solver.c2 > 0.0)) throw ConfigError("solver.c2", "must be > 0");
        if (!(solver.trace_ratio > 1.0)) throw ConfigError("solver.trace_ratio", "must be > 1");
        if (!(solver.max_speed_change > 0.0)) throw ConfigError("solver.max_speed_change", "must be > 0");
        const auto& c = classification;
        if (!(c.delta_v_factor > 0.0 && c.delta_v_factor < 1.0))
            throw ConfigError("classification.delta_v_factor", "must lie in (0, 1)");
        if (!(c.dwell >= 0.0)) throw ConfigError("classification.dwell", "must be >= 0");
        if (!(c.rate_factor > 0.0)) throw ConfigError("classification.rate_factor", "must be > 0");
        if (!(c.nu_lo > 0.0)) throw ConfigError("classification.nu_lo", "must be > 0");
        if (!(c.nu_hi > c.nu_lo)) throw ConfigError("classification.nu_hi", "must exceed nu_lo");
        if (!(c.target_width > 0.0 && c.target_width < 1.0))
            throw ConfigError("classification.target_width", "must lie in (0, 1)");
        if (!(c.t_max > 0.0)) throw ConfigError("classification.t_max", "must be > 0");
        if (!(c.shadow_horizon > 0.0)) throw ConfigError("classification.shadow_horizon", "must be > 0");
        const auto& a = asymptotics;
        if (!(a.fit_decades > 0.0)) throw ConfigError("asymptotics.fit_decades", "must be > 0");
        if (a.fit_min_rows < 2) throw ConfigError("asymptotics.fit_min_rows", "must be >= 2");
        if (a.grid_nt < 2) throw ConfigError("asymptotics.grid_nt", "must be >= 2");
        if (a.grid_nx < 2) throw ConfigError("asymptotics.grid_nx", "must be >= 2");
        if (!(a.T0 > 0.0)) throw ConfigError("asymptotics.T0", "must be > 0");
        if (!(a.T > 0.0)) throw ConfigError("asymptotics.T", "must be > 0");
        if (!(a.eps > 0.0)) throw ConfigError("asymptotics.eps", "must be > 0");
        if (!(a.gamma_fraction > 0.0 && a.gamma_fraction < 1.0))
            throw ConfigError("asymptotics.gamma_fraction", "must lie in (0, 1)");
        if (!(a.sigma1_fraction > 0.0 && a.sigma1_fraction < 1.0))
            throw ConfigError("asymptotics.sigma1_fraction", "must lie in (0, 1)");
        if (output.empty()) throw ConfigError("output", "must not be empty");
    }
};

namespace config_detail {

class Binder {
public:
    Binder(const ConfigNode& node, std::string path) : node_(node), path_(std::move(path)) {}

    void finish() const {
        for (const auto& [k, v] : node_.children)
            if (!used_.count(k)) throw ConfigError(sub(k), "unknown key");
    }

    void number(const std::string& key, double& out) {
        if (const ConfigNode* n = scalar(key)) {
            double v = 0.0;
            const char* b = n->scalar.data();
            const char* e = b + n->scalar.size();
            auto res = std::from_chars(b, e, v);
            if (res.ec != std::errc() || res.ptr != e) throw ConfigError(sub(key), "not a number: '" + n->scalar + "'");
            out = v;
        }
    }

    void count(const std::string& key, std::size_t& out) {
        if (const ConfigNode* n = scalar(key)) {
            std::size_t v = 0;
            const char* b = n->scalar.data();
            const char* e = b + n->scalar.size();
            auto res = std::from_chars(b, e, v);
            if (res.ec != std::errc() || res.ptr != e)
                throw ConfigError(sub(key), "not a non-negative integer: '" + n->scalar + "'");
            out = v;
        }
    }

    void boolean(const std::string& key, bool& out) {
        if (const ConfigNode* n = scalar(key)) {
            if (n->scalar == "true") out = true;
            else if (n->scalar == "false") out = false;
            else throw ConfigError(sub(key), "expected true or false, found '" + n->scalar + "'");
        }
    }

    void text(const std::string& key, std::string& out) {
        if (const ConfigNode* n = scalar(key)) out = n->scalar;
    }

    const ConfigNode* block(const std::string& key) {
        const ConfigNode* n = node_.find(key);
        if (!n) return nullptr;
        used_.insert({key, true});
        if (!n->is_block) throw ConfigError(sub(key), "expected a { ... } block");
        return n;
    }

    std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    const ConfigNode* scalar(const std::string& key) {
        const ConfigNode* n = node_.find(key);
        if (!n) return nullptr;
        used_.insert({key, true});
        if (n->is_block) throw ConfigError(sub(key), "expected a scalar, found a block");
        return n;
    }

    const ConfigNode& node_;
    std::string path_;
    std::map<std::string, bool> used_;
};

}  // namespace config_detail

/// Set a dotted key ("solver.N") in a parsed tree, creating blocks as needed.
inline void apply_override(ConfigNode& root, const std::string& dotted, const std::string& value) {
    ConfigNode* node = &root;
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = dotted.find('.', start);
        const std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty()) throw ConfigError(dotted, "malformed key");
        ConfigNode* child = nullptr;
        for (auto& [k, v] : node->children)
            if (k == key) child = v.get();
        if (!child) {
            node->children.emplace_back(key, std::make_shared<ConfigNode>());
            child = node->children.back().second.get();
        }
        if (dot == std::string::npos) {
            if (child->is_block) throw ConfigError(dotted, "is a block, not a scalar");
            child->scalar = value;
            return;
        }
        if (!child->is_block && !child->scalar.empty()) throw ConfigError(dotted, "is a scalar, not a block");
        child->is_block = true;
        node = child;
        start = dot + 1;
    }
}

using ConfigOverrides = std::vector<std::pair<std::string, std::string>>;

/// Parse and validate; absent keys keep their defaults, unknown keys are rejected.
/// Overrides (dotted key, value) are applied to the tree before binding.
inline RunConfig parse_run_config(const std::string& text, const ConfigOverrides& overrides = {}) {
    ConfigNode root = parse_config_text(text);
    for (const auto& [k, v] : overrides) apply_override(root, k, v);
    RunConfig cfg;
    {
        config_detail::Binder top(root, "");
        top.text("output", cfg.output);
        if (const ConfigNode* n = top.block("nonlinearity")) {
            config_detail::Binder b(*n, "nonlinearity");
            b.number("theta", cfg.nonlinearity.theta);
            b.number("p", cfg.nonlinearity.p);
            b.number("sigma", cfg.nonlinearity.sigma);
            b.number("bridge_peak", cfg.nonlinearity.bridge_peak);
            b.finish();
        }
        if (const ConfigNode* n = top.block("problem")) {
            config_detail::Binder b(*n, "problem");
            b.number("mu", cfg.problem.mu);
            b.number("h0", cfg.problem.h0);
            b.number("nu", cfg.problem.nu);
            b.text("datum", cfg.problem.datum);
            b.finish();
        }
        if (const ConfigNode* n = top.block("solver")) {
            config_detail::Binder b(*n, "solver");
            b.count("N", cfg.solver.N);
            b.number("t_start", cfg.solver.t_start);
            b.number("t_end", cfg.solver.t_end);
            b.number("c1", cfg.solver.c1);
            b.number("c2", cfg.solver.c2);
            b.number("trace_ratio", cfg.solver.trace_ratio);
            b.number("max_speed_change", cfg.solver.max_speed_change);
            b.finish();
        }
        if (const ConfigNode* n = top.block("classification")) {
            config_detail::Binder b(*n, "classification");
            auto& c = cfg.classification;
            b.number("delta_v_factor", c.delta_v_factor);
            b.number("dwell", c.dwell);
            b.number("rate_factor", c.rate_factor);
            b.boolean("barrier", c.barrier);
            b.number("nu_lo", c.nu_lo);
            b.number("nu_hi", c.nu_hi);
            b.number("target_width", c.target_width);
            b.number("t_max", c.t_max);
            b.number("shadow_horizon", c.shadow_horizon);
            b.finish();
        }
        if (const ConfigNode* n = top.block("asymptotics")) {
            config_detail::Binder b(*n, "asymptotics");
            auto& a = cfg.asymptotics;
            b.number("fit_decades", a.fit_decades);
            b.count("fit_min_rows", a.fit_min_rows);
            b.count("grid_nt", a.grid_nt);
            b.count("grid_nx", a.grid_nx);
            b.number("T0", a.T0);
            b.number("T", a.T);
            b.number("eps", a.eps);
            b.number("gamma_fraction", a.gamma_fraction);
            b.number("sigma1_fraction", a.sigma1_fraction);
            b.finish();
        }
        top.finish();
    }
    cfg.validate();
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

/// Canonical text form; parse_run_config(serialize(c)) == c.
inline std::string serialize(const RunConfig& c) {
    using config_detail::format_double;
    std::ostringstream o;
    o << "output = " << config_detail::quote(c.output) << "\n";
    const auto& n = c.nonlinearity;
    o << "nonlinearity = { theta = " << format_double(n.theta) << ", p = " << format_double(n.p)
      << ", sigma = " << format_double(n.sigma) << ", bridge_peak = " << format_double(n.bridge_peak) << " }\n";
    o << "problem = { mu = " << format_double(c.problem.mu) << ", h0 = " << format_double(c.problem.h0)
      << ", nu = " << format_double(c.problem.nu) << ", datum = " << config_detail::quote(c.problem.datum) << " }\n";
    const auto& s = c.solver;
    o << "solver = {\n  N = " << s.N << "\n  t_start = " << format_double(s.t_start) << "\n  t_end = " << format_double(s.t_end) << "\n  c1 = " << format_double(s.c1)
      << "\n  c2 = " << format_double(s.c2) << "\n  trace_ratio = " << format_double(s.trace_ratio)
      << "\n  max_speed_change = " << format_double(s.max_speed_change) << "\n}\n";
    const auto& k = c.classification;
    o << "classification = {\n  delta_v_factor = " << format_double(k.delta_v_factor)
      << "\n  dwell = " << format_double(k.dwell) << "\n  rate_factor = " << format_double(k.rate_factor)
      << "\n  barrier = " << (k.barrier ? "true" : "false") << "\n  nu_lo = " << format_double(k.nu_lo)
      << "\n  nu_hi = " << format_double(k.nu_hi) << "\n  target_width = " << format_double(k.target_width)
      << "\n  t_max = " << format_double(k.t_max) << "\n  shadow_horizon = " << format_double(k.shadow_horizon)
      << "\n}\n";
    const auto& a = c.asymptotics;
    o << "asymptotics = {\n  fit_decades = " << format_double(a.fit_decades) << "\n  fit_min_rows = " << a.fit_min_rows
      << "\n  grid_nt = " << a.grid_nt << "\n  grid_nx = " << a.grid_nx << "\n  T0 = " << format_double(a.T0)
      << "\n  T = " << format_double(a.T) << "\n  eps = " << format_double(a.eps)
      << "\n  gamma_fraction = " << format_double(a.gamma_fraction)
      << "\n  sigma1_fraction = " << format_double(a.sigma1_fraction) << "\n}\n";
    return o.str();
}

}  // namespace stefan_lab
