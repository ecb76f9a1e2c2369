#pragma once

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "stefan_lab/asymptotics.hpp"
#include "stefan_lab/errors.hpp"
#include "stefan_lab/fbp_solver.hpp"

namespace stefan_lab::io {

inline constexpr const char* kTraceHeader = "t,h,hdot,u0,theta_pos";
inline constexpr const char* kDeviationHeader = "t,d,env_lo,env_hi";
inline constexpr const char* kProfilesHeader = "b,l_quad,l_closed,L_quad,L_closed";

/// Shortest round-trip decimal form.
inline std::string num(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline void write_trace_csv(std::ostream& os, const FrontTrace& tr) {
    os << kTraceHeader << '\n';
    for (const auto& r : tr.rows) {
        os << num(r.t) << ',' << num(r.h) << ',' << num(r.hdot) << ',' << num(r.u0) << ',';
        if (r.theta_pos) os << num(*r.theta_pos);
        os << '\n';
    }
}

inline void write_trace_csv(const std::string& path, const FrontTrace& tr) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    write_trace_csv(os, tr);
}

namespace detail {

inline std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline double parse_num(const std::string& s, std::size_t line) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ConfigError("trace", "line " + std::to_string(line) + ": bad number '" + s + "'");
    return v;
}

}  // namespace detail

inline FrontTrace read_trace_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || detail::split(line) != detail::split(kTraceHeader))
        throw ConfigError("trace", std::string("missing header '") + kTraceHeader + "'");
    FrontTrace tr;
    std::size_t n = 1;
    while (std::getline(is, line)) {
        ++n;
        if (line.empty() || line == "\r") continue;
        const auto f = detail::split(line);
        if (f.size() != 5) throw ConfigError("trace", "line " + std::to_string(n) + ": expected 5 fields");
        TraceRow r{detail::parse_num(f[0], n), detail::parse_num(f[1], n), detail::parse_num(f[2], n),
                   detail::parse_num(f[3], n), std::nullopt};
        if (!f[4].empty()) r.theta_pos = detail::parse_num(f[4], n);
        if (!tr.rows.empty() && !(r.t > tr.rows.back().t))
            throw ConfigError("trace", "line " + std::to_string(n) + ": times must increase");
        tr.rows.push_back(r);
    }
    return tr;
}

inline FrontTrace read_trace_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("trace", "cannot open " + path);
    return read_trace_csv(is);
}

struct DeviationRow {
    double t;
    double d;
    double env_lo;
    double env_hi;
};

inline void write_deviation_csv(std::ostream& os, const std::vector<DeviationRow>& rows) {
    os << kDeviationHeader << '\n';
    for (const auto& r : rows) os << num(r.t) << ',' << num(r.d) << ',' << num(r.env_lo) << ',' << num(r.env_hi) << '\n';
}

struct ProfileRow {
    double b;
    double l_quad;
    double l_closed;
    double L_quad;
    double L_closed;
};

inline void write_profiles_csv(std::ostream& os, const std::vector<ProfileRow>& rows) {
    os << kProfilesHeader << '\n';
    for (const auto& r : rows)
        os << num(r.b) << ',' << num(r.l_quad) << ',' << num(r.l_closed) << ',' << num(r.L_quad) << ','
           << num(r.L_closed) << '\n';
}

}  // namespace stefan_lab::io
