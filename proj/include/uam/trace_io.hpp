#pragma once

// Trace CSV, summary JSON and comparison report writers.
//
// Trace CSV columns, in order (n = joint count, j in {p, q, a}):
//   t
//   x y z phi theta psi alpha1..alphan                      state chi
//   dx dy dz dphi dtheta dpsi dalpha1..dalphan              chi_dot
//   x_d y_d z_d phi_d theta_d psi_d alpha1_d..alphan_d      reference (commanded roll/pitch)
//   e_x e_y e_z e_phi e_theta e_psi e_alpha1..e_alphan      controller errors
//   r_p1..r_p3 r_q1..r_q3 r_a1..r_an                        sliding variables
//   K0_j K1_j K2_j K3_j zeta_j rho_j                        adaptive gains per subsystem
//   tau_1..tau_(6+n)                                        applied generalized input
//   u1 V_xi payload_mass
// Numbers use %.17g so identical runs give byte-identical files.

#include "uam/adaptive_gains.hpp"
#include "uam/analysis.hpp"
#include "uam/config.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

namespace uam {

inline std::vector<std::string> trace_columns(int n) {
    std::vector<std::string> cols{"t"};
    const std::vector<std::string> base{"x", "y", "z", "phi", "theta", "psi"};
    auto coords = [&](const std::string& prefix, const std::string& suffix) {
        for (const auto& b : base) cols.push_back(prefix + b + suffix);
        for (int i = 1; i <= n; ++i) cols.push_back(prefix + "alpha" + std::to_string(i) + suffix);
    };
    coords("", "");
    coords("d", "");
    coords("", "_d");
    coords("e_", "");
    for (int i = 1; i <= 3; ++i) cols.push_back("r_p" + std::to_string(i));
    for (int i = 1; i <= 3; ++i) cols.push_back("r_q" + std::to_string(i));
    for (int i = 1; i <= n; ++i) cols.push_back("r_a" + std::to_string(i));
    for (const char* j : {"p", "q", "a"})
        for (const char* g : {"K0_", "K1_", "K2_", "K3_", "zeta_", "rho_"}) cols.push_back(std::string(g) + j);
    for (int i = 1; i <= 6 + n; ++i) cols.push_back("tau_" + std::to_string(i));
    cols.insert(cols.end(), {"u1", "V_xi", "payload_mass"});
    return cols;
}

namespace io_detail {

inline void put(std::string& line, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    if (!line.empty()) line += ',';
    line += buf;
}

inline void put(std::string& line, const Vec& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) put(line, v(i));
}

}  // namespace io_detail

inline void write_trace_csv(std::ostream& os, const SimTrace& trace) {
    const auto cols = trace_columns(trace.joints);
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << '\n';
    for (const auto& r : trace.records) {
        std::string line;
        io_detail::put(line, r.t);
        io_detail::put(line, r.chi);
        io_detail::put(line, r.chi_dot);
        io_detail::put(line, r.chi_d);
        io_detail::put(line, r.e);
        for (const auto& s : r.sub) io_detail::put(line, s.r);
        for (const auto& s : r.sub) {
            for (double k : s.gains.K_hat) io_detail::put(line, k);
            io_detail::put(line, s.gains.zeta);
            io_detail::put(line, s.rho);
        }
        io_detail::put(line, r.tau);
        io_detail::put(line, r.u1);
        io_detail::put(line, r.V_xi);
        io_detail::put(line, r.payload_mass);
        os << line << '\n';
    }
}

inline void write_trace_csv(const std::string& path, const SimTrace& trace) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write '" + path + "'");
    write_trace_csv(os, trace);
}

inline json rms_to_json(const RmsReport& r) {
    return {{"window", {r.t0, r.t1}},
            {"position_m", cfg_detail::to_json(Vec(r.position))},
            {"attitude_deg", cfg_detail::to_json(Vec(r.attitude))},
            {"arm_deg", cfg_detail::to_json(r.arm)}};
}

inline json gain_bounds_to_json(const GainBoundsReport& g) {
    return {{"pass", g.pass},
            {"K_min", g.K_min},
            {"K_max", g.K_max},
            {"zeta_min", g.zeta_min},
            {"zeta_max", g.zeta_max}};
}

/// Run summary: outcome, RMS after the settle time, ultimate bounds, gain audit and V_xi monitor.
inline json summarize(const SimTrace& trace, double settle_time, const Vec& uub_limits) {
    json s{{"controller", trace.controller},
           {"outcome", to_string(trace.outcome)},
           {"diagnostic", trace.diagnostic},
           {"records", trace.records.size()},
           {"mission_fingerprint", trace.mission_fingerprint},
           {"settle_time", settle_time}};
    if (trace.records.empty()) return s;
    const double t_end = trace.records.back().t;
    if (t_end > settle_time) {
        s["rms"] = rms_to_json(rms_errors(trace, settle_time));
        const UubReport u = uub_check(trace, settle_time, uub_limits);
        s["uub"] = {{"pass", u.pass},
                    {"ultimate_bound", cfg_detail::to_json(u.ultimate_bound)},
                    {"thresholds", cfg_detail::to_json(u.thresholds)}};
        const LyapunovMonitor m = lyapunov_monitor(trace, settle_time);
        s["lyapunov"] = {{"flagged", m.flagged},
                         {"reference_bound", m.reference_bound},
                         {"max_V_xi", m.bound_estimate.back()}};
    }
    const auto gains = gain_traces(trace);
    json g = json::object();
    for (Subsystem sub : {Subsystem::position, Subsystem::attitude, Subsystem::manipulator})
        g[to_string(sub)] = gain_bounds_to_json(verify_gain_bounds(gains[static_cast<std::size_t>(sub)]));
    s["gains"] = g;
    return s;
}

/// Rows: quantity, axis, reference RMS, other RMS, degradation (%).
inline void write_comparison_csv(std::ostream& os, const ComparisonReport& rep) {
    os << "quantity,axis," << rep.reference_name << "," << rep.other_name << ",degradation_pct\n";
    auto row = [&](const char* q, const std::string& axis, double a, double b, double d) {
        std::string line = std::string(q) + "," + axis;
        io_detail::put(line, a);
        io_detail::put(line, b);
        io_detail::put(line, d);
        os << line << '\n';
    };
    const char* pos[] = {"x", "y", "z"};
    const char* att[] = {"phi", "theta", "psi"};
    for (int i = 0; i < 3; ++i)
        row("position_m", pos[i], rep.reference.position(i), rep.other.position(i), rep.degradation.position(i));
    for (int i = 0; i < 3; ++i)
        row("attitude_deg", att[i], rep.reference.attitude(i), rep.other.attitude(i), rep.degradation.attitude(i));
    for (Eigen::Index i = 0; i < rep.reference.arm.size(); ++i)
        row("arm_deg", "alpha" + std::to_string(i + 1), rep.reference.arm(i), rep.other.arm(i), rep.degradation.arm(i));
}

inline json comparison_to_json(const ComparisonReport& rep) {
    return {{"reference", rep.reference_name},
            {"other", rep.other_name},
            {"reference_outcome", to_string(rep.reference_outcome)},
            {"other_outcome", to_string(rep.other_outcome)},
            {"reference_rms", rms_to_json(rep.reference)},
            {"other_rms", rms_to_json(rep.other)},
            {"degradation_pct",
             {{"position", cfg_detail::to_json(Vec(rep.degradation.position))},
              {"attitude", cfg_detail::to_json(Vec(rep.degradation.attitude))},
              {"arm", cfg_detail::to_json(rep.degradation.arm)}}},
            {"reference_not_worse", rep.reference_not_worse()}};
}

}  // namespace uam
