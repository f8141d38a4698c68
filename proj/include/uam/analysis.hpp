#pragma once

// Post-run checks over immutable traces: RMS tables, ultimate-bound checks,
// the V_xi monitor and controller comparisons.

#include "uam/simulation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace uam {

struct RmsReport {
    Vec3 position = Vec3::Zero();  // m
    Vec3 attitude = Vec3::Zero();  // deg
    Vec arm;                       // deg
    double t0 = 0.0;
    double t1 = 0.0;
    std::size_t samples = 0;
};

/// Time-weighted RMS sqrt(1/(t1-t0) int e^2 dt) by the trapezoid rule.
/// Exact for sinusoids sampled uniformly over whole periods.
inline double rms_series(std::span<const double> t, std::span<const double> e) {
    if (t.size() != e.size()) throw InvalidArgument("rms: time and value series differ in length");
    if (t.empty()) throw InvalidArgument("rms: empty window");
    if (t.size() == 1) return std::abs(e[0]);
    double integral = 0.0;
    for (std::size_t k = 1; k < t.size(); ++k) integral += 0.5 * (t[k] - t[k - 1]) * (e[k] * e[k] + e[k - 1] * e[k - 1]);
    const double span = t.back() - t.front();
    if (!(span > 0.0)) throw InvalidArgument("rms: window has zero length");
    return std::sqrt(integral / span);
}

/// Tracking error chi - chi_d per coordinate: metres, then radians with the
/// Euler differences wrapped.
inline Vec coordinate_error(const TraceRecord& r) {
    Vec e = r.chi - r.chi_d;
    for (int i = 3; i < 6; ++i) e(i) = wrap_angle(e(i));
    return e;
}

inline RmsReport rms_errors(const SimTrace& trace, double t0, double t1) {
    if (!(t1 > t0)) throw InvalidArgument("rms: window end must follow its start");
    std::vector<double> t;
    std::vector<Vec> err;
    for (const auto& r : trace.records) {
        if (r.t < t0 - 1e-9 || r.t > t1 + 1e-9) continue;
        t.push_back(r.t);
        err.push_back(coordinate_error(r));
    }
    if (t.empty()) throw InvalidArgument("rms: empty window");
    const auto N = err.front().size();
    std::vector<double> col(t.size());
    Vec out(N);
    for (Eigen::Index i = 0; i < N; ++i) {
        for (std::size_t k = 0; k < t.size(); ++k) col[k] = err[k](i);
        out(i) = rms_series(t, col);
    }
    RmsReport rep;
    rep.position = out.head<3>();
    rep.attitude = out.segment<3>(3).unaryExpr([](double v) { return rad2deg(v); });
    rep.arm = out.tail(N - 6).unaryExpr([](double v) { return rad2deg(v); });
    rep.t0 = t.front();
    rep.t1 = t.back();
    rep.samples = t.size();
    return rep;
}

/// Whole-trace RMS from `t0` to the last record.
inline RmsReport rms_errors(const SimTrace& trace, double t0 = 0.0) {
    if (trace.records.empty()) throw InvalidArgument("rms: empty trace");
    return rms_errors(trace, t0, trace.records.back().t);
}

struct UubReport {
    bool pass = false;
    Vec ultimate_bound;  // max |error| per axis after the settle time
    Vec thresholds;
    double first_violation = std::numeric_limits<double>::quiet_NaN();
    std::string diagnostic;
};

/// PASS iff every |err_i(t)| <= threshold_i for t > settle_time.
inline UubReport uub_check(std::span<const double> t, std::span<const Vec> err, double settle_time,
                           const Vec& thresholds) {
    if (t.size() != err.size()) throw InvalidArgument("uub: time and error series differ in length");
    if (t.empty() || !(t.back() > settle_time)) throw InvalidArgument("uub: trace ends before the settle time");
    UubReport rep;
    rep.thresholds = thresholds;
    rep.ultimate_bound = Vec::Zero(thresholds.size());
    rep.pass = true;
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (t[k] <= settle_time) continue;
        if (err[k].size() != thresholds.size()) throw InvalidArgument("uub: threshold count does not match the error");
        const Vec a = err[k].cwiseAbs();
        if (!a.allFinite()) {
            rep.ultimate_bound.setConstant(std::numeric_limits<double>::infinity());
        } else {
            rep.ultimate_bound = rep.ultimate_bound.cwiseMax(a);
        }
        if (rep.pass && !(a.array() <= thresholds.array()).all()) {
            rep.pass = false;
            rep.first_violation = t[k];
        }
    }
    return rep;
}

/// Thresholds for the 6+n coordinate error: position (m), attitude and arm (deg).
inline Vec uub_thresholds(double position_m, double attitude_deg, double arm_deg, int joints) {
    Vec th(6 + joints);
    th.head<3>().setConstant(position_m);
    th.segment<3>(3).setConstant(deg2rad(attitude_deg));
    th.tail(joints).setConstant(deg2rad(arm_deg));
    return th;
}

inline UubReport uub_check(const SimTrace& trace, double settle_time, const Vec& thresholds) {
    std::vector<double> t;
    std::vector<Vec> err;
    t.reserve(trace.records.size());
    err.reserve(trace.records.size());
    for (const auto& r : trace.records) {
        t.push_back(r.t);
        err.push_back(coordinate_error(r));
    }
    UubReport rep = uub_check(t, err, settle_time, thresholds);
    if (trace.outcome == SimOutcome::diverged) {
        rep.pass = false;
        rep.diagnostic = trace.diagnostic;
    }
    return rep;
}

struct LyapunovMonitor {
    std::vector<double> t;
    std::vector<double> V_xi;
    std::vector<std::array<double, 3>> zeta;
    std::vector<double> bound_estimate;  // running max of V_xi
    double reference_bound = 0.0;        // B: peak V_xi over the settle windows
    bool flagged = false;
    double flag_time = std::numeric_limits<double>::quiet_NaN();
};

/// V_xi = sum_j 1/2 xi_j^T P_j xi_j.
inline double lyapunov_value(std::span<const Vec> xi, std::span<const Mat> P) {
    if (xi.size() != P.size()) throw InvalidArgument("lyapunov: one P per subsystem error is required");
    double v = 0.0;
    for (std::size_t j = 0; j < xi.size(); ++j) v += 0.5 * xi[j].dot(P[j] * xi[j]);
    return v;
}

/// Flags the first tick where V_xi exceeds 10x the bound estimate B. B starts
/// at max(V_xi(0), max V_xi over [0, settle_time]); each time in `epochs`
/// (payload events) opens a new settle window whose peak raises B. Ticks inside
/// a settle window are not checked.
inline LyapunovMonitor lyapunov_monitor(std::span<const double> t, std::span<const double> V,
                                        std::span<const std::array<double, 3>> zeta, double settle_time,
                                        std::span<const double> epochs = {}) {
    if (t.size() != V.size() || (!zeta.empty() && zeta.size() != V.size()))
        throw InvalidArgument("lyapunov monitor: series lengths differ");
    LyapunovMonitor m;
    m.t.assign(t.begin(), t.end());
    m.V_xi.assign(V.begin(), V.end());
    m.zeta.assign(zeta.begin(), zeta.end());
    m.bound_estimate.reserve(V.size());
    std::vector<double> starts{t.empty() ? 0.0 : t.front()};
    starts.insert(starts.end(), epochs.begin(), epochs.end());
    std::sort(starts.begin(), starts.end());
    auto in_window = [&](double tk) {
        return std::any_of(starts.begin(), starts.end(),
                           [&](double s) { return tk >= s - 1e-12 && tk <= s + settle_time; });
    };
    double running = 0.0;
    double bound = 0.0;
    for (std::size_t k = 0; k < V.size(); ++k) {
        if (!(V[k] >= 0.0)) throw InvalidArgument("lyapunov monitor: V_xi must be >= 0");
        running = std::max(running, V[k]);
        m.bound_estimate.push_back(running);
        if (in_window(t[k]) || k == 0) {
            bound = std::max(bound, V[k]);
        } else if (!m.flagged && V[k] > 10.0 * bound) {
            m.flagged = true;
            m.flag_time = t[k];
        }
    }
    m.reference_bound = bound;
    return m;
}

inline LyapunovMonitor lyapunov_monitor(const SimTrace& trace, double settle_time) {
    std::vector<double> t, V, epochs;
    std::vector<std::array<double, 3>> zeta;
    for (const auto& r : trace.records) {
        t.push_back(r.t);
        V.push_back(r.V_xi);
        zeta.push_back({r.sub[0].gains.zeta, r.sub[1].gains.zeta, r.sub[2].gains.zeta});
    }
    for (const auto& ev : trace.applied_events) epochs.push_back(ev.time);
    return lyapunov_monitor(t, V, zeta, settle_time, epochs);
}

/// Per-subsystem adaptive gain traces pulled from a run.
inline std::array<std::vector<AdaptiveGains>, 3> gain_traces(const SimTrace& trace) {
    std::array<std::vector<AdaptiveGains>, 3> out;
    for (const auto& r : trace.records)
        for (std::size_t j = 0; j < 3; ++j) out[j].push_back(r.sub[j].gains);
    return out;
}

/// (other - reference) / other x 100. Zero when both are zero.
inline double degradation(double reference, double other) {
    if (other == 0.0) return reference == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
    return (other - reference) / other * 100.0;
}

struct Degradation {
    Vec3 position = Vec3::Zero();
    Vec3 attitude = Vec3::Zero();
    Vec arm;
};

inline Degradation degradation(const RmsReport& reference, const RmsReport& other) {
    if (reference.arm.size() != other.arm.size()) throw InvalidArgument("degradation: joint counts differ");
    Degradation d;
    for (int i = 0; i < 3; ++i) {
        d.position(i) = degradation(reference.position(i), other.position(i));
        d.attitude(i) = degradation(reference.attitude(i), other.attitude(i));
    }
    d.arm = Vec(reference.arm.size());
    for (Eigen::Index i = 0; i < d.arm.size(); ++i) d.arm(i) = degradation(reference.arm(i), other.arm(i));
    return d;
}

struct ComparisonReport {
    std::string reference_name;
    std::string other_name;
    SimOutcome reference_outcome = SimOutcome::completed;
    SimOutcome other_outcome = SimOutcome::completed;
    RmsReport reference;
    RmsReport other;
    Degradation degradation;

    /// reference RMS <= other RMS on every position axis and arm joint, both runs complete.
    [[nodiscard]] bool reference_not_worse() const {
        if (reference_outcome != SimOutcome::completed || other_outcome != SimOutcome::completed) return false;
        return (reference.position.array() <= other.position.array()).all() &&
               (reference.arm.array() <= other.arm.array()).all();
    }
};

/// Side-by-side RMS over [t0, end of mission]. Both traces must come from the
/// same mission and time grid.
inline ComparisonReport compare_controllers(const SimTrace& reference, const SimTrace& other, double t0) {
    if (reference.mission_fingerprint != other.mission_fingerprint || reference.joints != other.joints)
        throw InvalidArgument("compare: traces come from different missions");
    if (reference.control_period != other.control_period) throw InvalidArgument("compare: traces use different time grids");
    if (reference.records.empty() || other.records.empty()) throw InvalidArgument("compare: empty trace");
    ComparisonReport rep;
    rep.reference_name = reference.controller;
    rep.other_name = other.controller;
    rep.reference_outcome = reference.outcome;
    rep.other_outcome = other.outcome;
    const double t1 = std::min(reference.records.back().t, other.records.back().t);
    rep.reference = rms_errors(reference, t0, t1);
    rep.other = rms_errors(other, t0, t1);
    rep.degradation = degradation(rep.reference, rep.other);
    return rep;
}

/// One row of a flight-trial comparison table: RMS cells and the printed
/// degradation percentages relative to the proposed controller.
struct TrialRow {
    std::string controller;
    std::vector<double> rms;
    std::vector<double> printed_degradation;  // empty for the reference row
};

struct TrialTable {
    std::string quantity;
    std::vector<std::string> axes;
    std::vector<TrialRow> rows;  // last row is the reference controller
};

/// RMS tables reported for the hardware pick-and-place flights.
inline std::vector<TrialTable> flight_trial_tables() {
    return {
        {"position (m)",
         {"x", "y", "z"},
         {{"ASMC-1", {0.15, 0.08, 0.31}, {66.6, 75.0, 70.9}},
          {"ASMC-2", {0.09, 0.05, 0.22}, {44.4, 60.0, 59.0}},
          {"proposed", {0.05, 0.02, 0.09}, {}}}},
        {"attitude (deg)",
         {"phi", "theta", "psi"},
         {{"ASMC-1", {5.98, 5.33, 8.26}, {47.9, 47.2, 63.5}},
          {"ASMC-2", {4.83, 4.74, 5.04}, {35.6, 40.7, 40.2}},
          {"proposed", {3.11, 2.81, 3.01}, {}}}},
        {"arm (deg)",
         {"alpha1", "alpha2"},
         {{"ASMC-1", {2.29, 2.34}, {48.0, 50.4}}, {"ASMC-2", {1.81, 1.73}, {34.2, 32.9}}, {"proposed", {1.19, 1.16}, {}}}},
    };
}

struct AuditCell {
    std::string table;
    std::string controller;
    std::string axis;
    double printed = 0.0;
    double recomputed = 0.0;
    bool pass = false;
};

/// Recomputes every printed degradation cell from the RMS cells of the same table.
inline std::vector<AuditCell> audit_degradation(const std::vector<TrialTable>& tables, double tolerance_points) {
    std::vector<AuditCell> cells;
    for (const auto& table : tables) {
        if (table.rows.empty()) throw InvalidArgument("audit: table without rows");
        const TrialRow& ref = table.rows.back();
        for (std::size_t r = 0; r + 1 < table.rows.size(); ++r) {
            const TrialRow& row = table.rows[r];
            if (row.rms.size() != table.axes.size() || row.printed_degradation.size() != table.axes.size() ||
                ref.rms.size() != table.axes.size())
                throw InvalidArgument("audit: row width does not match the axes");
            for (std::size_t a = 0; a < table.axes.size(); ++a) {
                AuditCell c{table.quantity, row.controller, table.axes[a], row.printed_degradation[a],
                            degradation(ref.rms[a], row.rms[a]), false};
                c.pass = std::abs(c.recomputed - c.printed) <= tolerance_points;
                cells.push_back(c);
            }
        }
    }
    return cells;
}

}  // namespace uam
