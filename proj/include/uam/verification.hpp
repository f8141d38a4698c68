#pragma once

// Acceptance checks. Each returns one pass/fail line with the measured
// numbers; tolerances are fixed here, not taken from configuration.

#include "uam/analysis.hpp"
#include "uam/scenario.hpp"
#include "uam/trace_io.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <chrono>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace uam {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

namespace verify_detail {

class Stopwatch {
public:
    [[nodiscard]] double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

/// dM/dt along chi_dot by Richardson-extrapolated central differences,
/// independent of the per-coordinate partials used to build C.
inline Mat mass_matrix_rate(const Vec& chi, const Vec& chi_dot, const UamParams& params, double h = 1e-3) {
    auto central = [&](double s) {
        return Mat((mass_matrix(chi + s * chi_dot, params) - mass_matrix(chi - s * chi_dot, params)) / (2.0 * s));
    };
    return (4.0 * central(0.5 * h) - central(h)) / 3.0;
}

/// Uniform sample inside the flight envelope of the pick-and-place mission.
inline SystemState random_state(std::mt19937_64& rng, int joints) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double pi = std::numbers::pi;
    Vec chi(6 + joints), chi_dot(6 + joints);
    chi << 2.0 * u(rng), u(rng), 1.0 + u(rng), deg2rad(30.0) * u(rng), deg2rad(30.0) * u(rng), pi * u(rng),
        Vec::NullaryExpr(joints, [&] { return 0.6 * pi * u(rng); });
    for (Eigen::Index i = 0; i < chi_dot.size(); ++i) chi_dot(i) = 2.0 * u(rng);
    return {chi, chi_dot, Vec::Zero(6 + joints), 0.0};
}

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(3);
    os << v;
    return os.str();
}

inline std::string fmt(const Vec& v) {
    std::ostringstream os;
    os.precision(4);
    os << '(';
    for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v(i);
    os << ')';
    return os.str();
}

}  // namespace verify_detail

/// 1. M symmetric and positive definite, M_dot - 2C skew, forward dynamics consistent.
inline CriterionResult check_dynamics_validity(const UamParams& params, int samples = 1000, std::uint64_t seed = 7) {
    using namespace verify_detail;
    Stopwatch sw;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double max_asym = 0.0, min_eig = std::numeric_limits<double>::infinity(), max_skew = 0.0, max_resid = 0.0;
    const int N = params.dof();
    for (int k = 0; k < samples; ++k) {
        const SystemState s = random_state(rng, params.joints());
        const Mat M = mass_matrix(s.chi, params);
        max_asym = std::max(max_asym, (M - M.transpose()).cwiseAbs().maxCoeff());
        min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<Mat>(M).eigenvalues().minCoeff());
        const Mat C = coriolis_matrix(s.chi, s.chi_dot, params);
        const Mat S = mass_matrix_rate(s.chi, s.chi_dot, params) - 2.0 * C;
        const Vec xi = Vec::NullaryExpr(N, [&] { return u(rng); });
        max_skew = std::max(max_skew, std::abs(xi.dot(S * xi)));
        const Vec tau = Vec::NullaryExpr(N, [&] { return 10.0 * u(rng); });
        const Vec d = Vec::NullaryExpr(N, [&] { return 0.1 * u(rng); });
        const Vec acc = forward_dynamics(s.chi, s.chi_dot, tau, d, params);
        const Vec resid = M * acc + C * s.chi_dot + gravity_vector(s.chi, params) + d - tau;
        max_resid = std::max(max_resid, resid.cwiseAbs().maxCoeff());
    }
    const double secs = sw.seconds();
    const bool pass = max_asym <= 1e-12 && min_eig > 0.0 && max_skew <= 1e-8 && max_resid <= 1e-10 && secs < 10.0;
    return {1, "dynamics validity", pass,
            std::to_string(samples) + " states: max|M-M^T|=" + fmt(max_asym) + " min eig(M)=" + fmt(min_eig) +
                " max|xi^T(Mdot-2C)xi|=" + fmt(max_skew) + " max residual=" + fmt(max_resid) + " (" + fmt(secs) + " s)",
            secs};
}

/// 2. Lyapunov solve for the three fixed-gain subsystem designs.
inline CriterionResult check_lyapunov_solve(int joints = 2) {
    using namespace verify_detail;
    Stopwatch sw;
    const ModularControllerConfig c = flight_controller_config(joints);
    bool pass = true;
    std::string detail;
    const std::pair<Subsystem, const SubsystemGains*> subs[] = {
        {Subsystem::position, &c.position}, {Subsystem::attitude, &c.attitude}, {Subsystem::manipulator, &c.manipulator}};
    for (const auto& [label, g] : subs) {
        const SubsystemController sc =
            SubsystemController::configure(label, g->M_bar, g->Lambda, g->lambda1, g->lambda2, g->Q, g->varpi);
        const double res = lyapunov_residual(sc.A, sc.P, sc.Q);
        const double eig = Eigen::SelfAdjointEigenSolver<Mat>(sc.P).eigenvalues().minCoeff();
        pass = pass && res <= 1e-10 && eig > 0.0;
        detail += to_string(label) + ": residual " + fmt(res) + ", min eig(P) " + fmt(eig) + "; ";
    }
    return {2, "Lyapunov solve", pass, detail, sw.seconds()};
}

/// 3. Fully known decoupled plant, no robust term: xi_j(1 s) = exp(A_j) xi_j(0).
inline CriterionResult check_linear_limit(int joints = 2) {
    using namespace verify_detail;
    Stopwatch sw;
    ModularControllerConfig c = flight_controller_config(joints);
    c.options.feedback = FeedbackForm::hurwitz_gains;
    c.options.actuation = PositionActuation::direct_force;
    c.options.robust_term = false;
    c.options.gravity_model.reset();
    ModularController ctrl(c);

    UamParams params;
    params.arm_link_masses = Vec::Constant(joints, 0.2);
    params.arm_link_lengths = Vec::Constant(joints, 0.25);
    params.arm_joint_armature = Vec::Constant(joints, 0.05);
    const Mat M = detail::block_diag(c.position.M_bar, c.attitude.M_bar, c.manipulator.M_bar);

    Mission hold;
    Vec alpha = Vec::Zero(joints);
    alpha(joints - 1) = deg2rad(90.0);
    hold.waypoints = {{0.0, Vec3(0.0, 0.0, 1.0), 0.0, alpha}};
    hold.duration = 1.0;

    SystemState s0 = initial_state(hold);
    Vec offset(6 + joints), rate(6 + joints);
    offset << 0.02, -0.01, 0.02, 0.01, -0.01, 0.01, Vec::Constant(joints, 0.02);
    rate << 0.01, 0.0, -0.01, 0.005, 0.0, -0.005, Vec::Constant(joints, -0.01);
    s0.chi += offset;
    s0.chi_dot = rate;

    SimConfig sim;
    sim.dt_physics = 1e-3;
    sim.control_period = 1e-3;
    sim.duration = 1.0;
    const SimTrace tr = run(hold, params, ctrl, linear_plant(M), sim, s0);
    if (tr.outcome != SimOutcome::completed) return {3, "linear-limit oracle", false, tr.diagnostic, sw.seconds()};

    const TraceRecord& first = tr.records.front();
    const TraceRecord& last = tr.records.back();
    double worst = 0.0;
    std::string detail = "t_end=" + fmt(last.t) + " s;";
    const std::array<std::pair<int, int>, 3> blocks{{{0, 3}, {3, 3}, {6, joints}}};
    const std::array<const SubsystemGains*, 3> gains{&c.position, &c.attitude, &c.manipulator};
    for (std::size_t j = 0; j < 3; ++j) {
        const auto [off, d] = blocks[j];
        const Mat A = build_A(gains[j]->lambda1, gains[j]->lambda2);
        const Vec xi0 = stack_error(first.e.segment(off, d), first.e_dot.segment(off, d));
        const Vec xi1 = stack_error(last.e.segment(off, d), last.e_dot.segment(off, d));
        const Mat E = (A * last.t).exp();
        const double err = (xi1 - E * xi0).cwiseAbs().maxCoeff();
        worst = std::max(worst, err);
        detail += " " + to_string(static_cast<Subsystem>(j)) + " max|xi - exp(At)xi0|=" + fmt(err);
    }
    const double secs = sw.seconds();
    return {3, "linear-limit oracle", worst <= 1e-4 && secs < 5.0, detail + " (" + fmt(secs) + " s)", secs};
}

/// 4. With r = 0 each K_i decays as K_i(0) e^{-nu_i t}; with |r| >= varpi zeta is frozen.
inline CriterionResult check_gain_law(int joints = 2) {
    using namespace verify_detail;
    Stopwatch sw;
    const ModularControllerConfig c = flight_controller_config(joints);
    const double dt = 1e-3;
    double worst = 0.0;
    bool zeta_frozen = true;
    for (const SubsystemGains* g : {&c.position, &c.attitude, &c.manipulator}) {
        const AdaptationParams ap = g->adaptation();
        AdaptiveGains k = g->initial;
        for (int step = 0; step < 1000; ++step) k = integrate_gains(k, ap, {0.0, 0.0, 0.0}, dt, GainIntegration::exponential_euler);
        for (std::size_t i = 0; i < 4; ++i) {
            const double expect = g->initial.K_hat[i] * std::exp(-ap.nu[i] * 1.0);
            worst = std::max(worst, std::abs(k.K_hat[i] - expect) / expect);
        }
        AdaptiveGains z = g->initial;
        for (int step = 0; step < 1000; ++step) {
            const AdaptiveGains next =
                integrate_gains(z, ap, {2.0 * ap.varpi, 0.3, 1.2}, dt, GainIntegration::exponential_euler);
            zeta_frozen = zeta_frozen && next.zeta == z.zeta;
            z = next;
        }
    }
    return {4, "gain-law correctness", worst <= 0.01 && zeta_frozen,
            "max relative K decay error " + fmt(worst) + ", zeta constant outside the layer: " +
                (zeta_frozen ? "yes" : "no"),
            sw.seconds()};
}

/// 5. K_i >= 0 and 0 < zeta < inf on every subsystem over a full run.
inline CriterionResult check_gain_positivity(const SimTrace& trace) {
    verify_detail::Stopwatch sw;
    const auto traces = gain_traces(trace);
    bool pass = trace.outcome == SimOutcome::completed;
    std::string detail = "outcome " + to_string(trace.outcome) + "; ";
    for (std::size_t j = 0; j < 3; ++j) {
        const GainBoundsReport rep = verify_gain_bounds(traces[j]);
        pass = pass && rep.pass;
        detail += to_string(static_cast<Subsystem>(j)) + ": " + rep.summary() + "; ";
    }
    return {5, "gain positivity and boundedness", pass, detail, sw.seconds()};
}

inline constexpr double kPositionBand = 0.15;  // m
inline constexpr double kArmBand = 5.0;        // deg
inline constexpr double kAttitudeBand = 30.0;  // deg, boundedness ceiling only

/// 6. Bounded errors on the disturbed pick-and-place mission with payload events.
inline CriterionResult check_uub(const AppConfig& cfg, SimTrace* trace_out = nullptr) {
    using namespace verify_detail;
    Stopwatch sw;
    SimTrace tr = run_scenario(cfg, "proposed");
    const double secs = sw.seconds();
    const UubReport u =
        uub_check(tr, cfg.settle_time, uub_thresholds(kPositionBand, kAttitudeBand, kArmBand, cfg.params.joints()));
    const LyapunovMonitor mon = lyapunov_monitor(tr, cfg.settle_time);
    Vec band = u.ultimate_bound;
    band.tail(band.size() - 3) = band.tail(band.size() - 3).unaryExpr([](double v) { return rad2deg(v); });
    const bool pass = tr.outcome == SimOutcome::completed && u.pass && !mon.flagged && secs < 60.0;
    std::string detail = "outcome " + to_string(tr.outcome) + ", post-settle band " + fmt(Vec(band.head(3))) + " m, arm " +
                         fmt(Vec(band.tail(cfg.params.joints()))) + " deg, attitude " + fmt(Vec(band.segment(3, 3))) +
                         " deg, V_xi flag " + (mon.flagged ? "raised" : "clear") + " (" + fmt(secs) + " s)";
    if (!tr.diagnostic.empty()) detail += "; " + tr.diagnostic;
    if (trace_out) *trace_out = std::move(tr);
    return {6, "UUB at desk scale", pass, detail, secs};
}

struct OrderingRun {
    ComparisonReport report;
    double seconds = 0.0;
};

inline OrderingRun compare_on(const AppConfig& cfg, const UamParams& plant) {
    verify_detail::Stopwatch sw;
    const SimTrace proposed = run_scenario(cfg, "proposed", plant);
    const SimTrace baseline = run_scenario(cfg, "baseline", plant);
    return {compare_controllers(proposed, baseline, cfg.settle_time), sw.seconds()};
}

/// 7. Proposed RMS <= baseline RMS on every position axis and arm joint, and
/// every such gap grows when the arm link masses are doubled.
inline CriterionResult check_comparative_ordering(const AppConfig& cfg) {
    using namespace verify_detail;
    Stopwatch sw;
    const OrderingRun nominal = compare_on(cfg, cfg.params);
    const OrderingRun heavy = compare_on(cfg, scale_link_masses(cfg.params, 2.0));
    auto gaps = [](const ComparisonReport& r) {
        Vec g(3 + r.reference.arm.size());
        g << r.other.position - r.reference.position, r.other.arm - r.reference.arm;
        return g;
    };
    const Vec g_nom = gaps(nominal.report);
    const Vec g_heavy = gaps(heavy.report);
    const bool widens = (g_heavy.array() > g_nom.array()).all();
    const bool pass = nominal.report.reference_not_worse() && heavy.report.reference_not_worse() && widens &&
                      nominal.seconds < 120.0 && heavy.seconds < 120.0;
    auto side = [](const ComparisonReport& r) {
        return "proposed p" + fmt(Vec(r.reference.position)) + " arm" + fmt(r.reference.arm) + " vs baseline p" +
               fmt(Vec(r.other.position)) + " arm" + fmt(r.other.arm) + " [" + to_string(r.reference_outcome) + "/" +
               to_string(r.other_outcome) + "]";
    };
    return {7, "comparative ordering", pass,
            "nominal: " + side(nominal.report) + "; doubled links: " + side(heavy.report) + "; gap " + fmt(g_nom) +
                " -> " + fmt(g_heavy) + (widens ? " widens" : " does not widen") + " (pairs " + fmt(nominal.seconds) +
                " s, " + fmt(heavy.seconds) + " s)",
            sw.seconds()};
}

/// Position-subsystem gain rates before and after retuning the attitude
/// adaptation. True when they are bit-identical.
inline bool position_rates_unchanged(Controller& ctrl, const SystemState& state, const DesiredState& desired) {
    const auto before = ctrl.gain_rates(state, desired);
    AdaptationParams changed;
    changed.nu = {0.37, 3.7, 37.0, 0.037};
    changed.epsilon = 0.123;
    changed.varpi = 0.5;
    ctrl.set_adaptation(Subsystem::attitude, changed);
    const auto after = ctrl.gain_rates(state, desired);
    return before[0] == after[0];
}

/// 8. Retuning attitude adaptation leaves position gain rates bit-identical for
/// the modular controller; the shared-gain baseline is expected to fail.
inline CriterionResult check_modularity(const UamParams& params = {}) {
    verify_detail::Stopwatch sw;
    const Mission m = pick_place_mission();
    const DesiredState desired = eval_desired(m, 17.3);
    SystemState state = initial_state(m);
    state.chi = desired.chi;
    state.chi.head<3>() += Vec3(0.05, -0.03, 0.04);
    state.chi.segment<3>(3) += Vec3(0.02, -0.01, 0.03);
    state.chi.tail(params.joints()) += Vec::Constant(params.joints(), 0.04);
    state.chi_dot = Vec::Constant(params.dof(), 0.05);
    state.chi_ddot_prev = Vec::Constant(params.dof(), 0.3);

    ModularController modular(flight_controller_config(params.joints()));
    BaselineController baseline(default_baseline_config(params, m.waypoints.front().alpha_d));
    const bool modular_ok = position_rates_unchanged(modular, state, desired);
    const bool baseline_ok = position_rates_unchanged(baseline, state, desired);
    return {8, "modularity", modular_ok && !baseline_ok,
            std::string("proposed position rates bit-identical: ") + (modular_ok ? "yes" : "no") +
                "; baseline (expected to fail): " + (baseline_ok ? "unchanged (unexpected)" : "changed (expected fail)"),
            sw.seconds()};
}

/// 9. Every printed degradation cell recomputed from the RMS cells, within 0.1 percentage points.
inline CriterionResult check_table_audit() {
    verify_detail::Stopwatch sw;
    const auto cells = audit_degradation(flight_trial_tables(), 0.1);
    int ok = 0;
    double worst = 0.0;
    for (const auto& c : cells) {
        ok += c.pass ? 1 : 0;
        worst = std::max(worst, std::abs(c.recomputed - c.printed));
    }
    const bool pass = cells.size() == 16 && ok == 16;
    return {9, "degradation table audit", pass,
            std::to_string(ok) + "/" + std::to_string(cells.size()) + " cells within 0.1 points, worst deviation " +
                verify_detail::fmt(worst),
            sw.seconds()};
}

/// 10. Two runs with the same configuration and seed give byte-identical trace CSVs.
inline CriterionResult check_determinism(const AppConfig& cfg) {
    verify_detail::Stopwatch sw;
    auto csv = [&] {
        std::ostringstream os;
        write_trace_csv(os, run_scenario(cfg, cfg.controller));
        return os.str();
    };
    const std::string a = csv();
    const std::string b = csv();
    return {10, "determinism", a == b && !a.empty(),
            std::to_string(a.size()) + " bytes, " + (a == b ? "identical" : "different"), sw.seconds()};
}

inline std::vector<CriterionResult> verify_all(const AppConfig& cfg) {
    std::vector<CriterionResult> out;
    out.push_back(check_dynamics_validity(cfg.params));
    out.push_back(check_lyapunov_solve(cfg.params.joints()));
    out.push_back(check_linear_limit(cfg.params.joints()));
    out.push_back(check_gain_law(cfg.params.joints()));
    SimTrace trace;
    CriterionResult uub = check_uub(cfg, &trace);
    out.push_back(check_gain_positivity(trace));
    out.push_back(std::move(uub));
    out.push_back(check_comparative_ordering(cfg));
    out.push_back(check_modularity(cfg.params));
    out.push_back(check_table_audit());
    out.push_back(check_determinism(cfg));
    return out;
}

inline std::string format_result(const CriterionResult& r) {
    std::ostringstream os;
    os << "[" << (r.pass ? "PASS" : "FAIL") << "] " << r.id << " " << r.title << ": " << r.detail;
    return os.str();
}

}  // namespace uam
