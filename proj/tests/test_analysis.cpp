#include "uam/verification.hpp"

#include <gtest/gtest.h>

#include <unsupported/Eigen/MatrixFunctions>

using namespace uam;

namespace {

std::vector<double> grid(double t0, double t1, int n) {
    std::vector<double> t(n + 1);
    for (int k = 0; k <= n; ++k) t[k] = t0 + (t1 - t0) * k / n;
    return t;
}

}  // namespace

TEST(Rms, SinusoidOverWholePeriods) {
    const double A = 0.37;
    const auto t = grid(0.0, 4.0, 40000);
    std::vector<double> e;
    for (double tk : t) e.push_back(A * std::sin(2.0 * std::numbers::pi * 0.5 * tk + 0.3));
    EXPECT_NEAR(rms_series(t, e), A / std::sqrt(2.0), 1e-6);
}

TEST(Rms, ConstantAndScaling) {
    const auto t = grid(1.0, 3.0, 100);
    std::vector<double> c(t.size(), -2.5), s(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) s[k] = std::cos(t[k]);
    EXPECT_NEAR(rms_series(t, c), 2.5, 1e-14);
    std::vector<double> s3 = s;
    for (double& v : s3) v *= 3.0;
    EXPECT_NEAR(rms_series(t, s3), 3.0 * rms_series(t, s), 1e-14);
}

TEST(Rms, RejectsMismatchedSeries) {
    const std::vector<double> t{0.0, 1.0}, e{1.0};
    EXPECT_THROW(rms_series(t, e), InvalidArgument);
}

TEST(Uub, SyntheticTraces) {
    const auto t = grid(0.0, 10.0, 1000);
    const Vec th = uub_thresholds(0.15, 30.0, 5.0, 2);
    ASSERT_EQ(th.size(), 8);
    EXPECT_NEAR(th(3), deg2rad(30.0), 1e-15);
    std::vector<Vec> decaying;
    for (double tk : t) decaying.push_back(Vec::Constant(8, std::exp(-tk)));
    const UubReport ok = uub_check(t, decaying, 5.0, th);
    EXPECT_TRUE(ok.pass);
    EXPECT_NEAR(ok.ultimate_bound(0), std::exp(-5.01), 1e-12);
    std::vector<Vec> growing = decaying;
    growing[900](0) = 0.2;
    const UubReport bad = uub_check(t, growing, 5.0, th);
    EXPECT_FALSE(bad.pass);
    EXPECT_DOUBLE_EQ(bad.first_violation, t[900]);
}

TEST(LyapunovMonitor, ZeroTraceStaysZero) {
    const auto t = grid(0.0, 10.0, 100);
    const std::vector<double> V(t.size(), 0.0);
    const LyapunovMonitor m = lyapunov_monitor(t, V, {}, 5.0);
    EXPECT_FALSE(m.flagged);
    EXPECT_EQ(m.bound_estimate.back(), 0.0);
}

TEST(LyapunovMonitor, LinearOracleDecaysMonotonically) {
    const ModularControllerConfig c = flight_controller_config(2);
    const auto sc = SubsystemController::configure(Subsystem::position, c.position.M_bar, c.position.Lambda,
                                                   c.position.lambda1, c.position.lambda2, c.position.Q, 0.1);
    Vec xi0(6);
    xi0 << 0.1, -0.2, 0.05, 0.0, 0.1, -0.1;
    const auto t = grid(0.0, 10.0, 200);
    std::vector<double> V;
    for (double tk : t) {
        const Vec xi = (sc.A * tk).exp() * xi0;
        const std::array<Vec, 1> x{xi};
        const std::array<Mat, 1> P{sc.P};
        V.push_back(lyapunov_value(x, P));
    }
    for (std::size_t k = 1; k < V.size(); ++k) EXPECT_LE(V[k], V[k - 1] + 1e-15);
    EXPECT_FALSE(lyapunov_monitor(t, V, {}, 1.0).flagged);
}

TEST(LyapunovMonitor, FlagsGrowthAndRearmsAfterEvents) {
    const auto t = grid(0.0, 10.0, 100);
    std::vector<double> V(t.size(), 1.0);
    for (std::size_t k = 60; k < V.size(); ++k) V[k] = 50.0;
    const LyapunovMonitor m = lyapunov_monitor(t, V, {}, 2.0);
    EXPECT_TRUE(m.flagged);
    EXPECT_DOUBLE_EQ(m.flag_time, t[60]);
    // the same step right after a payload event is a new transient
    const std::vector<double> events{t[60]};
    EXPECT_FALSE(lyapunov_monitor(t, V, {}, 2.0, events).flagged);
    EXPECT_THROW(lyapunov_monitor(t, std::vector<double>(t.size(), -1.0), {}, 2.0), InvalidArgument);
}

TEST(Degradation, Convention) {
    EXPECT_NEAR(degradation(0.05, 0.1), 50.0, 1e-12);
    EXPECT_NEAR(degradation(0.1, 0.1), 0.0, 1e-12);
    EXPECT_LT(degradation(0.2, 0.1), 0.0);
}

TEST(TableAudit, AllCellsReproduce) {
    const auto tables = flight_trial_tables();
    EXPECT_EQ(tables.size(), 3u);
    const auto cells = audit_degradation(tables, 0.1);
    ASSERT_EQ(cells.size(), 16u);
    for (const auto& c : cells) EXPECT_TRUE(c.pass) << c.table << " " << c.controller << " " << c.axis << ": "
                                                    << c.recomputed << " vs " << c.printed;
    const CriterionResult r = check_table_audit();
    EXPECT_TRUE(r.pass) << r.detail;
}

TEST(TableAudit, DetectsCorruptedCell) {
    auto tables = flight_trial_tables();
    tables[0].rows[0].printed_degradation[0] += 0.5;
    const auto cells = audit_degradation(tables, 0.1);
    EXPECT_EQ(std::count_if(cells.begin(), cells.end(), [](const AuditCell& c) { return !c.pass; }), 1);
}

TEST(Compare, RequiresSameMission) {
    AppConfig a = default_app_config();
    a.sim.duration = 0.2;
    const SimTrace ta = run_scenario(a, "proposed");
    AppConfig b = a;
    b.mission.waypoints[1].p_d.z() = 1.5;
    const SimTrace tb = run_scenario(b, "baseline");
    EXPECT_THROW(compare_controllers(ta, tb, 0.0), InvalidArgument);
    const ComparisonReport same = compare_controllers(ta, ta, 0.0);
    EXPECT_TRUE(same.reference_not_worse());
    EXPECT_NEAR(same.degradation.position.cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(Summary, ContainsMetricsAndGainAudit) {
    AppConfig cfg = default_app_config();
    cfg.sim.duration = 6.0;
    const SimTrace tr = run_scenario(cfg, "proposed");
    const json s = summarize(tr, 5.0, uub_thresholds(0.15, 30.0, 5.0, 2));
    EXPECT_EQ(s["outcome"], "completed");
    EXPECT_TRUE(s["uub"]["pass"].get<bool>());
    EXPECT_EQ(s["rms"]["position_m"].size(), 3u);
    EXPECT_TRUE(s["gains"]["manipulator"]["pass"].get<bool>());
    EXPECT_FALSE(s["lyapunov"]["flagged"].get<bool>());
}
