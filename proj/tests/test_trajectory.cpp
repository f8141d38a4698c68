#include "uam/verification.hpp"

#include <gtest/gtest.h>

using namespace uam;

TEST(Quintic, EndpointsAndMidpoint) {
    const QuinticBlend a = quintic_blend(0.0), b = quintic_blend(1.0), m = quintic_blend(0.5);
    EXPECT_DOUBLE_EQ(a.s, 0.0);
    EXPECT_DOUBLE_EQ(b.s, 1.0);
    for (const auto& q : {a, b}) {
        EXPECT_DOUBLE_EQ(q.ds, 0.0);
        EXPECT_DOUBLE_EQ(q.dds, 0.0);
    }
    EXPECT_DOUBLE_EQ(m.s, 0.5);
    EXPECT_DOUBLE_EQ(m.ds, 15.0 / 8.0);
    EXPECT_DOUBLE_EQ(m.dds, 0.0);
}

TEST(Quintic, DerivativesMatchFiniteDifferences) {
    const double h = 1e-6;
    for (double u = 0.05; u < 1.0; u += 0.05) {
        const QuinticBlend q = quintic_blend(u);
        EXPECT_NEAR(q.ds, (quintic_blend(u + h).s - quintic_blend(u - h).s) / (2 * h), 1e-8);
        EXPECT_NEAR(q.dds, (quintic_blend(u + h).ds - quintic_blend(u - h).ds) / (2 * h), 1e-7);
        EXPECT_GE(q.ds, 0.0);
    }
}

TEST(Mission, PickPlaceTimeline) {
    const Mission m = pick_place_mission();
    EXPECT_DOUBLE_EQ(m.duration, 80.0);
    ASSERT_EQ(m.payload_events.size(), 2u);
    EXPECT_EQ(m.payload_events[0], (PayloadEvent{35.0, 0.2}));
    EXPECT_EQ(m.payload_events[1], (PayloadEvent{70.0, -0.2}));
    EXPECT_EQ(m.joints(), 2);
    const DesiredState at_pick = eval_desired(m, 35.0);
    EXPECT_NEAR(at_pick.chi(0), -1.0, 1e-15);
    EXPECT_NEAR(at_pick.chi(6), deg2rad(45.0), 1e-15);
    const DesiredState at_drop = eval_desired(m, 70.0);
    EXPECT_NEAR(at_drop.chi(0), 1.0, 1e-15);
    EXPECT_NEAR(at_drop.chi(7), deg2rad(-45.0), 1e-15);
}

TEST(Mission, ReferenceIsContinuousWithRestAtWaypoints) {
    const Mission m = pick_place_mission();
    for (const auto& w : m.waypoints) {
        const DesiredState d = eval_desired(m, w.time);
        EXPECT_LE(d.chi_dot.cwiseAbs().maxCoeff(), 1e-12) << "t=" << w.time;
        EXPECT_LE(d.chi_ddot.cwiseAbs().maxCoeff(), 1e-12) << "t=" << w.time;
        if (w.time > 0.0) {
            const DesiredState before = eval_desired(m, w.time - 1e-9);
            EXPECT_LE((before.chi - d.chi).cwiseAbs().maxCoeff(), 1e-8);
        }
    }
}

TEST(Mission, RatesMatchFiniteDifferences) {
    const Mission m = pick_place_mission();
    const double h = 1e-5;
    // jerk jumps at waypoints, so sample away from them
    auto near_waypoint = [&](double t) {
        return std::any_of(m.waypoints.begin(), m.waypoints.end(),
                           [&](const Waypoint& w) { return std::abs(t - w.time) < 1e-3; });
    };
    for (double t = 0.3; t < 80.0; t += 1.7) {
        if (near_waypoint(t)) continue;
        const DesiredState d = eval_desired(m, t);
        const Vec fd = (eval_desired(m, t + h).chi - eval_desired(m, t - h).chi) / (2 * h);
        EXPECT_LE((d.chi_dot - fd).cwiseAbs().maxCoeff(), 1e-7) << "t=" << t;
        const Vec fdd = (eval_desired(m, t + h).chi_dot - eval_desired(m, t - h).chi_dot) / (2 * h);
        EXPECT_LE((d.chi_ddot - fdd).cwiseAbs().maxCoeff(), 1e-6) << "t=" << t;
    }
}

TEST(Mission, RejectsBadInput) {
    Mission m = pick_place_mission();
    EXPECT_THROW(eval_desired(m, -0.1), InvalidArgument);
    EXPECT_THROW(eval_desired(m, 81.0), InvalidArgument);
    Mission bad = m;
    std::swap(bad.waypoints[1], bad.waypoints[2]);
    EXPECT_THROW(bad.validate(), InvalidArgument);
    Mission late = m;
    late.payload_events.push_back({90.0, 0.1});
    EXPECT_THROW(late.validate(), InvalidArgument);
    EXPECT_THROW(Mission{}.validate(), InvalidArgument);
}

TEST(Mission, JsonRoundTripIsBitIdentical) {
    const Mission m = pick_place_mission();
    const json dumped = mission_to_json(m);
    const Mission back = mission_from_json(json::parse(dumped.dump()));
    EXPECT_EQ(mission_fingerprint(back), mission_fingerprint(m));
    ASSERT_EQ(back.waypoints.size(), m.waypoints.size());
    for (std::size_t i = 0; i < m.waypoints.size(); ++i) {
        EXPECT_EQ(back.waypoints[i].time, m.waypoints[i].time);
        EXPECT_EQ(back.waypoints[i].p_d, m.waypoints[i].p_d);
        EXPECT_EQ(back.waypoints[i].psi_d, m.waypoints[i].psi_d);
        EXPECT_EQ(back.waypoints[i].alpha_d, m.waypoints[i].alpha_d);
    }
    EXPECT_EQ(back.payload_events, m.payload_events);
    EXPECT_EQ(back.duration, m.duration);
    EXPECT_EQ(mission_to_json(back).dump(), dumped.dump());
}

TEST(Mission, JsonRejectsUnknownKeys) {
    json j = mission_to_json(pick_place_mission());
    j["waypoints"][0]["speed"] = 1.0;
    EXPECT_THROW(mission_from_json(j), ConfigError);
}
