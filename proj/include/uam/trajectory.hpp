#pragma once

#include "uam/params.hpp"
#include "uam/rotation.hpp"

#include <algorithm>
#include <sstream>
#include <vector>

namespace uam {

struct Waypoint {
    double time = 0.0;
    Vec3 p_d = Vec3::Zero();
    double psi_d = 0.0;
    Vec alpha_d;
};

/// Rest-to-rest waypoint mission. Between consecutive waypoints every
/// coordinate follows a quintic (minimum-jerk) blend; after the last
/// waypoint the reference holds.
struct Mission {
    std::vector<Waypoint> waypoints;
    std::vector<PayloadEvent> payload_events;
    double duration = 0.0;

    [[nodiscard]] int joints() const {
        return waypoints.empty() ? 0 : static_cast<int>(waypoints.front().alpha_d.size());
    }

    void validate() const {
        if (waypoints.empty()) throw InvalidArgument("mission needs at least one waypoint");
        if (!(duration >= 0.0)) throw InvalidArgument("mission duration must be >= 0");
        if (waypoints.front().time != 0.0) throw InvalidArgument("first waypoint must be at t = 0");
        const auto n = waypoints.front().alpha_d.size();
        for (std::size_t i = 0; i < waypoints.size(); ++i) {
            if (waypoints[i].alpha_d.size() != n) throw InvalidArgument("waypoints disagree on the joint count");
            if (i > 0 && !(waypoints[i].time > waypoints[i - 1].time))
                throw InvalidArgument("waypoint times must be strictly increasing");
        }
        for (const auto& ev : payload_events) {
            if (ev.time < 0.0 || ev.time > duration) {
                std::ostringstream os;
                os << "payload event at t=" << ev.time << " lies outside [0, " << duration << "]";
                throw InvalidArgument(os.str());
            }
        }
    }
};

/// Stacked desired coordinates and derivatives. The attitude slots carry
/// (0, 0, psi_d); roll and pitch references come from the position loop.
struct DesiredState {
    Vec chi;
    Vec chi_dot;
    Vec chi_ddot;
};

/// Minimum-jerk blend s(u) = 10u^3 - 15u^4 + 6u^5 and its first two derivatives in u.
struct QuinticBlend {
    double s;
    double ds;
    double dds;
};

inline QuinticBlend quintic_blend(double u) {
    u = std::clamp(u, 0.0, 1.0);
    const double u2 = u * u, u3 = u2 * u;
    return {u3 * (10.0 - 15.0 * u + 6.0 * u2), 30.0 * u2 * (1.0 - 2.0 * u + u2), 60.0 * u * (1.0 - 3.0 * u + 2.0 * u2)};
}

inline DesiredState eval_desired(const Mission& mission, double t) {
    if (mission.waypoints.empty()) throw InvalidArgument("mission has no waypoints");
    if (!(t >= 0.0) || t > mission.duration + 1e-9) {
        std::ostringstream os;
        os << "t = " << t << " outside mission [0, " << mission.duration << "]";
        throw InvalidArgument(os.str());
    }
    const int n = mission.joints();
    auto pose = [n](const Waypoint& w) {
        Vec x(6 + n);
        x << w.p_d, 0.0, 0.0, w.psi_d, w.alpha_d;
        return x;
    };

    const auto& wps = mission.waypoints;
    const auto next = std::upper_bound(wps.begin(), wps.end(), t, [](double v, const Waypoint& w) { return v < w.time; });
    DesiredState out{Vec(), Vec::Zero(6 + n), Vec::Zero(6 + n)};
    if (next == wps.end()) {
        out.chi = pose(wps.back());
        return out;
    }
    const Waypoint& b = *next;
    const Waypoint& a = *(next - 1);
    const double T = b.time - a.time;
    const QuinticBlend blend = quintic_blend((t - a.time) / T);
    const Vec from = pose(a);
    const Vec delta = pose(b) - from;
    out.chi = from + blend.s * delta;
    out.chi_dot = (blend.ds / T) * delta;
    out.chi_ddot = (blend.dds / (T * T)) * delta;
    return out;
}

/// Timeline and geometry of the pick-and-place flight.
struct PickPlaceConfig {
    double hover_height = 1.0;
    Vec3 pick_point = Vec3(-1.0, 0.0, 1.0);
    Vec3 drop_point = Vec3(1.0, 0.0, 1.0);
    Vec3 home_point = Vec3(0.0, 0.0, 1.0);
    Vec alpha_initial = Eigen::Vector2d(0.0, deg2rad(90.0));
    Vec alpha_pick = Eigen::Vector2d(deg2rad(45.0), deg2rad(45.0));
    Vec alpha_drop = Eigen::Vector2d(deg2rad(-45.0), deg2rad(-45.0));
    double payload_mass = 0.2;
    double takeoff_end = 2.0;
    double approach_end = 30.0;
    double pickup_time = 35.0;
    double transfer_end = 65.0;
    double release_time = 70.0;
    double return_end = 80.0;
    double duration = 80.0;
};

inline Mission pick_place_mission(const PickPlaceConfig& cfg = {}) {
    Mission m;
    const Vec3 ground(0.0, 0.0, 0.0);
    const Vec3 lifted(0.0, 0.0, cfg.hover_height);
    m.waypoints = {
        {0.0, ground, 0.0, cfg.alpha_initial},
        {cfg.takeoff_end, lifted, 0.0, cfg.alpha_initial},
        {cfg.approach_end, cfg.pick_point, 0.0, cfg.alpha_pick},
        {cfg.pickup_time, cfg.pick_point, 0.0, cfg.alpha_pick},
        {cfg.transfer_end, cfg.drop_point, 0.0, cfg.alpha_drop},
        {cfg.release_time, cfg.drop_point, 0.0, cfg.alpha_drop},
        {cfg.return_end, cfg.home_point, 0.0, cfg.alpha_drop},
    };
    m.payload_events = {{cfg.pickup_time, cfg.payload_mass}, {cfg.release_time, -cfg.payload_mass}};
    m.duration = cfg.duration;
    m.validate();
    return m;
}

}  // namespace uam
