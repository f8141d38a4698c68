#pragma once

// Fixed-step closed-loop simulation. Each control tick records the state,
// runs the controller once, then advances the plant by control_period with
// the input held (zero-order hold) using dt_physics sub-steps.

#include "uam/controller.hpp"
#include "uam/disturbance.hpp"
#include "uam/dynamics.hpp"
#include "uam/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <optional>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace uam {

class SimulationError : public std::runtime_error {
public:
    SimulationError(double t, const std::string& what)
        : std::runtime_error(format(t, what)), time_(t) {}
    [[nodiscard]] double time() const { return time_; }

private:
    static std::string format(double t, const std::string& what) {
        std::ostringstream os;
        os << "t=" << t << " s: " << what;
        return os.str();
    }
    double time_;
};

enum class Integrator { rk4, euler };

inline std::string to_string(Integrator i) { return i == Integrator::rk4 ? "rk4" : "euler"; }

inline Integrator integrator_from_string(const std::string& s) {
    if (s == "rk4") return Integrator::rk4;
    if (s == "euler") return Integrator::euler;
    throw InvalidArgument("unknown integrator '" + s + "'");
}

struct SimConfig {
    double dt_physics = 1e-3;
    double control_period = 2e-3;
    /// Negative means "use the mission duration".
    double duration = -1.0;
    std::uint64_t seed = 0;
    Integrator integrator = Integrator::rk4;
    double divergence_ceiling = 50.0;

    [[nodiscard]] int substeps() const { return static_cast<int>(std::lround(control_period / dt_physics)); }

    void validate() const {
        if (!(dt_physics > 0.0) || !(control_period > 0.0)) throw InvalidArgument("time steps must be > 0");
        const double ratio = control_period / dt_physics;
        if (substeps() < 1 || std::abs(ratio - substeps()) > 1e-9 * ratio)
            throw InvalidArgument("control_period must be an integer multiple of dt_physics");
        if (!(divergence_ceiling > 0.0)) throw InvalidArgument("divergence ceiling must be > 0");
    }
};

/// chi_ddot = f(t, chi, chi_dot, tau) for the current (possibly payload-updated) parameters.
using PlantModel = std::function<Vec(double t, const Vec& chi, const Vec& chi_dot, const Vec& tau, const UamParams& params)>;

inline PlantModel uam_plant(DisturbanceProfile profile) {
    return [profile = std::move(profile)](double t, const Vec& chi, const Vec& chi_dot, const Vec& tau,
                                          const UamParams& params) {
        return forward_dynamics(chi, chi_dot, tau, disturbance(t, profile), params);
    };
}

/// Fully known, decoupled plant M chi_ddot = tau with constant M.
inline PlantModel linear_plant(const Mat& M) {
    Eigen::LLT<Mat> llt(M);
    if (llt.info() != Eigen::Success) throw InvalidArgument("linear plant inertia must be positive definite");
    return [llt](double, const Vec&, const Vec&, const Vec& tau, const UamParams&) { return Vec(llt.solve(tau)); };
}

/// Same profile with the phase drawn from the seed.
inline DisturbanceProfile seeded_disturbance(DisturbanceProfile profile, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    profile.phase = 2.0 * std::numbers::pi * u;
    return profile;
}

struct TraceRecord {
    double t = 0.0;
    Vec chi;
    Vec chi_dot;
    Vec chi_ddot;
    Vec chi_d;  // mission reference with the roll/pitch/yaw actually commanded
    Vec e;      // position, geometric attitude and joint errors
    Vec e_dot;
    std::array<SubsystemSnapshot, 3> sub;
    Vec tau;
    double u1 = 0.0;
    double V_xi = 0.0;
    double payload_mass = 0.0;
};

enum class SimOutcome { completed, diverged };

inline std::string to_string(SimOutcome o) { return o == SimOutcome::completed ? "completed" : "diverged"; }

struct SimTrace {
    std::string controller;
    int joints = 0;
    std::uint64_t mission_fingerprint = 0;
    double control_period = 0.0;
    std::vector<TraceRecord> records;
    std::vector<PayloadEvent> applied_events;
    SimOutcome outcome = SimOutcome::completed;
    std::string diagnostic;
};

/// Initial condition: at rest on the first waypoint.
inline SystemState initial_state(const Mission& mission) {
    const Waypoint& w = mission.waypoints.front();
    return SystemState::at_rest(GeneralizedCoords{w.p_d, Vec3(0.0, 0.0, w.psi_d), w.alpha_d});
}

/// Advances (chi, chi_dot) by `substeps` steps of `dt` with tau held.
inline SystemState integrate_plant(const SystemState& s, const Vec& tau, const PlantModel& plant,
                                   const UamParams& params, double dt, int substeps, Integrator integrator) {
    Vec x = s.chi;
    Vec v = s.chi_dot;
    double t = s.t;
    for (int k = 0; k < substeps; ++k) {
        if (integrator == Integrator::euler) {
            const Vec a = plant(t, x, v, tau, params);
            x += dt * v;
            v += dt * a;
        } else {
            const Vec a1 = plant(t, x, v, tau, params);
            const Vec x2 = x + 0.5 * dt * v, v2 = v + 0.5 * dt * a1;
            const Vec a2 = plant(t + 0.5 * dt, x2, v2, tau, params);
            const Vec x3 = x + 0.5 * dt * v2, v3 = v + 0.5 * dt * a2;
            const Vec a3 = plant(t + 0.5 * dt, x3, v3, tau, params);
            const Vec x4 = x + dt * v3, v4 = v + dt * a3;
            const Vec a4 = plant(t + dt, x4, v4, tau, params);
            x += (dt / 6.0) * (v + 2.0 * v2 + 2.0 * v3 + v4);
            v += (dt / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        }
        t = s.t + (k + 1) * dt;
    }
    SystemState out{x, v, s.chi_ddot_prev, t};
    out.chi_ddot_prev = plant(t, x, v, tau, params);
    return out;
}

struct StepResult {
    SystemState state;
    TraceRecord record;
};

inline TraceRecord make_record(const SystemState& s, const DesiredState& desired, const ControlOutput& u,
                               const UamParams& params) {
    TraceRecord r;
    r.t = s.t;
    r.chi = s.chi;
    r.chi_dot = s.chi_dot;
    r.chi_ddot = s.chi_ddot_prev;
    r.chi_d = desired.chi;
    r.chi_d.segment<3>(3) = u.q_d;
    r.e = u.e;
    r.e_dot = u.e_dot;
    r.sub = u.sub;
    r.tau = u.tau;
    r.u1 = u.u1;
    r.V_xi = u.V_xi;
    r.payload_mass = params.payload_mass;
    return r;
}

/// One control tick. With `advance` false only the controller runs (final record).
inline StepResult step(const SystemState& state, Controller& controller, const Mission& mission,
                       const UamParams& params, const PlantModel& plant, const SimConfig& cfg, bool advance = true) {
    try {
        state.validate();
        const DesiredState desired = eval_desired(mission, std::min(state.t, mission.duration));
        const ControlOutput u = controller.update(state, desired, cfg.control_period);
        if (!u.tau.allFinite()) throw SolverError("controller produced a non-finite input");
        StepResult out{state, make_record(state, desired, u, params)};
        if (advance) {
            out.state = integrate_plant(state, u.tau, plant, params, cfg.dt_physics, cfg.substeps(), cfg.integrator);
        }
        return out;
    } catch (const SimulationError&) {
        throw;
    } catch (const std::exception& ex) {
        throw SimulationError(state.t, ex.what());
    }
}

inline std::uint64_t mission_fingerprint(const Mission& m) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xFFu;
            h *= 1099511628211ULL;
        }
    };
    mix(m.duration);
    for (const auto& w : m.waypoints) {
        mix(w.time);
        for (int i = 0; i < 3; ++i) mix(w.p_d(i));
        mix(w.psi_d);
        for (Eigen::Index i = 0; i < w.alpha_d.size(); ++i) mix(w.alpha_d(i));
    }
    for (const auto& ev : m.payload_events) {
        mix(ev.time);
        mix(ev.delta_mass);
    }
    return h;
}

/// Runs the mission from `initial` (default: at rest on the first waypoint).
/// Divergence, singularities and solver failures end the run with
/// outcome = diverged and a timestamped diagnostic; the partial trace is kept.
inline SimTrace run(const Mission& mission, UamParams params, Controller& controller, const PlantModel& plant,
                    const SimConfig& cfg, std::optional<SystemState> initial = std::nullopt) {
    mission.validate();
    params.validate();
    cfg.validate();
    if (mission.joints() != params.joints()) throw InvalidArgument("mission and parameters disagree on the joint count");
    const double duration = cfg.duration < 0.0 ? mission.duration : std::min(cfg.duration, mission.duration);

    SimTrace trace;
    trace.controller = controller.name();
    trace.joints = params.joints();
    trace.mission_fingerprint = mission_fingerprint(mission);
    trace.control_period = cfg.control_period;

    const auto ticks = static_cast<long>(std::lround(duration / cfg.control_period));
    trace.records.reserve(static_cast<std::size_t>(ticks) + 1);
    SystemState state = initial ? *initial : initial_state(mission);
    state.t = 0.0;
    std::vector<PayloadEvent> pending = mission.payload_events;
    std::stable_sort(pending.begin(), pending.end(), [](const auto& a, const auto& b) { return a.time < b.time; });
    std::size_t next_event = 0;

    for (long k = 0; k <= ticks; ++k) {
        const double t = static_cast<double>(k) * cfg.control_period;
        state.t = t;
        while (next_event < pending.size() && pending[next_event].time <= t + 1e-9) {
            params = apply_payload_event(params, pending[next_event]);
            trace.applied_events.push_back(pending[next_event]);
            ++next_event;
        }
        try {
            StepResult res = step(state, controller, mission, params, plant, cfg, k < ticks);
            trace.records.push_back(std::move(res.record));
            state = std::move(res.state);
        } catch (const SimulationError& ex) {
            trace.outcome = SimOutcome::diverged;
            trace.diagnostic = ex.what();
            return trace;
        }
        const double speed = state.chi_dot.norm();
        if (!state.chi.allFinite() || !std::isfinite(speed) || speed > cfg.divergence_ceiling) {
            std::ostringstream os;
            os << "t=" << state.t << " s: |chi_dot| = " << speed << " exceeds the divergence ceiling "
               << cfg.divergence_ceiling;
            trace.outcome = SimOutcome::diverged;
            trace.diagnostic = os.str();
            return trace;
        }
    }
    return trace;
}

}  // namespace uam
