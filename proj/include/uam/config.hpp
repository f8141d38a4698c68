#pragma once

// JSON run configuration. Every section is optional; missing keys keep the
// desk-scale defaults. Unknown keys are rejected so typos fail loudly.
//
// Matrices accept a scalar (times identity), an array (diagonal) or an array
// of rows. Subsystem gains accept either explicit matrices or a pole-placement
// block {"omega", "M_bar", "q_scale"}; explicit keys override the block.

#include "uam/controller.hpp"
#include "uam/simulation.hpp"

#include "json.hpp"

#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <string>

namespace uam {

using json = nlohmann::json;

struct AppConfig {
    std::string controller = "proposed";
    UamParams params;
    ModularControllerConfig proposed;
    BaselineControllerConfig baseline;
    DisturbanceProfile disturbance;
    Mission mission;
    SimConfig sim;
    double settle_time = 5.0;
};

namespace cfg_detail {

inline void expect_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

inline double number(const json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError(where + ": expected a number");
    return j.get<double>();
}

inline Vec vector(const json& j, const std::string& where, Eigen::Index expected = -1) {
    if (!j.is_array()) throw ConfigError(where + ": expected an array of numbers");
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], where);
    if (expected >= 0 && v.size() != expected)
        throw ConfigError(where + ": expected " + std::to_string(expected) + " entries, got " + std::to_string(v.size()));
    return v;
}

/// Scalar, diagonal or full square matrix of size d.
inline Mat matrix(const json& j, const std::string& where, Eigen::Index d) {
    if (j.is_number()) return number(j, where) * Mat::Identity(d, d);
    if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a number or an array");
    if (!j.front().is_array()) {
        const Vec diag = vector(j, where, d);
        return diag.asDiagonal();
    }
    if (static_cast<Eigen::Index>(j.size()) != d) throw ConfigError(where + ": expected " + std::to_string(d) + " rows");
    Mat m(d, d);
    for (Eigen::Index r = 0; r < d; ++r) m.row(r) = vector(j[static_cast<std::size_t>(r)], where, d).transpose();
    return m;
}

/// Q may be given for xi (2d) or for e alone (d, reused on e_dot).
inline Mat weight_matrix(const json& j, const std::string& where, Eigen::Index d) {
    if (j.is_array() && !j.empty()) {
        const auto rows = static_cast<Eigen::Index>(j.size());
        if (rows == 2 * d) return matrix(j, where, 2 * d);
    }
    return matrix(j, where, d);
}

inline std::array<double, 4> four(const json& j, const std::string& where) {
    if (j.is_number()) {
        const double v = number(j, where);
        return {v, v, v, v};
    }
    const Vec v = vector(j, where, 4);
    return {v(0), v(1), v(2), v(3)};
}

inline json to_json(const Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

inline json to_json(const Mat& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(to_json(Vec(m.row(r).transpose())));
    return rows;
}

inline void read_params(const json& j, UamParams& p) {
    expect_keys(j, "params", {"quad_mass", "arm_link_masses", "arm_link_lengths", "arm_joint_armature", "quad_inertia",
                              "arm_mount_offset", "payload_mass", "gravity"});
    if (j.contains("quad_mass")) p.quad_mass = number(j["quad_mass"], "params.quad_mass");
    if (j.contains("arm_link_masses")) p.arm_link_masses = vector(j["arm_link_masses"], "params.arm_link_masses");
    if (j.contains("arm_link_lengths")) p.arm_link_lengths = vector(j["arm_link_lengths"], "params.arm_link_lengths");
    if (j.contains("arm_joint_armature")) {
        p.arm_joint_armature = vector(j["arm_joint_armature"], "params.arm_joint_armature");
    } else if (p.arm_joint_armature.size() != p.arm_link_masses.size()) {
        p.arm_joint_armature = Vec::Constant(p.arm_link_masses.size(), p.arm_joint_armature(0));
    }
    if (j.contains("quad_inertia")) p.quad_inertia = matrix(j["quad_inertia"], "params.quad_inertia", 3);
    if (j.contains("arm_mount_offset")) p.arm_mount_offset = vector(j["arm_mount_offset"], "params.arm_mount_offset", 3);
    if (j.contains("payload_mass")) p.payload_mass = number(j["payload_mass"], "params.payload_mass");
    if (j.contains("gravity")) p.gravity_accel = number(j["gravity"], "params.gravity");
    try {
        p.validate();
    } catch (const std::exception& ex) {
        throw ConfigError(std::string("params: ") + ex.what());
    }
}

inline void read_gains(const json& j, const std::string& where, SubsystemGains& g, int d) {
    expect_keys(j, where, {"omega", "M_bar", "q_scale", "Lambda", "lambda1", "lambda2", "Q"});
    if (j.contains("omega")) {
        const double q_scale = j.contains("q_scale") ? number(j["q_scale"], where + ".q_scale") : 0.0;
        if (!j.contains("M_bar") || !j["M_bar"].is_number())
            throw ConfigError(where + ": pole placement needs a scalar M_bar");
        try {
            pole_placement(g, d, number(j["omega"], where + ".omega"), number(j["M_bar"], where + ".M_bar"), q_scale);
        } catch (const InvalidArgument& ex) {
            throw ConfigError(where + ": " + ex.what());
        }
    } else if (j.contains("q_scale")) {
        throw ConfigError(where + ": q_scale needs omega");
    } else if (j.contains("M_bar")) {
        g.M_bar = matrix(j["M_bar"], where + ".M_bar", d);
    }
    if (j.contains("Lambda")) g.Lambda = matrix(j["Lambda"], where + ".Lambda", d);
    if (j.contains("lambda1")) g.lambda1 = matrix(j["lambda1"], where + ".lambda1", d);
    if (j.contains("lambda2")) g.lambda2 = matrix(j["lambda2"], where + ".lambda2", d);
    if (j.contains("Q")) g.Q = weight_matrix(j["Q"], where + ".Q", d);
}

inline void read_adaptation(const json& j, const std::string& where, std::array<double, 4>& nu, double& epsilon,
                            double& varpi, AdaptiveGains& initial) {
    expect_keys(j, where, {"nu", "epsilon", "varpi", "K_hat0", "zeta0"});
    if (j.contains("nu")) nu = four(j["nu"], where + ".nu");
    if (j.contains("epsilon")) epsilon = number(j["epsilon"], where + ".epsilon");
    if (j.contains("varpi")) varpi = number(j["varpi"], where + ".varpi");
    if (j.contains("K_hat0")) initial.K_hat = four(j["K_hat0"], where + ".K_hat0");
    if (j.contains("zeta0")) initial.zeta = number(j["zeta0"], where + ".zeta0");
}

template <typename E, typename F>
E enum_value(const json& j, const std::string& where, F parse) {
    if (!j.is_string()) throw ConfigError(where + ": expected a string");
    try {
        return parse(j.get<std::string>());
    } catch (const InvalidArgument& ex) {
        throw ConfigError(where + ": " + ex.what());
    }
}

inline bool boolean(const json& j, const std::string& where) {
    if (!j.is_boolean()) throw ConfigError(where + ": expected true or false");
    return j.get<bool>();
}

inline void read_options(const json& j, LoopOptions& o, const UamParams& params) {
    expect_keys(j, "options", {"feedback", "actuation", "gravity_feedforward", "attitude_filter", "attitude_filter_hz",
                               "attitude_accel_feedforward", "robust_term", "gain_integration", "min_thrust", "rho_max",
                               "accel_filter_hz"});
    if (j.contains("feedback"))
        o.feedback = enum_value<FeedbackForm>(j["feedback"], "options.feedback", feedback_form_from_string);
    if (j.contains("actuation"))
        o.actuation = enum_value<PositionActuation>(j["actuation"], "options.actuation", position_actuation_from_string);
    if (j.contains("gravity_feedforward")) {
        if (boolean(j["gravity_feedforward"], "options.gravity_feedforward")) {
            o.gravity_model = params;
            o.gravity_model->payload_mass = 0.0;
        } else {
            o.gravity_model.reset();
        }
    }
    if (j.contains("attitude_filter"))
        o.attitude_filter =
            enum_value<ReferenceFilter>(j["attitude_filter"], "options.attitude_filter", reference_filter_from_string);
    if (j.contains("attitude_filter_hz")) o.attitude_filter_hz = number(j["attitude_filter_hz"], "options.attitude_filter_hz");
    if (j.contains("attitude_accel_feedforward"))
        o.attitude_accel_feedforward = boolean(j["attitude_accel_feedforward"], "options.attitude_accel_feedforward");
    if (j.contains("robust_term")) o.robust_term = boolean(j["robust_term"], "options.robust_term");
    if (j.contains("gain_integration"))
        o.gain_integration =
            enum_value<GainIntegration>(j["gain_integration"], "options.gain_integration", gain_integration_from_string);
    if (j.contains("min_thrust")) o.min_thrust = number(j["min_thrust"], "options.min_thrust");
    if (j.contains("rho_max")) {
        o.rho_max = j["rho_max"].is_null() ? std::numeric_limits<double>::infinity() : number(j["rho_max"], "options.rho_max");
    }
    if (j.contains("accel_filter_hz")) o.accel_filter_hz = number(j["accel_filter_hz"], "options.accel_filter_hz");
    if (!(o.attitude_filter_hz > 0.0) || !(o.accel_filter_hz >= 0.0) || !(o.min_thrust > 0.0) || !(o.rho_max > 0.0))
        throw ConfigError("options: filter bandwidths, min_thrust and rho_max must be positive");
}

}  // namespace cfg_detail

inline json mission_to_json(const Mission& m) {
    json wps = json::array();
    for (const auto& w : m.waypoints) {
        wps.push_back({{"t", w.time},
                       {"p", cfg_detail::to_json(Vec(w.p_d))},
                       {"psi", w.psi_d},
                       {"alpha", cfg_detail::to_json(w.alpha_d)}});
    }
    json events = json::array();
    for (const auto& e : m.payload_events) events.push_back({{"t", e.time}, {"delta_mass", e.delta_mass}});
    return {{"duration", m.duration}, {"waypoints", wps}, {"payload_events", events}};
}

inline Mission mission_from_json(const json& j) {
    using namespace cfg_detail;
    expect_keys(j, "mission", {"duration", "waypoints", "payload_events"});
    if (!j.contains("waypoints") || !j["waypoints"].is_array() || j["waypoints"].empty())
        throw ConfigError("mission: needs a nonempty 'waypoints' array");
    Mission m;
    for (const auto& w : j["waypoints"]) {
        expect_keys(w, "mission.waypoints[]", {"t", "p", "psi", "alpha"});
        if (!w.contains("t") || !w.contains("p") || !w.contains("alpha"))
            throw ConfigError("mission.waypoints[]: 't', 'p' and 'alpha' are required");
        Waypoint wp;
        wp.time = number(w["t"], "mission.waypoints[].t");
        wp.p_d = vector(w["p"], "mission.waypoints[].p", 3);
        wp.psi_d = w.contains("psi") ? number(w["psi"], "mission.waypoints[].psi") : 0.0;
        wp.alpha_d = vector(w["alpha"], "mission.waypoints[].alpha");
        m.waypoints.push_back(wp);
    }
    if (j.contains("payload_events")) {
        if (!j["payload_events"].is_array()) throw ConfigError("mission.payload_events: expected an array");
        for (const auto& e : j["payload_events"]) {
            expect_keys(e, "mission.payload_events[]", {"t", "delta_mass"});
            if (!e.contains("t") || !e.contains("delta_mass"))
                throw ConfigError("mission.payload_events[]: 't' and 'delta_mass' are required");
            m.payload_events.push_back({number(e["t"], "mission.payload_events[].t"),
                                        number(e["delta_mass"], "mission.payload_events[].delta_mass")});
        }
    }
    m.duration = j.contains("duration") ? number(j["duration"], "mission.duration") : m.waypoints.back().time;
    try {
        m.validate();
    } catch (const InvalidArgument& ex) {
        throw ConfigError(std::string("mission: ") + ex.what());
    }
    return m;
}

/// Sinusoidal 0.5 Hz generalized disturbance: 0.1 N on each force axis, 0.01 N m elsewhere.
inline DisturbanceProfile default_disturbance(int joints) {
    Vec a(6 + joints);
    a.head<3>().setConstant(0.1);
    a.tail(3 + joints).setConstant(0.01);
    return {DisturbanceKind::sinusoidal, a, 0.5, 0.0};
}

/// Desk-scale defaults: pick-and-place mission, sinusoidal disturbance, matched baseline.
inline AppConfig default_app_config() {
    AppConfig c;
    c.mission = pick_place_mission();
    c.proposed = desk_controller_config(c.params);
    c.baseline = matched_baseline_config(c.params, c.mission.waypoints.front().alpha_d, c.proposed);
    c.disturbance = default_disturbance(c.params.joints());
    c.sim.seed = 1;
    return c;
}

inline AppConfig config_from_json(const json& j) {
    using namespace cfg_detail;
    expect_keys(j, "config", {"controller", "params", "controllers", "adaptation", "options", "baseline", "disturbance",
                              "mission", "sim", "settle_time"});
    AppConfig c;
    if (j.contains("params")) read_params(j["params"], c.params);
    const int n = c.params.joints();

    c.mission = j.contains("mission") ? mission_from_json(j["mission"]) : pick_place_mission();
    if (c.mission.joints() != n) throw ConfigError("mission: waypoints carry a different joint count than params");

    c.proposed = desk_controller_config(c.params);
    if (j.contains("controllers")) {
        const json& cj = j["controllers"];
        expect_keys(cj, "controllers", {"position", "attitude", "manipulator"});
        if (cj.contains("position")) read_gains(cj["position"], "controllers.position", c.proposed.position, 3);
        if (cj.contains("attitude")) read_gains(cj["attitude"], "controllers.attitude", c.proposed.attitude, 3);
        if (cj.contains("manipulator")) read_gains(cj["manipulator"], "controllers.manipulator", c.proposed.manipulator, n);
    }
    if (j.contains("adaptation")) {
        const json& aj = j["adaptation"];
        expect_keys(aj, "adaptation", {"position", "attitude", "manipulator"});
        for (auto [key, g] : {std::pair{"position", &c.proposed.position}, std::pair{"attitude", &c.proposed.attitude},
                              std::pair{"manipulator", &c.proposed.manipulator}}) {
            if (aj.contains(key))
                read_adaptation(aj[key], std::string("adaptation.") + key, g->nu, g->epsilon, g->varpi, g->initial);
        }
    }
    if (j.contains("options")) read_options(j["options"], c.proposed.options, c.params);
    if (c.proposed.options.gravity_model) {
        c.proposed.options.gravity_model = c.params;
        c.proposed.options.gravity_model->payload_mass = 0.0;
    }

    c.baseline = matched_baseline_config(c.params, c.mission.waypoints.front().alpha_d, c.proposed);
    if (j.contains("baseline")) {
        const json& bj = j["baseline"];
        expect_keys(bj, "baseline", {"M_bar_diag", "Q", "nu", "epsilon", "varpi", "K_hat0", "zeta0"});
        const int N = c.params.dof();
        if (bj.contains("M_bar_diag")) c.baseline.M_bar_diag = vector(bj["M_bar_diag"], "baseline.M_bar_diag", N);
        if (bj.contains("Q")) c.baseline.Q = weight_matrix(bj["Q"], "baseline.Q", N);
        json adapt = json::object();
        for (const char* k : {"nu", "epsilon", "varpi", "K_hat0", "zeta0"})
            if (bj.contains(k)) adapt[k] = bj[k];
        read_adaptation(adapt, "baseline", c.baseline.nu, c.baseline.epsilon, c.baseline.varpi, c.baseline.initial);
    }

    c.disturbance = default_disturbance(n);
    if (j.contains("disturbance")) {
        const json& dj = j["disturbance"];
        expect_keys(dj, "disturbance", {"kind", "amplitude", "frequency"});
        if (dj.contains("kind"))
            c.disturbance.kind = enum_value<DisturbanceKind>(dj["kind"], "disturbance.kind", disturbance_kind_from_string);
        if (dj.contains("amplitude")) {
            const json& a = dj["amplitude"];
            c.disturbance.amplitude = a.is_number() ? Vec(Vec::Constant(6 + n, number(a, "disturbance.amplitude")))
                                                    : vector(a, "disturbance.amplitude", 6 + n);
        }
        if (dj.contains("frequency")) c.disturbance.frequency = number(dj["frequency"], "disturbance.frequency");
    }

    c.sim.seed = 1;
    if (j.contains("sim")) {
        const json& sj = j["sim"];
        expect_keys(sj, "sim", {"dt_physics", "control_period", "duration", "seed", "integrator", "divergence_ceiling"});
        if (sj.contains("dt_physics")) c.sim.dt_physics = number(sj["dt_physics"], "sim.dt_physics");
        if (sj.contains("control_period")) c.sim.control_period = number(sj["control_period"], "sim.control_period");
        if (sj.contains("duration")) c.sim.duration = number(sj["duration"], "sim.duration");
        if (sj.contains("seed")) {
            if (!sj["seed"].is_number_unsigned()) throw ConfigError("sim.seed: expected a non-negative integer");
            c.sim.seed = sj["seed"].get<std::uint64_t>();
        }
        if (sj.contains("integrator"))
            c.sim.integrator = enum_value<Integrator>(sj["integrator"], "sim.integrator", integrator_from_string);
        if (sj.contains("divergence_ceiling"))
            c.sim.divergence_ceiling = number(sj["divergence_ceiling"], "sim.divergence_ceiling");
    }
    if (j.contains("controller")) {
        if (!j["controller"].is_string()) throw ConfigError("controller: expected \"proposed\" or \"baseline\"");
        c.controller = j["controller"].get<std::string>();
        if (c.controller != "proposed" && c.controller != "baseline")
            throw ConfigError("controller: expected \"proposed\" or \"baseline\", got '" + c.controller + "'");
    }
    if (j.contains("settle_time")) c.settle_time = number(j["settle_time"], "settle_time");

    try {
        c.sim.validate();
    } catch (const InvalidArgument& ex) {
        throw ConfigError(std::string("sim: ") + ex.what());
    }
    return c;
}

inline AppConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& ex) {
        throw ConfigError("'" + path + "' is not valid JSON: " + ex.what());
    }
    return config_from_json(j);
}

}  // namespace uam
