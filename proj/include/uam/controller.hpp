#pragma once

// Closed-loop controllers for the aerial manipulator. Both controllers
// share the cascade structure (position force -> thrust + desired roll/pitch
// -> attitude torques) and differ in how the robust gain is adapted:
//
//  * ModularController: one (K_hat, zeta) set per subsystem, each driven by
//    its own sliding variable r_j and its own (nu, epsilon, varpi).
//  * BaselineController: a single sliding variable over the full error and
//    one shared (K_hat, zeta) set, with a diagonal nominal inertia.

#include "uam/control.hpp"
#include "uam/dynamics.hpp"
#include "uam/trajectory.hpp"

#include <array>
#include <cmath>
#include <memory>
#include <numbers>
#include <limits>
#include <optional>
#include <string>

namespace uam {

enum class PositionActuation {
    /// tau_p is realized as R(q) [0 0 u1]^T with (u1, phi_d, theta_d) extracted from it.
    thrust_vector,
    /// tau_p is applied directly and the attitude reference comes from the mission.
    direct_force,
};

inline std::string to_string(PositionActuation a) {
    return a == PositionActuation::thrust_vector ? "thrust_vector" : "direct_force";
}

inline PositionActuation position_actuation_from_string(const std::string& s) {
    if (s == "thrust_vector") return PositionActuation::thrust_vector;
    if (s == "direct_force") return PositionActuation::direct_force;
    throw InvalidArgument("unknown position actuation '" + s + "'");
}

enum class ReferenceFilter {
    /// Finite differences of q_d at the control rate through a first-order low-pass.
    finite_difference,
    /// Critically damped second-order command filter; q_d, q_d_dot, q_d_ddot are its states.
    second_order,
};

inline std::string to_string(ReferenceFilter f) {
    return f == ReferenceFilter::finite_difference ? "finite_difference" : "second_order";
}

inline ReferenceFilter reference_filter_from_string(const std::string& s) {
    if (s == "finite_difference") return ReferenceFilter::finite_difference;
    if (s == "second_order") return ReferenceFilter::second_order;
    throw InvalidArgument("unknown reference filter '" + s + "'");
}

/// Options common to both controllers.
struct LoopOptions {
    FeedbackForm feedback = FeedbackForm::shared_lambda;
    PositionActuation actuation = PositionActuation::thrust_vector;
    /// When set, this model's gravity load is added to the commanded input.
    /// The model carries no payload, so payload weight stays an unknown load.
    std::optional<UamParams> gravity_model;
    ReferenceFilter attitude_filter = ReferenceFilter::finite_difference;
    double attitude_filter_hz = 20.0;
    /// Feed the filtered q_d_ddot into the attitude law (rates are always used).
    bool attitude_accel_feedforward = true;
    bool robust_term = true;
    GainIntegration gain_integration = GainIntegration::exponential_euler;
    /// Floor on the vertical force handed to the thrust extraction (N).
    double min_thrust = 0.1;
    /// Ceiling on the robust gain rho. Infinite means no ceiling.
    double rho_max = std::numeric_limits<double>::infinity();
    /// First-order low-pass on the |chi_ddot| fed to rho and the K3 law (Hz). 0 passes it through.
    double accel_filter_hz = 0.0;
};

/// Low-pass filter on the measured acceleration norm.
class AccelNormFilter {
public:
    explicit AccelNormFilter(double bandwidth_hz = 0.0) : bandwidth_hz_(bandwidth_hz) {
        if (!(bandwidth_hz >= 0.0)) throw InvalidArgument("acceleration filter bandwidth must be >= 0");
    }

    double update(double raw, double dt) {
        if (bandwidth_hz_ == 0.0 || !initialized_) {
            value_ = raw;
            initialized_ = true;
            return value_;
        }
        value_ += (-std::expm1(-2.0 * std::numbers::pi * bandwidth_hz_ * dt)) * (raw - value_);
        return value_;
    }

    /// Filtered value without advancing; the raw value before the first update.
    [[nodiscard]] double current(double raw) const {
        return bandwidth_hz_ == 0.0 || !initialized_ ? raw : value_;
    }

private:
    double bandwidth_hz_;
    bool initialized_ = false;
    double value_ = 0.0;
};

/// Desired roll/pitch/yaw and their first two derivatives, generated from
/// the raw angles produced by the thrust extraction.
class AttitudeReference {
public:
    explicit AttitudeReference(double bandwidth_hz = 20.0, ReferenceFilter kind = ReferenceFilter::finite_difference)
        : bandwidth_hz_(bandwidth_hz), kind_(kind) {
        if (!(bandwidth_hz > 0.0)) throw InvalidArgument("attitude reference bandwidth must be > 0");
    }

    void reset(const Vec3& q_d) {
        q_d_ = q_d;
        rate_.setZero();
        accel_.setZero();
        initialized_ = true;
    }

    void update(const Vec3& q_cmd, double dt) {
        if (!initialized_) {
            reset(q_cmd);
            return;
        }
        const double w = 2.0 * std::numbers::pi * bandwidth_hz_;
        if (kind_ == ReferenceFilter::finite_difference) {
            Vec3 step = q_cmd - q_d_;
            step.z() = wrap_angle(step.z());
            const double a = dt / (dt + 1.0 / w);
            const Vec3 rate = rate_ + a * (step / dt - rate_);
            accel_ += a * ((rate - rate_) / dt - accel_);
            rate_ = rate;
            q_d_ = q_cmd;
            return;
        }
        // exact step of x'' = -w^2 x - 2w x' with x = q_d - q_cmd held over dt
        Vec3 x = q_d_ - q_cmd;
        x.z() = wrap_angle(x.z());
        const double decay = std::exp(-w * dt);
        const Vec3 c = rate_ + w * x;
        const Vec3 x1 = (x + c * dt) * decay;
        rate_ = (rate_ - w * c * dt) * decay;
        accel_ = -w * w * x1 - 2.0 * w * rate_;
        q_d_ = q_cmd + x1;
        q_d_.z() = wrap_angle(q_d_.z());
    }

    [[nodiscard]] bool initialized() const { return initialized_; }
    [[nodiscard]] const Vec3& angles() const { return q_d_; }
    [[nodiscard]] const Vec3& rates() const { return rate_; }
    [[nodiscard]] const Vec3& accelerations() const { return accel_; }

private:
    double bandwidth_hz_;
    ReferenceFilter kind_;
    bool initialized_ = false;
    Vec3 q_d_ = Vec3::Zero();
    Vec3 rate_ = Vec3::Zero();
    Vec3 accel_ = Vec3::Zero();
};

/// What one subsystem contributed on a control tick.
struct SubsystemSnapshot {
    Vec r;
    AdaptiveGains gains;
    double rho = 0.0;
    Vec delta_tau;
};

struct ControlOutput {
    Vec tau;          // generalized input applied to the plant
    Vec tau_command;  // [tau_p; tau_q; tau_alpha] as computed by the control laws
    double u1 = 0.0;
    Vec3 q_d = Vec3::Zero();
    Vec3 q_d_dot = Vec3::Zero();
    Vec3 q_d_ddot = Vec3::Zero();
    Vec e;      // [p - p_d; e_q; alpha - alpha_d]
    Vec e_dot;  // [p_dot - p_dot_d; e_q_dot; alpha_dot - alpha_dot_d]
    std::array<SubsystemSnapshot, 3> sub;
    double xi_norm = 0.0;
    double chi_ddot_norm = 0.0;
    double V_xi = 0.0;  // sum_j 1/2 xi_j^T P_j xi_j
};

class Controller {
public:
    virtual ~Controller() = default;
    [[nodiscard]] virtual std::string name() const = 0;
    [[nodiscard]] virtual std::unique_ptr<Controller> clone() const = 0;

    /// One control tick: errors, adaptation step of length dt, control laws.
    virtual ControlOutput update(const SystemState& state, const DesiredState& desired, double dt) = 0;

    /// Adaptive-law right-hand sides at the current gains for a state snapshot (no mutation).
    [[nodiscard]] virtual std::array<GainRates, 3> gain_rates(const SystemState& state,
                                                               const DesiredState& desired) const = 0;

    [[nodiscard]] virtual std::array<AdaptiveGains, 3> gains() const = 0;
    [[nodiscard]] virtual std::array<Mat, 3> lyapunov_matrices() const = 0;

    /// Replaces the adaptation parameters acting on subsystem `s`.
    virtual void set_adaptation(Subsystem s, const AdaptationParams& params) = 0;
};

namespace detail {

inline std::size_t index(Subsystem s) { return static_cast<std::size_t>(s); }

struct ErrorSet {
    Vec3 e_p, e_p_dot;
    Vec3 e_q, e_q_dot;
    Vec e_a, e_a_dot;
};

inline AttitudeError attitude_error_for(const SystemState& state, const Vec3& q_d, const Vec3& q_d_dot) {
    return attitude_error(rotation_matrix(state.q()), rotation_matrix(q_d), state.q_dot(), q_d_dot);
}

inline ErrorSet compute_errors(const SystemState& state, const DesiredState& desired, const Vec3& q_d,
                               const Vec3& q_d_dot) {
    const int n = state.joints();
    const AttitudeError att = attitude_error_for(state, q_d, q_d_dot);
    return ErrorSet{state.p() - desired.chi.head<3>(),
                    state.p_dot() - desired.chi_dot.head<3>(),
                    att.e_q,
                    att.e_q_dot,
                    state.alpha() - desired.chi.tail(n),
                    state.alpha_dot() - desired.chi_dot.tail(n)};
}

/// Attitude reference used on this tick before the position loop has run.
inline void attitude_reference_before(const AttitudeReference& ref, const DesiredState& desired,
                                      const LoopOptions& opt, Vec3& q_d, Vec3& q_d_dot, Vec3& q_d_ddot) {
    const PositionActuation actuation = opt.actuation;
    if (actuation == PositionActuation::direct_force || !ref.initialized()) {
        q_d = desired.chi.segment<3>(3);
        q_d_dot = desired.chi_dot.segment<3>(3);
        q_d_ddot = desired.chi_ddot.segment<3>(3);
        if (actuation == PositionActuation::thrust_vector) {
            q_d_dot.setZero();
            q_d_ddot.setZero();
        }
        return;
    }
    q_d = ref.angles();
    q_d_dot = ref.rates();
    q_d_ddot = opt.attitude_accel_feedforward ? ref.accelerations() : Vec3::Zero();
}

/// Nominal gravity load evaluated at the level attitude (roll = pitch = 0).
/// The tilt-dependent part of g_q is balanced by the thrust-induced coupling
/// in the real plant, so compensating it would add a destabilizing moment.
inline Vec gravity_feedforward(const LoopOptions& opt, const SystemState& state) {
    if (!opt.gravity_model) return Vec::Zero(state.dof());
    Vec level = state.chi;
    level(3) = 0.0;
    level(4) = 0.0;
    return gravity_vector(level, *opt.gravity_model);
}

/// Closes the cascade: from the commanded world force to thrust, desired
/// attitude and the force actually applied at the current attitude.
struct PositionStage {
    Vec3 applied_force;
    double u1;
    Vec3 q_d, q_d_dot, q_d_ddot;
};

inline PositionStage close_position_loop(const Vec3& tau_p, const SystemState& state, const DesiredState& desired,
                                         const LoopOptions& opt, AttitudeReference& ref, double dt) {
    const double psi_d = desired.chi(5);
    if (opt.actuation == PositionActuation::direct_force) {
        return {tau_p, tau_p.norm(), desired.chi.segment<3>(3), desired.chi_dot.segment<3>(3),
                desired.chi_ddot.segment<3>(3)};
    }
    Vec3 demand = tau_p;
    demand.z() = std::max(demand.z(), opt.min_thrust);
    const ThrustAttitude ta = thrust_attitude_extraction(demand, psi_d);
    ref.update(Vec3(ta.phi_d, ta.theta_d, psi_d), dt);
    const Vec3 applied = rotation_matrix(state.q()) * Vec3(0.0, 0.0, ta.u1);
    const Vec3 accel = opt.attitude_accel_feedforward ? ref.accelerations() : Vec3::Zero();
    return {applied, ta.u1, ref.angles(), ref.rates(), accel};
}

}  // namespace detail

/// Gains and initial adaptive state of one subsystem.
struct SubsystemGains {
    Mat M_bar;
    Mat Lambda;
    Mat lambda1;
    Mat lambda2;
    Mat Q;
    double varpi = 0.1;
    std::array<double, 4> nu{1.0, 1.0, 1.0, 1.0};
    double epsilon = 1e-4;
    AdaptiveGains initial;

    [[nodiscard]] AdaptationParams adaptation() const { return AdaptationParams{nu, epsilon, varpi}; }
};

struct ModularControllerConfig {
    SubsystemGains position;
    SubsystemGains attitude;
    SubsystemGains manipulator;
    LoopOptions options;
};

/// The fixed-gain design used on the experimental platform. Arm entries are
/// repeated when the arm has more than two joints.
inline ModularControllerConfig flight_controller_config(int joints = 2) {
    const int n = joints;
    auto eye = [](int d, double s) { return Mat(s * Mat::Identity(d, d)); };
    ModularControllerConfig c;

    c.position.M_bar = eye(3, 1.0);
    c.position.Q = eye(3, 1.0);
    c.position.lambda2 = diag_matrix({1.0, 1.0, 2.0});
    c.position.lambda1 = 2.0 * c.position.lambda2;
    c.position.Lambda = diag_matrix({1.5, 1.5, 2.0});
    c.position.initial = {{0.01, 0.01, 0.01, 0.01}, 0.1};
    c.position.nu = {10.0, 10.0, 10.0, 10.0};
    c.position.epsilon = 1e-4;
    c.position.varpi = 0.1;

    c.attitude.M_bar = eye(3, 0.015);
    c.attitude.Q = eye(3, 1.0);
    c.attitude.lambda2 = diag_matrix({2.0, 2.0, 2.0});
    c.attitude.lambda1 = 2.0 * c.attitude.lambda2;
    c.attitude.Lambda = diag_matrix({3.5, 3.5, 2.5});
    c.attitude.initial = {{0.001, 0.001, 0.001, 0.001}, 0.01};
    c.attitude.nu = {20.0, 20.0, 20.0, 20.0};
    c.attitude.epsilon = 1e-4;
    c.attitude.varpi = 1.0;

    c.manipulator.M_bar = eye(n, 0.1);
    c.manipulator.Q = eye(n, 1.0);
    c.manipulator.lambda2 = eye(n, 1.5);
    c.manipulator.lambda1 = 2.0 * c.manipulator.lambda2;
    c.manipulator.Lambda = eye(n, 1.0);
    c.manipulator.initial = {{1e-4, 1e-4, 1e-4, 1e-4}, 0.01};
    c.manipulator.nu = {1.0, 1.0, 1.0, 1.0};
    c.manipulator.epsilon = 1e-4;
    c.manipulator.varpi = 0.1;
    return c;
}

class ModularController final : public Controller {
public:
    explicit ModularController(const ModularControllerConfig& cfg) : options_(cfg.options), reference_(cfg.options.attitude_filter_hz, cfg.options.attitude_filter),
          accel_filter_(cfg.options.accel_filter_hz) {
        const std::array<const SubsystemGains*, 3> src{&cfg.position, &cfg.attitude, &cfg.manipulator};
        const std::array<Subsystem, 3> labels{Subsystem::position, Subsystem::attitude, Subsystem::manipulator};
        for (std::size_t j = 0; j < 3; ++j) {
            const SubsystemGains& g = *src[j];
            loops_[j] = SubsystemController::configure(labels[j], g.M_bar, g.Lambda, g.lambda1, g.lambda2, g.Q, g.varpi,
                                                       options_.feedback);
            adaptation_[j] = g.adaptation();
            adaptation_[j].validate();
            if (g.initial.zeta <= 0.0 || std::any_of(g.initial.K_hat.begin(), g.initial.K_hat.end(), [](double k) { return k < 0.0; }))
                throw InvalidArgument(to_string(labels[j]) + ": initial gains need K_hat >= 0 and zeta > 0");
            gains_[j] = g.initial;
        }
    }

    [[nodiscard]] std::string name() const override { return "proposed"; }
    [[nodiscard]] std::unique_ptr<Controller> clone() const override { return std::make_unique<ModularController>(*this); }

    [[nodiscard]] const SubsystemController& loop(Subsystem s) const { return loops_[detail::index(s)]; }
    [[nodiscard]] const AdaptationParams& adaptation(Subsystem s) const { return adaptation_[detail::index(s)]; }
    [[nodiscard]] const LoopOptions& options() const { return options_; }

    void set_adaptation(Subsystem s, const AdaptationParams& params) override {
        params.validate();
        adaptation_[detail::index(s)] = params;
    }

    [[nodiscard]] std::array<AdaptiveGains, 3> gains() const override { return gains_; }

    [[nodiscard]] std::array<Mat, 3> lyapunov_matrices() const override {
        return {loops_[0].P, loops_[1].P, loops_[2].P};
    }

    [[nodiscard]] std::array<GainRates, 3> gain_rates(const SystemState& state,
                                                       const DesiredState& desired) const override {
        Snapshot s = snapshot(state, desired);
        s.chi_ddot_norm = accel_filter_.current(s.chi_ddot_norm);
        std::array<GainRates, 3> out;
        for (std::size_t j = 0; j < 3; ++j)
            out[j] = gain_derivatives(gains_[j], adaptation_[j], {s.err[j].r.norm(), s.xi_norm, s.chi_ddot_norm});
        return out;
    }

    ControlOutput update(const SystemState& state, const DesiredState& desired, double dt) override {
        const int n = state.joints();
        // Step 1: errors and sliding variables
        Snapshot s = snapshot(state, desired);
        s.chi_ddot_norm = accel_filter_.update(s.chi_ddot_norm, dt);

        // Step 2: adaptive gains, each subsystem from its own |r_j|
        for (std::size_t j = 0; j < 3; ++j) {
            gains_[j] = integrate_gains(gains_[j], adaptation_[j], {s.err[j].r.norm(), s.xi_norm, s.chi_ddot_norm}, dt,
                                        options_.gain_integration);
        }

        // Step 4: control laws, position first so the attitude loop sees the new reference
        ControlOutput out;
        out.xi_norm = s.xi_norm;
        out.chi_ddot_norm = s.chi_ddot_norm;
        std::array<TrackingError, 3> err = s.err;

        auto robust = [&](std::size_t j, const Vec& r) {
            const double rho = std::min(rho_gain(gains_[j], s.xi_norm, s.chi_ddot_norm), options_.rho_max);
            Vec dt_j = options_.robust_term ? delta_tau(r, rho, loops_[j].varpi) : Vec(Vec::Zero(r.size()));
            return std::make_pair(rho, dt_j);
        };

        const Vec g_ff = detail::gravity_feedforward(options_, state);
        const auto [rho_p, dtau_p] = robust(0, err[0].r);
        const Vec3 tau_p = control_law(loops_[0], err[0].xi, dtau_p, desired.chi_ddot.head<3>()) + g_ff.head<3>();
        const detail::PositionStage stage = detail::close_position_loop(tau_p, state, desired, options_, reference_, dt);

        const AttitudeError att = detail::attitude_error_for(state, stage.q_d, stage.q_d_dot);
        err[1] = tracking_error(loops_[1], att.e_q, att.e_q_dot);
        const auto [rho_q, dtau_q] = robust(1, err[1].r);
        const Vec tau_q = control_law(loops_[1], err[1].xi, dtau_q, stage.q_d_ddot) + g_ff.segment<3>(3);

        const auto [rho_a, dtau_a] = robust(2, err[2].r);
        const Vec tau_a = control_law(loops_[2], err[2].xi, dtau_a, desired.chi_ddot.tail(n)) + g_ff.tail(n);

        out.tau = Vec(6 + n);
        out.tau << stage.applied_force, tau_q, tau_a;
        out.tau_command = Vec(6 + n);
        out.tau_command << tau_p, tau_q, tau_a;
        out.u1 = stage.u1;
        out.q_d = stage.q_d;
        out.q_d_dot = stage.q_d_dot;
        out.q_d_ddot = stage.q_d_ddot;
        out.e = Vec(6 + n);
        out.e << err[0].e, err[1].e, err[2].e;
        out.e_dot = Vec(6 + n);
        out.e_dot << err[0].e_dot, err[1].e_dot, err[2].e_dot;
        const std::array<double, 3> rho{rho_p, rho_q, rho_a};
        const std::array<Vec, 3> dtau{dtau_p, dtau_q, dtau_a};
        for (std::size_t j = 0; j < 3; ++j) {
            out.sub[j] = {err[j].r, gains_[j], rho[j], dtau[j]};
            out.V_xi += 0.5 * err[j].xi.dot(loops_[j].P * err[j].xi);
        }
        return out;
    }

private:
    struct Snapshot {
        std::array<TrackingError, 3> err;
        double xi_norm = 0.0;
        double chi_ddot_norm = 0.0;
    };

    [[nodiscard]] Snapshot snapshot(const SystemState& state, const DesiredState& desired) const {
        Vec3 q_d, q_d_dot, q_d_ddot;
        detail::attitude_reference_before(reference_, desired, options_, q_d, q_d_dot, q_d_ddot);
        const detail::ErrorSet e = detail::compute_errors(state, desired, q_d, q_d_dot);
        Snapshot s;
        s.err[0] = tracking_error(loops_[0], e.e_p, e.e_p_dot);
        s.err[1] = tracking_error(loops_[1], e.e_q, e.e_q_dot);
        s.err[2] = tracking_error(loops_[2], e.e_a, e.e_a_dot);
        // |xi| is the norm of the full stacked error, shared by all three laws
        s.xi_norm = std::sqrt(s.err[0].xi.squaredNorm() + s.err[1].xi.squaredNorm() + s.err[2].xi.squaredNorm());
        s.chi_ddot_norm = state.chi_ddot_prev.norm();
        return s;
    }

    LoopOptions options_;
    std::array<SubsystemController, 3> loops_;
    std::array<AdaptationParams, 3> adaptation_;
    std::array<AdaptiveGains, 3> gains_;
    AttitudeReference reference_;
    AccelNormFilter accel_filter_;
};

struct BaselineControllerConfig {
    Vec M_bar_diag;  // 6+n nominal inertia diagonal
    Mat Lambda;      // (6+n) x (6+n)
    Mat lambda1;
    Mat lambda2;
    Mat Q;           // 2(6+n) square, or (6+n) square applied to both halves
    double varpi = 0.1;
    std::array<double, 4> nu{10.0, 10.0, 10.0, 10.0};
    double epsilon = 1e-4;
    AdaptiveGains initial{{0.01, 0.01, 0.01, 0.01}, 0.1};
    LoopOptions options;
};

namespace detail {

inline Mat block_diag(const Mat& a, const Mat& b, const Mat& c) {
    Mat out = Mat::Zero(a.rows() + b.rows() + c.rows(), a.cols() + b.cols() + c.cols());
    out.block(0, 0, a.rows(), a.cols()) = a;
    out.block(a.rows(), a.cols(), b.rows(), b.cols()) = b;
    out.block(a.rows() + b.rows(), a.cols() + b.cols(), c.rows(), c.cols()) = c;
    return out;
}

}  // namespace detail

/// Baseline built from nominal knowledge: the diagonal of the mass matrix at
/// the start pose without payload, block-diagonal feedback gains from the
/// fixed-gain design, and the position loop's adaptation constants shared by
/// every subsystem.
inline BaselineControllerConfig default_baseline_config(const UamParams& nominal, const Vec& alpha0) {
    const ModularControllerConfig fl = flight_controller_config(nominal.joints());
    BaselineControllerConfig b;
    UamParams unloaded = nominal;
    unloaded.payload_mass = 0.0;
    Vec chi0 = Vec::Zero(unloaded.dof());
    chi0.tail(unloaded.joints()) = alpha0;
    b.M_bar_diag = mass_matrix(chi0, unloaded).diagonal();
    b.Lambda = detail::block_diag(fl.position.Lambda, fl.attitude.Lambda, fl.manipulator.Lambda);
    b.lambda1 = detail::block_diag(fl.position.lambda1, fl.attitude.lambda1, fl.manipulator.lambda1);
    b.lambda2 = detail::block_diag(fl.position.lambda2, fl.attitude.lambda2, fl.manipulator.lambda2);
    b.Q = Mat::Identity(2 * unloaded.dof(), 2 * unloaded.dof());
    b.varpi = fl.position.varpi;
    b.nu = fl.position.nu;
    b.epsilon = fl.position.epsilon;
    b.initial = fl.position.initial;
    return b;
}

/// lambda1 = w^2 I, lambda2 = 2w I (critically damped), Lambda = lambda2.
/// q_scale > 0 sets Q = diag(2 w^3 c I, 2 w c I), which makes r ~ c (w e + e_dot);
/// q_scale = 0 keeps Q = I.
inline void pole_placement(SubsystemGains& g, int d, double omega, double m_bar, double q_scale) {
    if (!(omega > 0.0) || !(m_bar > 0.0) || !(q_scale >= 0.0))
        throw InvalidArgument("pole placement needs omega > 0, M_bar > 0 and q_scale >= 0");
    const Mat I = Mat::Identity(d, d);
    g.M_bar = m_bar * I;
    g.lambda1 = omega * omega * I;
    g.lambda2 = 2.0 * omega * I;
    g.Lambda = g.lambda2;
    if (q_scale == 0.0) {
        g.Q = Mat::Identity(2 * d, 2 * d);
    } else {
        g.Q = Mat::Zero(2 * d, 2 * d);
        g.Q.topLeftCorner(d, d) = 2.0 * omega * omega * omega * q_scale * I;
        g.Q.bottomRightCorner(d, d) = 2.0 * omega * q_scale * I;
    }
}

/// Desk-scale tuning for the simulated platform: pole placement on each loop,
/// fixed-gain adaptation constants except a lighter position leakage, gravity
/// feedforward from the nominal model and a filtered acceleration norm.
inline ModularControllerConfig desk_controller_config(const UamParams& nominal) {
    const int n = nominal.joints();
    ModularControllerConfig c = flight_controller_config(n);
    pole_placement(c.position, 3, 3.0, 2.2, 3.0);
    pole_placement(c.attitude, 3, 25.0, 0.05, 0.0);
    pole_placement(c.manipulator, n, 15.0, 0.06, 5.0);
    c.position.nu = {3.0, 3.0, 3.0, 3.0};
    c.options.feedback = FeedbackForm::hurwitz_gains;
    c.options.gravity_model = nominal;
    c.options.gravity_model->payload_mass = 0.0;
    c.options.accel_filter_hz = 0.2;
    return c;
}

/// Baseline matched to a modular design: same feedback gains and loop
/// options, diagonal nominal inertia, Q = I and the fixed-gain position
/// adaptation constants shared by all subsystems.
inline BaselineControllerConfig matched_baseline_config(const UamParams& nominal, const Vec& alpha0,
                                                        const ModularControllerConfig& proposed) {
    BaselineControllerConfig b = default_baseline_config(nominal, alpha0);
    b.Lambda = detail::block_diag(proposed.position.Lambda, proposed.attitude.Lambda, proposed.manipulator.Lambda);
    b.lambda1 = detail::block_diag(proposed.position.lambda1, proposed.attitude.lambda1, proposed.manipulator.lambda1);
    b.lambda2 = detail::block_diag(proposed.position.lambda2, proposed.attitude.lambda2, proposed.manipulator.lambda2);
    b.options = proposed.options;
    return b;
}

class BaselineController final : public Controller {
public:
    explicit BaselineController(const BaselineControllerConfig& cfg)
        : options_(cfg.options), reference_(cfg.options.attitude_filter_hz, cfg.options.attitude_filter),
          accel_filter_(cfg.options.accel_filter_hz) {
        const auto N = cfg.M_bar_diag.size();
        if (N < 7) throw InvalidArgument("baseline: nominal inertia needs 6+n entries");
        if (!(cfg.M_bar_diag.array() > 0.0).all()) throw InvalidArgument("baseline: nominal inertia must be > 0");
        loop_ = SubsystemController::configure(Subsystem::position, cfg.M_bar_diag.asDiagonal(), cfg.Lambda, cfg.lambda1,
                                               cfg.lambda2, cfg.Q, cfg.varpi, options_.feedback);
        adaptation_ = AdaptationParams{cfg.nu, cfg.epsilon, cfg.varpi};
        adaptation_.validate();
        gains_ = cfg.initial;
    }

    [[nodiscard]] std::string name() const override { return "baseline"; }
    [[nodiscard]] std::unique_ptr<Controller> clone() const override { return std::make_unique<BaselineController>(*this); }

    /// Every subsystem reads the same adaptation parameters, so `s` is ignored.
    void set_adaptation(Subsystem, const AdaptationParams& params) override {
        params.validate();
        adaptation_ = params;
    }

    [[nodiscard]] std::array<AdaptiveGains, 3> gains() const override { return {gains_, gains_, gains_}; }

    [[nodiscard]] std::array<Mat, 3> lyapunov_matrices() const override {
        // P is block diagonal when Q is; report the per-subsystem blocks
        const int N = loop_.dim();
        const int n = N - 6;
        auto block = [&](int off, int d) {
            Mat P(2 * d, 2 * d);
            P.topLeftCorner(d, d) = loop_.P.block(off, off, d, d);
            P.topRightCorner(d, d) = loop_.P.block(off, N + off, d, d);
            P.bottomLeftCorner(d, d) = loop_.P.block(N + off, off, d, d);
            P.bottomRightCorner(d, d) = loop_.P.block(N + off, N + off, d, d);
            return P;
        };
        return {block(0, 3), block(3, 3), block(6, n)};
    }

    [[nodiscard]] const SubsystemController& loop() const { return loop_; }

    [[nodiscard]] std::array<GainRates, 3> gain_rates(const SystemState& state,
                                                       const DesiredState& desired) const override {
        Snapshot s = snapshot(state, desired);
        s.chi_ddot_norm = accel_filter_.current(s.chi_ddot_norm);
        const GainRates shared = gain_derivatives(gains_, adaptation_, {s.err.r.norm(), s.err.xi.norm(), s.chi_ddot_norm});
        return {shared, shared, shared};
    }

    ControlOutput update(const SystemState& state, const DesiredState& desired, double dt) override {
        const int N = state.dof();
        const int n = state.joints();
        Snapshot s = snapshot(state, desired);
        s.chi_ddot_norm = accel_filter_.update(s.chi_ddot_norm, dt);
        const double xi_norm = s.err.xi.norm();
        gains_ = integrate_gains(gains_, adaptation_, {s.err.r.norm(), xi_norm, s.chi_ddot_norm}, dt,
                                 options_.gain_integration);
        const double rho = std::min(rho_gain(gains_, xi_norm, s.chi_ddot_norm), options_.rho_max);
        auto robust = [&](const Vec& r) {
            return options_.robust_term ? delta_tau(r, rho, loop_.varpi) : Vec(Vec::Zero(r.size()));
        };

        const Vec dtau = robust(s.err.r);
        const Vec g_ff = detail::gravity_feedforward(options_, state);
        const Vec tau_full = control_law(loop_, s.err.xi, dtau, desired_accel(desired, s.q_d_ddot)) + g_ff;
        const Vec3 tau_p = tau_full.head<3>();
        const detail::PositionStage stage = detail::close_position_loop(tau_p, state, desired, options_, reference_, dt);

        // attitude and arm torques with the refreshed attitude reference
        const detail::ErrorSet e2 = detail::compute_errors(state, desired, stage.q_d, stage.q_d_dot);
        const TrackingError err2 = global_error(e2);
        const Vec dtau2 = robust(err2.r);
        const Vec tau2 = control_law(loop_, err2.xi, dtau2, desired_accel(desired, stage.q_d_ddot)) + g_ff;

        ControlOutput out;
        out.xi_norm = xi_norm;
        out.chi_ddot_norm = s.chi_ddot_norm;
        out.tau = Vec(N);
        out.tau << stage.applied_force, tau2.segment(3, 3), tau2.tail(n);
        out.tau_command = Vec(N);
        out.tau_command << tau_p, tau2.segment(3, 3), tau2.tail(n);
        out.u1 = stage.u1;
        out.q_d = stage.q_d;
        out.q_d_dot = stage.q_d_dot;
        out.q_d_ddot = stage.q_d_ddot;
        out.e = err2.e;
        out.e_dot = err2.e_dot;
        Vec r_mixed = err2.r;
        r_mixed.head<3>() = s.err.r.head<3>();
        Vec dtau_mixed = dtau2;
        dtau_mixed.head<3>() = dtau.head<3>();
        const std::array<std::pair<int, int>, 3> slices{{{0, 3}, {3, 3}, {6, n}}};
        for (std::size_t j = 0; j < 3; ++j) {
            const auto [off, d] = slices[j];
            out.sub[j] = {r_mixed.segment(off, d), gains_, rho, dtau_mixed.segment(off, d)};
        }
        out.V_xi = 0.5 * err2.xi.dot(loop_.P * err2.xi);
        return out;
    }

private:
    struct Snapshot {
        TrackingError err;
        Vec3 q_d_ddot;
        double chi_ddot_norm = 0.0;
    };

    [[nodiscard]] TrackingError global_error(const detail::ErrorSet& e) const {
        const int n = static_cast<int>(e.e_a.size());
        Vec err(6 + n), err_dot(6 + n);
        err << e.e_p, e.e_q, e.e_a;
        err_dot << e.e_p_dot, e.e_q_dot, e.e_a_dot;
        return tracking_error(loop_, err, err_dot);
    }

    [[nodiscard]] static Vec desired_accel(const DesiredState& desired, const Vec3& q_d_ddot) {
        Vec acc = desired.chi_ddot;
        acc.segment<3>(3) = q_d_ddot;
        return acc;
    }

    [[nodiscard]] Snapshot snapshot(const SystemState& state, const DesiredState& desired) const {
        Vec3 q_d, q_d_dot, q_d_ddot;
        detail::attitude_reference_before(reference_, desired, options_, q_d, q_d_dot, q_d_ddot);
        return {global_error(detail::compute_errors(state, desired, q_d, q_d_dot)), q_d_ddot, state.chi_ddot_prev.norm()};
    }

    LoopOptions options_;
    SubsystemController loop_;
    AdaptationParams adaptation_;
    AdaptiveGains gains_;
    AttitudeReference reference_;
    AccelNormFilter accel_filter_;
};

}  // namespace uam
