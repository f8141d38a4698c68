#pragma once

// Per-subsystem sliding-mode machinery shared by the position, attitude and
// manipulator loops.

#include "uam/adaptive_gains.hpp"
#include "uam/lyapunov.hpp"
#include "uam/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

namespace uam {

enum class Subsystem { position, attitude, manipulator };

inline std::string to_string(Subsystem s) {
    switch (s) {
        case Subsystem::position: return "position";
        case Subsystem::attitude: return "attitude";
        case Subsystem::manipulator: return "manipulator";
    }
    return "position";
}

/// How the d x d feedback matrix acts on the 2d error xi = [e; e_dot].
enum class FeedbackForm {
    /// Lambda e + Lambda e_dot.
    shared_lambda,
    /// lambda1 e + lambda2 e_dot, so the nominal loop is exactly xi_dot = A xi.
    hurwitz_gains,
};

inline std::string to_string(FeedbackForm f) {
    return f == FeedbackForm::shared_lambda ? "shared_lambda" : "hurwitz_gains";
}

inline FeedbackForm feedback_form_from_string(const std::string& s) {
    if (s == "shared_lambda") return FeedbackForm::shared_lambda;
    if (s == "hurwitz_gains") return FeedbackForm::hurwitz_gains;
    throw InvalidArgument("unknown feedback form '" + s + "'");
}

/// Gains of one subsystem plus the Lyapunov pair (A, P) derived from them.
struct SubsystemController {
    Subsystem label = Subsystem::position;
    Mat M_bar;
    Mat Lambda;
    Mat lambda1;
    Mat lambda2;
    Mat Q;
    double varpi = 0.1;
    FeedbackForm feedback = FeedbackForm::shared_lambda;

    Mat A;  // derived
    Mat P;  // derived

    [[nodiscard]] int dim() const { return static_cast<int>(M_bar.rows()); }

    /// Selector [0; I] picking the rate half of xi.
    [[nodiscard]] Mat B_sel() const {
        Mat B = Mat::Zero(2 * dim(), dim());
        B.bottomRows(dim()).setIdentity();
        return B;
    }

    /// Validates the gains and solves for A and P. Throws on bad gains.
    static SubsystemController configure(Subsystem label, Mat M_bar, Mat Lambda, Mat lambda1, Mat lambda2, Mat Q,
                                         double varpi, FeedbackForm feedback = FeedbackForm::shared_lambda) {
        const auto d = M_bar.rows();
        const std::string name = to_string(label);
        auto square = [d](const Mat& m) { return m.rows() == d && m.cols() == d; };
        if (d == 0 || !square(M_bar) || !square(Lambda) || !square(lambda1) || !square(lambda2))
            throw InvalidArgument(name + ": gain matrices must all be " + std::to_string(d) + "x" + std::to_string(d));
        if (Q.rows() != 2 * d || Q.cols() != 2 * d) {
            // a d x d Q is taken as the same weight on e and e_dot
            if (square(Q)) {
                Mat Qfull = Mat::Zero(2 * d, 2 * d);
                Qfull.topLeftCorner(d, d) = Q;
                Qfull.bottomRightCorner(d, d) = Q;
                Q = Qfull;
            } else {
                throw InvalidArgument(name + ": Q must be d x d or 2d x 2d");
            }
        }
        if (!is_positive_definite(M_bar)) throw InvalidArgument(name + ": M_bar must be positive definite");
        if (!is_positive_definite(Lambda)) throw InvalidArgument(name + ": Lambda must be positive definite");
        if (!is_positive_definite(Q)) throw InvalidArgument(name + ": Q must be positive definite");
        if (!(varpi > 0.0)) throw InvalidArgument(name + ": varpi must be > 0");

        SubsystemController c;
        c.label = label;
        c.M_bar = std::move(M_bar);
        c.Lambda = std::move(Lambda);
        c.lambda1 = std::move(lambda1);
        c.lambda2 = std::move(lambda2);
        c.Q = std::move(Q);
        c.varpi = varpi;
        c.feedback = feedback;
        c.A = build_A(c.lambda1, c.lambda2);
        c.P = lyapunov_solve(c.A, c.Q);
        const double res = lyapunov_residual(c.A, c.P, c.Q);
        if (!(res <= 1e-10) || !is_positive_definite(c.P)) {
            std::ostringstream os;
            os << name << ": Lyapunov solution rejected (residual " << res << ")";
            throw SolverError(os.str());
        }
        return c;
    }
};

struct TrackingError {
    Vec e;
    Vec e_dot;
    Vec xi;
    Vec r;
};

inline Vec stack_error(const Vec& e, const Vec& e_dot) {
    Vec xi(e.size() + e_dot.size());
    xi << e, e_dot;
    return xi;
}

/// r = B^T P xi.
inline Vec sliding_variable(const SubsystemController& ctrl, const Vec& xi) {
    if (xi.size() != 2 * ctrl.dim()) throw InvalidArgument("xi has the wrong size for this subsystem");
    return (ctrl.P * xi).tail(ctrl.dim());
}

inline TrackingError tracking_error(const SubsystemController& ctrl, const Vec& e, const Vec& e_dot) {
    TrackingError te{e, e_dot, stack_error(e, e_dot), {}};
    te.r = sliding_variable(ctrl, te.xi);
    return te;
}

struct AttitudeError {
    Vec3 e_q;
    Vec3 e_q_dot;
};

/// e_q = 1/2 (R_d^T R - R^T R_d)^vee,  e_q_dot = q_dot - R_d^T R q_dot_d.
inline AttitudeError attitude_error(const Mat3& R, const Mat3& R_d, const Vec3& q_dot, const Vec3& q_dot_d) {
    const Mat3 X = R_d.transpose() * R - R.transpose() * R_d;
    return {0.5 * vee(X), q_dot - R_d.transpose() * R * q_dot_d};
}

/// Boundary-layer robust term: rho r/|r| outside the layer, rho r/varpi inside.
inline Vec delta_tau(const Vec& r, double rho, double varpi) {
    if (!(varpi > 0.0)) throw InvalidArgument("varpi must be > 0");
    const double n = r.norm();
    if (n >= varpi) return rho * r / n;
    return rho * r / varpi;
}

/// tau = M_bar (-Lambda xi - delta_tau + xdd_desired).
inline Vec control_law(const SubsystemController& ctrl, const Vec& xi, const Vec& dtau, const Vec& xdd_desired) {
    const int d = ctrl.dim();
    if (xi.size() != 2 * d || dtau.size() != d || xdd_desired.size() != d)
        throw InvalidArgument("control_law: input sizes do not match the subsystem");
    const auto e = xi.head(d);
    const auto e_dot = xi.tail(d);
    Vec feedback(d);
    if (ctrl.feedback == FeedbackForm::shared_lambda) {
        feedback = ctrl.Lambda * e + ctrl.Lambda * e_dot;
    } else {
        feedback = ctrl.lambda1 * e + ctrl.lambda2 * e_dot;
    }
    return ctrl.M_bar * (-feedback - dtau + xdd_desired);
}

inline double rho_gain(const AdaptiveGains& g, double xi_norm, double chi_ddot_norm) {
    return g.K_hat[0] + g.K_hat[1] * xi_norm + g.K_hat[2] * xi_norm * xi_norm + g.K_hat[3] * chi_ddot_norm + g.zeta;
}

inline constexpr double kMaxCommandedPitch = std::numbers::pi / 2.0 - 0.1;

struct ThrustAttitude {
    double u1;
    double phi_d;
    double theta_d;
};

/// Splits a world-frame force into collective thrust along body z and the
/// roll/pitch that align body z with it: R(phi_d, theta_d, psi_d) [0 0 u1]^T = tau_p.
inline ThrustAttitude thrust_attitude_extraction(const Vec3& tau_p, double psi_d) {
    if (!(tau_p.z() > 0.0)) {
        std::ostringstream os;
        os << "non-positive thrust demand (tau_p.z = " << tau_p.z() << ")";
        throw InvalidArgument(os.str());
    }
    const double u1 = tau_p.norm();
    const Vec3 a = rot_z(psi_d).transpose() * tau_p / u1;  // (s_theta c_phi, -s_phi, c_theta c_phi)
    const double phi = std::atan2(-a.y(), std::hypot(a.x(), a.z()));
    const double theta = std::clamp(std::atan2(a.x(), a.z()), -kMaxCommandedPitch, kMaxCommandedPitch);
    return {u1, phi, theta};
}

}  // namespace uam
