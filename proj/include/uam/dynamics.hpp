#pragma once

// Coupled Euler-Lagrange model of a quadrotor carrying a planar n-link arm.
//
// Generalized coordinates chi = [p; q; alpha] with p the quadrotor CoM in the
// world frame (z up), q = (roll, pitch, yaw) Z-Y-X Euler angles and alpha the
// relative joint angles. The model obeys
//
//     M(chi) chi_ddot + C(chi, chi_dot) chi_dot + g(chi) + d(t) = tau
//
// where tau is the generalized force (world-frame force on p, Euler-angle
// generalized torques on q, joint torques on alpha).

#include "uam/params.hpp"
#include "uam/rotation.hpp"

#include <cmath>
#include <sstream>
#include <vector>

namespace uam {

struct GeneralizedCoords {
    Vec3 p = Vec3::Zero();
    Vec3 q = Vec3::Zero();
    Vec alpha;

    [[nodiscard]] int dof() const { return 6 + static_cast<int>(alpha.size()); }

    [[nodiscard]] Vec stacked() const {
        Vec chi(dof());
        chi << p, q, alpha;
        return chi;
    }

    static GeneralizedCoords from_stacked(const Vec& chi) {
        if (chi.size() < 7) throw InvalidArgument("generalized coordinates need 6+n entries with n >= 1");
        return GeneralizedCoords{chi.head<3>(), chi.segment<3>(3), chi.tail(chi.size() - 6)};
    }

    void validate() const {
        if (!p.allFinite() || !q.allFinite() || !alpha.allFinite())
            throw InvalidArgument("generalized coordinates contain non-finite entries");
        check_pitch(q.y());
    }
};

struct SystemState {
    Vec chi;
    Vec chi_dot;
    Vec chi_ddot_prev;
    double t = 0.0;

    static SystemState at_rest(const GeneralizedCoords& coords, double t0 = 0.0) {
        const Vec chi = coords.stacked();
        return SystemState{chi, Vec::Zero(chi.size()), Vec::Zero(chi.size()), t0};
    }

    [[nodiscard]] int dof() const { return static_cast<int>(chi.size()); }
    [[nodiscard]] int joints() const { return dof() - 6; }
    [[nodiscard]] Vec3 p() const { return chi.head<3>(); }
    [[nodiscard]] Vec3 q() const { return chi.segment<3>(3); }
    [[nodiscard]] Vec alpha() const { return chi.tail(joints()); }
    [[nodiscard]] Vec3 p_dot() const { return chi_dot.head<3>(); }
    [[nodiscard]] Vec3 q_dot() const { return chi_dot.segment<3>(3); }
    [[nodiscard]] Vec alpha_dot() const { return chi_dot.tail(joints()); }

    void validate() const {
        if (chi.size() < 7 || chi_dot.size() != chi.size() || chi_ddot_prev.size() != chi.size())
            throw InvalidArgument("state vectors must all have 6+n entries");
        if (!chi.allFinite() || !chi_dot.allFinite() || !chi_ddot_prev.allFinite())
            throw InvalidArgument("state contains non-finite entries");
        check_pitch(chi(4));
    }
};

/// M, C and g evaluated at one state, with the block views used by the
/// per-subsystem controllers.
struct DynamicsMatrices {
    Mat M;
    Mat C;
    Vec g;

    [[nodiscard]] int joints() const { return static_cast<int>(M.rows()) - 6; }
    [[nodiscard]] Mat M_pp() const { return M.block(0, 0, 3, 3); }
    [[nodiscard]] Mat M_pq() const { return M.block(0, 3, 3, 3); }
    [[nodiscard]] Mat M_palpha() const { return M.block(0, 6, 3, joints()); }
    [[nodiscard]] Mat M_qq() const { return M.block(3, 3, 3, 3); }
    [[nodiscard]] Mat M_qalpha() const { return M.block(3, 6, 3, joints()); }
    [[nodiscard]] Mat M_alphaalpha() const { return M.block(6, 6, joints(), joints()); }
    [[nodiscard]] Mat C_p() const { return C.topRows(3); }
    [[nodiscard]] Mat C_q() const { return C.middleRows(3, 3); }
    [[nodiscard]] Mat C_alpha() const { return C.bottomRows(joints()); }
};

namespace detail {

using Mat3X = Eigen::Matrix<double, 3, Eigen::Dynamic>;

inline Vec3 link_direction(double beta) { return Vec3(std::sin(beta), 0.0, -std::cos(beta)); }
inline Vec3 link_direction_rate(double beta) { return Vec3(std::cos(beta), 0.0, std::sin(beta)); }

/// Point mass rigidly attached to the arm, in body coordinates.
struct ArmPoint {
    double mass;
    Vec3 position;
    Mat3X jacobian;  // d position / d alpha
};

/// Rotational inertia of one link about its CoM, in body coordinates.
struct ArmLinkInertia {
    Mat3 inertia;
    int link;  // joints 0..link drive this link's spin
};

struct ArmGeometry {
    std::vector<ArmPoint> points;
    std::vector<ArmLinkInertia> links;
};

inline ArmGeometry arm_geometry(const Vec& alpha, const UamParams& params) {
    const int n = static_cast<int>(alpha.size());
    ArmGeometry geo;
    geo.points.reserve(static_cast<std::size_t>(n) + 1);
    geo.links.reserve(static_cast<std::size_t>(n));

    std::vector<Vec3> dir(static_cast<std::size_t>(n));
    std::vector<Vec3> ddir(static_cast<std::size_t>(n));
    double beta = 0.0;
    for (int i = 0; i < n; ++i) {
        beta += alpha(i);
        dir[static_cast<std::size_t>(i)] = link_direction(beta);
        ddir[static_cast<std::size_t>(i)] = link_direction_rate(beta);
    }

    Vec3 joint = params.arm_mount_offset;
    Mat3X joint_jac = Mat3X::Zero(3, n);
    for (int i = 0; i < n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        const double len = params.arm_link_lengths(i);
        const double m = params.arm_link_masses(i);

        Mat3X com_jac = joint_jac;
        for (int j = 0; j <= i; ++j) com_jac.col(j) += 0.5 * len * ddir[ui];
        geo.points.push_back({m, joint + 0.5 * len * dir[ui], com_jac});

        const Mat3 rod = (m * len * len / 12.0) * (Mat3::Identity() - dir[ui] * dir[ui].transpose());
        geo.links.push_back({rod, i});

        joint += len * dir[ui];
        for (int j = 0; j <= i; ++j) joint_jac.col(j) += len * ddir[ui];
    }
    if (params.payload_mass > 0.0) geo.points.push_back({params.payload_mass, joint, joint_jac});
    return geo;
}

inline void check_dims(const Vec& chi, const UamParams& params) {
    if (chi.size() != params.dof()) {
        std::ostringstream os;
        os << "state has " << chi.size() << " coordinates, parameters describe " << params.dof();
        throw InvalidArgument(os.str());
    }
}

}  // namespace detail

/// Mass matrix from the summed kinetic energy of the quadrotor, the link rods
/// and the payload point mass.
inline Mat mass_matrix(const Vec& chi, const UamParams& params) {
    detail::check_dims(chi, params);
    const int n = params.joints();
    const int N = params.dof();
    const Vec3 q = chi.segment<3>(3);
    const Mat3 R = rotation_matrix(q);
    const Mat3 W = euler_rate_matrix(q);
    const detail::ArmGeometry geo = detail::arm_geometry(chi.tail(n), params);

    Mat M = Mat::Zero(N, N);
    M.block(0, 0, 3, 3) = params.total_mass() * Mat3::Identity();
    M.block(3, 3, 3, 3) = W.transpose() * params.quad_inertia * W;
    M.block(6, 6, n, n).diagonal() = params.arm_joint_armature;

    for (const auto& pt : geo.points) {
        if (pt.mass == 0.0) continue;
        const Mat3 A = -R * skew(pt.position) * W;  // d v / d q_dot
        const Mat B = R * pt.jacobian;               // d v / d alpha_dot
        M.block(0, 3, 3, 3) += pt.mass * A;
        M.block(0, 6, 3, n) += pt.mass * B;
        M.block(3, 3, 3, 3) += pt.mass * A.transpose() * A;
        M.block(3, 6, 3, n) += pt.mass * A.transpose() * B;
        M.block(6, 6, n, n) += pt.mass * B.transpose() * B;
    }

    for (const auto& link : geo.links) {
        Mat Jw = Mat::Zero(3, 3 + n);  // body angular velocity of the link / [q_dot; alpha_dot]
        Jw.leftCols(3) = W;
        Jw.block(1, 3, 1, link.link + 1).setOnes();
        M.block(3, 3, 3 + n, 3 + n) += Jw.transpose() * link.inertia * Jw;
    }

    M.block(3, 0, 3, 3) = M.block(0, 3, 3, 3).transpose();
    M.block(6, 0, n, 3) = M.block(0, 6, 3, n).transpose();
    M.block(6, 3, n, 3) = M.block(3, 6, 3, n).transpose();
    return M;
}

/// Finite-difference step for the Christoffel construction of C.
inline constexpr double kChristoffelStep = 1e-6;

/// Partial derivatives dM/dchi_k by central differences. M does not depend on
/// the position p, so those three slices are exactly zero.
inline std::vector<Mat> mass_matrix_partials(const Vec& chi, const UamParams& params,
                                             double step = kChristoffelStep) {
    const int N = params.dof();
    std::vector<Mat> dM(static_cast<std::size_t>(N), Mat::Zero(N, N));
    Vec probe = chi;
    for (int k = 3; k < N; ++k) {
        probe(k) = chi(k) + step;
        const Mat plus = mass_matrix(probe, params);
        probe(k) = chi(k) - step;
        const Mat minus = mass_matrix(probe, params);
        probe(k) = chi(k);
        dM[static_cast<std::size_t>(k)] = (plus - minus) / (2.0 * step);
    }
    return dM;
}

/// Coriolis/centrifugal matrix built from Christoffel symbols of the first kind:
/// C_kj = sum_i 1/2 (dM_kj/dchi_i + dM_ki/dchi_j - dM_ij/dchi_k) chi_dot_i.
inline Mat coriolis_matrix(const Vec& chi, const Vec& chi_dot, const UamParams& params) {
    detail::check_dims(chi, params);
    if (chi_dot.size() != chi.size()) throw InvalidArgument("chi_dot size mismatch");
    const int N = params.dof();
    const std::vector<Mat> dM = mass_matrix_partials(chi, params);

    Mat M_dot = Mat::Zero(N, N);
    Mat dM_times_v(N, N);  // column k = dM_k * chi_dot
    for (int k = 0; k < N; ++k) {
        const Mat& d = dM[static_cast<std::size_t>(k)];
        M_dot += chi_dot(k) * d;
        dM_times_v.col(k) = d * chi_dot;
    }
    // term 2: (dM_j chi_dot)_k -> dM_times_v(k, j); term 3: (dM_k chi_dot)_j -> dM_times_v(j, k)
    return 0.5 * (M_dot + dM_times_v - dM_times_v.transpose());
}

/// Gradient of the gravitational potential; with z up, g_p = (0, 0, m g).
inline Vec gravity_vector(const Vec& chi, const UamParams& params) {
    detail::check_dims(chi, params);
    const int n = params.joints();
    const Vec3 q = chi.segment<3>(3);
    const double g0 = params.gravity_accel;
    const double cph = std::cos(q.x()), sph = std::sin(q.x());
    const double cth = std::cos(q.y()), sth = std::sin(q.y());
    check_pitch(q.y());

    // third row of R and its partials with respect to roll and pitch
    const Vec3 r3(-sth, sph * cth, cth * cph);
    const Vec3 r3_roll(0.0, cph * cth, -cth * sph);
    const Vec3 r3_pitch(-cth, -sph * sth, -sth * cph);

    Vec g = Vec::Zero(params.dof());
    g(2) = params.total_mass() * g0;
    const detail::ArmGeometry geo = detail::arm_geometry(chi.tail(n), params);
    for (const auto& pt : geo.points) {
        if (pt.mass == 0.0) continue;
        g(3) += pt.mass * g0 * r3_roll.dot(pt.position);
        g(4) += pt.mass * g0 * r3_pitch.dot(pt.position);
        g.tail(n) += pt.mass * g0 * (pt.jacobian.transpose() * r3);
    }
    return g;
}

inline DynamicsMatrices evaluate_dynamics(const Vec& chi, const Vec& chi_dot, const UamParams& params) {
    return DynamicsMatrices{mass_matrix(chi, params), coriolis_matrix(chi, chi_dot, params),
                            gravity_vector(chi, params)};
}

inline double kinetic_energy(const Vec& chi, const Vec& chi_dot, const UamParams& params) {
    return 0.5 * chi_dot.dot(mass_matrix(chi, params) * chi_dot);
}

/// Gravitational potential relative to the world z = 0 plane.
inline double potential_energy(const Vec& chi, const UamParams& params) {
    detail::check_dims(chi, params);
    const int n = params.joints();
    const Mat3 R = rotation_matrix(chi.segment<3>(3));
    const double g0 = params.gravity_accel;
    double u = params.total_mass() * g0 * chi(2);
    for (const auto& pt : detail::arm_geometry(chi.tail(n), params).points)
        u += pt.mass * g0 * R.row(2).dot(pt.position);
    return u;
}

/// Solves M chi_ddot = tau - C chi_dot - g - d.
inline Vec forward_dynamics(const Vec& chi, const Vec& chi_dot, const Vec& tau, const Vec& disturbance,
                            const UamParams& params) {
    detail::check_dims(chi, params);
    if (tau.size() != chi.size() || disturbance.size() != chi.size())
        throw InvalidArgument("tau/disturbance size mismatch");
    const Mat M = mass_matrix(chi, params);
    const Vec rhs = tau - coriolis_matrix(chi, chi_dot, params) * chi_dot - gravity_vector(chi, params) - disturbance;
    Eigen::LDLT<Mat> ldlt(M);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
        throw SolverError("mass matrix factorization failed");
    Vec acc = ldlt.solve(rhs);
    if (!acc.allFinite()) throw SolverError("forward dynamics produced non-finite accelerations");
    return acc;
}

}  // namespace uam
