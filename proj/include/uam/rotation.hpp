#pragma once

#include "uam/types.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace uam {

/// Margin kept from |pitch| = pi/2 before the Euler parametrization is rejected.
inline constexpr double kPitchSingularityMargin = 1e-3;

inline void check_pitch(double theta) {
    if (!std::isfinite(theta) || std::abs(theta) >= std::numbers::pi / 2.0 - kPitchSingularityMargin) {
        std::ostringstream os;
        os << "attitude singularity: |pitch| = " << std::abs(theta) << " rad is too close to pi/2";
        throw SingularityError(os.str());
    }
}

/// Body-to-world rotation for Z-Y-X Euler angles q = (roll, pitch, yaw).
inline Mat3 rotation_matrix(const Vec3& q) {
    check_pitch(q.y());
    const double cph = std::cos(q.x()), sph = std::sin(q.x());
    const double cth = std::cos(q.y()), sth = std::sin(q.y());
    const double cps = std::cos(q.z()), sps = std::sin(q.z());
    Mat3 r;
    r << cps * cth, cps * sth * sph - sps * cph, cps * sth * cph + sps * sph,
         sps * cth, sps * sth * sph + cps * cph, sps * sth * cph - cps * sph,
         -sth, sph * cth, cth * cph;
    return r;
}

/// Maps Euler-angle rates to body angular velocity: omega_B = W(q) * q_dot.
inline Mat3 euler_rate_matrix(const Vec3& q) {
    const double cph = std::cos(q.x()), sph = std::sin(q.x());
    const double cth = std::cos(q.y()), sth = std::sin(q.y());
    Mat3 w;
    w << 1.0, 0.0, -sth,
         0.0, cph, sph * cth,
         0.0, -sph, cph * cth;
    return w;
}

inline Mat3 rot_x(double a) { return Eigen::AngleAxisd(a, Vec3::UnitX()).toRotationMatrix(); }
inline Mat3 rot_y(double a) { return Eigen::AngleAxisd(a, Vec3::UnitY()).toRotationMatrix(); }
inline Mat3 rot_z(double a) { return Eigen::AngleAxisd(a, Vec3::UnitZ()).toRotationMatrix(); }

inline double wrap_angle(double a) {
    return std::remainder(a, 2.0 * std::numbers::pi);
}

inline double rad2deg(double a) { return a * 180.0 / std::numbers::pi; }
inline double deg2rad(double a) { return a * std::numbers::pi / 180.0; }

}  // namespace uam
