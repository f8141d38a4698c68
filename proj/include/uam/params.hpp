#pragma once

#include "uam/types.hpp"

#include <sstream>

namespace uam {

/// Physical parameters of the quadrotor + planar n-link arm.
///
/// The arm hangs from `arm_mount_offset` (body frame). Every joint rotates
/// about the body y axis; with all joint angles zero the arm points straight
/// down (-z body). Links are uniform slender rods and the payload is a point
/// mass at the tip of the last link. `arm_joint_armature` is the reflected
/// rotor inertia of each joint servo, seen only by that joint's own rate.
struct UamParams {
    double quad_mass = 1.8;
    Vec arm_link_masses = Vec::Constant(2, 0.2);
    Vec arm_link_lengths = Vec::Constant(2, 0.25);
    Vec arm_joint_armature = Vec::Constant(2, 0.05);
    Mat3 quad_inertia = Vec3(0.02, 0.02, 0.04).asDiagonal();
    Vec3 arm_mount_offset = Vec3(0.0, 0.0, -0.05);
    double payload_mass = 0.0;
    double gravity_accel = 9.81;

    [[nodiscard]] int joints() const { return static_cast<int>(arm_link_masses.size()); }
    [[nodiscard]] int dof() const { return 6 + joints(); }

    [[nodiscard]] double total_mass() const {
        return quad_mass + arm_link_masses.sum() + payload_mass;
    }

    void validate() const {
        std::ostringstream err;
        if (arm_link_masses.size() != arm_link_lengths.size()) err << "arm masses/lengths size mismatch; ";
        if (arm_link_masses.size() == 0) err << "arm needs at least one link; ";
        if (arm_joint_armature.size() != arm_link_masses.size()) err << "arm armature/masses size mismatch; ";
        if ((arm_joint_armature.array() < 0.0).any()) err << "negative joint armature; ";
        if (!(quad_mass >= 0.0) || !(payload_mass >= 0.0)) err << "negative mass; ";
        if ((arm_link_masses.array() < 0.0).any()) err << "negative link mass; ";
        if (!(arm_link_lengths.array() > 0.0).all()) err << "link lengths must be > 0; ";
        if (!is_positive_definite(quad_inertia)) err << "quad inertia must be symmetric positive definite; ";
        if (!(total_mass() > 0.0)) err << "total mass must be > 0; ";
        if (!(gravity_accel >= 0.0)) err << "gravity must be >= 0; ";
        const std::string msg = err.str();
        if (!msg.empty()) throw InvalidArgument("invalid UamParams: " + msg);
    }
};

/// Instantaneous change of the mass carried at the end effector.
struct PayloadEvent {
    double time = 0.0;
    double delta_mass = 0.0;

    friend bool operator==(const PayloadEvent&, const PayloadEvent&) = default;
};

inline UamParams apply_payload_event(const UamParams& params, const PayloadEvent& event) {
    const double mass = params.payload_mass + event.delta_mass;
    // round-off from +0.2 then -0.2 must not trip the check
    if (mass < -1e-12) {
        std::ostringstream os;
        os << "payload event at t=" << event.time << " would leave payload mass " << mass << " kg";
        throw InvalidArgument(os.str());
    }
    UamParams out = params;
    out.payload_mass = mass < 0.0 ? 0.0 : mass;
    return out;
}

}  // namespace uam
