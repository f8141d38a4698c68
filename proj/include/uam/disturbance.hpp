#pragma once

#include "uam/types.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace uam {

enum class DisturbanceKind { zero, constant, sinusoidal, composite };

inline std::string to_string(DisturbanceKind k) {
    switch (k) {
        case DisturbanceKind::zero: return "zero";
        case DisturbanceKind::constant: return "constant";
        case DisturbanceKind::sinusoidal: return "sinusoidal";
        case DisturbanceKind::composite: return "composite";
    }
    return "zero";
}

inline DisturbanceKind disturbance_kind_from_string(const std::string& s) {
    if (s == "zero") return DisturbanceKind::zero;
    if (s == "constant") return DisturbanceKind::constant;
    if (s == "sinusoidal") return DisturbanceKind::sinusoidal;
    if (s == "composite") return DisturbanceKind::composite;
    throw InvalidArgument("unknown disturbance kind '" + s + "'");
}

/// Bounded generalized disturbance d(t); every kind satisfies |d(t)| <= |amplitude|.
///
/// composite = half the amplitude as a constant bias plus half as a sinusoid.
struct DisturbanceProfile {
    DisturbanceKind kind = DisturbanceKind::zero;
    Vec amplitude;
    double frequency = 0.0;  // Hz
    double phase = 0.0;      // rad

    static DisturbanceProfile none(int dof) { return {DisturbanceKind::zero, Vec::Zero(dof), 0.0, 0.0}; }
};

inline Vec disturbance(double t, const DisturbanceProfile& profile) {
    const double s = std::sin(2.0 * std::numbers::pi * profile.frequency * t + profile.phase);
    switch (profile.kind) {
        case DisturbanceKind::zero: return Vec::Zero(profile.amplitude.size());
        case DisturbanceKind::constant: return profile.amplitude;
        case DisturbanceKind::sinusoidal: return profile.amplitude * s;
        case DisturbanceKind::composite: return profile.amplitude * (0.5 + 0.5 * s);
    }
    return Vec::Zero(profile.amplitude.size());
}

}  // namespace uam
