#pragma once

// Per-subsystem adaptive laws for the robust gain
//
//     rho = K0 + K1 |xi| + K2 |xi|^2 + K3 |chi_ddot| + zeta
//
//     dK_i/dt  = |r| |xi|^i        - nu_i K_i      (i = 0, 1, 2)
//     dK_3/dt  = |r| |chi_ddot|    - nu_3 K_3
//     dzeta/dt = 0                                          if |r| >= varpi
//              = -(1 + (K3 |chi_ddot| + sum K_i |xi|^i)|r|) zeta + eps   otherwise
//
// A subsystem's laws read only its own |r| and parameters plus the shared
// norms |xi| and |chi_ddot|.

#include "uam/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <sstream>
#include <string>

namespace uam {

struct AdaptiveGains {
    std::array<double, 4> K_hat{0.0, 0.0, 0.0, 0.0};
    double zeta = 0.0;

    friend bool operator==(const AdaptiveGains&, const AdaptiveGains&) = default;
};

struct AdaptationParams {
    std::array<double, 4> nu{1.0, 1.0, 1.0, 1.0};
    double epsilon = 1e-4;
    double varpi = 0.1;

    void validate() const {
        const bool ok = std::all_of(nu.begin(), nu.end(), [](double v) { return v > 0.0; }) && epsilon > 0.0 &&
                        varpi > 0.0;
        if (!ok) throw InvalidArgument("adaptation parameters (nu, epsilon, varpi) must all be > 0");
    }
};

/// Norms feeding one adaptation step.
struct GainInputs {
    double r_norm = 0.0;
    double xi_norm = 0.0;
    double chi_ddot_norm = 0.0;
};

struct GainRates {
    std::array<double, 4> K_hat_dot{0.0, 0.0, 0.0, 0.0};
    double zeta_dot = 0.0;

    friend bool operator==(const GainRates&, const GainRates&) = default;
};

enum class GainIntegration {
    explicit_euler,
    /// Exact zero-order-hold discretization of each (linear in the state) law.
    exponential_euler,
};

inline std::string to_string(GainIntegration g) {
    return g == GainIntegration::explicit_euler ? "explicit_euler" : "exponential_euler";
}

inline GainIntegration gain_integration_from_string(const std::string& s) {
    if (s == "explicit_euler" || s == "euler") return GainIntegration::explicit_euler;
    if (s == "exponential_euler" || s == "exponential") return GainIntegration::exponential_euler;
    throw InvalidArgument("unknown gain integration scheme '" + s + "'");
}

namespace detail {

/// Forcing terms |r||xi|^i (i=0..2) and |r||chi_ddot|. |xi|^0 is 1 even for |xi| = 0.
inline std::array<double, 4> gain_forcing(const GainInputs& in) {
    return {in.r_norm, in.r_norm * in.xi_norm, in.r_norm * in.xi_norm * in.xi_norm, in.r_norm * in.chi_ddot_norm};
}

inline double robust_sum(const AdaptiveGains& g, const GainInputs& in) {
    return g.K_hat[0] + g.K_hat[1] * in.xi_norm + g.K_hat[2] * in.xi_norm * in.xi_norm + g.K_hat[3] * in.chi_ddot_norm;
}

}  // namespace detail

inline GainRates gain_derivatives(const AdaptiveGains& g, const AdaptationParams& params, const GainInputs& in) {
    GainRates rates;
    const auto forcing = detail::gain_forcing(in);
    for (std::size_t i = 0; i < 4; ++i) rates.K_hat_dot[i] = forcing[i] - params.nu[i] * g.K_hat[i];
    if (in.r_norm >= params.varpi) {
        rates.zeta_dot = 0.0;
    } else {
        rates.zeta_dot = -(1.0 + detail::robust_sum(g, in) * in.r_norm) * g.zeta + params.epsilon;
    }
    return rates;
}

/// One adaptation step of length dt followed by the positivity clamps
/// K_i >= 0 and zeta >= eps * dt.
inline AdaptiveGains integrate_gains(const AdaptiveGains& g, const AdaptationParams& params, const GainInputs& in,
                                     double dt, GainIntegration scheme = GainIntegration::explicit_euler) {
    if (!(dt > 0.0)) throw InvalidArgument("gain integration step must be > 0");
    AdaptiveGains out = g;
    if (scheme == GainIntegration::explicit_euler) {
        const GainRates rates = gain_derivatives(g, params, in);
        for (std::size_t i = 0; i < 4; ++i) out.K_hat[i] = g.K_hat[i] + dt * rates.K_hat_dot[i];
        out.zeta = g.zeta + dt * rates.zeta_dot;
    } else {
        const auto forcing = detail::gain_forcing(in);
        for (std::size_t i = 0; i < 4; ++i) {
            const double decay = std::exp(-params.nu[i] * dt);
            out.K_hat[i] = g.K_hat[i] * decay + forcing[i] * (-std::expm1(-params.nu[i] * dt)) / params.nu[i];
        }
        if (in.r_norm < params.varpi) {
            const double rate = 1.0 + detail::robust_sum(g, in) * in.r_norm;
            out.zeta = g.zeta * std::exp(-rate * dt) + params.epsilon * (-std::expm1(-rate * dt)) / rate;
        }
    }
    for (double& k : out.K_hat) k = std::max(k, 0.0);
    out.zeta = std::max(out.zeta, params.epsilon * dt);
    return out;
}

struct GainBoundsReport {
    std::array<double, 4> K_min{};
    std::array<double, 4> K_max{};
    double zeta_min = 0.0;
    double zeta_max = 0.0;
    bool pass = false;

    [[nodiscard]] std::string summary() const {
        std::ostringstream os;
        os << (pass ? "PASS" : "FAIL") << " K_min=[" << K_min[0] << ", " << K_min[1] << ", " << K_min[2] << ", "
           << K_min[3] << "] K_max=[" << K_max[0] << ", " << K_max[1] << ", " << K_max[2] << ", " << K_max[3]
           << "] zeta in [" << zeta_min << ", " << zeta_max << "]";
        return os.str();
    }
};

inline GainBoundsReport verify_gain_bounds(std::span<const AdaptiveGains> trace) {
    if (trace.empty()) throw InvalidArgument("verify_gain_bounds needs a nonempty trace");
    GainBoundsReport rep;
    rep.K_min.fill(std::numeric_limits<double>::infinity());
    rep.K_max.fill(-std::numeric_limits<double>::infinity());
    rep.zeta_min = std::numeric_limits<double>::infinity();
    rep.zeta_max = -std::numeric_limits<double>::infinity();
    bool finite = true;
    for (const auto& g : trace) {
        for (std::size_t i = 0; i < 4; ++i) {
            finite = finite && std::isfinite(g.K_hat[i]);
            rep.K_min[i] = std::min(rep.K_min[i], g.K_hat[i]);
            rep.K_max[i] = std::max(rep.K_max[i], g.K_hat[i]);
        }
        finite = finite && std::isfinite(g.zeta);
        rep.zeta_min = std::min(rep.zeta_min, g.zeta);
        rep.zeta_max = std::max(rep.zeta_max, g.zeta);
    }
    rep.pass = finite && std::all_of(rep.K_min.begin(), rep.K_min.end(), [](double k) { return k >= 0.0; }) &&
               rep.zeta_min > 0.0 && std::isfinite(rep.zeta_max);
    return rep;
}

}  // namespace uam
