#pragma once

// Builds controllers from a run configuration and flies the mission.

#include "uam/config.hpp"

#include <memory>
#include <optional>
#include <string>

namespace uam {

inline std::unique_ptr<Controller> make_controller(const AppConfig& cfg, const std::string& which) {
    if (which == "proposed") return std::make_unique<ModularController>(cfg.proposed);
    if (which == "baseline") return std::make_unique<BaselineController>(cfg.baseline);
    throw InvalidArgument("unknown controller '" + which + "' (expected proposed or baseline)");
}

/// Runs `which` on the configured mission. `plant` overrides the true plant
/// parameters (the controllers keep their nominal knowledge).
inline SimTrace run_scenario(const AppConfig& cfg, const std::string& which,
                             const std::optional<UamParams>& plant = std::nullopt) {
    const UamParams truth = plant ? *plant : cfg.params;
    auto controller = make_controller(cfg, which);
    return run(cfg.mission, truth, *controller, uam_plant(seeded_disturbance(cfg.disturbance, cfg.sim.seed)), cfg.sim);
}

/// Same parameters with every arm link mass scaled.
inline UamParams scale_link_masses(UamParams p, double factor) {
    p.arm_link_masses *= factor;
    return p;
}

}  // namespace uam
