// uam_sim: run missions, compare controllers, check invariants.
//
// Exit codes: 0 ok, 1 other error, 2 configuration error, 3 divergence,
// 4 invariant failure.

#include "uam/verification.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <string>

namespace {

namespace fs = std::filesystem;

constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitInvariant = 4;

struct RunFlags {
    std::string config;
    std::string controller;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    std::optional<double> duration;
};

uam::AppConfig resolve(const RunFlags& f) {
    uam::AppConfig cfg = f.config.empty() ? uam::default_app_config() : uam::load_config(f.config);
    if (!f.controller.empty()) cfg.controller = f.controller;
    if (f.seed) cfg.sim.seed = *f.seed;
    if (f.duration) {
        if (!(*f.duration > 0.0)) throw uam::ConfigError("--duration must be > 0");
        cfg.sim.duration = *f.duration;
    }
    return cfg;
}

fs::path out_dir(const RunFlags& f) {
    fs::path dir(f.out);
    fs::create_directories(dir);
    return dir;
}

void write_json(const fs::path& path, const uam::json& j) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
    os << j.dump(2) << '\n';
}

uam::Vec default_limits(const uam::AppConfig& cfg) {
    return uam::uub_thresholds(uam::kPositionBand, uam::kAttitudeBand, uam::kArmBand, cfg.params.joints());
}

int cmd_simulate(const RunFlags& f) {
    const uam::AppConfig cfg = resolve(f);
    const uam::SimTrace trace = uam::run_scenario(cfg, cfg.controller);
    const fs::path dir = out_dir(f);
    uam::write_trace_csv((dir / "trace.csv").string(), trace);
    const uam::json summary = uam::summarize(trace, cfg.settle_time, default_limits(cfg));
    write_json(dir / "summary.json", summary);
    std::cout << cfg.controller << ": " << uam::to_string(trace.outcome) << ", " << trace.records.size()
              << " records -> " << (dir / "trace.csv").string() << '\n';
    if (summary.contains("rms")) std::cout << "rms " << summary["rms"].dump() << '\n';
    if (trace.outcome == uam::SimOutcome::diverged) {
        std::cerr << "diverged: " << trace.diagnostic << '\n';
        return kExitDiverged;
    }
    return 0;
}

int cmd_compare(const RunFlags& f, double link_mass_scale) {
    const uam::AppConfig cfg = resolve(f);
    if (!(link_mass_scale > 0.0)) throw uam::ConfigError("--link-mass-scale must be > 0");
    const uam::UamParams plant = uam::scale_link_masses(cfg.params, link_mass_scale);
    auto baseline_run = std::async(std::launch::async, [&] { return uam::run_scenario(cfg, "baseline", plant); });
    const uam::SimTrace proposed = uam::run_scenario(cfg, "proposed", plant);
    const uam::SimTrace baseline = baseline_run.get();

    const fs::path dir = out_dir(f);
    uam::write_trace_csv((dir / "trace_proposed.csv").string(), proposed);
    uam::write_trace_csv((dir / "trace_baseline.csv").string(), baseline);
    const uam::ComparisonReport rep = uam::compare_controllers(proposed, baseline, cfg.settle_time);
    {
        std::ofstream os(dir / "report.csv");
        if (!os) throw std::runtime_error("cannot write report.csv");
        uam::write_comparison_csv(os, rep);
    }
    write_json(dir / "report.json", uam::comparison_to_json(rep));
    uam::write_comparison_csv(std::cout, rep);

    for (const auto* t : {&proposed, &baseline}) {
        if (t->outcome == uam::SimOutcome::diverged) {
            std::cerr << t->controller << " diverged: " << t->diagnostic << '\n';
            return kExitDiverged;
        }
    }
    return 0;
}

int cmd_verify(const RunFlags& f) {
    const uam::AppConfig cfg = resolve(f);
    bool all = true;
    for (const auto& r : uam::verify_all(cfg)) {
        std::cout << uam::format_result(r) << std::endl;
        all = all && r.pass;
    }
    return all ? 0 : kExitInvariant;
}

int cmd_mission_show(const RunFlags& f) {
    const uam::AppConfig cfg = resolve(f);
    std::cout << uam::mission_to_json(cfg.mission).dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Modular adaptive sliding-mode control of an aerial manipulator"};
    app.require_subcommand(1);

    RunFlags flags;
    double link_mass_scale = 1.0;
    auto add_common = [&](CLI::App* sub, bool run_flags) {
        sub->add_option("--config", flags.config, "scenario JSON (defaults to the built-in desk scenario)");
        if (!run_flags) return;
        sub->add_option("--controller", flags.controller, "proposed or baseline")
            ->check(CLI::IsMember({"proposed", "baseline"}));
        sub->add_option("--out", flags.out, "output directory");
        sub->add_option("--seed", flags.seed, "disturbance seed");
        sub->add_option("--duration", flags.duration, "simulated time [s]");
    };

    CLI::App* simulate = app.add_subcommand("simulate", "run the mission, write trace.csv and summary.json");
    add_common(simulate, true);
    CLI::App* compare = app.add_subcommand("compare", "run both controllers, write per-axis RMS report");
    add_common(compare, true);
    compare->add_option("--link-mass-scale", link_mass_scale, "scale the true arm link masses");
    CLI::App* verify = app.add_subcommand("verify", "run the acceptance checks");
    add_common(verify, false);
    CLI::App* mission = app.add_subcommand("mission", "mission utilities");
    mission->require_subcommand(1);
    CLI::App* show = mission->add_subcommand("show", "print the resolved mission as JSON");
    add_common(show, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*simulate) return cmd_simulate(flags);
        if (*compare) return cmd_compare(flags, link_mass_scale);
        if (*verify) return cmd_verify(flags);
        if (*show) return cmd_mission_show(flags);
    } catch (const uam::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const uam::InvalidArgument& e) {
        std::cerr << "invalid configuration: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
