#include "uam/verification.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace uam;
namespace fs = std::filesystem;

namespace {

const std::string kExe = UAM_SIM_EXE;
const std::string kConfigs = UAM_CONFIG_DIR;

int run_cli(const std::string& args, const std::string& capture = "") {
    std::string cmd = "\"" + kExe + "\" " + args;
    cmd += capture.empty() ? " > /dev/null 2>&1" : " > \"" + capture + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("uam_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST(Config, DefaultFileMatchesBuiltInDefaults) {
    const AppConfig file = load_config(kConfigs + "/default.json");
    const AppConfig built = default_app_config();
    EXPECT_EQ(file.proposed.position.Q, built.proposed.position.Q);
    EXPECT_EQ(file.proposed.manipulator.lambda1, built.proposed.manipulator.lambda1);
    EXPECT_EQ(file.proposed.position.nu, built.proposed.position.nu);
    EXPECT_EQ(file.baseline.M_bar_diag, built.baseline.M_bar_diag);
    EXPECT_EQ(file.disturbance.amplitude, built.disturbance.amplitude);
    EXPECT_EQ(mission_fingerprint(file.mission), mission_fingerprint(built.mission));
    EXPECT_EQ(file.sim.seed, 1u);
}

TEST(Config, FlightGainsFileIsTheFixedGainDesign) {
    const AppConfig c = load_config(kConfigs + "/flight_gains.json");
    const ModularControllerConfig fl = flight_controller_config(2);
    for (auto [a, b] : {std::pair{&c.proposed.position, &fl.position}, std::pair{&c.proposed.attitude, &fl.attitude},
                        std::pair{&c.proposed.manipulator, &fl.manipulator}}) {
        EXPECT_EQ(a->M_bar, b->M_bar);
        EXPECT_EQ(a->Lambda, b->Lambda);
        EXPECT_EQ(a->lambda1, b->lambda1);
        EXPECT_EQ(a->lambda2, b->lambda2);
        EXPECT_EQ(a->nu, b->nu);
        EXPECT_EQ(a->varpi, b->varpi);
        EXPECT_EQ(a->initial, b->initial);
    }
    EXPECT_EQ(c.proposed.options.feedback, FeedbackForm::shared_lambda);
    EXPECT_FALSE(c.proposed.options.gravity_model.has_value());
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
    EXPECT_THROW(config_from_json(json{{"controler", "proposed"}}), ConfigError);
    EXPECT_THROW(config_from_json(json{{"controller", "pid"}}), ConfigError);
    EXPECT_THROW(config_from_json(json{{"sim", {{"control_period", 0.0025}}}}), ConfigError);
    EXPECT_THROW(config_from_json(json{{"controllers", {{"position", {{"omega", -1.0}, {"M_bar", 1.0}}}}}}), ConfigError);
    EXPECT_THROW(config_from_json(json{{"options", {{"feedback", "pd"}}}}), ConfigError);
    EXPECT_THROW(config_from_json(json{{"params", {{"arm_link_masses", {0.2, 0.2, 0.2}}}}}), ConfigError);
    EXPECT_THROW(load_config("/nonexistent/uam.json"), ConfigError);
}

TEST(Config, PolePlacementKeys) {
    const AppConfig c = config_from_json(json{{"controllers", {{"attitude", {{"omega", 10.0}, {"M_bar", 0.1}}}}}});
    EXPECT_EQ(c.proposed.attitude.lambda1, 100.0 * Mat::Identity(3, 3));
    EXPECT_EQ(c.proposed.attitude.lambda2, 20.0 * Mat::Identity(3, 3));
    EXPECT_EQ(c.proposed.attitude.Q, Mat::Identity(6, 6));
}

TEST(Cli, MissingConfigExitsTwo) {
    EXPECT_EQ(run_cli("simulate --config /nonexistent/uam.json"), 2);
}

TEST(Cli, BadFlagExitsTwo) {
    EXPECT_EQ(run_cli("simulate --controller pid"), 2);
    EXPECT_EQ(run_cli("fly"), 2);
}

TEST(Cli, InvalidConfigExitsTwo) {
    const fs::path dir = scratch("invalid");
    std::ofstream(dir / "bad.json") << R"({"sim": {"dt_physics": -1}})";
    EXPECT_EQ(run_cli("simulate --config \"" + (dir / "bad.json").string() + "\""), 2);
    std::ofstream(dir / "broken.json") << "{ not json";
    EXPECT_EQ(run_cli("simulate --config \"" + (dir / "broken.json").string() + "\""), 2);
}

TEST(Cli, SimulateWritesTraceAndSummary) {
    const fs::path dir = scratch("simulate");
    ASSERT_EQ(run_cli("simulate --config \"" + kConfigs + "/default.json\" --controller proposed --duration 6 --out \"" +
                      dir.string() + "\""),
              0);
    ASSERT_TRUE(fs::exists(dir / "trace.csv"));
    const json summary = json::parse(slurp(dir / "summary.json"));
    EXPECT_EQ(summary["outcome"], "completed");
    EXPECT_EQ(summary["records"], 3001);
    const std::string csv = slurp(dir / "trace.csv");
    EXPECT_EQ(csv.substr(0, 8), "t,x,y,z,");
}

TEST(Cli, SimulateIsDeterministicAcrossProcesses) {
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    ASSERT_EQ(run_cli("simulate --duration 2 --seed 7 --out \"" + a.string() + "\""), 0);
    ASSERT_EQ(run_cli("simulate --duration 2 --seed 7 --out \"" + b.string() + "\""), 0);
    EXPECT_EQ(slurp(a / "trace.csv"), slurp(b / "trace.csv"));
}

TEST(Cli, DivergenceExitsThree) {
    const fs::path dir = scratch("diverge");
    EXPECT_EQ(run_cli("simulate --config \"" + kConfigs + "/flight_gains.json\" --duration 5 --out \"" + dir.string() +
                      "\""),
              3);
    EXPECT_EQ(json::parse(slurp(dir / "summary.json"))["outcome"], "diverged");
}

TEST(Cli, CompareWritesReport) {
    const fs::path dir = scratch("compare");
    ASSERT_EQ(run_cli("compare --duration 6 --out \"" + dir.string() + "\""), 0);
    const std::string report = slurp(dir / "report.csv");
    EXPECT_EQ(report.substr(0, report.find('\n')), "quantity,axis,proposed,baseline,degradation_pct");
    EXPECT_EQ(std::count(report.begin(), report.end(), '\n'), 1 + 3 + 3 + 2);
    EXPECT_TRUE(fs::exists(dir / "trace_baseline.csv"));
    EXPECT_TRUE(fs::exists(dir / "report.json"));
}

TEST(Cli, MissionShowRoundTrips) {
    const fs::path dir = scratch("mission");
    ASSERT_EQ(run_cli("mission show", (dir / "mission.json").string()), 0);
    const Mission m = mission_from_json(json::parse(slurp(dir / "mission.json")));
    EXPECT_EQ(mission_fingerprint(m), mission_fingerprint(pick_place_mission()));
    ASSERT_EQ(run_cli("mission show", (dir / "again.json").string()), 0);
    EXPECT_EQ(slurp(dir / "mission.json"), slurp(dir / "again.json"));
}
