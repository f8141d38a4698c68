// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "uam/verification.hpp"

#include <iostream>
#include <string>

int main(int argc, char** argv) {
    std::string config;
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--config") config = argv[i + 1];
    try {
        const uam::AppConfig cfg = config.empty() ? uam::default_app_config() : uam::load_config(config);
        int failed = 0;
        for (const auto& r : uam::verify_all(cfg)) {
            std::cout << uam::format_result(r) << std::endl;
            failed += r.pass ? 0 : 1;
        }
        std::cout << (failed == 0 ? "all criteria pass" : std::to_string(failed) + " criteria fail") << std::endl;
        return failed == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "acceptance: " << e.what() << '\n';
        return 2;
    }
}
