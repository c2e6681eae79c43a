#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "skinrelax/models.hpp"

namespace skin {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunConfig {
    std::string command; // spectrum, propagator, relax, sweep, steady, interference, localization, verify
    ModelSpec model;

    // relax / sweep
    std::string axis;
    std::vector<double> values;
    std::vector<double> eta{0.36787944117144233}; // e^{-1}
    double sustain_factor = 3.0;
    double horizon_factor = 10.0;
    std::string init = "vacuum";
    int site = 0;                        // 0 = last site
    std::vector<double> saturation_L;    // sweep over Gamma: per-Gamma length scan
    std::string trajectory_out;

    // propagator / interference / localization
    int j = 1;
    int m = 0;                           // 0 = last site
    std::vector<double> times;
    std::string route;                   // empty = command default
    bool peaks = false;
    double t = 0.0;
    std::vector<double> energy;          // {re, im}; empty = every eigenvalue

    std::string out;                     // empty = stdout, no sidecar
    int workers = 1;
    bool verify = false;
    unsigned seed = 20240611u;
};

void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

RunConfig load_config(const std::string& path);

// "a:b:step" (inclusive) or a comma list.
std::vector<double> parse_values(const std::string& text);

// SKINRELAX_WORKERS, else 1.
int default_workers();

// Executes one command. Returns 0, 1 (config), 2 (numeric) or 3 (verify failure).
int run(const RunConfig& config, std::ostream& log);

// Full command line entry point.
int cli_main(int argc, char** argv);

} // namespace skin
