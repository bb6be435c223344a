#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "ftme/dynamics.hpp"
#include "ftme/fieldio.hpp"
#include "ftme/lcs.hpp"

namespace ftme::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

struct RunConfig {
    std::string subcommand;

    // system
    std::string system = "parabola";
    double beta = 1.0;
    double gamma = 1.0;
    std::vector<double> matrix;  // row-major 2x2 for --system linear

    // field / figures
    std::string kind = "ftme-weighted";
    std::string grid = "-2:2:-2:2:201x201";
    double T = 2.0;
    double steps_per_unit = kDefaultStepsPerUnit;
    std::string alpha = "stretching";
    std::string csv_path;
    std::string pgm_path;
    std::string out_dir = "figures";

    // verify
    std::string check = "all";
    std::uint64_t samples = 0;  // 0 = per-check default
    std::uint64_t seed = 1;
    int draws = 0;              // 0 = per-check default
    double kappa1 = 2.0;
    double kappa2 = 0.5;
    double eps = 0.25;
    double delta = 0.05;
};

/// Thrown for invalid configurations; maps to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

BuiltinSystem system_from_config(const RunConfig& cfg);
AlphaPolicy alpha_policy_from_config(const RunConfig& cfg);

int cmd_field(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_figures(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Full command-line entry point (argument parsing, validation and dispatch).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

std::string version();

}  // namespace ftme::cli
