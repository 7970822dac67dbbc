#pragma once

#include <cstddef>
#include <string>

namespace soliton::cli {

// Exit codes
constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kSolverFailure = 2;
constexpr int kVerificationFailure = 3;

struct RunConfig {
    std::string command;
    int n = 2;
    double a = 0.0;
    double tmin = -10.0;
    double tmax = 200.0;
    std::size_t count = 4096;
    double tol = 1e-10;
    double beta = 0.5;
    double eps = 0.5;
    int u_nodes = 32;
    int threads = 1;
    bool run_all = false;
    std::string profile_path;
    std::string spec_path;
    std::string batch_path;
    std::string problem_path;
    std::string config_path;
    std::string out;  // resolved output directory
};

/// Explicit flag, then SOLITON_LAB_OUT, then the fallback.
std::string resolve_out_dir(const std::string& flag, const std::string& fallback);

/// Runs the command and maps library errors to exit codes.
int dispatch(const RunConfig& config);

}  // namespace soliton::cli
