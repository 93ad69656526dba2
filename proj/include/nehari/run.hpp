#pragma once

#include "nehari/nehari.hpp"
#include "nehari/sweep.hpp"
#include "nehari/testfn.hpp"

#include <optional>
#include <string>
#include <vector>

namespace nehari {

inline constexpr const char* kReportSchema = "nehari-report/1";

enum class ExitCode : int { Success = 0, Validation = 2, NonConvergence = 3, Numerical = 4 };

struct RunConfig {
    std::string mode;
    ProblemSpec spec;
    std::optional<double> lambda;         // absolute lambda
    std::optional<double> lambda_factor;  // lambda = factor * lambda0
    int m = 2048;
    double grading = 2.0;
    SolverOptions solver;
    std::uint64_t seed = 1;
    int probes = 0;  // N0 probe count in constants mode
    ExpansionOptions expansion;
    std::vector<double> gap_eps;
    double gap_delta = 0.0;
    int gap_resolvable_steps = 0;  // ladder e0 * 2^k from the resolution limit e0
    int sweep_levels = 8;
    double sweep_lambda_factor = 0.1;
    std::string out_dir = "nehari_out";
    bool write_json = true;
    bool write_csv = true;
    std::string canonical;  // normalized config text (hash input and echo)
};

// Strict parse: unknown keys and out-of-range values raise ConfigurationError.
RunConfig parse_config(const std::string& text, const std::optional<std::string>& mode_override = std::nullopt);

std::string sha256_hex(const std::string& data);

struct RunOutcome {
    ExitCode code = ExitCode::Success;
    std::string message;
    std::vector<std::string> files;
};

// Executes the configured mode and writes report.json plus CSV artifacts into out_dir.
RunOutcome run(const RunConfig& config, bool quiet = true);

// Full CLI pipeline on raw config text; never throws.
RunOutcome run_text(const std::string& text, const std::optional<std::string>& mode_override,
                    const std::optional<std::string>& out_override, bool quiet);

}  // namespace nehari
