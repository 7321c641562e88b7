#pragma once

#include <string>
#include <vector>

#include "spikeport/config.hpp"

namespace spikeport {

/// Solver nonconvergence surfaced as a failure because the scenario
/// demanded convergence.
struct NonconvergedRun : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentResult {
    std::string summary;  // line-delimited key=value records
    std::vector<std::string> files_written;
};

/// Dispatches the named experiment, writes all declared outputs under
/// cfg.outputs (write-to-temp-then-rename; no file is partially written
/// on error), and returns the structured summary. Throws ConfigError on
/// validation problems, NonconvergedRun when a required solve fails to
/// converge, and other exceptions on runtime failures.
ExperimentResult run_experiment(const ScenarioConfig& cfg, int threads = 1);

/// Writes content to path atomically (temp file + rename).
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace spikeport
