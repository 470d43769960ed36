#ifndef TRANSEPI_CONFIG_HPP
#define TRANSEPI_CONFIG_HPP

#include <string>
#include <vector>

#include "transepi/analysis.hpp"
#include "transepi/scenario.hpp"

namespace transepi {

// Effective configuration of a run. Defaults here are the defaults of the
// tool; the canonical JSON echo of this struct is embedded in every output
// file so a run can be reproduced from its artifacts alone.
struct RunConfig {
    std::string feed_dir;
    std::string demand_path;
    std::string out_dir = "out";

    PipelineConfig pipeline;

    std::vector<double> demand_fractions = {1.0, 0.83, 0.665, 0.59, 0.5};
    std::vector<double> capacity_fractions = {0.9, 0.8, 0.7, 0.5};

    ReportOptions report;
};

// Canonical single-line JSON echo (keys sorted).
std::string config_echo(const RunConfig& config);

// Loads overrides from a JSON config file; unknown keys are rejected.
RunConfig load_config(const std::string& path);

// Field-by-field validation; returns "field: problem" strings, empty if ok.
std::vector<std::string> validate_config(const RunConfig& config, bool check_paths);

}  // namespace transepi

#endif
