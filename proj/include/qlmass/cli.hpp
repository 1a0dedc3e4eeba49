#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qlm::cli {

/// Config file cannot be parsed or references unknown keys/scenarios.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Declarative run configuration, parsed from a key = value text file.
/// Grammar: one `key = value` per line, `#` starts a comment, blank lines
/// ignored; list values are comma-separated. Keys:
///   scenarios        = all | comma-separated scenario names | none
///   resolutions      = nodes per axis, ascending (default 33, 49)
///   adm.radii        = flux truncation radii, at least two (default 2, 2.5, 3)
///   tolerance.margin = relative slack for bound margins (> 0, default 1e-3)
///   constants.margin = multiplicative slot for the unresolved dimensional
///                      constant in the split bound (default 1)
///   output           = artifact directory
///   workers          = scenario-level parallelism cap (default 1)
struct RunConfig {
    std::vector<std::string> scenario_names;  // resolved names; empty = none
    bool all_scenarios = false;
    std::vector<int> resolutions = {33, 49};
    std::vector<double> adm_radii = {2.0, 2.5, 3.0};
    double margin_tol = 1e-3;
    double constant_margin = 1.0;
    std::string output_dir = "qlm-artifacts";
    int workers = 1;

    static RunConfig parse_file(const std::string& path);
    static RunConfig parse_text(const std::string& text);
};

/// Evaluates every selected scenario and writes per-scenario JSON verdict
/// bundles, shell-averaged CSVs, summary.csv and manifest.txt into the
/// output directory. Returns 0 when every asserted invariant holds, 1
/// otherwise; one scenario's failure never blocks the others' artifacts.
int run(const RunConfig& cfg);

/// `run` driven by a config file path; returns 2 on configuration errors.
int run_file(const std::string& path);

/// Renders the theorem-by-scenario margin matrix from an artifact directory
/// (produced by `run`) to stdout. Returns 1 when any row failed, 2 when the
/// artifacts are missing or corrupt (each problem itemized).
int report(const std::string& dir);

}  // namespace qlm::cli
