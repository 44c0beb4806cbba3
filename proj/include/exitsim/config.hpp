#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace exitsim {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat key-value config with [experiment] / [model] / [domain] / [run] / [meta]
// sections. Unknown sections or keys are errors. meta.txt emitted by a run is
// itself a valid config that reproduces the run.
struct ExperimentConfig {
    std::string experiment;
    std::string model_id;
    std::map<std::string, double> model_params;  // forwarded to the model zoo
    std::map<std::string, double> domain_params; // r, clamp_band overrides

    std::vector<double> meshes;   // descending
    double h = 0.0;               // single-mesh experiments
    long n = 0;
    double t = 0.0;               // horizon; 0 = auto (8 x pilot mean exit time)
    std::optional<uint64_t> seed; // required (no entropy default)
    int p = 1;
    int q = 4;
    double level = 0.0;
    int ref_factor = 64;
    double ref_mesh = 0.0;  // 0 = auto
    std::vector<double> start_distances;
    double rho = 0.0;
    double modulus_window = 0.0;
    int modulus_factor = 16;
    double tail_unit = 1.0;
    int moment_max_p = 3;
    long assumption_points = 10000;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// Outcome of one experiment run; `stats` carries the headline numbers the
// acceptance suite asserts on (slopes, probabilities, margins, ...).
struct RunOutput {
    int exit_code = 0;  // 0 ok, 1 runtime/parameter, 2 assumption fail, 3 window fail
    std::string message;
    std::map<std::string, double> stats;
    std::string results_path, meta_path, fit_path;
};

// Runs the configured experiment and writes results.csv, meta.txt and fit.csv
// (when a rate fit applies) under out_dir. seed_override, when set, replaces
// the config seed. Worker count never changes file contents.
RunOutput run_experiment(const ExperimentConfig& config, const std::string& out_dir,
                         int workers = 0, std::optional<uint64_t> seed_override = std::nullopt);

}  // namespace exitsim
