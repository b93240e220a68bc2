#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "analysis.hpp"
#include "config.hpp"
#include "ilc_engine.hpp"

namespace silc::experiment {

// Mirrors the process exit codes.
enum class Status {
    Ok = 0,
    BadConfig = 1,
    CompletedWithWarnings = 2,
    Failed = 3,
};

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<bool> plots;
    int threads = 1;
};

struct Outcome {
    Status status = Status::Ok;
    std::string message;
};

// Everything derived from a validated configuration before any trial runs.
struct BuiltSystem {
    lti::TransferFunction G, C, S, J;  // true loop; J = S G
    lti::TransferFunction H;           // noise shaping filter
    Eigen::VectorXd r_bar;             // raw position setpoint
    engine::PlantSetup plant;
    engine::IlcAlgorithm algo;
    double lambda_effective = 0.0;  // l1 weight after mode resolution
    double lambda_max = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::string> warnings;
};

// Throws config::ConfigError on anything a config edit could fix.
BuiltSystem build_system(const config::ExperimentConfig& cfg);

// Executes the configured trial loop and writes trials.csv, errors.csv,
// summary.csv, spectra.csv, per-trial signal CSVs, and optional SVG plots
// into the output directory.
Outcome run_experiment(config::ExperimentConfig cfg, const Overrides& ov);

// Reads an errors.csv produced by run_experiment and writes e_inf.csv,
// trial_varying.csv, spectra.csv, analysis_summary.csv, and plots.
Outcome analyze_records(config::ExperimentConfig cfg,
                        const std::string& records_path, const Overrides& ov);

// Frequency-domain convergence and limit-spectrum report for algorithms
// with an explicit update; l1 and basis variants are refused.
Outcome predict_report(config::ExperimentConfig cfg, const Overrides& ov);

// Runs the (lambda, fusion_weight) grid, one subdirectory per entry, and
// merges sweep_summary.csv.
Outcome sweep_experiment(config::ExperimentConfig cfg, const Overrides& ov);

}  // namespace silc::experiment
