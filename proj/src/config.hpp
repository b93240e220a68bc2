#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ilc_engine.hpp"
#include "solvers.hpp"

namespace silc::config {

// Field-level configuration failure; message names the offending
// "section.key" where one exists.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class PlantSource { Surrogate, Coefficients };
enum class NoiseShapeSource { Sensitivity, Coefficients };
enum class Variant { InverseModel, NormOptimal, Optimization, Basis };
enum class LambdaMode { Absolute, Relative };
enum class PenaltyKind { Identity, Fused, SparseFused, Incremental };
enum class SolverRoute { Admm, Increments };

struct PlantConfig {
    PlantSource source = PlantSource::Surrogate;
    engine::SurrogateParams surrogate;  // sample_period filled from the task
    std::vector<double> g_num, g_den;   // source = coefficients
    std::vector<double> c_num, c_den;
    NoiseShapeSource h_source = NoiseShapeSource::Sensitivity;
    std::vector<double> h_num, h_den;
    double lambda_e = 1.5e-7;
    double model_gain = 1.0;  // scale on the model J used by the algorithm
};

struct TaskConfig {
    int n = 2048;
    double sample_rate_hz = 1000.0;
    double move_distance = 0.12;
    double max_velocity = 0.5;
    double max_acceleration = 0.5 / 0.03;
};

struct AlgorithmConfig {
    Variant variant = Variant::InverseModel;
    double alpha = 1.0;  // learning gain for the inverse-model update
    double we = 1.0;
    double wf = 0.0;
    double wdf = 0.0;
    double lambda = 0.0;
    LambdaMode lambda_mode = LambdaMode::Absolute;
    PenaltyKind d_kind = PenaltyKind::Identity;
    double fusion_weight = 1.0;
    bool debias = false;
    SolverRoute solver_route = SolverRoute::Admm;
    solvers::SolverOptions solver;
    std::vector<int> basis_orders = {1, 2, 3, 4};
    double t_multiplier = 1.0;  // basis constraint slack over the minimum
};

struct RunSection {
    int n_trials = 41;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool noise = true;
    int n_conv = 0;  // trials discarded as transient (0: second half rule)
    int n_iter = 0;  // averaging window length (0: to the last trial)
};

struct SweepConfig {
    std::vector<double> lambdas;
    bool has_log_range = false;
    double lambda_log_min = 0.0;
    double lambda_log_max = 0.0;
    int lambda_log_count = 0;
    std::vector<double> fusion_weights = {1.0};
};

struct OutputConfig {
    std::string directory = "out";
    bool plots = true;
    std::vector<int> signal_trials = {0, -1};  // -1 names the last trial
};

struct ExperimentConfig {
    PlantConfig plant;
    TaskConfig task;
    AlgorithmConfig algorithm;
    RunSection run;
    SweepConfig sweep;
    OutputConfig output;

    // Throws ConfigError on any violated field constraint.
    void validate() const;

    // Canonical text form: fixed section and key order, shortest
    // round-trip numbers. parse_config(serialize()) reproduces the
    // configuration exactly.
    std::string serialize() const;

    // Sweep grid, log range expanded geometrically. Empty when the sweep
    // section was not configured.
    std::vector<double> sweep_lambdas() const;

    engine::ReferenceProfile reference_profile() const;
    engine::SurrogateParams surrogate_params() const;
};

// Parses "key = value" lines grouped under [plant] [task] [algorithm]
// [run] [sweep] [output]. '#' or ';' start a comment line. Unknown
// sections and keys are rejected.
ExperimentConfig parse_config(const std::string& text);

ExperimentConfig load_config_file(const std::string& path);

}  // namespace silc::config
