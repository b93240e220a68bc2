#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "criterion.hpp"
#include "lti_core.hpp"
#include "rng.hpp"
#include "solvers.hpp"

namespace silc::engine {

// Everything one trial needs: the true closed-loop map the commands act
// through, the (possibly mismatched) model handed to learners, the noise
// shaping filter, and the reference already propagated through the loop.
struct PlantSetup {
    std::variant<lti::TransferFunction, Eigen::MatrixXd> J_true;
    Eigen::MatrixXd J_model;  // lifted learner model; empty for explicit-only runs
    lti::TransferFunction H = lti::gain_tf(1.0, 1.0);
    double lambda_e = 0.0;
    Eigen::VectorXd r;         // loop-domain reference entering e_j
    Eigen::VectorXd setpoint;  // raw position profile, reporting only
    double sample_period = 1e-3;

    int n() const { return static_cast<int>(r.size()); }
    // Throws on structural problems; returns human-readable warnings for
    // soft ones (noise filter not strictly invertible-stable, etc).
    std::vector<std::string> validate() const;
};

struct IlcAlgorithm {
    enum class Kind { Explicit, Optimization, Basis };
    Kind kind = Kind::Explicit;

    // Explicit: f_{j+1} = Q (f_j + alpha L e_j)
    solvers::ExplicitGains gains;
    double alpha = 1.0;

    // Optimization: one criterion minimization per trial
    criterion::CriterionSpec crit;
    solvers::SolverOptions solver;
    bool debias = false;
    bool fused_via_increments = false;

    // Basis: f = Psi theta, l1-minimal theta subject to a performance level
    Eigen::MatrixXd psi;
    double t_multiplier = 1.0;
};

struct TrialRecord {
    int trial = 0;
    Eigen::VectorXd f;
    Eigen::VectorXd e;
    double e_norm2 = 0.0;
    int f_card = 0;   // exact nonzeros of f
    int df_card = 0;  // nonzero first differences (relative snap threshold)
    // Result of the update solve performed at this trial (produces the next
    // command); NaN objective for explicit updates and for the final trial.
    double objective = 0.0;
    bool converged = true;
    double wall_ms = 0.0;
    Eigen::VectorXd theta;  // basis variant only
};

struct RunConfig {
    int n_trials = 1;
    std::uint64_t seed = 0;
    bool noise = true;
    int n_conv = 0;  // first trial of the averaging window
    int n_iter = 0;  // window length; 0 disables averaging
    void validate() const;
};

struct RunResult {
    std::vector<TrialRecord> records;
    std::vector<std::string> warnings;
};

// e_j = r - J_o f_j - v_j with v_j = H n_j, n_j white Gaussian of variance
// lambda_e drawn from the stream (skipped entirely when noise is off).
Eigen::VectorXd run_trial(const PlantSetup& plant, const Eigen::VectorXd& f_j,
                          rng::Stream& stream, bool noise_on = true);

// f_{j+1} = Q (f_j + alpha L e_j)
Eigen::VectorXd explicit_update(const solvers::ExplicitGains& gains,
                                const Eigen::VectorXd& f_j,
                                const Eigen::VectorXd& e_j, double alpha);

// Runs n_trials trials from f_0 = 0.  Records hold (f_j, e_j); the update
// solve at trial j produces f_{j+1}, so the last record carries no solve.
// Solver non-convergence is recorded and the loop continues.
RunResult run_ilc(const PlantSetup& plant, const IlcAlgorithm& algo,
                  const RunConfig& run);

// Elementwise mean of e over trials n_conv .. n_conv + n_iter - 1.
Eigen::VectorXd estimate_e_inf(const std::vector<TrialRecord>& records,
                               int n_conv, int n_iter);

double trial_varying_norm(const Eigen::VectorXd& e_j,
                          const Eigen::VectorXd& e_inf);

// Spectral norm of Q (I - L J): the finite-time contraction factor of the
// explicit update.  Cubic cost; intended for analysis, not the trial loop.
double lifted_contraction(const solvers::ExplicitGains& gains,
                          const Eigen::MatrixXd& J);

struct ReferenceProfile {
    double distance = 0.12;       // m
    double max_velocity = 0.5;    // m/s
    double max_acceleration = 0.5 / 0.03;  // m/s^2
    double sample_period = 1e-3;  // s
    int n = 2048;
};

// Point-to-point position profile with trapezoidal velocity (triangular
// when the distance is too short to reach max_velocity), then dwell.
// Throws when the move cannot finish within the n samples.
Eigen::VectorXd build_reference(const ReferenceProfile& p);

struct BasisSet {
    Eigen::MatrixXd psi;     // N x n_basis, unit inf-norm columns
    Eigen::VectorXd scale;   // per-column divisor applied (1 when degenerate)
    std::vector<int> orders;
    bool degenerate = false;  // some column was identically zero
};

// Column k: order-k discrete difference of r (zero-prepended to length N),
// scaled to unit inf-norm.  Orders must lie in 1..8 and below N.
BasisSet build_basis(const Eigen::VectorXd& r, const std::vector<int>& orders);

// Frozen two-mass motion-system surrogate: rigid-body double integrator
// plus one lightly damped 150 Hz mode at 1 kHz, lead-lag controller with
// unit loop gain at 30 Hz.
struct SurrogateParams {
    double sample_period = 1e-3;
    double mass = 5.0;             // kg, rigid-body line
    double numerator_zero = 0.5;   // plant zero at z = -numerator_zero
    double resonance_hz = 150.0;
    double resonance_damping = 0.02;
    double modal_mass = 50.0;      // kg, flexible-mode DC weight
    double lead_zero_hz = 8.0;
    double lead_pole_hz = 120.0;
    double lag_zero_hz = 1.5;
    double lag_pole_hz = 0.15;
    double crossover_hz = 30.0;    // |G C| = 1 here fixes the controller gain
};

struct SurrogateModel {
    lti::TransferFunction G;
    lti::TransferFunction C;
    lti::TransferFunction S;  // 1/(1+GC)
    lti::TransferFunction J;  // S G
    double controller_gain = 0.0;
};

SurrogateModel make_surrogate(const SurrogateParams& params = {});

}  // namespace silc::engine
