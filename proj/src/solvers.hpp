#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <memory>
#include <string>
#include <vector>

#include "criterion.hpp"

namespace silc::solvers {

using criterion::CriterionSpec;
using criterion::Uniqueness;
using criterion::WeightSpec;

struct SolverOptions {
    int max_iterations = 50000;
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    double rho = 1.0;              // ADMM penalty
    double over_relaxation = 1.0;  // in [1, 2)
    double kkt_tolerance = 1e-8;   // certificate target after convergence
    double zero_snap = 1e-9;       // relative snap threshold for exact zeros

    void validate() const;
};

struct ExplicitGains {
    Eigen::MatrixXd L;
    Eigen::MatrixXd Q;
};

struct Solution {
    Eigen::VectorXd f;
    double objective = 0.0;
    double kkt_residual = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<int> support;       // indices of exact nonzeros of f
    Uniqueness uniqueness = Uniqueness::StrictlyConvex;
    double lambda_used = 0.0;       // constrained solves: the lambda picked
    bool fell_back_to_previous = false;
    std::string diagnostics;
};

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double kappa);

// Exact zeros: |f_i| <= snap * max(1, |f|_inf) is snapped to 0.
Eigen::VectorXd snap_zeros(const Eigen::VectorXd& f, double snap);
std::vector<int> support_of(const Eigen::VectorXd& f);

// Closed-form update gains for the quadratic criterion (lambda = 0):
//   L = (J^T We'J + Wdf')^{-1} J^T We'
//   Q = (J^T We'J + Wf' + Wdf')^{-1} (J^T We'J + Wdf')
// with X' = X^T X.  A zero W_f short-circuits Q to the exact identity.
ExplicitGains norm_optimal_gains(const Eigen::MatrixXd& J, const WeightSpec& We,
                                 const WeightSpec& Wf, const WeightSpec& Wdf);

// Smallest lambda for which the pure lasso (identity penalty,
// W_f = W_df = 0) update returns f = 0.  The threshold formula only holds
// for the identity penalty, so any other kind is rejected.
double lasso_lambda_max(const Eigen::MatrixXd& J, const WeightSpec& We,
                        const Eigen::VectorXd& e_j, const Eigen::VectorXd& f_j,
                        criterion::DKind d_kind = criterion::DKind::Identity);

// One trial update minimizing the criterion over f.  Holds the normal
// matrix, its factorizations, and warm-start state so repeated trials on
// the same system reuse everything that does not depend on (e_j, f_j).
class UpdateSolver {
  public:
    UpdateSolver(CriterionSpec spec, Eigen::MatrixXd J, SolverOptions opts);
    ~UpdateSolver();
    UpdateSolver(UpdateSolver&&) noexcept;

    Solution solve(const Eigen::VectorXd& e_j, const Eigen::VectorXd& f_j);

    const CriterionSpec& spec() const;
    const SolverOptions& options() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Single-shot convenience wrapper around UpdateSolver.
Solution solve_update(const CriterionSpec& spec, const Eigen::MatrixXd& J,
                      const Eigen::VectorXd& e_j, const Eigen::VectorXd& f_j,
                      const SolverOptions& opts);

// Fused-penalty solve in increment variables: substitutes f = cumsum(x),
// solves the identity-penalty lasso in x against J * cumsum, and maps back.
// The penalty this routes is the full incremental map (first increment
// included), so it matches solve_update with the custom penalty
// build_incremental_map(N).  Requires a fused spec with W_f = W_df = 0.
Solution solve_fused_via_increments(const CriterionSpec& spec,
                                    const Eigen::MatrixXd& J,
                                    const Eigen::VectorXd& e_j,
                                    const Eigen::VectorXd& f_j,
                                    const SolverOptions& opts);

// Re-solves the smooth part of the criterion restricted to the structure
// identified by sol: the support for an identity penalty, the
// piecewise-constant segments otherwise.  Exact zeros stay zero and the
// quadratic part cannot increase.
Solution debias(const Solution& sol, const CriterionSpec& spec,
                const Eigen::MatrixXd& J, const Eigen::VectorXd& e_j,
                const Eigen::VectorXd& f_j, const SolverOptions& opts);

// min |M x|_1  subject to  1/2 |b - A x|^2 <= t, by bisection on the
// lambda of the penalized form.  Throws when t is below the unconstrained
// minimum; t at that minimum returns the least-squares solution.
Solution solve_constrained_l1(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                              const Eigen::MatrixXd& M, double t,
                              const SolverOptions& opts);

}  // namespace silc::solvers
