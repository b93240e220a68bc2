#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <string>

namespace silc::criterion {

// Weighting operator W used through its Gram form W^T W.  The cheap scalar
// and diagonal variants avoid materializing N x N matrices in the solver
// hot path.
struct WeightSpec {
    enum class Kind { Zero, Scaled, Diagonal, Full };

    Kind kind = Kind::Zero;
    double scale = 0.0;
    Eigen::VectorXd diag;
    Eigen::MatrixXd full;

    static WeightSpec zero() { return {}; }
    static WeightSpec scaled(double s);
    static WeightSpec diagonal(Eigen::VectorXd d);
    static WeightSpec matrix(Eigen::MatrixXd W);

    bool is_zero() const { return kind == Kind::Zero; }
    // Strictly positive definite Gram (cheap variants only; Full uses rank).
    bool positive_definite(int n) const;
    void check_dim(int n, const char* name) const;

    // y = W x
    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
    // W A (Zero yields an A-shaped zero matrix)
    Eigen::MatrixXd apply_mat(const Eigen::MatrixXd& A) const;
    // accum += W^T W
    void add_gram(Eigen::MatrixXd& accum) const;
    // W^T W x
    Eigen::VectorXd gram_apply(const Eigen::VectorXd& x) const;
    // W^T W A
    Eigen::MatrixXd gram_mat(const Eigen::MatrixXd& A) const;
    // A^T (W^T W) A without forming the Gram matrix for cheap variants.
    Eigen::MatrixXd gram_quadratic(const Eigen::MatrixXd& A) const;
    // A^T (W^T W) b
    Eigen::VectorXd gram_product(const Eigen::MatrixXd& A,
                                 const Eigen::VectorXd& b) const;
};

enum class DKind { Identity, Fused, SparseFused, Custom };

// First-difference map, (N-1) x N rows of [-1 +1].
Eigen::SparseMatrix<double> build_fused_difference(int n);

// Incremental map, N x N lower bidiagonal with unit diagonal and first row
// [1 0 ... 0]; its inverse is the cumulative-sum matrix.
Eigen::SparseMatrix<double> build_incremental_map(int n);

// Inverse of the incremental map applied to a vector (cumulative sum).
Eigen::VectorXd cumulative_sum(const Eigen::VectorXd& x);

// Vertical stack [fusion_weight * D_f; I], (2N-1) x N.
Eigen::SparseMatrix<double> build_sparse_fused(int n, double fusion_weight);

// One trial-update criterion
//   1/2 |W_e (e_j - J (f - f_j))|^2 + 1/2 |W_f f|^2
//   + 1/2 |W_df (f - f_j)|^2 + lambda |D f|_1
struct CriterionSpec {
    WeightSpec We = WeightSpec::scaled(1.0);
    WeightSpec Wf = WeightSpec::zero();
    WeightSpec Wdf = WeightSpec::zero();
    double lambda = 0.0;
    DKind d_kind = DKind::Identity;
    double fusion_weight = 1.0;        // sparse-fused stacking weight
    Eigen::MatrixXd d_custom;          // Custom only

    void validate(int n) const;
    Eigen::SparseMatrix<double> penalty_matrix(int n) const;
    // The l1 term is a norm of Df; full column rank of D is one of the
    // conditions the uniqueness flag checks.
    bool penalty_full_column_rank(int n) const;
};

enum class Uniqueness { StrictlyConvex, PossiblyNonUnique };

double evaluate_criterion(const CriterionSpec& spec, const Eigen::VectorXd& e_j,
                          const Eigen::VectorXd& f_j,
                          const Eigen::VectorXd& f_candidate,
                          const Eigen::MatrixXd& J);

}  // namespace silc::criterion
