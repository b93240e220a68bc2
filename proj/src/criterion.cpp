#include "criterion.hpp"

#include <stdexcept>

namespace silc::criterion {

WeightSpec WeightSpec::scaled(double s) {
    if (!(s >= 0.0))
        throw std::invalid_argument("weight: scale must be non-negative");
    WeightSpec w;
    w.kind = s == 0.0 ? Kind::Zero : Kind::Scaled;
    w.scale = s;
    return w;
}

WeightSpec WeightSpec::diagonal(Eigen::VectorXd d) {
    if ((d.array() < 0.0).any())
        throw std::invalid_argument("weight: diagonal entries must be non-negative");
    WeightSpec w;
    w.kind = Kind::Diagonal;
    w.diag = std::move(d);
    return w;
}

WeightSpec WeightSpec::matrix(Eigen::MatrixXd W) {
    WeightSpec w;
    w.kind = Kind::Full;
    w.full = std::move(W);
    return w;
}

bool WeightSpec::positive_definite(int n) const {
    switch (kind) {
        case Kind::Zero: return false;
        case Kind::Scaled: return scale > 0.0;
        case Kind::Diagonal: return (diag.array() > 0.0).all();
        case Kind::Full: {
            if (full.rows() < n) return false;
            Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(full);
            return qr.rank() == n;
        }
    }
    return false;
}

void WeightSpec::check_dim(int n, const char* name) const {
    if (kind == Kind::Diagonal && diag.size() != n)
        throw std::invalid_argument(std::string(name) + ": diagonal length mismatch");
    if (kind == Kind::Full && full.cols() != n)
        throw std::invalid_argument(std::string(name) + ": matrix column mismatch");
}

Eigen::VectorXd WeightSpec::apply(const Eigen::VectorXd& x) const {
    switch (kind) {
        case Kind::Zero: return Eigen::VectorXd::Zero(x.size());
        case Kind::Scaled: return scale * x;
        case Kind::Diagonal: return diag.cwiseProduct(x);
        case Kind::Full: return full * x;
    }
    return {};
}

void WeightSpec::add_gram(Eigen::MatrixXd& accum) const {
    const int n = static_cast<int>(accum.rows());
    switch (kind) {
        case Kind::Zero: return;
        case Kind::Scaled:
            accum.diagonal().array() += scale * scale;
            return;
        case Kind::Diagonal:
            accum.diagonal() += diag.cwiseProduct(diag);
            return;
        case Kind::Full:
            if (full.cols() != n)
                throw std::invalid_argument("weight: dimension mismatch");
            accum.noalias() += full.transpose() * full;
            return;
    }
}

Eigen::VectorXd WeightSpec::gram_apply(const Eigen::VectorXd& x) const {
    switch (kind) {
        case Kind::Zero: return Eigen::VectorXd::Zero(x.size());
        case Kind::Scaled: return (scale * scale) * x;
        case Kind::Diagonal: return diag.cwiseAbs2().cwiseProduct(x);
        case Kind::Full: return full.transpose() * (full * x);
    }
    return {};
}

Eigen::MatrixXd WeightSpec::apply_mat(const Eigen::MatrixXd& A) const {
    switch (kind) {
        case Kind::Zero: return Eigen::MatrixXd::Zero(A.rows(), A.cols());
        case Kind::Scaled: return scale * A;
        case Kind::Diagonal: return diag.asDiagonal() * A;
        case Kind::Full: return full * A;
    }
    return {};
}

Eigen::MatrixXd WeightSpec::gram_mat(const Eigen::MatrixXd& A) const {
    switch (kind) {
        case Kind::Zero: return Eigen::MatrixXd::Zero(A.rows(), A.cols());
        case Kind::Scaled: return (scale * scale) * A;
        case Kind::Diagonal: return diag.cwiseAbs2().asDiagonal() * A;
        case Kind::Full: return full.transpose() * (full * A);
    }
    return {};
}

Eigen::MatrixXd WeightSpec::gram_quadratic(const Eigen::MatrixXd& A) const {
    switch (kind) {
        case Kind::Zero: return Eigen::MatrixXd::Zero(A.cols(), A.cols());
        case Kind::Scaled: return (scale * scale) * (A.transpose() * A);
        case Kind::Diagonal:
            return A.transpose() * diag.cwiseAbs2().asDiagonal() * A;
        case Kind::Full: {
            const Eigen::MatrixXd WA = full * A;
            return WA.transpose() * WA;
        }
    }
    return {};
}

Eigen::VectorXd WeightSpec::gram_product(const Eigen::MatrixXd& A,
                                         const Eigen::VectorXd& b) const {
    return A.transpose() * gram_apply(b);
}

Eigen::SparseMatrix<double> build_fused_difference(int n) {
    if (n < 2)
        throw std::invalid_argument("build_fused_difference: need at least 2 samples");
    Eigen::SparseMatrix<double> D(n - 1, n);
    D.reserve(Eigen::VectorXi::Constant(n, 2));
    for (int i = 0; i < n - 1; ++i) {
        D.insert(i, i) = -1.0;
        D.insert(i, i + 1) = 1.0;
    }
    D.makeCompressed();
    return D;
}

Eigen::SparseMatrix<double> build_incremental_map(int n) {
    if (n < 1)
        throw std::invalid_argument("build_incremental_map: need at least 1 sample");
    Eigen::SparseMatrix<double> D(n, n);
    D.reserve(Eigen::VectorXi::Constant(n, 2));
    for (int i = 0; i < n; ++i) {
        if (i > 0) D.insert(i, i - 1) = -1.0;
        D.insert(i, i) = 1.0;
    }
    D.makeCompressed();
    return D;
}

Eigen::VectorXd cumulative_sum(const Eigen::VectorXd& x) {
    Eigen::VectorXd y(x.size());
    double acc = 0.0;
    for (int i = 0; i < x.size(); ++i) {
        acc += x[i];
        y[i] = acc;
    }
    return y;
}

Eigen::SparseMatrix<double> build_sparse_fused(int n, double fusion_weight) {
    if (n < 2)
        throw std::invalid_argument("build_sparse_fused: need at least 2 samples");
    if (!(fusion_weight > 0.0))
        throw std::invalid_argument("build_sparse_fused: fusion weight must be positive");
    Eigen::SparseMatrix<double> D(2 * n - 1, n);
    D.reserve(Eigen::VectorXi::Constant(n, 3));
    for (int i = 0; i < n - 1; ++i) {
        D.insert(i, i) = -fusion_weight;
        D.insert(i, i + 1) = fusion_weight;
    }
    for (int i = 0; i < n; ++i) D.insert(n - 1 + i, i) = 1.0;
    D.makeCompressed();
    return D;
}

void CriterionSpec::validate(int n) const {
    We.check_dim(n, "W_e");
    Wf.check_dim(n, "W_f");
    Wdf.check_dim(n, "W_df");
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("criterion: lambda must be finite and >= 0");
    if (d_kind == DKind::SparseFused && !(fusion_weight > 0.0))
        throw std::invalid_argument("criterion: fusion weight must be positive");
    if (d_kind == DKind::Custom) {
        if (d_custom.cols() != n)
            throw std::invalid_argument("criterion: custom penalty has wrong column count");
        if (d_custom.rows() < 1)
            throw std::invalid_argument("criterion: custom penalty is empty");
    }
}

Eigen::SparseMatrix<double> CriterionSpec::penalty_matrix(int n) const {
    switch (d_kind) {
        case DKind::Identity: {
            Eigen::SparseMatrix<double> D(n, n);
            D.setIdentity();
            return D;
        }
        case DKind::Fused: return build_fused_difference(n);
        case DKind::SparseFused: return build_sparse_fused(n, fusion_weight);
        case DKind::Custom: return d_custom.sparseView();
    }
    return {};
}

bool CriterionSpec::penalty_full_column_rank(int n) const {
    switch (d_kind) {
        case DKind::Identity: return true;
        case DKind::Fused: return false;  // rank N-1
        case DKind::SparseFused: return true;
        case DKind::Custom: {
            Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d_custom);
            return qr.rank() == n;
        }
    }
    return false;
}

double evaluate_criterion(const CriterionSpec& spec, const Eigen::VectorXd& e_j,
                          const Eigen::VectorXd& f_j,
                          const Eigen::VectorXd& f_candidate,
                          const Eigen::MatrixXd& J) {
    const int n = static_cast<int>(f_j.size());
    spec.validate(n);
    if (f_candidate.size() != n || J.rows() != e_j.size() || J.cols() != n)
        throw std::invalid_argument("evaluate_criterion: dimension mismatch");
    const Eigen::VectorXd df = f_candidate - f_j;
    const Eigen::VectorXd e_pred = e_j - J * df;
    double value = 0.5 * spec.We.apply(e_pred).squaredNorm()
                 + 0.5 * spec.Wf.apply(f_candidate).squaredNorm()
                 + 0.5 * spec.Wdf.apply(df).squaredNorm();
    if (spec.lambda > 0.0)
        value += spec.lambda * (spec.penalty_matrix(n) * f_candidate).lpNorm<1>();
    return value;
}

}  // namespace silc::criterion
