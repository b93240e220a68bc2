#pragma once

// Brute-force references shared by the unit and acceptance tests.

#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "criterion.hpp"
#include "rng.hpp"

namespace oracle {

// Trial criterion with scalar weights and a dense penalty matrix:
//   0.5 we^2 |e - J(f-f0)|^2 + 0.5 wf^2 |f|^2 + 0.5 wdf^2 |f-f0|^2
//   + lambda |D f|_1
struct SmallProblem {
    Eigen::MatrixXd J;
    Eigen::MatrixXd D;
    Eigen::VectorXd e, f0;
    double we = 1.0, wf = 0.0, wdf = 0.0, lambda = 0.0;
};

inline double objective(const SmallProblem& p, const Eigen::VectorXd& f) {
    const Eigen::VectorXd r = p.e - p.J * (f - p.f0);
    double v = 0.5 * p.we * p.we * r.squaredNorm();
    if (p.wf != 0.0) v += 0.5 * p.wf * p.wf * f.squaredNorm();
    if (p.wdf != 0.0) v += 0.5 * p.wdf * p.wdf * (f - p.f0).squaredNorm();
    if (p.lambda != 0.0) v += p.lambda * (p.D * f).template lpNorm<1>();
    return v;
}

struct GridResult {
    Eigen::VectorXd f;
    double value = std::numeric_limits<double>::infinity();
};

// Exhaustive scan of [lo, hi]^n at the given step; n is 1 or 2.
inline GridResult exhaustive(const SmallProblem& p, const Eigen::VectorXd& lo,
                             const Eigen::VectorXd& hi, double step) {
    const int n = static_cast<int>(lo.size());
    GridResult best;
    Eigen::VectorXd f(n);
    if (n == 1) {
        for (double x = lo[0]; x <= hi[0] + 0.5 * step; x += step) {
            f[0] = x;
            const double v = objective(p, f);
            if (v < best.value) {
                best.value = v;
                best.f = f;
            }
        }
        return best;
    }
    for (double x = lo[0]; x <= hi[0] + 0.5 * step; x += step) {
        f[0] = x;
        for (double y = lo[1]; y <= hi[1] + 0.5 * step; y += step) {
            f[1] = y;
            const double v = objective(p, f);
            if (v < best.value) {
                best.value = v;
                best.f = f;
            }
        }
    }
    return best;
}

// Two-stage exhaustive search: a coarse pass over [-bound, bound]^n, then
// fine passes in a window that re-centers while the refinement keeps
// landing near its rim.  The slide follows valleys that run diagonally to
// the lattice, which a fixed window around the coarse minimizer can miss.
inline GridResult grid_min(const SmallProblem& p, double bound, double coarse,
                           double fine) {
    const int n = static_cast<int>(p.J.cols());
    const Eigen::VectorXd lo = Eigen::VectorXd::Constant(n, -bound);
    const Eigen::VectorXd hi = Eigen::VectorXd::Constant(n, bound);
    GridResult best = exhaustive(p, lo, hi, coarse);
    const double window = 4.0 * coarse;
    for (int slide = 0; slide < 64; ++slide) {
        const Eigen::VectorXd center = best.f;
        const GridResult refined =
            exhaustive(p, (center.array() - window).matrix(),
                       (center.array() + window).matrix(), fine);
        if (refined.value < best.value) best = refined;
        if ((best.f - center).cwiseAbs().maxCoeff() < window - fine) break;
    }
    return best;
}

// Exact global minimum by sign-pattern enumeration.  On the region where
// sign(D f) is fixed the objective is quadratic, so the minimizer is the
// stationary point of one of the 3^m sign patterns (zeros enforced as
// equality constraints).  Every candidate is scored with the true
// objective, which never undercuts the global minimum, and the pattern of
// the true minimizer reproduces it exactly.
inline GridResult exact_min(const SmallProblem& p) {
    const int n = static_cast<int>(p.J.cols());
    const int m = static_cast<int>(p.D.rows());
    const Eigen::VectorXd b = p.e + p.J * p.f0;
    const Eigen::MatrixXd P =
        p.we * p.we * (p.J.transpose() * p.J) +
        (p.wf * p.wf + p.wdf * p.wdf) * Eigen::MatrixXd::Identity(n, n);
    const Eigen::VectorXd q =
        p.we * p.we * (p.J.transpose() * b) + p.wdf * p.wdf * p.f0;

    GridResult best;
    std::vector<int> sigma(m, -1);
    while (true) {
        std::vector<int> zero_rows;
        Eigen::VectorXd dsign = Eigen::VectorXd::Zero(m);
        for (int i = 0; i < m; ++i) {
            if (sigma[i] == 0)
                zero_rows.push_back(i);
            else
                dsign[i] = sigma[i];
        }
        const int k = static_cast<int>(zero_rows.size());
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + k, n + k);
        K.topLeftCorner(n, n) = P;
        Eigen::VectorXd rhs(n + k);
        rhs.head(n) = q - p.lambda * (p.D.transpose() * dsign);
        for (int j = 0; j < k; ++j) {
            K.block(n + j, 0, 1, n) = p.D.row(zero_rows[j]);
            K.block(0, n + j, n, 1) = p.D.row(zero_rows[j]).transpose();
            rhs[n + j] = 0.0;
        }
        const Eigen::VectorXd x = Eigen::FullPivLU<Eigen::MatrixXd>(K).solve(rhs);
        if ((K * x - rhs).norm() <= 1e-8 * (1.0 + rhs.norm())) {
            const Eigen::VectorXd f = x.head(n);
            const double v = objective(p, f);
            if (v < best.value) {
                best.value = v;
                best.f = f;
            }
        }
        int i = 0;
        while (i < m && sigma[i] == 1) sigma[i++] = -1;
        if (i == m) break;
        ++sigma[i];
    }
    return best;
}

inline Eigen::VectorXd random_vec(silc::rng::Stream& s, int n,
                                  double scale = 1.0) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = scale * s.next_normal();
    return v;
}

inline Eigen::MatrixXd random_mat(silc::rng::Stream& s, int rows, int cols,
                                  double scale = 1.0) {
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = scale * s.next_normal();
    return m;
}

// Random small instance cycling through penalty kinds; weights chosen so
// the minimizer stays well inside the grid bound.
inline SmallProblem make_small_instance(silc::rng::Stream& s, int n,
                                        silc::criterion::DKind kind,
                                        silc::criterion::CriterionSpec* spec) {
    using silc::criterion::CriterionSpec;
    using silc::criterion::DKind;
    using silc::criterion::WeightSpec;
    SmallProblem p;
    p.J = random_mat(s, n, n);
    p.e = random_vec(s, n, 0.5);
    p.f0 = random_vec(s, n, 0.3);
    p.we = 1.0;
    p.wf = s.next_uniform() < 0.5 ? 0.0 : 0.3;
    p.wdf = 0.2 + 0.5 * s.next_uniform();
    p.lambda = 0.05 + 0.5 * s.next_uniform();

    CriterionSpec c;
    c.We = WeightSpec::scaled(p.we);
    c.Wf = p.wf == 0.0 ? WeightSpec::zero() : WeightSpec::scaled(p.wf);
    c.Wdf = WeightSpec::scaled(p.wdf);
    c.lambda = p.lambda;
    c.d_kind = kind;
    if (kind == DKind::SparseFused) c.fusion_weight = 1.5;
    if (kind == DKind::Custom)
        c.d_custom = Eigen::MatrixXd(silc::criterion::build_incremental_map(n));
    p.D = Eigen::MatrixXd(c.penalty_matrix(n));
    if (spec) *spec = c;
    return p;
}

}  // namespace oracle
