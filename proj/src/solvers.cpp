#include "solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace silc::solvers {

namespace {

constexpr double kPivotRel = 1e3 * std::numeric_limits<double>::epsilon();

std::string format_pivots(double lo, double hi) {
    std::ostringstream os;
    os << "min pivot " << lo << ", max pivot " << hi;
    return os.str();
}

// Rank-revealing test on an LDLT factorization of a PSD matrix.
bool ldlt_nonsingular(const Eigen::LDLT<Eigen::MatrixXd>& ldlt, double* lo_out,
                      double* hi_out) {
    const Eigen::VectorXd d = ldlt.vectorD();
    const double hi = d.size() ? d.cwiseAbs().maxCoeff() : 0.0;
    const double lo = d.size() ? d.minCoeff() : 0.0;
    if (lo_out) *lo_out = lo;
    if (hi_out) *hi_out = hi;
    if (ldlt.info() != Eigen::Success) return false;
    return hi > 0.0 && lo > kPivotRel * hi;
}

}  // namespace

void SolverOptions::validate() const {
    if (max_iterations < 1)
        throw std::invalid_argument("solver: max_iterations must be >= 1");
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
        throw std::invalid_argument("solver: tolerances must be positive");
    if (!(rho > 0.0))
        throw std::invalid_argument("solver: rho must be positive");
    if (!(over_relaxation >= 1.0 && over_relaxation < 2.0))
        throw std::invalid_argument("solver: over_relaxation must lie in [1, 2)");
    if (!(kkt_tolerance > 0.0))
        throw std::invalid_argument("solver: kkt_tolerance must be positive");
    if (!(zero_snap >= 0.0))
        throw std::invalid_argument("solver: zero_snap must be non-negative");
}

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double kappa) {
    if (!(kappa >= 0.0))
        throw std::invalid_argument("soft_threshold: threshold must be non-negative");
    return v.array().sign() * (v.array().abs() - kappa).max(0.0);
}

Eigen::VectorXd snap_zeros(const Eigen::VectorXd& f, double snap) {
    const double thr = snap * std::max(1.0, f.size() ? f.cwiseAbs().maxCoeff() : 0.0);
    Eigen::VectorXd out = f;
    for (int i = 0; i < out.size(); ++i)
        if (std::abs(out[i]) <= thr) out[i] = 0.0;
    return out;
}

std::vector<int> support_of(const Eigen::VectorXd& f) {
    std::vector<int> s;
    for (int i = 0; i < f.size(); ++i)
        if (f[i] != 0.0) s.push_back(i);
    return s;
}

ExplicitGains norm_optimal_gains(const Eigen::MatrixXd& J, const WeightSpec& We,
                                 const WeightSpec& Wf, const WeightSpec& Wdf) {
    const int n = static_cast<int>(J.cols());
    We.check_dim(static_cast<int>(J.rows()), "W_e");
    Wf.check_dim(n, "W_f");
    Wdf.check_dim(n, "W_df");

    Eigen::MatrixXd P1 = We.gram_quadratic(J);
    Wdf.add_gram(P1);
    Eigen::LDLT<Eigen::MatrixXd> fact1(P1);
    double lo, hi;
    if (!ldlt_nonsingular(fact1, &lo, &hi))
        throw std::invalid_argument(
            "norm_optimal_gains: normal matrix J'We'WeJ + Wdf'Wdf is singular ("
            + format_pivots(lo, hi) + ")");

    ExplicitGains g;
    g.L = fact1.solve(Eigen::MatrixXd(We.gram_mat(J).transpose()));

    if (Wf.is_zero()) {
        g.Q = Eigen::MatrixXd::Identity(n, n);
    } else {
        Eigen::MatrixXd P = P1;
        Wf.add_gram(P);
        Eigen::LDLT<Eigen::MatrixXd> fact(P);
        if (!ldlt_nonsingular(fact, &lo, &hi))
            throw std::invalid_argument(
                "norm_optimal_gains: full normal matrix is singular ("
                + format_pivots(lo, hi) + ")");
        g.Q = fact.solve(P1);
    }
    return g;
}

double lasso_lambda_max(const Eigen::MatrixXd& J, const WeightSpec& We,
                        const Eigen::VectorXd& e_j, const Eigen::VectorXd& f_j,
                        criterion::DKind d_kind) {
    if (d_kind != criterion::DKind::Identity)
        throw std::invalid_argument(
            "lasso_lambda_max: threshold formula requires the identity penalty");
    if (J.rows() != e_j.size() || J.cols() != f_j.size())
        throw std::invalid_argument("lasso_lambda_max: dimension mismatch");
    const Eigen::VectorXd b = e_j + J * f_j;
    return (J.transpose() * We.gram_apply(b)).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------

struct UpdateSolver::Impl {
    CriterionSpec spec;
    Eigen::MatrixXd J;
    SolverOptions opts;
    int n = 0;   // decision dimension
    int me = 0;  // error dimension
    int m = 0;   // penalty rows

    Eigen::SparseMatrix<double> D;           // column major, products
    Eigen::SparseMatrix<double, Eigen::RowMajor> D_rows;  // certificate sweeps
    Eigen::VectorXd d_row_sqnorm;
    Eigen::MatrixXd DtD;
    Eigen::MatrixXd P;
    Uniqueness uniqueness = Uniqueness::StrictlyConvex;

    bool gains_ready = false;
    ExplicitGains gains;

    double rho = 1.0;
    double fact_rho = -1.0;
    Eigen::LDLT<Eigen::MatrixXd> fact;
    Eigen::VectorXd z, u;
    bool warm = false;

    Impl(CriterionSpec s, Eigen::MatrixXd Jin, SolverOptions o)
        : spec(std::move(s)), J(std::move(Jin)), opts(o) {
        opts.validate();
        n = static_cast<int>(J.cols());
        me = static_cast<int>(J.rows());
        spec.validate(n);
        spec.We.check_dim(me, "W_e");

        P = spec.We.gram_quadratic(J);
        spec.Wf.add_gram(P);
        spec.Wdf.add_gram(P);

        if (spec.lambda > 0.0) {
            D = spec.penalty_matrix(n);
            D_rows = D;
            m = static_cast<int>(D.rows());
            DtD = Eigen::MatrixXd(D.transpose() * D);
            d_row_sqnorm.resize(m);
            for (int i = 0; i < m; ++i)
                d_row_sqnorm[i] = D_rows.row(i).squaredNorm();
        }
        uniqueness = classify_uniqueness();
    }

    Uniqueness classify_uniqueness() {
        if (spec.Wdf.kind != WeightSpec::Kind::Full &&
            spec.Wdf.positive_definite(n))
            return Uniqueness::StrictlyConvex;
        if (spec.Wf.kind != WeightSpec::Kind::Full &&
            spec.Wf.positive_definite(n))
            return Uniqueness::StrictlyConvex;
        Eigen::LDLT<Eigen::MatrixXd> test(P);
        if (ldlt_nonsingular(test, nullptr, nullptr))
            return Uniqueness::StrictlyConvex;
        if (spec.lambda > 0.0 && spec.penalty_full_column_rank(n))
            return Uniqueness::StrictlyConvex;
        return Uniqueness::PossiblyNonUnique;
    }

    void ensure_gains() {
        if (!gains_ready) {
            gains = norm_optimal_gains(J, spec.We, spec.Wf, spec.Wdf);
            gains_ready = true;
        }
    }

    double smooth_value(const Eigen::VectorXd& f, const Eigen::VectorXd& q,
                        double c0) const {
        return 0.5 * f.dot(P * f) - q.dot(f) + c0;
    }

    double objective_value(const Eigen::VectorXd& f, const Eigen::VectorXd& q,
                           double c0) const {
        double v = smooth_value(f, q, c0);
        if (spec.lambda > 0.0) v += spec.lambda * (D * f).lpNorm<1>();
        return v;
    }

    void ensure_factorization() {
        if (fact_rho == rho) return;
        Eigen::MatrixXd A = P;
        A.noalias() += rho * DtD;
        fact.compute(A);
        if (fact.info() != Eigen::Success)
            throw std::runtime_error("solve_update: ADMM system factorization failed");
        fact_rho = rho;
    }

    // Certificate residual: builds a feasible subgradient g (sign-fixed on
    // nonzero penalty entries, box-clamped elsewhere) and tightens the free
    // entries by projected coordinate descent on |grad + lambda D'g|^2.
    double kkt_certificate(const Eigen::VectorXd& f, const Eigen::VectorXd& q,
                           const Eigen::VectorXd& y_dual) const {
        Eigen::VectorXd v = P * f - q;
        if (spec.lambda == 0.0) return v.cwiseAbs().maxCoeff();

        const Eigen::VectorXd w = D * f;
        const double wthr =
            opts.zero_snap * std::max(1.0, w.size() ? w.cwiseAbs().maxCoeff() : 0.0);
        Eigen::VectorXd g(m);
        std::vector<int> free_idx;
        free_idx.reserve(m);
        for (int i = 0; i < m; ++i) {
            if (std::abs(w[i]) > wthr) {
                g[i] = w[i] > 0.0 ? 1.0 : -1.0;
            } else {
                const double warm_g =
                    y_dual.size() == m ? y_dual[i] / spec.lambda : 0.0;
                g[i] = std::clamp(warm_g, -1.0, 1.0);
                if (d_row_sqnorm[i] > 0.0) free_idx.push_back(i);
            }
        }
        Eigen::VectorXd r = v + spec.lambda * (D.transpose() * g);
        for (int sweep = 0; sweep < 200 && !free_idx.empty(); ++sweep) {
            double max_change = 0.0;
            for (int i : free_idx) {
                double dir = 0.0;
                for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator
                         it(D_rows, i);
                     it; ++it)
                    dir += it.value() * r[it.col()];
                const double gi = std::clamp(
                    g[i] - dir / (spec.lambda * d_row_sqnorm[i]), -1.0, 1.0);
                const double delta = gi - g[i];
                if (delta != 0.0) {
                    for (Eigen::SparseMatrix<double,
                                             Eigen::RowMajor>::InnerIterator
                             it(D_rows, i);
                         it; ++it)
                        r[it.col()] += spec.lambda * delta * it.value();
                    g[i] = gi;
                    max_change = std::max(max_change, std::abs(delta));
                }
            }
            if (max_change < 1e-13) break;
        }
        return r.cwiseAbs().maxCoeff();
    }

    Solution solve(const Eigen::VectorXd& e_j, const Eigen::VectorXd& f_j) {
        if (e_j.size() != me || f_j.size() != n)
            throw std::invalid_argument("solve_update: dimension mismatch");

        const Eigen::VectorXd b = e_j + J * f_j;
        const Eigen::VectorXd q =
            J.transpose() * spec.We.gram_apply(b) + spec.Wdf.gram_apply(f_j);
        const double c0 = 0.5 * b.dot(spec.We.gram_apply(b)) +
                          0.5 * f_j.dot(spec.Wdf.gram_apply(f_j));

        Solution sol;
        sol.uniqueness = uniqueness;
        if (uniqueness == Uniqueness::PossiblyNonUnique)
            sol.diagnostics += "non-unique minimizer possible; ";

        if (spec.lambda == 0.0) {
            ensure_gains();
            Eigen::VectorXd f = gains.Q * (f_j + gains.L * e_j);
            f = snap_zeros(f, opts.zero_snap);
            sol.f = f;
            sol.objective = objective_value(f, q, c0);
            sol.kkt_residual = (P * f - q).cwiseAbs().maxCoeff();
            sol.iterations = 0;
            sol.converged = sol.kkt_residual <= opts.kkt_tolerance;
            sol.support = support_of(f);
            return sol;
        }

        return admm(e_j, f_j, q, c0, sol);
    }

    Solution admm(const Eigen::VectorXd&, const Eigen::VectorXd& f_j,
                  const Eigen::VectorXd& q, double c0, Solution sol) {
        // Scale-aware starting penalty: the pinned default rho is treated as
        // dimensionless and multiplied by tr(P)/tr(D'D) so residual
        // balancing starts near parity for both badly and well scaled data.
        if (fact_rho < 0.0) {
            const double tp = P.trace();
            const double td = DtD.trace();
            rho = opts.rho * ((tp > 0.0 && td > 0.0) ? tp / td : 1.0);
        }
        if (!warm) {
            z = D * f_j;
            u = Eigen::VectorXd::Zero(m);
            warm = true;
        }

        Eigen::VectorXd f = f_j;
        double abs_tol = opts.abs_tol;
        double rel_tol = opts.rel_tol;
        const double gamma = opts.over_relaxation;
        const double sqm = std::sqrt(double(m));
        const double sqn = std::sqrt(double(n));

        int iter = 0;
        bool boyd_ok = false;
        double kkt = std::numeric_limits<double>::infinity();
        Eigen::VectorXd f_snap;

        for (int polish = 0; polish < 9 && iter < opts.max_iterations; ++polish) {
            boyd_ok = false;
            while (iter < opts.max_iterations) {
                ++iter;
                ensure_factorization();
                f = fact.solve(q + rho * (D.transpose() * (z - u)));
                const Eigen::VectorXd Df = D * f;
                const Eigen::VectorXd xh = gamma * Df + (1.0 - gamma) * z;
                const Eigen::VectorXd z_old = z;
                z = soft_threshold(xh + u, spec.lambda / rho);
                u += xh - z;

                const double r_norm = (Df - z).norm();
                const double s_norm = rho * (D.transpose() * (z - z_old)).norm();
                const double eps_pri =
                    sqm * abs_tol + rel_tol * std::max(Df.norm(), z.norm());
                const double eps_dual =
                    sqn * abs_tol + rel_tol * (rho * (D.transpose() * u)).norm();
                if (r_norm <= eps_pri && s_norm <= eps_dual) {
                    boyd_ok = true;
                    break;
                }
                if (iter % 5 == 0) {
                    if (r_norm > 10.0 * s_norm && rho < 1e14) {
                        rho *= 2.0;
                        u *= 0.5;
                    } else if (s_norm > 10.0 * r_norm && rho > 1e-14) {
                        rho *= 0.5;
                        u *= 2.0;
                    }
                }
            }
            f_snap = snap_zeros(f, opts.zero_snap);
            kkt = kkt_certificate(f_snap, q, rho * u);
            if (kkt <= opts.kkt_tolerance) break;
            // Certificate still loose: tighten and keep iterating.
            abs_tol *= 0.1;
            rel_tol *= 0.1;
        }

        sol.iterations = iter;
        sol.converged = boyd_ok && kkt <= opts.kkt_tolerance;
        sol.kkt_residual = kkt;

        const double obj_cand = objective_value(f_snap, q, c0);
        const double obj_prev = objective_value(f_j, q, c0);
        if (obj_cand <= obj_prev) {
            sol.f = f_snap;
            sol.objective = obj_cand;
        } else {
            // The no-update candidate is feasible; never return worse.
            sol.f = f_j;
            sol.objective = obj_prev;
            sol.fell_back_to_previous = true;
            sol.kkt_residual = kkt_certificate(f_j, q, rho * u);
            sol.converged = false;
            sol.diagnostics += "kept previous iterate (solver candidate was worse); ";
        }
        sol.support = support_of(sol.f);
        return sol;
    }
};

UpdateSolver::UpdateSolver(CriterionSpec spec, Eigen::MatrixXd J,
                           SolverOptions opts)
    : impl_(std::make_unique<Impl>(std::move(spec), std::move(J), opts)) {}
UpdateSolver::~UpdateSolver() = default;
UpdateSolver::UpdateSolver(UpdateSolver&&) noexcept = default;

Solution UpdateSolver::solve(const Eigen::VectorXd& e_j,
                             const Eigen::VectorXd& f_j) {
    return impl_->solve(e_j, f_j);
}

const CriterionSpec& UpdateSolver::spec() const { return impl_->spec; }
const SolverOptions& UpdateSolver::options() const { return impl_->opts; }

Solution solve_update(const CriterionSpec& spec, const Eigen::MatrixXd& J,
                      const Eigen::VectorXd& e_j, const Eigen::VectorXd& f_j,
                      const SolverOptions& opts) {
    UpdateSolver solver(spec, J, opts);
    return solver.solve(e_j, f_j);
}

Solution solve_fused_via_increments(const CriterionSpec& spec,
                                    const Eigen::MatrixXd& J,
                                    const Eigen::VectorXd& e_j,
                                    const Eigen::VectorXd& f_j,
                                    const SolverOptions& opts) {
    if (spec.d_kind != criterion::DKind::Fused)
        throw std::invalid_argument(
            "solve_fused_via_increments: requires a fused penalty spec");
    if (!spec.Wf.is_zero() || !spec.Wdf.is_zero())
        throw std::invalid_argument(
            "solve_fused_via_increments: W_f and W_df must be zero (they do "
            "not commute with the increment substitution)");
    const int n = static_cast<int>(J.cols());
    if (f_j.size() != n || e_j.size() != J.rows())
        throw std::invalid_argument("solve_fused_via_increments: dimension mismatch");

    // J * cumsum built by reverse-accumulating columns.
    Eigen::MatrixXd Ji(J.rows(), n);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(J.rows());
    for (int k = n - 1; k >= 0; --k) {
        acc += J.col(k);
        Ji.col(k) = acc;
    }

    Eigen::VectorXd x_j(n);
    x_j[0] = f_j[0];
    for (int i = 1; i < n; ++i) x_j[i] = f_j[i] - f_j[i - 1];

    CriterionSpec inner;
    inner.We = spec.We;
    inner.lambda = spec.lambda;
    inner.d_kind = criterion::DKind::Identity;

    Solution sol = solve_update(inner, Ji, e_j, x_j, opts);
    Eigen::VectorXd f = snap_zeros(criterion::cumulative_sum(sol.f), opts.zero_snap);

    Solution out = sol;
    out.f = f;
    out.support = support_of(f);
    const Eigen::MatrixXd Dinc =
        Eigen::MatrixXd(criterion::build_incremental_map(n));
    CriterionSpec reported = spec;
    reported.d_kind = criterion::DKind::Custom;
    reported.d_custom = Dinc;
    out.objective = criterion::evaluate_criterion(reported, e_j, f_j, f, J);
    out.diagnostics += "solved in increment variables (identity-penalty "
                       "certificate); ";
    return out;
}

Solution debias(const Solution& sol, const CriterionSpec& spec,
                const Eigen::MatrixXd& J, const Eigen::VectorXd& e_j,
                const Eigen::VectorXd& f_j, const SolverOptions& opts) {
    opts.validate();
    const int n = static_cast<int>(J.cols());
    spec.validate(n);
    if (sol.f.size() != n || f_j.size() != n || e_j.size() != J.rows())
        throw std::invalid_argument("debias: dimension mismatch");

    Eigen::MatrixXd P = spec.We.gram_quadratic(J);
    spec.Wf.add_gram(P);
    spec.Wdf.add_gram(P);
    const Eigen::VectorXd b = e_j + J * f_j;
    const Eigen::VectorXd q =
        J.transpose() * spec.We.gram_apply(b) + spec.Wdf.gram_apply(f_j);
    const double c0 = 0.5 * b.dot(spec.We.gram_apply(b)) +
                      0.5 * f_j.dot(spec.Wdf.gram_apply(f_j));
    const auto smooth = [&](const Eigen::VectorXd& f) {
        return 0.5 * f.dot(P * f) - q.dot(f) + c0;
    };

    // Segment structure: singleton support for the identity penalty,
    // constancy segments of f otherwise.  Zero segments stay fixed at zero.
    std::vector<std::pair<int, int>> segments;  // [first, last]
    if (spec.d_kind == criterion::DKind::Identity) {
        for (int i = 0; i < n; ++i)
            if (sol.f[i] != 0.0) segments.push_back({i, i});
    } else {
        Eigen::VectorXd w(n > 1 ? n - 1 : 0);
        for (int i = 0; i + 1 < n; ++i) w[i] = sol.f[i + 1] - sol.f[i];
        const double wthr = opts.zero_snap *
            std::max(1.0, w.size() ? w.cwiseAbs().maxCoeff() : 0.0);
        const double fthr = opts.zero_snap *
            std::max(1.0, sol.f.cwiseAbs().maxCoeff());
        int start = 0;
        for (int i = 0; i < n; ++i) {
            const bool boundary = (i + 1 >= n) || std::abs(w[i]) > wthr;
            if (boundary) {
                const double peak =
                    sol.f.segment(start, i - start + 1).cwiseAbs().maxCoeff();
                if (peak > fthr) segments.push_back({start, i});
                start = i + 1;
            }
        }
    }

    Solution out = sol;
    out.diagnostics += "debias over " + std::to_string(segments.size())
                     + " segment(s); ";

    Eigen::VectorXd f_new = Eigen::VectorXd::Zero(n);
    if (!segments.empty()) {
        const int k = static_cast<int>(segments.size());
        Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, k);
        for (int s = 0; s < k; ++s)
            for (int i = segments[s].first; i <= segments[s].second; ++i)
                B(i, s) = 1.0;
        const Eigen::MatrixXd Pb = B.transpose() * P * B;
        const Eigen::VectorXd qb = B.transpose() * q;
        Eigen::LDLT<Eigen::MatrixXd> fact(Pb);
        Eigen::VectorXd uvals;
        if (ldlt_nonsingular(fact, nullptr, nullptr)) {
            uvals = fact.solve(qb);
        } else {
            // Rank-deficient restriction: take the minimal-norm stationary
            // point and say so.
            uvals = Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(Pb)
                        .solve(qb);
            out.diagnostics += "restricted problem rank-deficient, "
                               "minimal-norm solution; ";
        }
        f_new = B * uvals;
    }

    if (smooth(f_new) <= smooth(sol.f)) {
        out.f = f_new;
    } else {
        out.diagnostics += "restricted re-solve did not improve, kept input; ";
    }
    out.support = support_of(out.f);
    out.objective = criterion::evaluate_criterion(spec, e_j, f_j, out.f, J);
    // Stationarity of the restricted smooth problem, not of the l1 problem.
    {
        Eigen::VectorXd grad = P * out.f - q;
        double res = 0.0;
        for (const auto& seg : segments) {
            double acc = 0.0;
            for (int i = seg.first; i <= seg.second; ++i) acc += grad[i];
            res = std::max(res, std::abs(acc));
        }
        out.kkt_residual = res;
    }
    return out;
}

Solution solve_constrained_l1(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                              const Eigen::MatrixXd& M, double t,
                              const SolverOptions& opts) {
    opts.validate();
    if (A.rows() != b.size())
        throw std::invalid_argument("solve_constrained_l1: A/b row mismatch");
    if (M.cols() != A.cols())
        throw std::invalid_argument("solve_constrained_l1: M column mismatch");
    if (!(t >= 0.0))
        throw std::invalid_argument("solve_constrained_l1: t must be >= 0");
    const int n = static_cast<int>(A.cols());

    const auto quad = [&](const Eigen::VectorXd& x) {
        return 0.5 * (b - A * x).squaredNorm();
    };

    // Feasibility floor: the unconstrained least-squares value.
    const Eigen::VectorXd x_ls =
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(A).solve(b);
    const double v_min = quad(x_ls);
    const double t_slack = 1e-6;
    if (t < v_min * (1.0 - t_slack) - 1e-300) {
        std::ostringstream os;
        os << "solve_constrained_l1: infeasible level t = " << t
           << "; minimum achievable quadratic value is " << v_min;
        throw std::invalid_argument(os.str());
    }

    CriterionSpec inner;
    inner.We = WeightSpec::scaled(1.0);
    inner.lambda = 1.0;  // placeholder, varied by bisection
    inner.d_kind = criterion::DKind::Custom;
    inner.d_custom = M;

    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n);

    Solution best;
    best.f = snap_zeros(x_ls, opts.zero_snap);
    best.lambda_used = 0.0;
    best.converged = true;
    best.kkt_residual =
        (A.transpose() * (A * best.f - b)).cwiseAbs().maxCoeff();
    best.support = support_of(best.f);
    double best_l1 = (M * best.f).lpNorm<1>();
    best.objective = best_l1;

    if (t <= v_min * (1.0 + t_slack)) {
        best.diagnostics = "t at the unconstrained minimum; least-squares solution";
        return best;
    }

    double lam_max = (A.transpose() * b).cwiseAbs().maxCoeff() * (1.0 + 1e-3);
    if (lam_max <= 0.0) lam_max = 1.0;

    double lo = 0.0, hi = lam_max;
    Solution inner_sol;
    const auto solve_at = [&](double lam) {
        CriterionSpec s = inner;
        s.lambda = lam;
        return solve_update(s, A, b, x0, opts);
    };

    // Make sure the bracket top is on the infeasible side for general M;
    // with an identity-like M the classic lam_max bound already is.
    inner_sol = solve_at(hi);
    double phi_hi = quad(inner_sol.f);
    int expand = 0;
    while (phi_hi < t && expand < 40) {
        const double l1 = (M * inner_sol.f).lpNorm<1>();
        if (l1 <= best_l1) {
            best = inner_sol;
            best.lambda_used = hi;
            best_l1 = l1;
        }
        if (l1 == 0.0) break;  // l1 floor reached, constraint slack
        hi *= 2.0;
        inner_sol = solve_at(hi);
        phi_hi = quad(inner_sol.f);
        ++expand;
    }
    if (phi_hi < t) {
        best.diagnostics = "constraint inactive at the l1 floor";
        best.objective = best_l1;
        return best;
    }

    for (int it = 0; it < 60; ++it) {
        const double lam = 0.5 * (lo + hi);
        inner_sol = solve_at(lam);
        const double phi = quad(inner_sol.f);
        if (phi <= t * (1.0 + t_slack)) {
            const double l1 = (M * inner_sol.f).lpNorm<1>();
            if (l1 < best_l1 || (l1 == best_l1 && lam > best.lambda_used)) {
                best = inner_sol;
                best.lambda_used = lam;
                best_l1 = l1;
            }
        }
        if (phi <= t)
            lo = lam;
        else
            hi = lam;
        if (hi - lo <= 1e-12 * lam_max) break;
    }

    best.objective = best_l1;
    best.f = snap_zeros(best.f, opts.zero_snap);
    best.support = support_of(best.f);
    return best;
}

}  // namespace silc::solvers
