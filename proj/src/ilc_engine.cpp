#include "ilc_engine.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace silc::engine {

namespace {

constexpr double kPi = 3.14159265358979323846;

int count_nonzero(const Eigen::VectorXd& v) {
    int c = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (v[i] != 0.0) ++c;
    return c;
}

int count_difference_nonzero(const Eigen::VectorXd& f, double snap) {
    if (f.size() < 2) return 0;
    Eigen::VectorXd d(f.size() - 1);
    for (Eigen::Index i = 0; i + 1 < f.size(); ++i) d[i] = f[i + 1] - f[i];
    const double thr = snap * std::max(1.0, d.cwiseAbs().maxCoeff());
    int c = 0;
    for (Eigen::Index i = 0; i < d.size(); ++i)
        if (std::abs(d[i]) > thr) ++c;
    return c;
}

Eigen::VectorXd apply_true_plant(const PlantSetup& plant,
                                 const Eigen::VectorXd& f) {
    if (std::holds_alternative<lti::TransferFunction>(plant.J_true))
        return lti::simulate(std::get<lti::TransferFunction>(plant.J_true), f);
    return std::get<Eigen::MatrixXd>(plant.J_true) * f;
}

}  // namespace

std::vector<std::string> PlantSetup::validate() const {
    std::vector<std::string> warnings;
    if (r.size() == 0 || !r.allFinite())
        throw std::invalid_argument("plant: reference must be non-empty and finite");
    if (!(sample_period > 0.0))
        throw std::invalid_argument("plant: sample_period must be positive");
    if (!(lambda_e >= 0.0))
        throw std::invalid_argument("plant: lambda_e must be >= 0");

    if (std::holds_alternative<lti::TransferFunction>(J_true)) {
        const auto& tf = std::get<lti::TransferFunction>(J_true);
        if (!lti::is_stable(tf))
            throw std::invalid_argument("plant: true closed-loop map is unstable");
    } else {
        const auto& m = std::get<Eigen::MatrixXd>(J_true);
        if (m.rows() != r.size() || m.cols() != r.size())
            throw std::invalid_argument("plant: lifted true map must be N x N");
    }
    if (J_model.size() != 0 &&
        (J_model.rows() != r.size() || J_model.cols() != r.size()))
        throw std::invalid_argument("plant: lifted model must be N x N");

    if (lambda_e > 0.0) {
        if (H.num.size() == 0 || std::abs(H.num[0] - 1.0) > 1e-12)
            throw std::invalid_argument(
                "plant: noise filter must be monic (leading coefficients 1)");
        for (const auto& pole : lti::poles(H))
            if (std::abs(pole) > 1.0 + 1e-9)
                throw std::invalid_argument("plant: noise filter is unstable");
        bool boundary = false;
        for (const auto& pole : lti::poles(H))
            if (std::abs(pole) > 1.0 - 1e-9) boundary = true;
        for (const auto& zero : lti::zeros(H))
            if (std::abs(zero) > 1.0 - 1e-9) boundary = true;
        if (boundary)
            warnings.push_back(
                "noise filter is not strictly bistable (pole or zero on or "
                "near the unit circle); stationarity analysis is approximate");
    }
    return warnings;
}

void RunConfig::validate() const {
    if (n_trials < 1)
        throw std::invalid_argument("run: n_trials must be >= 1");
    if (n_iter > 0) {
        if (n_conv < 0 || n_conv + n_iter > n_trials)
            throw std::invalid_argument(
                "run: averaging window n_conv + n_iter exceeds n_trials");
    }
}

Eigen::VectorXd run_trial(const PlantSetup& plant, const Eigen::VectorXd& f_j,
                          rng::Stream& stream, bool noise_on) {
    const int n = plant.n();
    if (f_j.size() != n)
        throw std::invalid_argument("run_trial: command length mismatch");
    Eigen::VectorXd e = plant.r - apply_true_plant(plant, f_j);
    if (noise_on && plant.lambda_e > 0.0) {
        const double sd = std::sqrt(plant.lambda_e);
        Eigen::VectorXd noise(n);
        for (int i = 0; i < n; ++i) noise[i] = sd * stream.next_normal();
        e -= lti::simulate(plant.H, noise);
    }
    return e;
}

Eigen::VectorXd explicit_update(const solvers::ExplicitGains& gains,
                                const Eigen::VectorXd& f_j,
                                const Eigen::VectorXd& e_j, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::invalid_argument("explicit_update: alpha must be in (0, 1]");
    if (gains.L.cols() != e_j.size() || gains.Q.cols() != f_j.size() ||
        gains.L.rows() != f_j.size() || gains.Q.rows() != f_j.size())
        throw std::invalid_argument("explicit_update: gain dimension mismatch");
    return gains.Q * (f_j + alpha * (gains.L * e_j));
}

namespace {

struct BasisWorkspace {
    Eigen::MatrixXd Jpsi;
    Eigen::MatrixXd eye;
};

// Stacks the weighted residual blocks of the criterion restricted to
// f = Psi theta, predicting the next error from the current one.
void assemble_basis_system(const IlcAlgorithm& algo, const PlantSetup& plant,
                           const BasisWorkspace& ws, const Eigen::VectorXd& e_j,
                           const Eigen::VectorXd& theta_j, Eigen::MatrixXd& A,
                           Eigen::VectorXd& b) {
    const auto& crit = algo.crit;
    std::vector<Eigen::MatrixXd> blocks;
    std::vector<Eigen::VectorXd> rhs;
    if (!crit.We.is_zero()) {
        blocks.push_back(crit.We.apply_mat(ws.Jpsi));
        rhs.push_back(crit.We.apply(e_j + ws.Jpsi * theta_j));
    }
    if (!crit.Wf.is_zero()) {
        blocks.push_back(crit.Wf.apply_mat(algo.psi));
        rhs.push_back(Eigen::VectorXd::Zero(blocks.back().rows()));
    }
    if (!crit.Wdf.is_zero()) {
        blocks.push_back(crit.Wdf.apply_mat(algo.psi));
        rhs.push_back(crit.Wdf.apply(algo.psi * theta_j));
    }
    if (blocks.empty())
        throw std::invalid_argument("basis variant: all weights are zero");
    (void)plant;

    Eigen::Index rows = 0;
    for (const auto& blk : blocks) rows += blk.rows();
    A.resize(rows, algo.psi.cols());
    b.resize(rows);
    Eigen::Index at = 0;
    for (size_t k = 0; k < blocks.size(); ++k) {
        A.middleRows(at, blocks[k].rows()) = blocks[k];
        b.segment(at, blocks[k].rows()) = rhs[k];
        at += blocks[k].rows();
    }
}

}  // namespace

RunResult run_ilc(const PlantSetup& plant, const IlcAlgorithm& algo,
                  const RunConfig& run) {
    RunResult result;
    result.warnings = plant.validate();
    run.validate();
    const int n = plant.n();

    std::unique_ptr<solvers::UpdateSolver> solver;
    BasisWorkspace basis_ws;
    int n_theta = 0;

    switch (algo.kind) {
        case IlcAlgorithm::Kind::Explicit:
            if (!(algo.alpha > 0.0 && algo.alpha <= 1.0))
                throw std::invalid_argument("run_ilc: alpha must be in (0, 1]");
            if (algo.gains.L.rows() != n || algo.gains.Q.rows() != n)
                throw std::invalid_argument("run_ilc: gains must be N x N");
            break;
        case IlcAlgorithm::Kind::Optimization:
            if (plant.J_model.size() == 0)
                throw std::invalid_argument(
                    "run_ilc: optimization variant needs a lifted model");
            if (!algo.fused_via_increments)
                solver = std::make_unique<solvers::UpdateSolver>(
                    algo.crit, plant.J_model, algo.solver);
            break;
        case IlcAlgorithm::Kind::Basis:
            if (plant.J_model.size() == 0)
                throw std::invalid_argument(
                    "run_ilc: basis variant needs a lifted model");
            if (algo.psi.rows() != n || algo.psi.cols() < 1)
                throw std::invalid_argument(
                    "run_ilc: basis must have N rows and >= 1 column");
            if (!(algo.t_multiplier >= 1.0))
                throw std::invalid_argument(
                    "run_ilc: t_multiplier must be >= 1");
            n_theta = static_cast<int>(algo.psi.cols());
            basis_ws.Jpsi = plant.J_model * algo.psi;
            basis_ws.eye = Eigen::MatrixXd::Identity(n_theta, n_theta);
            break;
    }

    Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(n_theta);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    bool nonconvergence_warned = false;

    result.records.reserve(run.n_trials);
    for (int j = 0; j < run.n_trials; ++j) {
        rng::Stream stream(run.seed, static_cast<std::uint64_t>(j));
        const Eigen::VectorXd e = run_trial(plant, f, stream, run.noise);

        TrialRecord rec;
        rec.trial = j;
        rec.f = f;
        rec.e = e;
        rec.e_norm2 = e.norm();
        rec.f_card = count_nonzero(f);
        rec.df_card = count_difference_nonzero(f, algo.solver.zero_snap);
        rec.objective = nan;
        if (algo.kind == IlcAlgorithm::Kind::Basis) rec.theta = theta;

        if (j + 1 < run.n_trials) {
            const auto t0 = std::chrono::steady_clock::now();
            switch (algo.kind) {
                case IlcAlgorithm::Kind::Explicit:
                    f = explicit_update(algo.gains, f, e, algo.alpha);
                    break;
                case IlcAlgorithm::Kind::Optimization: {
                    solvers::Solution sol =
                        algo.fused_via_increments
                            ? solvers::solve_fused_via_increments(
                                  algo.crit, plant.J_model, e, f, algo.solver)
                            : solver->solve(e, f);
                    if (algo.debias)
                        sol = solvers::debias(sol, algo.crit, plant.J_model, e,
                                              f, algo.solver);
                    f = sol.f;
                    rec.objective = sol.objective;
                    rec.converged = sol.converged;
                    if (!sol.converged && !nonconvergence_warned) {
                        std::ostringstream os;
                        os << "trial " << j << ": solver did not converge "
                           << "(kkt residual " << sol.kkt_residual << ")";
                        result.warnings.push_back(os.str());
                        nonconvergence_warned = true;
                    }
                    break;
                }
                case IlcAlgorithm::Kind::Basis: {
                    Eigen::MatrixXd A;
                    Eigen::VectorXd b;
                    assemble_basis_system(algo, plant, basis_ws, e, theta, A, b);
                    const Eigen::VectorXd theta_ls =
                        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(A)
                            .solve(b);
                    const double v_min = 0.5 * (b - A * theta_ls).squaredNorm();
                    const solvers::Solution sol = solvers::solve_constrained_l1(
                        A, b, basis_ws.eye, algo.t_multiplier * v_min,
                        algo.solver);
                    theta = sol.f;
                    f = algo.psi * theta;
                    rec.objective = sol.objective;
                    rec.converged = sol.converged;
                    break;
                }
            }
            rec.wall_ms =
                std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
        }
        result.records.push_back(std::move(rec));
    }
    return result;
}

Eigen::VectorXd estimate_e_inf(const std::vector<TrialRecord>& records,
                               int n_conv, int n_iter) {
    if (n_iter < 1 || n_conv < 0 ||
        static_cast<size_t>(n_conv + n_iter) > records.size())
        throw std::invalid_argument("estimate_e_inf: window exceeds records");
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(records[n_conv].e.size());
    for (int j = n_conv; j < n_conv + n_iter; ++j) acc += records[j].e;
    return acc / n_iter;
}

double trial_varying_norm(const Eigen::VectorXd& e_j,
                          const Eigen::VectorXd& e_inf) {
    if (e_j.size() != e_inf.size())
        throw std::invalid_argument("trial_varying_norm: length mismatch");
    return (e_j - e_inf).norm();
}

double lifted_contraction(const solvers::ExplicitGains& gains,
                          const Eigen::MatrixXd& J) {
    const Eigen::MatrixXd M =
        gains.Q * (Eigen::MatrixXd::Identity(J.rows(), J.cols()) - gains.L * J);
    return Eigen::BDCSVD<Eigen::MatrixXd>(M).singularValues()(0);
}

Eigen::VectorXd build_reference(const ReferenceProfile& p) {
    if (!(p.distance >= 0.0))
        throw std::invalid_argument("reference: distance must be >= 0");
    if (!(p.max_velocity > 0.0) || !(p.max_acceleration > 0.0) ||
        !(p.sample_period > 0.0) || p.n < 1)
        throw std::invalid_argument("reference: kinematic limits must be positive");
    Eigen::VectorXd r = Eigen::VectorXd::Zero(p.n);
    if (p.distance == 0.0) return r;

    double t_acc = p.max_velocity / p.max_acceleration;
    double v_peak = p.max_velocity;
    double t_cruise = (p.distance - v_peak * t_acc) / v_peak;
    if (t_cruise < 0.0) {  // triangular profile, max velocity never reached
        t_acc = std::sqrt(p.distance / p.max_acceleration);
        v_peak = p.max_acceleration * t_acc;
        t_cruise = 0.0;
    }
    const double t1 = t_acc;
    const double t2 = t_acc + t_cruise;
    const double t3 = t2 + t_acc;
    if (t3 > (p.n - 1) * p.sample_period)
        throw std::invalid_argument(
            "reference: move does not finish within the task window");

    const double a = p.max_acceleration;
    for (int k = 0; k < p.n; ++k) {
        const double t = k * p.sample_period;
        if (t < t1)
            r[k] = 0.5 * a * t * t;
        else if (t < t2)
            r[k] = 0.5 * a * t1 * t1 + v_peak * (t - t1);
        else if (t < t3)
            r[k] = p.distance - 0.5 * a * (t3 - t) * (t3 - t);
        else
            r[k] = p.distance;
    }
    return r;
}

BasisSet build_basis(const Eigen::VectorXd& r, const std::vector<int>& orders) {
    const int n = static_cast<int>(r.size());
    if (orders.empty())
        throw std::invalid_argument("build_basis: need at least one order");
    BasisSet basis;
    basis.orders = orders;
    basis.psi.resize(n, static_cast<Eigen::Index>(orders.size()));
    basis.scale.resize(static_cast<Eigen::Index>(orders.size()));

    for (size_t c = 0; c < orders.size(); ++c) {
        const int k = orders[c];
        if (k < 1 || k > 8 || k >= n)
            throw std::invalid_argument(
                "build_basis: orders must lie in 1..8 and below the task length");
        Eigen::VectorXd cur = r;
        for (int pass = 0; pass < k; ++pass) {
            Eigen::VectorXd next(cur.size() - 1);
            for (Eigen::Index i = 0; i + 1 < cur.size(); ++i)
                next[i] = cur[i + 1] - cur[i];
            cur = next;
        }
        Eigen::VectorXd col = Eigen::VectorXd::Zero(n);
        col.tail(n - k) = cur;
        const double peak = col.cwiseAbs().maxCoeff();
        if (peak == 0.0) {
            basis.degenerate = true;
            basis.scale[static_cast<Eigen::Index>(c)] = 1.0;
        } else {
            basis.scale[static_cast<Eigen::Index>(c)] = peak;
            col /= peak;
        }
        basis.psi.col(static_cast<Eigen::Index>(c)) = col;
    }
    return basis;
}

SurrogateModel make_surrogate(const SurrogateParams& params) {
    const double ts = params.sample_period;
    const double zr = params.numerator_zero;

    // Rigid body: k (z + zr)/(z - 1)^2, gain matched to the 1/(m s^2) line.
    const double k_rb = ts * ts / (params.mass * (1.0 + zr));
    Eigen::VectorXd num_rb(3), den_rb(3);
    num_rb << 0.0, k_rb, k_rb * zr;
    den_rb << 1.0, -2.0, 1.0;

    // One lightly damped mode with DC weight 1/(modal_mass * wr^2).
    const double wr = 2.0 * kPi * params.resonance_hz;
    const double zeta = params.resonance_damping;
    const double p = std::exp(-zeta * wr * ts);
    const double th = wr * std::sqrt(1.0 - zeta * zeta) * ts;
    const double den_fx_dc = 1.0 - 2.0 * p * std::cos(th) + p * p;
    const double k_fx =
        den_fx_dc / (params.modal_mass * wr * wr * (1.0 + zr));
    Eigen::VectorXd num_fx(3), den_fx(3);
    num_fx << 0.0, k_fx, k_fx * zr;
    den_fx << 1.0, -2.0 * p * std::cos(th), p * p;

    const Eigen::VectorXd num_g = lti::poly_add(lti::poly_mul(num_rb, den_fx),
                                                lti::poly_mul(num_fx, den_rb));
    const Eigen::VectorXd den_g = lti::poly_mul(den_rb, den_fx);
    lti::TransferFunction G(num_g, den_g, ts);

    const auto zmap = [&](double hz) { return std::exp(-2.0 * kPi * hz * ts); };
    Eigen::VectorXd lead_num(2), lead_den(2), lag_num(2), lag_den(2);
    lead_num << 1.0, -zmap(params.lead_zero_hz);
    lead_den << 1.0, -zmap(params.lead_pole_hz);
    lag_num << 1.0, -zmap(params.lag_zero_hz);
    lag_den << 1.0, -zmap(params.lag_pole_hz);
    lti::TransferFunction C0(lti::poly_mul(lead_num, lag_num),
                             lti::poly_mul(lead_den, lag_den), ts);

    Eigen::VectorXd w_cross(1);
    w_cross << 2.0 * kPi * params.crossover_hz * ts;
    const std::complex<double> loop0 =
        lti::frequency_response(G, w_cross).value[0] *
        lti::frequency_response(C0, w_cross).value[0];
    const double k_c = 1.0 / std::abs(loop0);

    SurrogateModel model;
    model.G = G;
    model.C = lti::series(lti::gain_tf(k_c, ts), C0);
    model.controller_gain = k_c;
    const lti::ClosedLoop loop = lti::feedback_connect(G, model.C);
    if (!loop.stable)
        throw std::logic_error("surrogate: closed loop is unstable");
    model.S = loop.S;
    model.J = loop.J;
    return model;
}

}  // namespace silc::engine
