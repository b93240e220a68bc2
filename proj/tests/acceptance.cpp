// Acceptance gate: one pass/fail line per criterion, exit code counts
// the failures.  Each criterion runs the public library or the installed
// command line end to end; nothing here reaches into internals.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "analysis.hpp"
#include "config.hpp"
#include "criterion.hpp"
#include "csv.hpp"
#include "experiment.hpp"
#include "ilc_engine.hpp"
#include "lti_core.hpp"
#include "rng.hpp"
#include "solvers.hpp"

#include "oracles.hpp"

#ifndef SILC_CLI_PATH
#define SILC_CLI_PATH ""
#endif

namespace {

using namespace silc;
namespace fs = std::filesystem;

constexpr double kPi = 3.14159265358979323846;
constexpr double kBandLo = 0.05 * kPi;
constexpr double kBandHi = 0.95 * kPi;
constexpr int kSkipBins = 2;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

Eigen::VectorXd vec(std::initializer_list<double> values) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) v[i++] = x;
    return v;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "silc_acceptance" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// Drops the final comma-separated field of every line (the wall-time
// column of trials.csv).
std::string without_last_column(const std::string& text) {
    std::istringstream in(text);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        const std::size_t cut = line.rfind(',');
        out << (cut == std::string::npos ? line : line.substr(0, cut)) << '\n';
    }
    return out.str();
}

int run_cli(const std::string& args) {
    const std::string exe = SILC_CLI_PATH;
    if (exe.empty() || !fs::exists(exe)) return -1;
    const std::string cmd = "\"" + exe + "\" " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    if (rc == -1) return -1;
    if (WIFEXITED(rc)) return WEXITSTATUS(rc);
    return -1;
}

config::ExperimentConfig surrogate_config(int n) {
    config::ExperimentConfig cfg;
    cfg.task.n = n;
    cfg.run.noise = false;
    cfg.output.plots = false;
    return cfg;
}

struct RunOutput {
    experiment::BuiltSystem sys;
    engine::RunResult run;
};

RunOutput run_configured(config::ExperimentConfig cfg, int n_trials,
                         std::uint64_t seed, bool noise, int n_conv,
                         int n_iter) {
    cfg.run.n_trials = n_trials;
    cfg.run.noise = noise;
    cfg.run.seed = seed;
    cfg.run.seed_set = true;
    cfg.run.n_conv = n_conv;
    cfg.run.n_iter = n_iter;
    RunOutput out;
    out.sys = experiment::build_system(cfg);
    engine::RunConfig rc;
    rc.n_trials = n_trials;
    rc.seed = seed;
    rc.noise = noise;
    rc.n_conv = n_conv;
    rc.n_iter = n_iter;
    out.run = engine::run_ilc(out.sys.plant, out.sys.algo, rc);
    return out;
}

// Band-averaged ratio of the measured trial-varying error spectrum to the
// theoretical disturbance density over the averaging window.
double residual_band_ratio(const RunOutput& out, double lambda_e, int n_conv,
                           int n_iter) {
    const auto& records = out.run.records;
    const Eigen::VectorXd e_inf =
        engine::estimate_e_inf(records, n_conv, n_iter);
    std::vector<Eigen::VectorXd> residuals;
    residuals.reserve(static_cast<std::size_t>(n_iter));
    for (int j = n_conv; j < n_conv + n_iter; ++j)
        residuals.push_back(records[static_cast<std::size_t>(j)].e - e_inf);
    const analysis::SpectrumEstimate measured =
        analysis::estimate_spectrum(residuals);
    const analysis::SpectrumEstimate theory =
        analysis::theoretical_phi_v(out.sys.H, lambda_e, measured.omega);
    return analysis::band_average_ratio(measured, theory, kSkipBins, kBandLo,
                                        kBandHi);
}

// 1. Trial-varying noise is amplified by a factor two in the limit error
//    of inverse-model learning with unit gain.
std::string criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();
    config::ExperimentConfig cfg = surrogate_config(2048);
    cfg.plant.lambda_e = 1.5e-7;
    cfg.algorithm.variant = config::Variant::InverseModel;
    cfg.algorithm.alpha = 1.0;
    const RunOutput out = run_configured(cfg, 140, 424201, true, 40, 100);
    const double ratio = residual_band_ratio(out, cfg.plant.lambda_e, 40, 100);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    if (!(ratio >= 1.7 && ratio <= 2.3))
        return "band-averaged ratio " + fmt(ratio) + " outside [1.7, 2.3]";
    if (!(seconds < 60.0))
        return "runtime " + fmt(seconds) + " s exceeds the 60 s target";
    return {};
}

// 2. Reducing the learning gain trades convergence speed for a smaller
//    amplification factor.
std::string criterion_2() {
    config::ExperimentConfig cfg = surrogate_config(2048);
    cfg.plant.lambda_e = 1.5e-7;
    cfg.algorithm.variant = config::Variant::InverseModel;
    cfg.algorithm.alpha = 0.2;
    const RunOutput out = run_configured(cfg, 140, 424202, true, 40, 100);
    const double ratio = residual_band_ratio(out, cfg.plant.lambda_e, 40, 100);
    const double expected = analysis::noise_amplification(0.2).exact;
    const double rel = std::abs(ratio / expected - 1.0);
    if (!(rel <= 0.10))
        return "ratio " + fmt(ratio) + " deviates " + fmt(100.0 * rel) +
               "% from the predicted " + fmt(expected);
    return {};
}

// 3. A gain-mismatched model contracts the input error at the predicted
//    per-trial rate and the frequency-domain verdict agrees.
std::string criterion_3() {
    config::ExperimentConfig cfg = surrogate_config(512);
    cfg.plant.model_gain = 0.7;
    cfg.algorithm.variant = config::Variant::InverseModel;
    cfg.algorithm.alpha = 1.0;
    const RunOutput out = run_configured(cfg, 12, 1, false, 0, 0);
    const auto& records = out.run.records;
    // Unit-gain loop shifted by the mismatch: the fixed point solves
    // J f = r, and the lifted learning matrix is 0.7 * J^{-1}.
    const Eigen::VectorXd f_inf =
        out.sys.algo.gains.L * records[0].e / cfg.plant.model_gain;
    for (int j = 2; j <= 10; ++j) {
        const double den =
            (records[static_cast<std::size_t>(j)].f - f_inf).norm();
        const double num =
            (records[static_cast<std::size_t>(j + 1)].f - f_inf).norm();
        if (!(den > 0.0))
            return "trial " + std::to_string(j) + " already at the fixed point";
        const double rho = num / den;
        if (!(rho <= 0.35))
            return "trial " + std::to_string(j) + " contraction " + fmt(rho) +
                   " exceeds 0.35";
    }
    const Eigen::VectorXd grid = lti::default_grid();
    const Eigen::VectorXcd Jw = lti::frequency_response(out.sys.J, grid).value;
    const analysis::FrequencyGains fg = analysis::inverse_model_frequency_gains(
        Jw, cfg.algorithm.alpha * cfg.plant.model_gain);
    const analysis::ConvergenceReport rep =
        analysis::convergence_factor(fg.Q, fg.L, Jw, grid);
    if (rep.verdict != analysis::Verdict::Converges)
        return std::string("frequency-domain verdict ") +
               analysis::verdict_name(rep.verdict) + " (factor " +
               fmt(rep.factor) + ")";
    return {};
}

// 4. The optimization path at lambda = 0 reproduces the closed-form
//    explicit update trial by trial.
std::string criterion_4() {
    config::ExperimentConfig opt = surrogate_config(512);
    opt.algorithm.variant = config::Variant::Optimization;
    opt.algorithm.we = 1.0;
    opt.algorithm.wdf = 1e-5;
    opt.algorithm.lambda = 0.0;
    config::ExperimentConfig expl = surrogate_config(512);
    expl.algorithm.variant = config::Variant::NormOptimal;
    expl.algorithm.we = 1.0;
    expl.algorithm.wdf = 1e-5;
    const RunOutput a = run_configured(opt, 6, 1, false, 0, 0);
    const RunOutput b = run_configured(expl, 6, 1, false, 0, 0);
    for (int j = 1; j <= 5; ++j) {
        const Eigen::VectorXd& fa = a.run.records[static_cast<std::size_t>(j)].f;
        const Eigen::VectorXd& fb = b.run.records[static_cast<std::size_t>(j)].f;
        const double scale = fb.norm();
        if (!(scale > 0.0)) return "explicit update produced a zero input";
        const double rel = (fa - fb).norm() / scale;
        if (!(rel <= 1e-8))
            return "trial " + std::to_string(j) + " relative difference " +
                   fmt(rel);
    }
    return {};
}

// 5. The l1 weight interpolates between the unregularized update and the
//    all-zero input at the closed-form threshold.
std::string criterion_5() {
    config::ExperimentConfig cfg = surrogate_config(512);
    cfg.algorithm.variant = config::Variant::NormOptimal;
    cfg.algorithm.we = 1.0;
    cfg.algorithm.wdf = 1e-3;
    const experiment::BuiltSystem sys = experiment::build_system(cfg);
    const Eigen::MatrixXd& J = sys.plant.J_model;
    const Eigen::VectorXd& e0 = sys.plant.r;
    const Eigen::VectorXd f0 = Eigen::VectorXd::Zero(e0.size());
    const double lambda_max = solvers::lasso_lambda_max(
        J, criterion::WeightSpec::scaled(1.0), e0, f0);
    if (!(lambda_max > 0.0)) return "degenerate threshold " + fmt(lambda_max);
    const Eigen::VectorXd f_no =
        sys.algo.gains.Q * (sys.algo.gains.L * e0);

    criterion::CriterionSpec spec;
    spec.We = criterion::WeightSpec::scaled(1.0);
    spec.Wdf = criterion::WeightSpec::scaled(1e-3);
    spec.d_kind = criterion::DKind::Identity;
    solvers::SolverOptions opts;
    opts.max_iterations = 200000;
    // The lifted gains put the gradient scale near 1e-6; the certificate
    // must sit well below it for a 1e-4 relative comparison.
    opts.kkt_tolerance = 1e-12;

    spec.lambda = 1e-10 * lambda_max;
    const solvers::Solution low = solvers::solve_update(spec, J, e0, f0, opts);
    if (!low.converged)
        return "small-lambda solve stalled at KKT " + fmt(low.kkt_residual);
    const double rel = (low.f - f_no).norm() / f_no.norm();
    if (!(rel <= 1e-4))
        return "small-lambda relative gap " + fmt(rel) + " exceeds 1e-4";

    spec.lambda = 1.01 * lambda_max;
    const solvers::Solution high = solvers::solve_update(spec, J, e0, f0, opts);
    if (!high.f.isZero(0.0))
        return "above-threshold solution keeps " +
               std::to_string(high.support.size()) + " active samples";
    return {};
}

// 6. The solver matches an exhaustive grid search on tiny instances and
//    satisfies its optimality certificate on larger random ones.
std::string criterion_6() {
    const criterion::DKind kinds[4] = {
        criterion::DKind::Identity, criterion::DKind::Fused,
        criterion::DKind::SparseFused, criterion::DKind::Custom};
    for (int i = 0; i < 100; ++i) {
        const criterion::DKind kind = kinds[i % 4];
        const bool needs_two = kind == criterion::DKind::Fused ||
                               kind == criterion::DKind::SparseFused;
        const int n = needs_two ? 2 : 1 + (i % 2);
        rng::Stream stream(60, static_cast<std::uint64_t>(i));
        criterion::CriterionSpec spec;
        const oracle::SmallProblem p =
            oracle::make_small_instance(stream, n, kind, &spec);
        const solvers::Solution sol =
            solvers::solve_update(spec, p.J, p.e, p.f0, {});
        const double obj = oracle::objective(p, sol.f);
        const double bound =
            std::max(2.0, sol.f.cwiseAbs().maxCoeff() + 0.5);
        const oracle::GridResult grid =
            oracle::grid_min(p, bound, 1e-2, 1e-3);
        const double scale = 1.0 + std::abs(grid.value);
        if (!(obj <= grid.value + 1e-6 * scale))
            return "instance " + std::to_string(i) + " solver objective " +
                   fmt(obj) + " above the grid minimum " + fmt(grid.value);
        if (!(grid.value - obj <= 5e-3 * scale))
            return "instance " + std::to_string(i) + " gap " +
                   fmt(grid.value - obj) + " exceeds the grid resolution";
    }
    for (int i = 0; i < 100; ++i) {
        const criterion::DKind kind = kinds[i % 4];
        const int n = 3 + (i % 18);
        rng::Stream stream(61, static_cast<std::uint64_t>(i));
        criterion::CriterionSpec spec;
        const oracle::SmallProblem p =
            oracle::make_small_instance(stream, n, kind, &spec);
        const solvers::Solution sol =
            solvers::solve_update(spec, p.J, p.e, p.f0, {});
        if (!(sol.kkt_residual <= 1e-8) || !sol.converged)
            return "instance " + std::to_string(i) + " (n = " +
                   std::to_string(n) + ") KKT residual " +
                   fmt(sol.kkt_residual);
    }
    return {};
}

// 7. Solving with the cumulative-difference penalty equals transforming
//    to increment variables and solving a plain lasso.
std::string criterion_7() {
    const int n = 64;
    for (int i = 0; i < 25; ++i) {
        rng::Stream stream(62, static_cast<std::uint64_t>(i));
        const Eigen::MatrixXd J =
            3.0 * Eigen::MatrixXd::Identity(n, n) +
            oracle::random_mat(stream, n, n, 1.0 / 8.0);
        const Eigen::VectorXd e = oracle::random_vec(stream, n, 1.0);
        const Eigen::VectorXd f0 = oracle::random_vec(stream, n, 0.5);
        const double lambda = 0.1 * (J.transpose() * e).cwiseAbs().maxCoeff();

        solvers::SolverOptions opts;
        opts.kkt_tolerance = 1e-11;
        opts.max_iterations = 400000;

        criterion::CriterionSpec direct;
        direct.lambda = lambda;
        direct.d_kind = criterion::DKind::Custom;
        direct.d_custom =
            Eigen::MatrixXd(criterion::build_incremental_map(n));
        const solvers::Solution a =
            solvers::solve_update(direct, J, e, f0, opts);

        criterion::CriterionSpec fused;
        fused.lambda = lambda;
        fused.d_kind = criterion::DKind::Fused;
        const solvers::Solution b =
            solvers::solve_fused_via_increments(fused, J, e, f0, opts);

        const double rel = (a.f - b.f).norm() / (1.0 + b.f.norm());
        if (!(rel <= 1e-6))
            return "instance " + std::to_string(i) + " routes differ by " +
                   fmt(rel);
    }
    return {};
}

// 8. Re-estimating the amplitudes on the detected support shrinks the
//    converged error.
std::string criterion_8() {
    config::ExperimentConfig cfg = surrogate_config(512);
    cfg.plant.lambda_e = 1.5e-7;
    cfg.algorithm.variant = config::Variant::Optimization;
    cfg.algorithm.we = 1.0;
    cfg.algorithm.wdf = 1e-4;
    cfg.algorithm.lambda = 0.1;
    cfg.algorithm.lambda_mode = config::LambdaMode::Relative;
    cfg.algorithm.d_kind = config::PenaltyKind::Identity;

    config::ExperimentConfig with = cfg;
    with.algorithm.debias = true;
    const RunOutput plain = run_configured(cfg, 40, 4242, true, 20, 20);
    const RunOutput debiased = run_configured(with, 40, 4242, true, 20, 20);

    const auto window_mean = [](const engine::RunResult& run) {
        double sum = 0.0;
        for (int j = 20; j < 40; ++j)
            sum += run.records[static_cast<std::size_t>(j)].e_norm2;
        return sum / 20.0;
    };
    const double off = window_mean(plain.run);
    const double on = window_mean(debiased.run);
    if (!(on <= off))
        return "mean converged error " + fmt(on) + " with re-estimation, " +
               fmt(off) + " without";
    return {};
}

// 9. Without trial-varying noise the regularized criterion value never
//    increases from one trial to the next.
std::string criterion_9() {
    const int n = 320;
    config::ExperimentConfig probe = surrogate_config(n);
    probe.algorithm.variant = config::Variant::NormOptimal;
    probe.algorithm.wdf = 1e-3;
    const experiment::BuiltSystem probe_sys = experiment::build_system(probe);
    const double lambda_max = solvers::lasso_lambda_max(
        probe_sys.plant.J_model, criterion::WeightSpec::scaled(1.0),
        probe_sys.plant.r, Eigen::VectorXd::Zero(n));
    const double lambda = 0.1 * lambda_max;

    struct Variant {
        const char* name;
        config::PenaltyKind kind;
        double wdf;
        double fusion_weight;
    };
    const Variant variants[4] = {
        {"lasso", config::PenaltyKind::Identity, 0.0, 1.0},
        {"elastic-net", config::PenaltyKind::Identity, 1e-3, 1.0},
        {"fused", config::PenaltyKind::Fused, 0.0, 1.0},
        {"sparse-fused", config::PenaltyKind::SparseFused, 0.0, 1.5},
    };
    for (const Variant& v : variants) {
        config::ExperimentConfig cfg = surrogate_config(n);
        cfg.algorithm.variant = config::Variant::Optimization;
        cfg.algorithm.we = 1.0;
        cfg.algorithm.wdf = v.wdf;
        cfg.algorithm.lambda = lambda;
        cfg.algorithm.d_kind = v.kind;
        cfg.algorithm.fusion_weight = v.fusion_weight;
        cfg.algorithm.solver.max_iterations = 20000;
        const RunOutput out = run_configured(cfg, 40, 1, false, 0, 0);
        const Eigen::SparseMatrix<double> D =
            out.sys.algo.crit.penalty_matrix(n);
        const double lam = out.sys.lambda_effective;
        double previous = 0.0;
        for (int j = 0; j < 40; ++j) {
            const auto& rec = out.run.records[static_cast<std::size_t>(j)];
            const double m = 0.5 * rec.e.squaredNorm() +
                             lam * (D * rec.f).cwiseAbs().sum();
            if (j > 0 && !(m <= previous + 1e-12))
                return std::string(v.name) + " increased by " +
                       fmt(m - previous) + " at trial " + std::to_string(j);
            previous = m;
        }
    }
    return {};
}

// 10. The sweep command finds a weight pair whose converged input is
//     sparse in both value and slope while still tracking.
std::string criterion_10() {
    const fs::path dir = fresh_dir("sweep");
    config::ExperimentConfig cfg = surrogate_config(256);
    cfg.task.move_distance = 0.06;
    cfg.algorithm.variant = config::Variant::Optimization;
    cfg.algorithm.we = 1.0;
    cfg.algorithm.lambda = 0.03;
    cfg.algorithm.lambda_mode = config::LambdaMode::Relative;
    cfg.algorithm.d_kind = config::PenaltyKind::SparseFused;
    cfg.algorithm.solver.max_iterations = 30000;
    cfg.run.n_trials = 41;
    cfg.sweep.lambdas = {0.01, 0.03, 0.1};
    cfg.sweep.fusion_weights = {0.5, 2.0, 8.0};
    cfg.output.directory = (dir / "out").string();
    const fs::path cfg_path = dir / "sweep.ini";
    std::ofstream(cfg_path) << cfg.serialize();

    const int rc = run_cli("sweep \"" + cfg_path.string() + "\"");
    if (rc != 0 && rc != 2)
        return "sweep command exited with code " + std::to_string(rc);
    const csv::Table table =
        csv::read_numeric((dir / "out" / "sweep_summary.csv").string());
    const auto col = [&](const std::string& name) {
        for (std::size_t c = 0; c < table.header.size(); ++c)
            if (table.header[c] == name) return c;
        throw std::runtime_error("sweep_summary.csv lacks column " + name);
    };
    const std::size_t c_lambda = col("lambda");
    const std::size_t c_weight = col("fusion_weight");
    const std::size_t c_e0 = col("e0_norm2");
    const std::size_t c_ef = col("e_final_norm2");
    const std::size_t c_fc = col("f_final_card");
    const std::size_t c_dc = col("df_final_card");
    std::string best;
    for (const auto& row : table.rows) {
        const bool sparse_value = row[c_fc] <= 0.5 * 256.0;
        const bool sparse_slope = row[c_dc] <= 0.2 * 256.0;
        const bool tracking = row[c_ef] <= 0.1 * row[c_e0];
        if (sparse_value && sparse_slope && tracking) return {};
        best += " (lambda " + fmt(row[c_lambda]) + ", weight " +
                fmt(row[c_weight]) + ": card " + fmt(row[c_fc]) + "/" +
                fmt(row[c_dc]) + ", error ratio " +
                fmt(row[c_ef] / row[c_e0]) + ")";
    }
    return "no sweep entry satisfied all three structure bounds:" + best;
}

// 11. After ten thousand trials the predicted error spectrum is
//     indistinguishable from its limit for contracting loops.
std::string criterion_11() {
    const double ts = 1e-3;
    struct Case {
        const char* name;
        lti::TransferFunction Q, L, J;
    };
    const Case cases[3] = {
        {"static", lti::gain_tf(1.0, ts), lti::gain_tf(0.25, ts),
         lti::gain_tf(2.0, ts)},
        {"matched-inverse", lti::gain_tf(0.9, ts),
         lti::TransferFunction(vec({0.5, -0.25}), vec({1.0, 0.3}), ts),
         lti::TransferFunction(vec({1.0, 0.3}), vec({1.0, -0.5}), ts)},
        {"filtered", lti::TransferFunction(vec({0.1}), vec({1.0, -0.8}), ts),
         lti::gain_tf(0.3, ts),
         lti::TransferFunction(vec({1.0, 0.3}), vec({1.0, -0.5}), ts)},
    };
    const Eigen::VectorXd omega = lti::default_grid();
    const Eigen::VectorXd phi_r =
        (1.5 + omega.array().cos()).matrix();
    const Eigen::VectorXd phi_v =
        Eigen::VectorXd::Constant(omega.size(), 0.3);
    for (const Case& c : cases) {
        const analysis::ConvergenceReport rep =
            analysis::convergence_factor(c.Q, c.L, c.J, omega);
        if (!(rep.factor <= 0.5 + 1e-9))
            return std::string(c.name) + " contraction factor " +
                   fmt(rep.factor) + " exceeds 0.5";
        const analysis::SpectrumEstimate limit =
            analysis::limit_error_spectrum(c.Q, c.L, c.J, phi_r, phi_v, omega);
        const analysis::SpectrumEstimate finite =
            analysis::finite_iteration_spectrum(10000, c.Q, c.L, c.J, phi_r,
                                                phi_v, omega);
        for (Eigen::Index i = 0; i < omega.size(); ++i) {
            const double diff = std::abs(finite.phi[i] - limit.phi[i]);
            const double tol = 1e-10 * (1.0 + std::abs(limit.phi[i]));
            if (!(diff <= tol))
                return std::string(c.name) + " differs by " + fmt(diff) +
                       " at omega = " + fmt(omega[i]);
        }
    }
    return {};
}

// 12. Repeating a seeded run reproduces every CSV byte for byte, wall
//     time aside.
std::string criterion_12() {
    const fs::path dir = fresh_dir("determinism");
    config::ExperimentConfig cfg = surrogate_config(512);
    cfg.plant.lambda_e = 1.5e-7;
    cfg.algorithm.variant = config::Variant::InverseModel;
    cfg.algorithm.alpha = 1.0;
    cfg.run.noise = true;
    cfg.run.n_trials = 12;
    cfg.run.seed = 99991;
    cfg.run.seed_set = true;
    const fs::path cfg_path = dir / "run.ini";
    std::ofstream(cfg_path) << cfg.serialize();

    const fs::path a = dir / "a";
    const fs::path b = dir / "b";
    for (const fs::path& out : {a, b}) {
        const int rc = run_cli("run \"" + cfg_path.string() + "\" --out \"" +
                               out.string() + "\"");
        // The surrogate sensitivity carries boundary zeros, which the
        // noise-shaping validation reports as a warning (exit code 2).
        if (rc != 0 && rc != 2)
            return "run into " + out.filename().string() +
                   " exited with code " + std::to_string(rc);
    }
    for (const char* name :
         {"errors.csv", "spectra.csv", "summary.csv", "signals_000.csv",
          "signals_011.csv"}) {
        if (read_file(a / name) != read_file(b / name))
            return std::string(name) + " differs between runs";
    }
    if (without_last_column(read_file(a / "trials.csv")) !=
        without_last_column(read_file(b / "trials.csv")))
        return "trials.csv differs beyond the wall-time column";
    return {};
}

}  // namespace

int main() {
    struct Entry {
        int index;
        std::string (*fn)();
    };
    const Entry entries[] = {
        {1, criterion_1},  {2, criterion_2},  {3, criterion_3},
        {4, criterion_4},  {5, criterion_5},  {6, criterion_6},
        {7, criterion_7},  {8, criterion_8},  {9, criterion_9},
        {10, criterion_10}, {11, criterion_11}, {12, criterion_12},
    };
    int failures = 0;
    for (const Entry& entry : entries) {
        std::string detail;
        try {
            detail = entry.fn();
        } catch (const std::exception& e) {
            detail = std::string("unexpected exception: ") + e.what();
        }
        if (detail.empty()) {
            std::cout << "PASS criterion " << entry.index << "\n";
        } else {
            std::cout << "FAIL criterion " << entry.index << ": " << detail
                      << "\n";
            ++failures;
        }
        std::cout.flush();
    }
    std::cout << (12 - failures) << "/12 criteria passed\n";
    return failures;
}
