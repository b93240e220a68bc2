#include "experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <thread>

#include "csv.hpp"
#include "svg.hpp"

namespace silc::experiment {

namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Band for measured-vs-theory spectrum ratios: the lowest bins carry most
// of the window leakage, the grid edges the least averaging.
constexpr int kRatioSkipBins = 2;
constexpr double kRatioBandLo = 0.05 * kPi;
constexpr double kRatioBandHi = 0.95 * kPi;

void apply_overrides(config::ExperimentConfig& cfg, const Overrides& ov) {
    if (ov.seed) {
        cfg.run.seed = *ov.seed;
        cfg.run.seed_set = true;
    }
    if (ov.out_dir) cfg.output.directory = *ov.out_dir;
    if (ov.plots) cfg.output.plots = *ov.plots;
}

std::string join_messages(const std::vector<std::string>& msgs) {
    std::string out;
    for (const auto& m : msgs) {
        if (!out.empty()) out += "; ";
        out += m;
    }
    return out;
}

lti::TransferFunction tf_from(const std::vector<double>& num,
                              const std::vector<double>& den, double ts) {
    const Eigen::VectorXd n = Eigen::Map<const Eigen::VectorXd>(
        num.data(), static_cast<Eigen::Index>(num.size()));
    const Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(
        den.data(), static_cast<Eigen::Index>(den.size()));
    return lti::TransferFunction(n, d, ts);
}

criterion::WeightSpec wspec(double w) {
    return w == 0.0 ? criterion::WeightSpec::zero()
                    : criterion::WeightSpec::scaled(w);
}

struct LoopSystem {
    lti::TransferFunction G, C, S, J, H;
};

LoopSystem build_loop(const config::ExperimentConfig& cfg) {
    LoopSystem sys;
    const double ts = 1.0 / cfg.task.sample_rate_hz;
    if (cfg.plant.source == config::PlantSource::Surrogate) {
        const engine::SurrogateModel m =
            engine::make_surrogate(cfg.surrogate_params());
        sys.G = m.G;
        sys.C = m.C;
        sys.S = m.S;
        sys.J = m.J;
    } else {
        try {
            sys.G = tf_from(cfg.plant.g_num, cfg.plant.g_den, ts);
            sys.C = tf_from(cfg.plant.c_num, cfg.plant.c_den, ts);
        } catch (const std::exception& e) {
            throw config::ConfigError(std::string("plant: ") + e.what());
        }
        const lti::ClosedLoop loop = lti::feedback_connect(sys.G, sys.C);
        if (!loop.stable)
            throw config::ConfigError("plant: closed loop 1/(1+GC) is unstable");
        sys.S = loop.S;
        sys.J = loop.J;
    }
    if (cfg.plant.h_source == config::NoiseShapeSource::Sensitivity) {
        sys.H = sys.S;
    } else {
        try {
            sys.H = tf_from(cfg.plant.h_num, cfg.plant.h_den, ts);
        } catch (const std::exception& e) {
            throw config::ConfigError(std::string("plant: ") + e.what());
        }
    }
    return sys;
}

// Frequency curves of the configured update where one exists.
struct TheoryCurves {
    bool available = false;
    Eigen::VectorXcd Q, L, Jw;
};

TheoryCurves theory_curves(const lti::TransferFunction& J,
                           const config::ExperimentConfig& cfg,
                           double lambda_effective,
                           const Eigen::VectorXd& omega) {
    TheoryCurves t;
    t.Jw = lti::frequency_response(J, omega).value;
    const auto& a = cfg.algorithm;
    const double g = cfg.plant.model_gain;
    switch (a.variant) {
        case config::Variant::InverseModel: {
            const analysis::FrequencyGains fg =
                analysis::inverse_model_frequency_gains(t.Jw, a.alpha * g);
            t.L = fg.L;
            t.Q = fg.Q;
            t.available = true;
            break;
        }
        case config::Variant::NormOptimal:
        case config::Variant::Optimization: {
            if (a.variant == config::Variant::Optimization &&
                lambda_effective != 0.0)
                break;
            const Eigen::VectorXcd Jm = g * t.Jw;
            const analysis::FrequencyGains fg =
                analysis::norm_optimal_frequency_gains(Jm, a.we, a.wf, a.wdf);
            t.L = fg.L;
            t.Q = fg.Q;
            t.available = true;
            break;
        }
        case config::Variant::Basis:
            break;
    }
    return t;
}

struct ConvergenceSummary {
    double rho_hat = kNan;
    double rho_freq_hz = kNan;
    std::string verdict = "unavailable";
};

ConvergenceSummary convergence_summary(const lti::TransferFunction& J,
                                       const config::ExperimentConfig& cfg,
                                       double lambda_effective) {
    ConvergenceSummary out;
    const Eigen::VectorXd grid = lti::default_grid(2);
    const TheoryCurves t = theory_curves(J, cfg, lambda_effective, grid);
    if (!t.available) return out;
    const analysis::ConvergenceReport rep =
        analysis::convergence_factor(t.Q, t.L, t.Jw, grid);
    out.rho_hat = rep.factor;
    out.rho_freq_hz =
        rep.argmax_omega / (2.0 * kPi) * cfg.task.sample_rate_hz;
    out.verdict = analysis::verdict_name(rep.verdict);
    return out;
}

std::string fmt_index(const char* stem, int index, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s%03d%s", stem, index, ext);
    return buf;
}

Eigen::VectorXd index_axis(Eigen::Index n) {
    return Eigen::VectorXd::LinSpaced(n, 0.0, static_cast<double>(n - 1));
}

void write_trials_csv(const fs::path& path,
                      const std::vector<engine::TrialRecord>& records) {
    csv::Writer w({"trial", "e_norm2", "f_card", "df_card", "objective",
                   "converged", "wall_ms"});
    for (const auto& r : records)
        w.add_row({csv::format_int(r.trial), csv::format_double(r.e_norm2),
                   csv::format_int(r.f_card), csv::format_int(r.df_card),
                   csv::format_double(r.objective),
                   csv::format_int(r.converged ? 1 : 0),
                   csv::format_double(r.wall_ms)});
    w.write(path.string());
}

void write_errors_csv(const fs::path& path,
                      const std::vector<engine::TrialRecord>& records) {
    std::vector<std::string> header = {"trial"};
    const Eigen::Index n = records.empty() ? 0 : records.front().e.size();
    for (Eigen::Index i = 0; i < n; ++i)
        header.push_back("e_" + std::to_string(i));
    csv::Writer w(std::move(header));
    for (const auto& r : records) {
        std::vector<std::string> row = {csv::format_int(r.trial)};
        for (Eigen::Index i = 0; i < n; ++i)
            row.push_back(csv::format_double(r.e[i]));
        w.add_row(std::move(row));
    }
    w.write(path.string());
}

void write_signals_csv(const fs::path& path, const Eigen::VectorXd& r,
                       const engine::TrialRecord& rec) {
    csv::Writer w({"t_index", "r", "f", "e"});
    for (Eigen::Index i = 0; i < r.size(); ++i)
        w.add_row({csv::format_int(i), csv::format_double(r[i]),
                   csv::format_double(rec.f[i]), csv::format_double(rec.e[i])});
    w.write(path.string());
}

void write_theta_csv(const fs::path& path,
                     const std::vector<engine::TrialRecord>& records) {
    const Eigen::Index k = records.empty() ? 0 : records.front().theta.size();
    std::vector<std::string> header = {"trial"};
    for (Eigen::Index i = 0; i < k; ++i)
        header.push_back("th_" + std::to_string(i));
    csv::Writer w(std::move(header));
    for (const auto& r : records) {
        std::vector<std::string> row = {csv::format_int(r.trial)};
        for (Eigen::Index i = 0; i < k; ++i)
            row.push_back(csv::format_double(r.theta[i]));
        w.add_row(std::move(row));
    }
    w.write(path.string());
}

std::vector<int> resolve_signal_trials(const config::ExperimentConfig& cfg,
                                       int n_trials,
                                       std::vector<std::string>& warnings) {
    std::vector<int> out;
    for (int t : cfg.output.signal_trials) {
        const int j = t == -1 ? n_trials - 1 : t;
        if (j < 0 || j >= n_trials) {
            warnings.push_back("output.signal_trials: trial " +
                               std::to_string(t) + " outside the run (" +
                               std::to_string(n_trials) + " trials); skipped");
            continue;
        }
        if (std::find(out.begin(), out.end(), j) == out.end()) out.push_back(j);
    }
    return out;
}

struct SpectraResult {
    bool computed = false;
    analysis::SpectrumEstimate measured;
    analysis::SpectrumEstimate phi_v;
    bool theory_ok = false;
    Eigen::VectorXd coef_v;  // trial-varying limit coefficient
};

// Trial-varying spectrum over the averaging window plus the matching
// theory curves, written as spectra.csv (phi_e_inf_theory is the
// trial-varying limit density coef_v * phi_v; nan when the update has no
// frequency-domain form or diverges).
SpectraResult write_spectra(const fs::path& dir, bool plots,
                            const lti::TransferFunction& J,
                            const lti::TransferFunction& H,
                            const config::ExperimentConfig& cfg,
                            double lambda_effective, double lambda_e_effective,
                            const std::vector<engine::TrialRecord>& records,
                            int n_conv, int n_iter) {
    SpectraResult out;
    const Eigen::VectorXd e_inf =
        engine::estimate_e_inf(records, n_conv, n_iter);
    std::vector<Eigen::VectorXd> residuals;
    residuals.reserve(static_cast<size_t>(n_iter));
    for (int j = n_conv; j < n_conv + n_iter; ++j)
        residuals.push_back(records[static_cast<size_t>(j)].e - e_inf);
    out.measured = analysis::estimate_spectrum(residuals);
    out.phi_v =
        analysis::theoretical_phi_v(H, lambda_e_effective, out.measured.omega);
    const TheoryCurves curves =
        theory_curves(J, cfg, lambda_effective, out.measured.omega);
    Eigen::VectorXd phi_inf;
    if (curves.available) {
        try {
            const analysis::SpectrumCoefficients coef =
                analysis::limit_spectrum_coefficients(curves.Q, curves.L,
                                                      curves.Jw,
                                                      out.measured.omega);
            out.coef_v = coef.coef_v;
            phi_inf = coef.coef_v.cwiseProduct(out.phi_v.phi);
            out.theory_ok = true;
        } catch (const std::exception&) {
            out.theory_ok = false;
        }
    }

    const double fs_hz = cfg.task.sample_rate_hz;
    const Eigen::VectorXd freq_hz = out.measured.omega / (2.0 * kPi) * fs_hz;
    csv::Writer w({"freq_hz", "phi_measured", "phi_v_theory",
                   "phi_e_inf_theory"});
    for (Eigen::Index i = 0; i < freq_hz.size(); ++i)
        w.add_row({csv::format_double(freq_hz[i]),
                   csv::format_double(out.measured.phi[i]),
                   csv::format_double(out.phi_v.phi[i]),
                   csv::format_double(out.theory_ok ? phi_inf[i] : kNan)});
    w.write((dir / "spectra.csv").string());

    if (plots) {
        std::vector<svg::Series> series;
        series.push_back({"measured", freq_hz, out.measured.phi});
        series.push_back({"phi_v", freq_hz, out.phi_v.phi});
        series.push_back({"2 phi_v", freq_hz, (2.0 * out.phi_v.phi).eval()});
        if (out.theory_ok) series.push_back({"limit theory", freq_hz, phi_inf});
        svg::PlotSpec ps;
        ps.title = "Trial-varying error spectrum";
        ps.x_label = "frequency [Hz]";
        ps.y_label = "power density";
        ps.log_y = true;
        svg::write_plot((dir / "spectra.svg").string(), ps, series);
    }
    out.computed = true;
    return out;
}

void write_summary(const fs::path& path, const config::ExperimentConfig& cfg,
                   const BuiltSystem& sys,
                   const std::vector<engine::TrialRecord>& records,
                   const ConvergenceSummary& conv, int n_warnings) {
    const size_t n = records.size();
    const double objective_final =
        n >= 2 ? records[n - 2].objective : kNan;
    bool converged_all = true;
    for (size_t j = 0; j + 1 < n; ++j) converged_all &= records[j].converged;

    csv::Writer w({"key", "value"});
    const auto add = [&](const char* key, std::string value) {
        w.add_row({key, std::move(value)});
    };
    add("variant", [&] {
        switch (cfg.algorithm.variant) {
            case config::Variant::InverseModel: return "inverse_model";
            case config::Variant::NormOptimal: return "norm_optimal";
            case config::Variant::Optimization: return "optimization";
            case config::Variant::Basis: return "basis";
        }
        return "?";
    }());
    add("n", csv::format_int(cfg.task.n));
    add("n_trials", csv::format_int(static_cast<long long>(n)));
    add("seed", std::to_string(cfg.run.seed));
    add("noise", cfg.run.noise ? "true" : "false");
    add("lambda_effective", csv::format_double(sys.lambda_effective));
    add("lambda_max", csv::format_double(sys.lambda_max));
    add("e0_norm2", csv::format_double(records.front().e_norm2));
    add("e_final_norm2", csv::format_double(records.back().e_norm2));
    add("f_final_card", csv::format_int(records.back().f_card));
    add("df_final_card", csv::format_int(records.back().df_card));
    add("objective_final", csv::format_double(objective_final));
    add("converged_all", csv::format_int(converged_all ? 1 : 0));
    add("rho_hat", csv::format_double(conv.rho_hat));
    add("verdict", conv.verdict);
    add("n_warnings", csv::format_int(n_warnings));
    w.write(path.string());
}

struct RunArtifacts {
    BuiltSystem sys;
    engine::RunResult res;
    int n_conv = 0;
    int n_iter = 0;
};

// Averaging window: explicit n_conv/n_iter, or the second half of the run
// when both are zero.
std::pair<int, int> resolve_window(int n_conv, int n_iter, int count,
                                   const char* what) {
    int conv = n_conv;
    int iter = n_iter;
    if (conv == 0 && iter == 0) {
        conv = count / 2;
        iter = count - conv;
    } else if (iter == 0) {
        iter = count - conv;
    }
    if (iter < 1 || conv + iter > count)
        throw config::ConfigError(
            std::string("run.n_conv: averaging window [") +
            std::to_string(conv) + ", " + std::to_string(conv + iter) +
            ") exceeds the " + what + " (" + std::to_string(count) + ")");
    return {conv, iter};
}

RunArtifacts execute_run(const config::ExperimentConfig& cfg) {
    RunArtifacts art;
    art.sys = build_system(cfg);
    std::tie(art.n_conv, art.n_iter) =
        resolve_window(cfg.run.n_conv, cfg.run.n_iter, cfg.run.n_trials,
                       "trial count");
    engine::RunConfig rc;
    rc.n_trials = cfg.run.n_trials;
    rc.seed = cfg.run.seed;
    rc.noise = cfg.run.noise;
    rc.n_conv = art.n_conv;
    rc.n_iter = art.n_iter;
    art.res = engine::run_ilc(art.sys.plant, art.sys.algo, rc);
    // The engine re-validates the plant; keep only warnings the builder
    // has not already reported.
    std::erase_if(art.res.warnings, [&](const std::string& w) {
        return std::find(art.sys.warnings.begin(), art.sys.warnings.end(),
                         w) != art.sys.warnings.end();
    });
    return art;
}

// Writes the whole artifact set for one completed run; returns extra
// warnings raised while writing.
std::vector<std::string> write_run_outputs(const config::ExperimentConfig& cfg,
                                           const RunArtifacts& art,
                                           const fs::path& dir, bool plots) {
    std::vector<std::string> warnings;
    fs::create_directories(dir);
    const auto& records = art.res.records;
    const int n_trials = static_cast<int>(records.size());

    write_trials_csv(dir / "trials.csv", records);
    write_errors_csv(dir / "errors.csv", records);
    if (art.sys.algo.kind == engine::IlcAlgorithm::Kind::Basis)
        write_theta_csv(dir / "theta.csv", records);

    for (const int j : resolve_signal_trials(cfg, n_trials, warnings)) {
        const auto& rec = records[static_cast<size_t>(j)];
        write_signals_csv(dir / fmt_index("signals_", j, ".csv"),
                          art.sys.plant.r, rec);
        if (plots) {
            const Eigen::VectorXd t = index_axis(art.sys.plant.r.size());
            svg::PlotSpec pe;
            pe.title = "Error, trial " + std::to_string(j);
            pe.x_label = "sample";
            pe.y_label = "e";
            svg::write_plot((dir / fmt_index("trial_", j, "_error.svg")).string(),
                            pe, {{"e", t, rec.e}});
            svg::PlotSpec pf;
            pf.title = "Command, trial " + std::to_string(j);
            pf.x_label = "sample";
            pf.y_label = "f";
            svg::write_plot(
                (dir / fmt_index("trial_", j, "_command.svg")).string(), pf,
                {{"f", t, rec.f}});
        }
    }

    const double lambda_e_eff = cfg.run.noise ? cfg.plant.lambda_e : 0.0;
    write_spectra(dir, plots, art.sys.J, art.sys.H, cfg,
                  art.sys.lambda_effective, lambda_e_eff, records, art.n_conv,
                  art.n_iter);

    const ConvergenceSummary conv =
        convergence_summary(art.sys.J, cfg, art.sys.lambda_effective);
    const int n_warn = static_cast<int>(art.sys.warnings.size() +
                                        art.res.warnings.size() +
                                        warnings.size());
    write_summary(dir / "summary.csv", cfg, art.sys, records, conv, n_warn);

    if (plots) {
        const Eigen::VectorXd trials = index_axis(n_trials);
        Eigen::VectorXd enorm(n_trials), fcard(n_trials), dfcard(n_trials);
        for (int j = 0; j < n_trials; ++j) {
            enorm[j] = records[static_cast<size_t>(j)].e_norm2;
            fcard[j] = records[static_cast<size_t>(j)].f_card;
            dfcard[j] = records[static_cast<size_t>(j)].df_card;
        }
        svg::PlotSpec pn;
        pn.title = "Error norm per trial";
        pn.x_label = "trial";
        pn.y_label = "|e|_2";
        pn.log_y = true;
        svg::write_plot((dir / "error_norm.svg").string(), pn,
                        {{"|e|_2", trials, enorm}});
        svg::PlotSpec pc;
        pc.title = "Command cardinality per trial";
        pc.x_label = "trial";
        pc.y_label = "count";
        svg::write_plot((dir / "command_card.svg").string(), pc,
                        {{"|f|_0", trials, fcard}, {"|Df|_0", trials, dfcard}});
    }
    return warnings;
}

Outcome outcome_from(std::vector<std::string> warnings) {
    if (warnings.empty()) return {Status::Ok, "ok"};
    return {Status::CompletedWithWarnings, join_messages(warnings)};
}

}  // namespace

BuiltSystem build_system(const config::ExperimentConfig& cfg) {
    cfg.validate();
    BuiltSystem sys;
    const LoopSystem loop = build_loop(cfg);
    sys.G = loop.G;
    sys.C = loop.C;
    sys.S = loop.S;
    sys.J = loop.J;
    sys.H = loop.H;

    try {
        sys.r_bar = engine::build_reference(cfg.reference_profile());
    } catch (const std::exception& e) {
        throw config::ConfigError(std::string("task: ") + e.what());
    }

    const int n = cfg.task.n;
    const double ts = 1.0 / cfg.task.sample_rate_hz;
    sys.plant.J_true = sys.J;
    sys.plant.H = sys.H;
    sys.plant.lambda_e = cfg.plant.lambda_e;
    sys.plant.r = lti::simulate(sys.S, sys.r_bar);
    sys.plant.setpoint = sys.r_bar;
    sys.plant.sample_period = ts;

    const double g = cfg.plant.model_gain;
    const auto& a = cfg.algorithm;
    engine::IlcAlgorithm& algo = sys.algo;
    algo.solver = a.solver;

    const auto require_positive_we = [&] {
        if (!(a.we > 0.0))
            throw config::ConfigError(
                "algorithm.we: must be positive for this variant");
    };

    switch (a.variant) {
        case config::Variant::InverseModel: {
            algo.kind = engine::IlcAlgorithm::Kind::Explicit;
            algo.alpha = a.alpha;
            const Eigen::VectorXd& num = sys.J.num;
            Eigen::Index d = 0;
            while (d < num.size() && num[d] == 0.0) ++d;
            if (d == num.size())
                throw config::ConfigError("plant: loop J is identically zero");
            lti::TransferFunction inverse;
            try {
                inverse = lti::TransferFunction(
                    sys.J.den, num.segment(d, num.size() - d).eval(), ts);
            } catch (const std::exception& e) {
                throw config::ConfigError(std::string("algorithm: ") + e.what());
            }
            if (!lti::is_stable(inverse))
                throw config::ConfigError(
                    "algorithm: the inverse-model update needs all loop zeros "
                    "strictly inside the unit circle");
            algo.gains.L =
                g * lti::lift_advance(inverse, n, static_cast<int>(d));
            algo.gains.Q = Eigen::MatrixXd::Identity(n, n);
            break;
        }
        case config::Variant::NormOptimal: {
            require_positive_we();
            algo.kind = engine::IlcAlgorithm::Kind::Explicit;
            algo.alpha = 1.0;
            sys.plant.J_model = g * lti::lift(sys.J, n);
            algo.gains = solvers::norm_optimal_gains(
                sys.plant.J_model, wspec(a.we), wspec(a.wf), wspec(a.wdf));
            break;
        }
        case config::Variant::Optimization: {
            require_positive_we();
            algo.kind = engine::IlcAlgorithm::Kind::Optimization;
            sys.plant.J_model = g * lti::lift(sys.J, n);
            criterion::CriterionSpec& crit = algo.crit;
            crit.We = wspec(a.we);
            crit.Wf = wspec(a.wf);
            crit.Wdf = wspec(a.wdf);
            switch (a.d_kind) {
                case config::PenaltyKind::Identity:
                    crit.d_kind = criterion::DKind::Identity;
                    break;
                case config::PenaltyKind::Fused:
                    crit.d_kind = criterion::DKind::Fused;
                    break;
                case config::PenaltyKind::SparseFused:
                    crit.d_kind = criterion::DKind::SparseFused;
                    break;
                case config::PenaltyKind::Incremental:
                    crit.d_kind = criterion::DKind::Custom;
                    crit.d_custom =
                        Eigen::MatrixXd(criterion::build_incremental_map(n));
                    break;
            }
            crit.fusion_weight = a.fusion_weight;
            double lam = a.lambda;
            if (a.lambda_mode == config::LambdaMode::Relative) {
                sys.lambda_max = solvers::lasso_lambda_max(
                    sys.plant.J_model, crit.We, sys.plant.r,
                    Eigen::VectorXd::Zero(n));
                lam = a.lambda * sys.lambda_max;
            }
            crit.lambda = lam;
            sys.lambda_effective = lam;
            algo.debias = a.debias;
            if (a.solver_route == config::SolverRoute::Increments) {
                if (a.d_kind != config::PenaltyKind::Fused)
                    throw config::ConfigError(
                        "algorithm.solver_route: the increments route requires "
                        "d_kind = fused");
                if (a.wf != 0.0 || a.wdf != 0.0)
                    throw config::ConfigError(
                        "algorithm.solver_route: the increments route requires "
                        "wf = 0 and wdf = 0");
                algo.fused_via_increments = true;
            }
            try {
                crit.validate(n);
            } catch (const std::exception& e) {
                throw config::ConfigError(std::string("algorithm: ") + e.what());
            }
            break;
        }
        case config::Variant::Basis: {
            require_positive_we();
            algo.kind = engine::IlcAlgorithm::Kind::Basis;
            sys.plant.J_model = g * lti::lift(sys.J, n);
            engine::BasisSet basis;
            try {
                basis = engine::build_basis(sys.r_bar, a.basis_orders);
            } catch (const std::exception& e) {
                throw config::ConfigError(std::string("algorithm: ") + e.what());
            }
            if (basis.degenerate)
                sys.warnings.push_back(
                    "algorithm.basis_orders: a basis column was identically "
                    "zero before scaling");
            algo.psi = basis.psi;
            algo.t_multiplier = a.t_multiplier;
            algo.crit.We = wspec(a.we);
            algo.crit.Wf = wspec(a.wf);
            algo.crit.Wdf = wspec(a.wdf);
            break;
        }
    }

    std::vector<std::string> plant_warnings;
    try {
        plant_warnings = sys.plant.validate();
    } catch (const std::exception& e) {
        throw config::ConfigError(std::string("plant: ") + e.what());
    }
    sys.warnings.insert(sys.warnings.end(), plant_warnings.begin(),
                        plant_warnings.end());
    return sys;
}

Outcome run_experiment(config::ExperimentConfig cfg, const Overrides& ov) {
    try {
        apply_overrides(cfg, ov);
        RunArtifacts art = execute_run(cfg);
        std::vector<std::string> extra = write_run_outputs(
            cfg, art, cfg.output.directory, cfg.output.plots);
        std::vector<std::string> warnings = art.sys.warnings;
        warnings.insert(warnings.end(), art.res.warnings.begin(),
                        art.res.warnings.end());
        warnings.insert(warnings.end(), extra.begin(), extra.end());
        return outcome_from(std::move(warnings));
    } catch (const config::ConfigError& e) {
        return {Status::BadConfig, e.what()};
    } catch (const std::exception& e) {
        return {Status::Failed, e.what()};
    }
}

Outcome analyze_records(config::ExperimentConfig cfg,
                        const std::string& records_path, const Overrides& ov) {
    try {
        apply_overrides(cfg, ov);
        BuiltSystem sys = build_system(cfg);
        std::vector<std::string> warnings = sys.warnings;

        const csv::Table tab = csv::read_numeric(records_path);
        if (tab.header.size() < 2 || tab.header[0] != "trial")
            throw config::ConfigError(
                "records: expected the errors.csv schema (trial,e_0,...)");
        const int n_records = static_cast<int>(tab.rows.size());
        if (n_records == 0)
            throw config::ConfigError("records: no trial rows");
        const Eigen::Index n =
            static_cast<Eigen::Index>(tab.header.size()) - 1;
        if (n != cfg.task.n)
            warnings.push_back("records: signal length " + std::to_string(n) +
                               " differs from task.n = " +
                               std::to_string(cfg.task.n));

        std::vector<engine::TrialRecord> records(
            static_cast<size_t>(n_records));
        for (int i = 0; i < n_records; ++i) {
            auto& rec = records[static_cast<size_t>(i)];
            const auto& row = tab.rows[static_cast<size_t>(i)];
            rec.trial = static_cast<int>(row[0]);
            rec.e = Eigen::Map<const Eigen::VectorXd>(row.data() + 1, n);
            rec.e_norm2 = rec.e.norm();
        }

        const auto [n_conv, n_iter] = resolve_window(
            cfg.run.n_conv, cfg.run.n_iter, n_records, "record count");

        const fs::path dir = cfg.output.directory;
        fs::create_directories(dir);

        const Eigen::VectorXd e_inf =
            engine::estimate_e_inf(records, n_conv, n_iter);
        {
            csv::Writer w({"t_index", "e_inf"});
            for (Eigen::Index i = 0; i < e_inf.size(); ++i)
                w.add_row({csv::format_int(i), csv::format_double(e_inf[i])});
            w.write((dir / "e_inf.csv").string());
        }
        Eigen::VectorXd tv(n_records);
        {
            csv::Writer w({"trial", "tv_norm2"});
            for (int i = 0; i < n_records; ++i) {
                tv[i] = engine::trial_varying_norm(
                    records[static_cast<size_t>(i)].e, e_inf);
                w.add_row({csv::format_int(records[static_cast<size_t>(i)].trial),
                           csv::format_double(tv[i])});
            }
            w.write((dir / "trial_varying.csv").string());
        }

        const double lambda_e_eff =
            cfg.run.noise ? cfg.plant.lambda_e : 0.0;
        const SpectraResult sp = write_spectra(
            dir, cfg.output.plots, sys.J, sys.H, cfg, sys.lambda_effective,
            lambda_e_eff, records, n_conv, n_iter);

        // Ratios stay nan when they have no usable bins (noise-free
        // records make phi_v identically zero).
        double ratio_measured = kNan;
        double ratio_theory = kNan;
        if (sp.computed) {
            try {
                ratio_measured = analysis::band_average_ratio(
                    sp.measured, sp.phi_v, kRatioSkipBins, kRatioBandLo,
                    kRatioBandHi);
            } catch (const std::exception&) {
            }
            if (sp.theory_ok) {
                analysis::SpectrumEstimate coefv;
                coefv.omega = sp.measured.omega;
                coefv.phi = sp.coef_v;
                analysis::SpectrumEstimate ones;
                ones.omega = sp.measured.omega;
                ones.phi = Eigen::VectorXd::Ones(sp.coef_v.size());
                ratio_theory = analysis::band_average_ratio(
                    coefv, ones, kRatioSkipBins, kRatioBandLo, kRatioBandHi);
            }
        }

        const ConvergenceSummary conv =
            convergence_summary(sys.J, cfg, sys.lambda_effective);
        analysis::NoiseAmplification amp{kNan, kNan};
        if (cfg.algorithm.variant == config::Variant::InverseModel)
            amp = analysis::noise_amplification(cfg.algorithm.alpha *
                                                cfg.plant.model_gain);

        {
            csv::Writer w({"key", "value"});
            const auto add = [&](const char* key, std::string value) {
                w.add_row({key, std::move(value)});
            };
            add("n_records", csv::format_int(n_records));
            add("n", csv::format_int(static_cast<long long>(n)));
            add("n_conv", csv::format_int(n_conv));
            add("n_iter", csv::format_int(n_iter));
            add("e_inf_norm2", csv::format_double(e_inf.norm()));
            add("band_ratio_measured", csv::format_double(ratio_measured));
            add("band_ratio_theory", csv::format_double(ratio_theory));
            add("amplification_exact", csv::format_double(amp.exact));
            add("amplification_first_order",
                csv::format_double(amp.first_order));
            add("rho_hat", csv::format_double(conv.rho_hat));
            add("verdict", conv.verdict);
            w.write((dir / "analysis_summary.csv").string());
        }

        if (cfg.output.plots) {
            const Eigen::VectorXd trials = index_axis(n_records);
            svg::PlotSpec pt;
            pt.title = "Trial-varying error norm";
            pt.x_label = "trial";
            pt.y_label = "|e_j - e_inf|_2";
            pt.log_y = true;
            svg::write_plot((dir / "trial_varying.svg").string(), pt,
                            {{"trial-varying", trials, tv}});
            svg::PlotSpec pi;
            pi.title = "Converged error estimate";
            pi.x_label = "sample";
            pi.y_label = "e_inf";
            svg::write_plot((dir / "e_inf.svg").string(), pi,
                            {{"e_inf", index_axis(e_inf.size()), e_inf}});
        }
        return outcome_from(std::move(warnings));
    } catch (const config::ConfigError& e) {
        return {Status::BadConfig, e.what()};
    } catch (const std::exception& e) {
        return {Status::Failed, e.what()};
    }
}

Outcome predict_report(config::ExperimentConfig cfg, const Overrides& ov) {
    try {
        apply_overrides(cfg, ov);
        if (cfg.algorithm.variant == config::Variant::Basis)
            return {Status::BadConfig,
                    "algorithm.variant: basis updates have no closed-form "
                    "frequency-domain representation"};
        if (cfg.algorithm.variant == config::Variant::Optimization &&
            cfg.algorithm.lambda > 0.0)
            return {Status::BadConfig,
                    "algorithm.lambda: l1-regularized updates have no "
                    "closed-form frequency-domain representation"};
        cfg.validate();

        const LoopSystem loop = build_loop(cfg);
        Eigen::VectorXd r_bar;
        try {
            r_bar = engine::build_reference(cfg.reference_profile());
        } catch (const std::exception& e) {
            throw config::ConfigError(std::string("task: ") + e.what());
        }
        const Eigen::VectorXd r_loop = lti::simulate(loop.S, r_bar);

        // Reference spectrum fixes the CSV grid.
        const analysis::SpectrumEstimate phi_r =
            analysis::estimate_spectrum({r_loop});
        const Eigen::VectorXd& omega = phi_r.omega;
        const analysis::SpectrumEstimate phi_v =
            analysis::theoretical_phi_v(loop.H, cfg.plant.lambda_e, omega);
        const TheoryCurves curves = theory_curves(loop.J, cfg, 0.0, omega);

        const Eigen::VectorXd magnitude =
            (curves.Q.array() *
             (1.0 - curves.L.array() * curves.Jw.array()))
                .abs()
                .matrix();
        bool theory_ok = false;
        Eigen::VectorXd coef_r, coef_v, phi_inf;
        try {
            const analysis::SpectrumCoefficients coef =
                analysis::limit_spectrum_coefficients(curves.Q, curves.L,
                                                      curves.Jw, omega);
            coef_r = coef.coef_r;
            coef_v = coef.coef_v;
            phi_inf = coef_r.cwiseProduct(phi_r.phi) +
                      coef_v.cwiseProduct(phi_v.phi);
            theory_ok = true;
        } catch (const std::exception&) {
        }

        const fs::path dir = cfg.output.directory;
        fs::create_directories(dir);
        const double fs_hz = cfg.task.sample_rate_hz;
        const Eigen::VectorXd freq_hz = omega / (2.0 * kPi) * fs_hz;
        {
            csv::Writer w(
                {"freq_hz", "magnitude", "coef_r", "coef_v", "phi_e_inf"});
            for (Eigen::Index i = 0; i < omega.size(); ++i)
                w.add_row({csv::format_double(freq_hz[i]),
                           csv::format_double(magnitude[i]),
                           csv::format_double(theory_ok ? coef_r[i] : kNan),
                           csv::format_double(theory_ok ? coef_v[i] : kNan),
                           csv::format_double(theory_ok ? phi_inf[i] : kNan)});
            w.write((dir / "predict.csv").string());
        }

        const ConvergenceSummary conv = convergence_summary(loop.J, cfg, 0.0);
        analysis::NoiseAmplification amp{kNan, kNan};
        if (cfg.algorithm.variant == config::Variant::InverseModel)
            amp = analysis::noise_amplification(cfg.algorithm.alpha *
                                                cfg.plant.model_gain);
        {
            csv::Writer w({"key", "value"});
            w.add_row({"rho_hat", csv::format_double(conv.rho_hat)});
            w.add_row({"rho_freq_hz", csv::format_double(conv.rho_freq_hz)});
            w.add_row({"verdict", conv.verdict});
            w.add_row(
                {"amplification_exact", csv::format_double(amp.exact)});
            w.add_row({"amplification_first_order",
                       csv::format_double(amp.first_order)});
            w.write((dir / "predict_summary.csv").string());
        }

        if (cfg.output.plots) {
            svg::PlotSpec pm;
            pm.title = "Per-frequency contraction";
            pm.x_label = "frequency [Hz]";
            pm.y_label = "|Q(1-LJ)|";
            svg::write_plot(
                (dir / "contraction.svg").string(), pm,
                {{"|Q(1-LJ)|", freq_hz, magnitude},
                 {"unity", freq_hz,
                  Eigen::VectorXd::Ones(freq_hz.size()).eval()}});
            if (theory_ok) {
                svg::PlotSpec ps;
                ps.title = "Predicted limit error spectrum";
                ps.x_label = "frequency [Hz]";
                ps.y_label = "power density";
                ps.log_y = true;
                svg::write_plot((dir / "predict_spectra.svg").string(), ps,
                                {{"phi_e_inf", freq_hz, phi_inf},
                                 {"phi_v", freq_hz, phi_v.phi},
                                 {"2 phi_v", freq_hz,
                                  (2.0 * phi_v.phi).eval()}});
            }
        }
        return {Status::Ok, "ok"};
    } catch (const config::ConfigError& e) {
        return {Status::BadConfig, e.what()};
    } catch (const std::exception& e) {
        return {Status::Failed, e.what()};
    }
}

Outcome sweep_experiment(config::ExperimentConfig cfg, const Overrides& ov) {
    try {
        apply_overrides(cfg, ov);
        if (cfg.algorithm.variant != config::Variant::Optimization)
            return {Status::BadConfig,
                    "algorithm.variant: sweep requires the optimization "
                    "variant"};
        const std::vector<double> lambdas = cfg.sweep_lambdas();
        if (lambdas.empty())
            return {Status::BadConfig,
                    "sweep: requires lambdas or a lambda log range"};
        cfg.validate();

        struct Entry {
            int index = 0;
            double lambda = 0.0;
            double weight = 0.0;
            config::ExperimentConfig cfg;
            fs::path dir;
        };
        const fs::path base = cfg.output.directory;
        fs::create_directories(base);
        std::vector<Entry> entries;
        int index = 0;
        for (const double lam : lambdas)
            for (const double w : cfg.sweep.fusion_weights) {
                Entry e;
                e.index = index;
                e.lambda = lam;
                e.weight = w;
                e.cfg = cfg;
                e.cfg.algorithm.lambda = lam;
                e.cfg.algorithm.fusion_weight = w;
                e.dir = base / fmt_index("sweep_", index, "");
                e.cfg.output.directory = e.dir.string();
                entries.push_back(std::move(e));
                ++index;
            }

        struct Row {
            bool failed = false;
            std::string error;
            double lambda_effective = kNan;
            double e0 = kNan, e_final = kNan;
            int f_card = 0, df_card = 0;
            double objective_final = kNan;
            bool converged_all = false;
            int warnings = 0;
        };
        std::vector<Row> rows(entries.size());

        const auto work = [&](const Entry& entry) {
            Row& row = rows[static_cast<size_t>(entry.index)];
            try {
                RunArtifacts art = execute_run(entry.cfg);
                const std::vector<std::string> extra = write_run_outputs(
                    entry.cfg, art, entry.dir, entry.cfg.output.plots);
                const auto& records = art.res.records;
                row.lambda_effective = art.sys.lambda_effective;
                row.e0 = records.front().e_norm2;
                row.e_final = records.back().e_norm2;
                row.f_card = records.back().f_card;
                row.df_card = records.back().df_card;
                row.objective_final = records.size() >= 2
                                          ? records[records.size() - 2].objective
                                          : kNan;
                row.converged_all = true;
                for (size_t j = 0; j + 1 < records.size(); ++j)
                    row.converged_all &= records[j].converged;
                row.warnings = static_cast<int>(art.sys.warnings.size() +
                                                art.res.warnings.size() +
                                                extra.size());
            } catch (const std::exception& e) {
                row.failed = true;
                row.error = e.what();
            }
        };

        const int threads =
            std::max(1, std::min(ov.threads, static_cast<int>(entries.size())));
        if (threads == 1) {
            for (const Entry& e : entries) work(e);
        } else {
            std::atomic<size_t> next{0};
            std::vector<std::thread> pool;
            pool.reserve(static_cast<size_t>(threads));
            for (int t = 0; t < threads; ++t)
                pool.emplace_back([&] {
                    for (size_t i = next.fetch_add(1); i < entries.size();
                         i = next.fetch_add(1))
                        work(entries[i]);
                });
            for (auto& th : pool) th.join();
        }

        csv::Writer w({"entry", "lambda", "fusion_weight", "lambda_effective",
                       "e0_norm2", "e_final_norm2", "f_final_card",
                       "df_final_card", "objective_final", "converged_all",
                       "warnings"});
        std::vector<std::string> failures;
        int total_warnings = 0;
        for (size_t i = 0; i < entries.size(); ++i) {
            const Row& row = rows[i];
            const Entry& entry = entries[i];
            w.add_row({csv::format_int(entry.index),
                       csv::format_double(entry.lambda),
                       csv::format_double(entry.weight),
                       csv::format_double(row.lambda_effective),
                       csv::format_double(row.e0),
                       csv::format_double(row.e_final),
                       csv::format_int(row.f_card),
                       csv::format_int(row.df_card),
                       csv::format_double(row.objective_final),
                       csv::format_int(row.converged_all ? 1 : 0),
                       csv::format_int(row.warnings)});
            if (row.failed)
                failures.push_back("entry " + std::to_string(entry.index) +
                                   ": " + row.error);
            total_warnings += row.warnings;
        }
        w.write((base / "sweep_summary.csv").string());

        if (!failures.empty()) return {Status::Failed, join_messages(failures)};
        if (total_warnings > 0)
            return {Status::CompletedWithWarnings,
                    std::to_string(total_warnings) +
                        " warnings across sweep entries (see per-entry "
                        "summary.csv)"};
        return {Status::Ok, "ok"};
    } catch (const config::ConfigError& e) {
        return {Status::BadConfig, e.what()};
    } catch (const std::exception& e) {
        return {Status::Failed, e.what()};
    }
}

}  // namespace silc::experiment
