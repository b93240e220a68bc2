#include "config.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <fstream>
#include <sstream>

#include "csv.hpp"

namespace silc::config {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
    throw ConfigError(where + ": " + msg);
}

double parse_double(const std::string& where, const std::string& v) {
    try {
        size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) fail(where, "trailing characters in '" + v + "'");
        return x;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        fail(where, "not a number ('" + v + "')");
    }
}

int parse_int(const std::string& where, const std::string& v) {
    try {
        size_t pos = 0;
        const long x = std::stol(v, &pos);
        if (pos != v.size()) fail(where, "trailing characters in '" + v + "'");
        if (x < INT_MIN || x > INT_MAX) fail(where, "out of range ('" + v + "')");
        return static_cast<int>(x);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        fail(where, "not an integer ('" + v + "')");
    }
}

std::uint64_t parse_u64(const std::string& where, const std::string& v) {
    try {
        size_t pos = 0;
        const unsigned long long x = std::stoull(v, &pos);
        if (pos != v.size()) fail(where, "trailing characters in '" + v + "'");
        return x;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        fail(where, "not an unsigned integer ('" + v + "')");
    }
}

bool parse_bool(const std::string& where, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    fail(where, "expected true or false ('" + v + "')");
}

std::vector<double> parse_double_list(const std::string& where,
                                      const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) fail(where, "empty list element");
        out.push_back(parse_double(where, item));
    }
    if (out.empty()) fail(where, "empty list");
    return out;
}

std::vector<int> parse_int_list(const std::string& where,
                                const std::string& v) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) fail(where, "empty list element");
        out.push_back(parse_int(where, item));
    }
    if (out.empty()) fail(where, "empty list");
    return out;
}

template <typename Enum>
Enum parse_enum(const std::string& where, const std::string& v,
                const std::vector<std::pair<std::string, Enum>>& table) {
    std::string allowed;
    for (const auto& [name, val] : table) {
        if (v == name) return val;
        if (!allowed.empty()) allowed += ", ";
        allowed += name;
    }
    fail(where, "expected one of {" + allowed + "} ('" + v + "')");
}

const std::vector<std::pair<std::string, PlantSource>> kPlantSource = {
    {"surrogate", PlantSource::Surrogate},
    {"coefficients", PlantSource::Coefficients}};
const std::vector<std::pair<std::string, NoiseShapeSource>> kNoiseSource = {
    {"sensitivity", NoiseShapeSource::Sensitivity},
    {"coefficients", NoiseShapeSource::Coefficients}};
const std::vector<std::pair<std::string, Variant>> kVariant = {
    {"inverse_model", Variant::InverseModel},
    {"norm_optimal", Variant::NormOptimal},
    {"optimization", Variant::Optimization},
    {"basis", Variant::Basis}};
const std::vector<std::pair<std::string, LambdaMode>> kLambdaMode = {
    {"absolute", LambdaMode::Absolute}, {"relative", LambdaMode::Relative}};
const std::vector<std::pair<std::string, PenaltyKind>> kPenaltyKind = {
    {"identity", PenaltyKind::Identity},
    {"fused", PenaltyKind::Fused},
    {"sparse_fused", PenaltyKind::SparseFused},
    {"incremental", PenaltyKind::Incremental}};
const std::vector<std::pair<std::string, SolverRoute>> kSolverRoute = {
    {"admm", SolverRoute::Admm}, {"increments", SolverRoute::Increments}};

template <typename Enum>
std::string enum_name(Enum v,
                      const std::vector<std::pair<std::string, Enum>>& table) {
    for (const auto& [name, val] : table)
        if (val == v) return name;
    return "?";
}

std::string join_doubles(const std::vector<double>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += csv::format_double(v[i]);
    }
    return out;
}

std::string join_ints(const std::vector<int>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(v[i]);
    }
    return out;
}

void apply_plant(PlantConfig& p, const std::string& key, const std::string& v,
                 const std::string& where) {
    if (key == "source") p.source = parse_enum(where, v, kPlantSource);
    else if (key == "mass") p.surrogate.mass = parse_double(where, v);
    else if (key == "numerator_zero")
        p.surrogate.numerator_zero = parse_double(where, v);
    else if (key == "resonance_hz")
        p.surrogate.resonance_hz = parse_double(where, v);
    else if (key == "resonance_damping")
        p.surrogate.resonance_damping = parse_double(where, v);
    else if (key == "modal_mass") p.surrogate.modal_mass = parse_double(where, v);
    else if (key == "lead_zero_hz")
        p.surrogate.lead_zero_hz = parse_double(where, v);
    else if (key == "lead_pole_hz")
        p.surrogate.lead_pole_hz = parse_double(where, v);
    else if (key == "lag_zero_hz")
        p.surrogate.lag_zero_hz = parse_double(where, v);
    else if (key == "lag_pole_hz")
        p.surrogate.lag_pole_hz = parse_double(where, v);
    else if (key == "crossover_hz")
        p.surrogate.crossover_hz = parse_double(where, v);
    else if (key == "g_num") p.g_num = parse_double_list(where, v);
    else if (key == "g_den") p.g_den = parse_double_list(where, v);
    else if (key == "c_num") p.c_num = parse_double_list(where, v);
    else if (key == "c_den") p.c_den = parse_double_list(where, v);
    else if (key == "h_source") p.h_source = parse_enum(where, v, kNoiseSource);
    else if (key == "h_num") p.h_num = parse_double_list(where, v);
    else if (key == "h_den") p.h_den = parse_double_list(where, v);
    else if (key == "lambda_e") p.lambda_e = parse_double(where, v);
    else if (key == "model_gain") p.model_gain = parse_double(where, v);
    else fail(where, "unknown key");
}

void apply_task(TaskConfig& t, const std::string& key, const std::string& v,
                const std::string& where) {
    if (key == "n") t.n = parse_int(where, v);
    else if (key == "sample_rate_hz") t.sample_rate_hz = parse_double(where, v);
    else if (key == "move_distance") t.move_distance = parse_double(where, v);
    else if (key == "max_velocity") t.max_velocity = parse_double(where, v);
    else if (key == "max_acceleration")
        t.max_acceleration = parse_double(where, v);
    else fail(where, "unknown key");
}

void apply_algorithm(AlgorithmConfig& a, const std::string& key,
                     const std::string& v, const std::string& where) {
    if (key == "variant") a.variant = parse_enum(where, v, kVariant);
    else if (key == "alpha") a.alpha = parse_double(where, v);
    else if (key == "we") a.we = parse_double(where, v);
    else if (key == "wf") a.wf = parse_double(where, v);
    else if (key == "wdf") a.wdf = parse_double(where, v);
    else if (key == "lambda") a.lambda = parse_double(where, v);
    else if (key == "lambda_mode")
        a.lambda_mode = parse_enum(where, v, kLambdaMode);
    else if (key == "d_kind") a.d_kind = parse_enum(where, v, kPenaltyKind);
    else if (key == "fusion_weight") a.fusion_weight = parse_double(where, v);
    else if (key == "debias") a.debias = parse_bool(where, v);
    else if (key == "solver_route")
        a.solver_route = parse_enum(where, v, kSolverRoute);
    else if (key == "rho") a.solver.rho = parse_double(where, v);
    else if (key == "over_relaxation")
        a.solver.over_relaxation = parse_double(where, v);
    else if (key == "abs_tolerance") a.solver.abs_tol = parse_double(where, v);
    else if (key == "rel_tolerance") a.solver.rel_tol = parse_double(where, v);
    else if (key == "kkt_tolerance")
        a.solver.kkt_tolerance = parse_double(where, v);
    else if (key == "max_iterations")
        a.solver.max_iterations = parse_int(where, v);
    else if (key == "zero_snap") a.solver.zero_snap = parse_double(where, v);
    else if (key == "basis_orders") a.basis_orders = parse_int_list(where, v);
    else if (key == "t_multiplier") a.t_multiplier = parse_double(where, v);
    else fail(where, "unknown key");
}

void apply_run(RunSection& r, const std::string& key, const std::string& v,
               const std::string& where) {
    if (key == "n_trials") r.n_trials = parse_int(where, v);
    else if (key == "seed") {
        r.seed = parse_u64(where, v);
        r.seed_set = true;
    } else if (key == "noise") r.noise = parse_bool(where, v);
    else if (key == "n_conv") r.n_conv = parse_int(where, v);
    else if (key == "n_iter") r.n_iter = parse_int(where, v);
    else fail(where, "unknown key");
}

void apply_sweep(SweepConfig& s, const std::string& key, const std::string& v,
                 const std::string& where) {
    if (key == "lambdas") s.lambdas = parse_double_list(where, v);
    else if (key == "lambda_log_min") {
        s.lambda_log_min = parse_double(where, v);
        s.has_log_range = true;
    } else if (key == "lambda_log_max") {
        s.lambda_log_max = parse_double(where, v);
        s.has_log_range = true;
    } else if (key == "lambda_log_count") {
        s.lambda_log_count = parse_int(where, v);
        s.has_log_range = true;
    } else if (key == "fusion_weights")
        s.fusion_weights = parse_double_list(where, v);
    else fail(where, "unknown key");
}

void apply_output(OutputConfig& o, const std::string& key,
                  const std::string& v, const std::string& where) {
    if (key == "directory") {
        if (v.empty()) fail(where, "empty path");
        o.directory = v;
    } else if (key == "plots") o.plots = parse_bool(where, v);
    else if (key == "signal_trials") o.signal_trials = parse_int_list(where, v);
    else fail(where, "unknown key");
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string s = trim(line);
        if (s.empty() || s[0] == '#' || s[0] == ';') continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw ConfigError("line " + std::to_string(line_no) +
                                  ": unterminated section header");
            section = trim(s.substr(1, s.size() - 2));
            if (section != "plant" && section != "task" &&
                section != "algorithm" && section != "run" &&
                section != "sweep" && section != "output")
                throw ConfigError("[" + section + "]: unknown section");
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) +
                              ": expected 'key = value'");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (key.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        if (section.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": '" + key +
                              "' appears before any [section]");
        const std::string where = section + "." + key;
        if (section == "plant") apply_plant(cfg.plant, key, value, where);
        else if (section == "task") apply_task(cfg.task, key, value, where);
        else if (section == "algorithm")
            apply_algorithm(cfg.algorithm, key, value, where);
        else if (section == "run") apply_run(cfg.run, key, value, where);
        else if (section == "sweep") apply_sweep(cfg.sweep, key, value, where);
        else apply_output(cfg.output, key, value, where);
    }
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

void ExperimentConfig::validate() const {
    if (task.n < 2) fail("task.n", "must be at least 2");
    if (!(task.sample_rate_hz > 0.0))
        fail("task.sample_rate_hz", "must be positive");
    if (!(task.move_distance >= 0.0))
        fail("task.move_distance", "must be nonnegative");
    if (!(task.max_velocity > 0.0)) fail("task.max_velocity", "must be positive");
    if (!(task.max_acceleration > 0.0))
        fail("task.max_acceleration", "must be positive");

    if (plant.source == PlantSource::Coefficients) {
        if (plant.g_num.empty() || plant.g_den.empty())
            fail("plant.g_num", "required when source = coefficients");
        if (plant.c_num.empty() || plant.c_den.empty())
            fail("plant.c_num", "required when source = coefficients");
    }
    if (plant.h_source == NoiseShapeSource::Coefficients &&
        (plant.h_num.empty() || plant.h_den.empty()))
        fail("plant.h_num", "required when h_source = coefficients");
    if (!(plant.lambda_e >= 0.0)) fail("plant.lambda_e", "must be nonnegative");
    if (plant.model_gain == 0.0) fail("plant.model_gain", "must be nonzero");

    if (!(algorithm.we >= 0.0)) fail("algorithm.we", "must be nonnegative");
    if (!(algorithm.wf >= 0.0)) fail("algorithm.wf", "must be nonnegative");
    if (!(algorithm.wdf >= 0.0)) fail("algorithm.wdf", "must be nonnegative");
    if (!(algorithm.lambda >= 0.0)) fail("algorithm.lambda", "must be nonnegative");
    if (!(algorithm.fusion_weight > 0.0))
        fail("algorithm.fusion_weight", "must be positive");
    if (!(algorithm.t_multiplier >= 1.0))
        fail("algorithm.t_multiplier", "must be at least 1");
    for (const int k : algorithm.basis_orders)
        if (k < 1 || k >= task.n)
            fail("algorithm.basis_orders",
                 "orders must lie in [1, n), got " + std::to_string(k));
    try {
        algorithm.solver.validate();
    } catch (const std::exception& e) {
        fail("algorithm", e.what());
    }

    if (run.n_trials < 1) fail("run.n_trials", "must be at least 1");
    if (run.noise && !run.seed_set)
        fail("run.seed", "required when noise is enabled");
    if (run.n_conv < 0) fail("run.n_conv", "must be nonnegative");
    if (run.n_iter < 0) fail("run.n_iter", "must be nonnegative");

    for (const double l : sweep.lambdas)
        if (!(l >= 0.0)) fail("sweep.lambdas", "values must be nonnegative");
    if (sweep.has_log_range) {
        if (!(sweep.lambda_log_min > 0.0))
            fail("sweep.lambda_log_min", "must be positive");
        if (!(sweep.lambda_log_max >= sweep.lambda_log_min))
            fail("sweep.lambda_log_max", "must be at least lambda_log_min");
        if (sweep.lambda_log_count < 1)
            fail("sweep.lambda_log_count", "must be at least 1");
    }
    for (const double w : sweep.fusion_weights)
        if (!(w > 0.0)) fail("sweep.fusion_weights", "values must be positive");

    for (const int t : output.signal_trials)
        if (t < -1)
            fail("output.signal_trials",
                 "trial indices must be >= -1 (-1 names the last trial)");
}

std::string ExperimentConfig::serialize() const {
    std::ostringstream out;
    const auto d = [](double v) { return csv::format_double(v); };

    out << "[plant]\n";
    out << "source = " << enum_name(plant.source, kPlantSource) << "\n";
    out << "mass = " << d(plant.surrogate.mass) << "\n";
    out << "numerator_zero = " << d(plant.surrogate.numerator_zero) << "\n";
    out << "resonance_hz = " << d(plant.surrogate.resonance_hz) << "\n";
    out << "resonance_damping = " << d(plant.surrogate.resonance_damping)
        << "\n";
    out << "modal_mass = " << d(plant.surrogate.modal_mass) << "\n";
    out << "lead_zero_hz = " << d(plant.surrogate.lead_zero_hz) << "\n";
    out << "lead_pole_hz = " << d(plant.surrogate.lead_pole_hz) << "\n";
    out << "lag_zero_hz = " << d(plant.surrogate.lag_zero_hz) << "\n";
    out << "lag_pole_hz = " << d(plant.surrogate.lag_pole_hz) << "\n";
    out << "crossover_hz = " << d(plant.surrogate.crossover_hz) << "\n";
    if (!plant.g_num.empty()) out << "g_num = " << join_doubles(plant.g_num) << "\n";
    if (!plant.g_den.empty()) out << "g_den = " << join_doubles(plant.g_den) << "\n";
    if (!plant.c_num.empty()) out << "c_num = " << join_doubles(plant.c_num) << "\n";
    if (!plant.c_den.empty()) out << "c_den = " << join_doubles(plant.c_den) << "\n";
    out << "h_source = " << enum_name(plant.h_source, kNoiseSource) << "\n";
    if (!plant.h_num.empty()) out << "h_num = " << join_doubles(plant.h_num) << "\n";
    if (!plant.h_den.empty()) out << "h_den = " << join_doubles(plant.h_den) << "\n";
    out << "lambda_e = " << d(plant.lambda_e) << "\n";
    out << "model_gain = " << d(plant.model_gain) << "\n";

    out << "\n[task]\n";
    out << "n = " << task.n << "\n";
    out << "sample_rate_hz = " << d(task.sample_rate_hz) << "\n";
    out << "move_distance = " << d(task.move_distance) << "\n";
    out << "max_velocity = " << d(task.max_velocity) << "\n";
    out << "max_acceleration = " << d(task.max_acceleration) << "\n";

    out << "\n[algorithm]\n";
    out << "variant = " << enum_name(algorithm.variant, kVariant) << "\n";
    out << "alpha = " << d(algorithm.alpha) << "\n";
    out << "we = " << d(algorithm.we) << "\n";
    out << "wf = " << d(algorithm.wf) << "\n";
    out << "wdf = " << d(algorithm.wdf) << "\n";
    out << "lambda = " << d(algorithm.lambda) << "\n";
    out << "lambda_mode = " << enum_name(algorithm.lambda_mode, kLambdaMode)
        << "\n";
    out << "d_kind = " << enum_name(algorithm.d_kind, kPenaltyKind) << "\n";
    out << "fusion_weight = " << d(algorithm.fusion_weight) << "\n";
    out << "debias = " << (algorithm.debias ? "true" : "false") << "\n";
    out << "solver_route = " << enum_name(algorithm.solver_route, kSolverRoute)
        << "\n";
    out << "rho = " << d(algorithm.solver.rho) << "\n";
    out << "over_relaxation = " << d(algorithm.solver.over_relaxation) << "\n";
    out << "abs_tolerance = " << d(algorithm.solver.abs_tol) << "\n";
    out << "rel_tolerance = " << d(algorithm.solver.rel_tol) << "\n";
    out << "kkt_tolerance = " << d(algorithm.solver.kkt_tolerance) << "\n";
    out << "max_iterations = " << algorithm.solver.max_iterations << "\n";
    out << "zero_snap = " << d(algorithm.solver.zero_snap) << "\n";
    out << "basis_orders = " << join_ints(algorithm.basis_orders) << "\n";
    out << "t_multiplier = " << d(algorithm.t_multiplier) << "\n";

    out << "\n[run]\n";
    out << "n_trials = " << run.n_trials << "\n";
    if (run.seed_set) out << "seed = " << run.seed << "\n";
    out << "noise = " << (run.noise ? "true" : "false") << "\n";
    out << "n_conv = " << run.n_conv << "\n";
    out << "n_iter = " << run.n_iter << "\n";

    out << "\n[sweep]\n";
    if (!sweep.lambdas.empty())
        out << "lambdas = " << join_doubles(sweep.lambdas) << "\n";
    if (sweep.has_log_range) {
        out << "lambda_log_min = " << d(sweep.lambda_log_min) << "\n";
        out << "lambda_log_max = " << d(sweep.lambda_log_max) << "\n";
        out << "lambda_log_count = " << sweep.lambda_log_count << "\n";
    }
    out << "fusion_weights = " << join_doubles(sweep.fusion_weights) << "\n";

    out << "\n[output]\n";
    out << "directory = " << output.directory << "\n";
    out << "plots = " << (output.plots ? "true" : "false") << "\n";
    out << "signal_trials = " << join_ints(output.signal_trials) << "\n";
    return out.str();
}

std::vector<double> ExperimentConfig::sweep_lambdas() const {
    std::vector<double> out = sweep.lambdas;
    if (sweep.has_log_range) {
        const double lmin = std::log(sweep.lambda_log_min);
        const double lmax = std::log(sweep.lambda_log_max);
        const int count = sweep.lambda_log_count;
        for (int i = 0; i < count; ++i) {
            const double t =
                count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
            out.push_back(std::exp(lmin + t * (lmax - lmin)));
        }
    }
    return out;
}

engine::ReferenceProfile ExperimentConfig::reference_profile() const {
    engine::ReferenceProfile p;
    p.distance = task.move_distance;
    p.max_velocity = task.max_velocity;
    p.max_acceleration = task.max_acceleration;
    p.sample_period = 1.0 / task.sample_rate_hz;
    p.n = task.n;
    return p;
}

engine::SurrogateParams ExperimentConfig::surrogate_params() const {
    engine::SurrogateParams p = plant.surrogate;
    p.sample_period = 1.0 / task.sample_rate_hz;
    return p;
}

}  // namespace silc::config
