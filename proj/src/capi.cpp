#include "silc.h"

#include <new>
#include <string>

#include "config.hpp"
#include "experiment.hpp"

using silc::config::ConfigError;
using silc::config::ExperimentConfig;
using silc::experiment::Outcome;
using silc::experiment::Overrides;
using silc::experiment::Status;

struct silc_experiment {
    ExperimentConfig cfg;
    Overrides overrides;
    bool parse_failed = false;
    std::string message = "ok";
    std::string serialized;
};

namespace {

int store(silc_experiment* exp, const Outcome& outcome) {
    exp->message = outcome.message;
    return static_cast<int>(outcome.status);
}

silc_experiment* create_from_text(const std::string& text, int* status) {
    auto* exp = new (std::nothrow) silc_experiment();
    if (!exp) {
        if (status) *status = SILC_RUNTIME_FAILURE;
        return nullptr;
    }
    int code = SILC_OK;
    try {
        exp->cfg = silc::config::parse_config(text);
        exp->serialized = exp->cfg.serialize();
    } catch (const std::exception& e) {
        exp->parse_failed = true;
        exp->message = e.what();
        code = SILC_CONFIG_ERROR;
    }
    if (status) *status = code;
    return exp;
}

int guard_parse(silc_experiment* exp) {
    if (!exp) return SILC_RUNTIME_FAILURE;
    if (exp->parse_failed) return SILC_CONFIG_ERROR;
    return SILC_OK;
}

}  // namespace

silc_experiment* silc_experiment_create(const char* config_text, int* status) {
    return create_from_text(config_text ? config_text : "", status);
}

silc_experiment* silc_experiment_open(const char* config_path, int* status) {
    auto* exp = new (std::nothrow) silc_experiment();
    if (!exp) {
        if (status) *status = SILC_RUNTIME_FAILURE;
        return nullptr;
    }
    int code = SILC_OK;
    try {
        exp->cfg =
            silc::config::load_config_file(config_path ? config_path : "");
        exp->serialized = exp->cfg.serialize();
    } catch (const std::exception& e) {
        exp->parse_failed = true;
        exp->message = e.what();
        code = SILC_CONFIG_ERROR;
    }
    if (status) *status = code;
    return exp;
}

void silc_experiment_destroy(silc_experiment* exp) { delete exp; }

int silc_experiment_set_option(silc_experiment* exp, const char* key,
                               const char* value) {
    if (!exp) return SILC_RUNTIME_FAILURE;
    const std::string k = key ? key : "";
    const std::string v = value ? value : "";
    try {
        if (k == "seed") {
            size_t pos = 0;
            exp->overrides.seed = std::stoull(v, &pos);
            if (pos != v.size()) throw ConfigError("seed: not an integer");
        } else if (k == "out") {
            if (v.empty()) throw ConfigError("out: empty path");
            exp->overrides.out_dir = v;
        } else if (k == "plots") {
            if (v == "true") exp->overrides.plots = true;
            else if (v == "false") exp->overrides.plots = false;
            else throw ConfigError("plots: expected true or false");
        } else if (k == "threads") {
            size_t pos = 0;
            const int t = std::stoi(v, &pos);
            if (pos != v.size() || t < 1)
                throw ConfigError("threads: expected a positive integer");
            exp->overrides.threads = t;
        } else {
            throw ConfigError("unknown option '" + k + "'");
        }
        exp->message = "ok";
        return SILC_OK;
    } catch (const std::exception& e) {
        exp->message = e.what();
        return SILC_CONFIG_ERROR;
    }
}

int silc_run(silc_experiment* exp) {
    if (const int code = guard_parse(exp); code != SILC_OK) return code;
    return store(exp, silc::experiment::run_experiment(exp->cfg,
                                                       exp->overrides));
}

int silc_sweep(silc_experiment* exp) {
    if (const int code = guard_parse(exp); code != SILC_OK) return code;
    return store(exp, silc::experiment::sweep_experiment(exp->cfg,
                                                         exp->overrides));
}

int silc_predict(silc_experiment* exp) {
    if (const int code = guard_parse(exp); code != SILC_OK) return code;
    return store(exp,
                 silc::experiment::predict_report(exp->cfg, exp->overrides));
}

int silc_analyze(silc_experiment* exp, const char* records_path) {
    if (const int code = guard_parse(exp); code != SILC_OK) return code;
    if (!records_path || !*records_path) {
        exp->message = "records: path is empty";
        return SILC_CONFIG_ERROR;
    }
    return store(exp, silc::experiment::analyze_records(
                          exp->cfg, records_path, exp->overrides));
}

const char* silc_last_message(const silc_experiment* exp) {
    return exp ? exp->message.c_str() : "";
}

const char* silc_config_text(const silc_experiment* exp) {
    return exp ? exp->serialized.c_str() : "";
}

const char* silc_version(void) { return "0.1.0"; }
