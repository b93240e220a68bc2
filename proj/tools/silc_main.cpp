#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "silc.h"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string seed;
    std::string out_dir;
    bool no_plots = false;
    int threads = 1;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("config", flags.config_path, "experiment configuration file")
        ->required();
    cmd->add_option("--seed", flags.seed, "override the run seed");
    cmd->add_option("--out", flags.out_dir, "override the output directory");
    cmd->add_flag("--no-plots", flags.no_plots, "skip SVG plot output");
    cmd->add_option("--threads", flags.threads,
                    "worker threads for sweep entries")
        ->check(CLI::PositiveNumber);
}

struct HandleDeleter {
    void operator()(silc_experiment* exp) const {
        silc_experiment_destroy(exp);
    }
};
using Handle = std::unique_ptr<silc_experiment, HandleDeleter>;

int finish(silc_experiment* exp, int code) {
    const char* msg = silc_last_message(exp);
    if (code == SILC_OK) {
        if (msg && *msg) std::fprintf(stdout, "%s\n", msg);
    } else {
        std::fprintf(stderr, "%s\n", msg && *msg ? msg : "failed");
    }
    return code;
}

int open_and_configure(const CommonFlags& flags, Handle& handle) {
    int status = SILC_OK;
    handle.reset(silc_experiment_open(flags.config_path.c_str(), &status));
    if (!handle) {
        std::fprintf(stderr, "out of memory\n");
        return SILC_RUNTIME_FAILURE;
    }
    if (status != SILC_OK) return finish(handle.get(), status);
    if (!flags.seed.empty()) {
        const int code =
            silc_experiment_set_option(handle.get(), "seed", flags.seed.c_str());
        if (code != SILC_OK) return finish(handle.get(), code);
    }
    if (!flags.out_dir.empty()) {
        const int code =
            silc_experiment_set_option(handle.get(), "out", flags.out_dir.c_str());
        if (code != SILC_OK) return finish(handle.get(), code);
    }
    if (flags.no_plots) {
        const int code =
            silc_experiment_set_option(handle.get(), "plots", "false");
        if (code != SILC_OK) return finish(handle.get(), code);
    }
    if (flags.threads != 1) {
        const int code = silc_experiment_set_option(
            handle.get(), "threads", std::to_string(flags.threads).c_str());
        if (code != SILC_OK) return finish(handle.get(), code);
    }
    return SILC_OK;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse iterative learning control experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(silc_version()));

    CommonFlags run_flags, analyze_flags, predict_flags, sweep_flags;
    std::string records_path;

    CLI::App* run = app.add_subcommand(
        "run", "execute the configured trial loop and write artifacts");
    add_common(run, run_flags);

    CLI::App* analyze = app.add_subcommand(
        "analyze", "estimate spectra and limit error from recorded trials");
    add_common(analyze, analyze_flags);
    analyze
        ->add_option("records", records_path,
                     "errors.csv produced by a previous run")
        ->required();

    CLI::App* predict = app.add_subcommand(
        "predict", "frequency-domain convergence and limit-spectrum report");
    add_common(predict, predict_flags);

    CLI::App* sweep = app.add_subcommand(
        "sweep", "run the configured (lambda, fusion_weight) grid");
    add_common(sweep, sweep_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : SILC_CONFIG_ERROR;
    }

    Handle handle;
    if (run->parsed()) {
        if (const int code = open_and_configure(run_flags, handle);
            code != SILC_OK)
            return code;
        return finish(handle.get(), silc_run(handle.get()));
    }
    if (analyze->parsed()) {
        if (const int code = open_and_configure(analyze_flags, handle);
            code != SILC_OK)
            return code;
        return finish(handle.get(),
                      silc_analyze(handle.get(), records_path.c_str()));
    }
    if (predict->parsed()) {
        if (const int code = open_and_configure(predict_flags, handle);
            code != SILC_OK)
            return code;
        return finish(handle.get(), silc_predict(handle.get()));
    }
    if (const int code = open_and_configure(sweep_flags, handle);
        code != SILC_OK)
        return code;
    return finish(handle.get(), silc_sweep(handle.get()));
}
