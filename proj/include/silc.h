/* C interface to the sparse iterative learning control library.
 *
 * Usage: create an experiment handle from configuration text or a file,
 * optionally override options, then invoke commands.  Every call returns
 * a status code; silc_last_message() holds the matching human-readable
 * explanation (warnings, field-level config diagnostics, or "ok").
 *
 * Creation always returns a handle, even when the configuration fails to
 * parse, so the failure message can be retrieved; commands on such a
 * handle keep returning SILC_CONFIG_ERROR.  Handles are not thread-safe;
 * use one handle per thread.
 */
#ifndef SILC_H
#define SILC_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define SILC_OK 0
#define SILC_CONFIG_ERROR 1
#define SILC_WARNINGS 2
#define SILC_RUNTIME_FAILURE 3

typedef struct silc_experiment silc_experiment;

/* Parses configuration text.  Never returns NULL except on allocation
 * failure.  If status is non-NULL it receives SILC_OK or
 * SILC_CONFIG_ERROR. */
silc_experiment* silc_experiment_create(const char* config_text, int* status);

/* Reads and parses a configuration file. */
silc_experiment* silc_experiment_open(const char* config_path, int* status);

void silc_experiment_destroy(silc_experiment* exp);

/* Keys: "seed" (unsigned integer), "out" (directory path), "plots"
 * ("true"/"false"), "threads" (positive integer, sweep only).  Returns
 * SILC_OK or SILC_CONFIG_ERROR. */
int silc_experiment_set_option(silc_experiment* exp, const char* key,
                               const char* value);

/* Runs the configured trial loop and writes CSV/SVG artifacts. */
int silc_run(silc_experiment* exp);

/* Runs the (lambda, fusion_weight) grid and writes sweep_summary.csv. */
int silc_sweep(silc_experiment* exp);

/* Writes the frequency-domain convergence and limit-spectrum report;
 * refuses algorithms without a closed-form frequency response. */
int silc_predict(silc_experiment* exp);

/* Analyzes an errors.csv produced by silc_run. */
int silc_analyze(silc_experiment* exp, const char* records_path);

/* Message from the most recent call on this handle.  Owned by the
 * handle; valid until the next call or destruction. */
const char* silc_last_message(const silc_experiment* exp);

/* Canonical serialized form of the parsed configuration; empty when
 * parsing failed. */
const char* silc_config_text(const silc_experiment* exp);

const char* silc_version(void);

#ifdef __cplusplus
}
#endif

#endif /* SILC_H */
