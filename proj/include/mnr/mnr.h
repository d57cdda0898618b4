/*
 * C interface to the Markov-neighborhood-regression library.
 *
 * All objects are opaque handles created and destroyed by the library.
 * Functions return mnr_status; on any status other than MNR_OK a
 * human-readable message is available from mnr_last_error() until the next
 * library call on the same thread. Strings written through char** output
 * parameters are owned by the caller and released with mnr_string_free().
 *
 * Structured inputs (simulation setups, inference options, benchmark
 * configurations) are JSON documents; feature indices in every JSON or CSV
 * payload are 1-based.
 */
#ifndef MNR_MNR_H
#define MNR_MNR_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mnr_status {
    MNR_OK = 0,
    MNR_EINVAL = 2,   /* invalid argument or option value */
    MNR_EPARSE = 3,   /* malformed CSV/JSON input */
    MNR_ENUMERIC = 4, /* numerical failure (singular fit, no convergence, ...) */
    MNR_EBAND = 5,    /* benchmark ran, but a required metric band failed */
    MNR_EIO = 6       /* file system failure */
} mnr_status;

typedef struct mnr_dataset mnr_dataset;
typedef struct mnr_report mnr_report;

/* Library version as "major.minor.patch". Static storage; do not free. */
const char *mnr_version(void);

/* Message for the most recent failure on this thread. Static storage. */
const char *mnr_last_error(void);

void mnr_string_free(char *s);

/*
 * Simulation. config_json:
 *   {
 *     "generator": {"kind": "identity|toeplitz|equicorr|ar2_precision",
 *                    "rho": 0.9, "p": 200, "n": 200},
 *     "model": {"family": "gaussian|binomial|cox", "intercept": 1.0,
 *                "beta": {"1": 2.0, "2": 4.0}, "sigma2": 1.0,
 *                "lambda0": 0.1, "lambda_c": 1.0},
 *     "seed": 1
 *   }
 */
mnr_status mnr_simulate(const char *config_json, mnr_dataset **out);

/* family: "gaussian", "binomial" or "cox". response/event name the
 * response and event-indicator columns; pass NULL for the defaults
 * ("y" / "event"). The event column applies to cox data only. */
mnr_status mnr_dataset_read_csv(const char *path, const char *family,
                                const char *response, const char *event,
                                mnr_dataset **out);
mnr_status mnr_dataset_write_csv(const mnr_dataset *ds, const char *path);

size_t mnr_dataset_rows(const mnr_dataset *ds);
size_t mnr_dataset_cols(const mnr_dataset *ds);

/* Generating configuration for simulated data (JSON), or NULL when the
 * dataset was read from a file. Owned by the dataset; do not free. */
const char *mnr_dataset_truth_json(const mnr_dataset *ds);

void mnr_dataset_free(mnr_dataset *ds);

/*
 * Inference. options_json (all fields optional):
 *   {
 *     "pipeline": "mnr|mnr_screen|causal|desparsified",   default "mnr"
 *     "level": 0.95, "selection": "", "blanket": "nodewise|corr_screen",
 *     "screen_cap": 0, "model_cap": 0, "blanket_cap": 0,
 *     "nodewise_gamma": 1.0, "causal_alpha": 0.05,
 *     "threads": 1, "seed": 0
 *   }
 */
mnr_status mnr_infer(const mnr_dataset *ds, const char *options_json,
                     mnr_report **out);

mnr_status mnr_report_to_json(const mnr_report *rep, char **out);
mnr_status mnr_report_to_csv(const mnr_report *rep, char **out);

void mnr_report_free(mnr_report *rep);

/*
 * Monte-Carlo benchmark. config_json is the experiment configuration
 * (see the README for the schema). On success *result_json holds
 *   {"metrics": {...}, "bands": [{"metric", "min", "max", "value", "pass"}],
 *    "pass": true|false}.
 * Returns MNR_EBAND (with the result still written) when any configured
 * band fails.
 */
mnr_status mnr_bench_run(const char *config_json, int threads, char **result_json);

/* Re-render a metrics JSON document (the "metrics" object above). */
mnr_status mnr_metrics_to_csv(const char *metrics_json, char **out);
mnr_status mnr_metrics_to_markdown(const char *metrics_json, char **out);

#ifdef __cplusplus
}
#endif

#endif /* MNR_MNR_H */
