/* C boundary of the MEC toolkit. Everything here is plain C: opaque
 * handles, status codes, UTF-8 strings. Strings returned through char**
 * are owned by the caller and released with mec_free(). */
#ifndef MEC_H
#define MEC_H

#include <stdint.h>

#if defined(__GNUC__)
#define MEC_API __attribute__((visibility("default")))
#else
#define MEC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mec_status {
    MEC_OK = 0,
    MEC_ERR_INVALID_ARGUMENT = 1,
    MEC_ERR_IO = 2,
    MEC_ERR_CONFIG = 3,
    MEC_ERR_VALIDATION = 4,
    MEC_ERR_RUNTIME = 5
} mec_status;

/* Library version, "major.minor.patch". Static storage, do not free. */
MEC_API const char* mec_version(void);

/* Message of the last failing call on this thread, empty string if none.
 * Valid until the next failing call on the same thread; do not free. */
MEC_API const char* mec_last_error(void);

/* Releases a string returned through a char** out parameter. NULL is ok. */
MEC_API void mec_free(char* text);

/* ---- configuration ----------------------------------------------------- */

typedef struct mec_config mec_config;

/* Defaults for a scale preset; scale is "desk" or "paper" (NULL = "desk"). */
MEC_API mec_status mec_config_create(const char* scale, mec_config** out);

/* Defaults for the scale, then overrides from an INI-style file. */
MEC_API mec_status mec_config_load(const char* path, const char* scale, mec_config** out);

MEC_API mec_status mec_config_set(mec_config* cfg, const char* section, const char* key,
                                  const char* value);

/* Applies environment overrides PREFIX_SECTION_KEY=value (NULL = "MECSIM_"). */
MEC_API mec_status mec_config_apply_env(mec_config* cfg, const char* prefix);

/* Full configuration as INI text. */
MEC_API mec_status mec_config_dump(const mec_config* cfg, char** out_text);

MEC_API void mec_config_destroy(mec_config* cfg);

/* ---- pipeline commands -------------------------------------------------
 * Every command is deterministic in (config, seed) and writes its artifacts
 * into out_dir; wall-clock durations go only into manifest_*.json files.   */

/* Monte-Carlo dataset plus transmission probes under the nearest-BS plan.
 * Writes samples.csv, cycles.csv, probe_samples.csv, probe_cycles.csv.     */
MEC_API mec_status mec_run_simulate(const mec_config* cfg, uint64_t seed, const char* out_dir);

/* Trains the delay model(s) on samples.csv from out_dir. Writes
 * model_*.txt checkpoints, loss_*.csv curves, latent_scatter.csv.          */
MEC_API mec_status mec_run_train(const mec_config* cfg, uint64_t seed, const char* out_dir);

/* Builds the cost table from the probe artifacts in out_dir and solves the
 * allocation for one method: "proposed" (CVaR costs, bottleneck + local
 * search), "baseline1" (mean costs), "baseline2" (mean/CVaR blend), or
 * "oracle" (CVaR costs, exhaustive search). Writes plan_<method>.csv.
 * Out parameters may be NULL.                                              */
MEC_API mec_status mec_run_plan(const mec_config* cfg, uint64_t seed, const char* out_dir,
                                const char* method, double* out_objective_ms, int* out_iterations,
                                int* out_converged);

/* Evaluates stored plans on one shared noise stream. methods lists plan
 * names to evaluate; NULL (or n_methods 0) evaluates every plan_<m>.csv
 * found in out_dir. Writes eval_samples_<m>.csv, report.csv, cdf.csv; the
 * report.csv text is returned through out_report when non-NULL.            */
MEC_API mec_status mec_run_evaluate(const mec_config* cfg, uint64_t seed, const char* out_dir,
                                    const char* const* methods, int n_methods, char** out_report);

/* Sweeps one scenario axis, "fmax" or "ue", averaging per-method metrics
 * over experiment.n_seeds paired replicas. Writes sweep_<axis>.csv.        */
MEC_API mec_status mec_run_sweep(const mec_config* cfg, uint64_t seed, const char* out_dir,
                                 const char* axis, const char* const* methods, int n_methods);

/* End-to-end pipeline check on a built-in scenario under out_dir/selftest.
 * The log ("ok: ..." per check) is returned through out_log when non-NULL. */
MEC_API mec_status mec_run_selftest(const char* out_dir, char** out_log);

#ifdef __cplusplus
}
#endif

#endif /* MEC_H */
