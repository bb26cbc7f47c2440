/* Compiled as plain C: proves the boundary header and the shared library
 * are usable without a C++ toolchain. Drives one small pipeline end to end. */
#include <mec.h>

#include <stdio.h>
#include <stdlib.h>
#include <string.h>

static int failures = 0;

#define CHECK(cond)                                                  \
    do {                                                             \
        if (!(cond)) {                                               \
            fprintf(stderr, "FAIL %s:%d: %s (last error: %s)\n",     \
                    __FILE__, __LINE__, #cond, mec_last_error());    \
            failures++;                                              \
        }                                                            \
    } while (0)

static void set(mec_config* cfg, const char* s, const char* k, const char* v) {
    CHECK(mec_config_set(cfg, s, k, v) == MEC_OK);
}

int main(void) {
    CHECK(mec_version() != NULL);
    CHECK(strlen(mec_version()) >= 5);
    CHECK(mec_last_error()[0] == '\0');

    /* argument and error-code surface */
    CHECK(mec_config_create("desk", NULL) == MEC_ERR_INVALID_ARGUMENT);
    mec_config* bad = NULL;
    CHECK(mec_config_create("galactic", &bad) == MEC_ERR_CONFIG);
    CHECK(bad == NULL);
    CHECK(strstr(mec_last_error(), "galactic") != NULL);

    mec_config* cfg = NULL;
    CHECK(mec_config_create(NULL, &cfg) == MEC_OK);
    CHECK(cfg != NULL);
    CHECK(mec_config_set(cfg, "network", "no_such_key", "1") == MEC_ERR_CONFIG);
    CHECK(mec_last_error()[0] != '\0');

    char* ini = NULL;
    CHECK(mec_config_dump(cfg, &ini) == MEC_OK);
    CHECK(ini != NULL && strstr(ini, "[network]") != NULL);
    mec_free(ini);

    /* a small end-to-end run through the C surface */
    set(cfg, "network", "n_bs", "2");
    set(cfg, "network", "n_ue", "4");
    set(cfg, "network", "cell_size_m", "60");
    set(cfg, "network", "scenario_seed", "3");
    set(cfg, "experiment", "scenario_id", "capi");
    set(cfg, "experiment", "n_drops", "200");
    set(cfg, "experiment", "n_probe_drops", "40");
    set(cfg, "experiment", "n_eval_drops", "100");
    set(cfg, "training", "epochs", "2");
    set(cfg, "training", "window", "8");
    set(cfg, "training", "stride", "8");
    set(cfg, "training", "hidden", "12");
    set(cfg, "training", "conv_channels", "4");
    set(cfg, "training", "learning_rate", "0.001");

    const char* dir = "tmp_capi_run";
    CHECK(mec_run_simulate(cfg, 17, dir) == MEC_OK);
    CHECK(mec_run_train(cfg, 17, dir) == MEC_OK);

    double objective = -1.0;
    int iterations = 0, converged = -1;
    CHECK(mec_run_plan(cfg, 17, dir, "proposed", &objective, &iterations, &converged) == MEC_OK);
    CHECK(objective > 0.0);
    CHECK(iterations >= 1);
    CHECK(converged == 1);
    CHECK(mec_run_plan(cfg, 17, dir, "warp-drive", NULL, NULL, NULL) == MEC_ERR_INVALID_ARGUMENT);
    CHECK(strstr(mec_last_error(), "warp-drive") != NULL);

    char* report = NULL;
    CHECK(mec_run_evaluate(cfg, 17, dir, NULL, 0, &report) == MEC_OK);
    CHECK(report != NULL && strstr(report, "proposed") != NULL);
    CHECK(strstr(report, "cvar_ms") != NULL);
    mec_free(report);

    mec_config_destroy(cfg);
    mec_config_destroy(NULL); /* must be a no-op */
    mec_free(NULL);           /* likewise */

    if (system("rm -rf tmp_capi_run") != 0) fprintf(stderr, "cleanup failed\n");
    if (failures == 0) printf("capi smoke: all checks passed\n");
    return failures == 0 ? 0 : 1;
}
