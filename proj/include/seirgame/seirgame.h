/*
 * Copyright 2026 The seirgame Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef SEIRGAME_SEIRGAME_H
#define SEIRGAME_SEIRGAME_H

/*
 * C interface to the seirgame library: multi-region stochastic SEIR
 * lockdown games, their equilibrium solver and Monte Carlo evaluation.
 *
 * Every call returns a seirgame_status. On failure the message is kept
 * per thread and can be read with seirgame_last_error() until the next
 * call from the same thread. Handles are opaque; free them with the
 * matching *_free function. Strings returned through char** out
 * parameters are owned by the caller and released with
 * seirgame_string_free().
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(SEIRGAME_BUILDING_DLL)
#    define SEIRGAME_API __declspec(dllexport)
#  else
#    define SEIRGAME_API __declspec(dllimport)
#  endif
#else
#  define SEIRGAME_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum seirgame_status {
    SEIRGAME_OK = 0,
    SEIRGAME_ERROR_ARGUMENT = 1, /* null handle, bad option value */
    SEIRGAME_ERROR_CONFIG = 2,   /* scenario missing or invalid */
    SEIRGAME_ERROR_MISMATCH = 3, /* artifact built for another scenario */
    SEIRGAME_ERROR_ABORTED = 4,  /* solver gave up after repeated divergence */
    SEIRGAME_ERROR_VERIFY = 5,   /* unknown suite or fault */
    SEIRGAME_ERROR_IO = 6,
    SEIRGAME_ERROR_INTERNAL = 7
} seirgame_status;

typedef struct seirgame_scenario seirgame_scenario;
typedef struct seirgame_profile seirgame_profile;
typedef struct seirgame_verify_report seirgame_verify_report;

SEIRGAME_API const char* seirgame_version(void);
SEIRGAME_API const char* seirgame_last_error(void);
SEIRGAME_API const char* seirgame_status_name(seirgame_status status);
SEIRGAME_API void seirgame_string_free(char* text);

/* ---- Scenarios ---------------------------------------------------------- */

/* Reads a YAML scenario, following `extends`. */
SEIRGAME_API seirgame_status seirgame_scenario_load(const char* path, seirgame_scenario** out);
SEIRGAME_API seirgame_status seirgame_scenario_parse(const char* yaml_text,
                                                     seirgame_scenario** out);
SEIRGAME_API void seirgame_scenario_free(seirgame_scenario* scenario);

/* Overrides one field, e.g. ("cost.a", "5"), and re-validates. On failure
 * the scenario keeps its previous contents. */
SEIRGAME_API seirgame_status seirgame_scenario_set(seirgame_scenario* scenario,
                                                   const char* dotted_key, const char* yaml_value);

/* 16 hex digits; stable under key reordering. Valid until the next set. */
SEIRGAME_API const char* seirgame_scenario_digest(const seirgame_scenario* scenario);
SEIRGAME_API const char* seirgame_scenario_name(const seirgame_scenario* scenario);
SEIRGAME_API int seirgame_scenario_regions(const seirgame_scenario* scenario);
SEIRGAME_API int seirgame_scenario_has_initial(const seirgame_scenario* scenario);
SEIRGAME_API size_t seirgame_scenario_warning_count(const seirgame_scenario* scenario);
SEIRGAME_API const char* seirgame_scenario_warning(const seirgame_scenario* scenario,
                                                   size_t index);

/* Fully resolved parameter document (explicit rates, expanded transmission
 * matrix) as YAML. */
SEIRGAME_API seirgame_status seirgame_scenario_resolved_yaml(const seirgame_scenario* scenario,
                                                             char** out);

/* ---- Solver ------------------------------------------------------------- */

typedef void (*seirgame_stage_callback)(int stage, double convergence_metric,
                                        const double* validation_losses, int players,
                                        void* user_data);

typedef struct seirgame_solve_options {
    /* Values <= 0 (or NULL) keep the scenario's setting. */
    int stages;
    int batch;
    int workers;
    int checkpoint_every;
    uint64_t seed;
    int has_seed;

    /* Directory for checkpoints, diagnostics.csv and profile.json; NULL
     * writes nothing. */
    const char* output_dir;
    /* Checkpoint to continue from; stage numbering continues from it. */
    const char* resume_path;
    /* Accept a resume checkpoint whose digest differs from the scenario. */
    int force;
    /* Record real wall times in diagnostics.csv instead of 0. */
    int timing;

    seirgame_stage_callback on_stage;
    void* user_data;
} seirgame_solve_options;

SEIRGAME_API void seirgame_solve_options_init(seirgame_solve_options* options);

/* Runs fictitious play. On SEIRGAME_ERROR_ABORTED the profile of the last
 * completed stage is still returned through *out and the diagnostics are
 * kept on disk. */
SEIRGAME_API seirgame_status seirgame_solve(const seirgame_scenario* scenario,
                                            const seirgame_solve_options* options,
                                            seirgame_profile** out);

/* ---- Profiles ----------------------------------------------------------- */

SEIRGAME_API seirgame_status seirgame_profile_load(const char* checkpoint_path,
                                                   seirgame_profile** out);
/* Every player holds `level` at all times. */
SEIRGAME_API seirgame_status seirgame_profile_constant(const seirgame_scenario* scenario,
                                                       double level, seirgame_profile** out);
SEIRGAME_API seirgame_status seirgame_profile_save(const seirgame_profile* profile,
                                                   const char* path);
SEIRGAME_API void seirgame_profile_free(seirgame_profile* profile);
SEIRGAME_API int seirgame_profile_players(const seirgame_profile* profile);
SEIRGAME_API int seirgame_profile_stage(const seirgame_profile* profile);
/* Empty for constant profiles. */
SEIRGAME_API const char* seirgame_profile_digest(const seirgame_profile* profile);
SEIRGAME_API uint64_t seirgame_profile_seed(const seirgame_profile* profile);

/* Lockdown of each player at (t, state); state holds s, e, i per region
 * (3N values), out receives N values. */
SEIRGAME_API seirgame_status seirgame_profile_evaluate(const seirgame_profile* profile, double t,
                                                       const double* state, size_t state_len,
                                                       double* out, size_t out_len);

/* ---- Simulation and evaluation ----------------------------------------- */

typedef struct seirgame_run_options {
    int paths;      /* <= 0: scenario evaluation.paths */
    uint64_t seed;
    int has_seed;   /* 0: scenario evaluation.seed */
    int force;      /* skip the profile/scenario digest check */
    int probe;      /* evaluate only: unilateral-deviation probe */
    const char* output_dir; /* NULL writes nothing */
} seirgame_run_options;

typedef enum seirgame_outcome {
    SEIRGAME_CONTROLLED = 0,
    SEIRGAME_OUT_OF_CONTROL = 1
} seirgame_outcome;

typedef struct seirgame_evaluation {
    seirgame_outcome outcome;
    int players;
    int paths;
    /* Per player, filled up to SEIRGAME_MAX_PLAYERS entries. */
#define SEIRGAME_MAX_PLAYERS 16
    double mean_cost[SEIRGAME_MAX_PLAYERS];
    double cost_std_error[SEIRGAME_MAX_PLAYERS];
    double terminal_s[SEIRGAME_MAX_PLAYERS];
    double mean_lockdown[SEIRGAME_MAX_PLAYERS];
    /* Probe results; zero unless the probe ran. */
    int probe_ran;
    int probe_passed;
    double max_reduction[SEIRGAME_MAX_PLAYERS];
    double max_reduction_std_error[SEIRGAME_MAX_PLAYERS];
} seirgame_evaluation;

/* options may be NULL for the scenario defaults. Writes paths.csv, plus
 * summary.csv when at least 40 paths are drawn. */
SEIRGAME_API seirgame_status seirgame_simulate(const seirgame_scenario* scenario,
                                               const seirgame_profile* profile,
                                               const seirgame_run_options* options);

/* Writes cost.csv, classification.csv and, with probe set, probe.csv. */
SEIRGAME_API seirgame_status seirgame_evaluate(const seirgame_scenario* scenario,
                                               const seirgame_profile* profile,
                                               const seirgame_run_options* options,
                                               seirgame_evaluation* out);

/* ---- Verification suites ------------------------------------------------ */

SEIRGAME_API size_t seirgame_verify_suite_count(void);
SEIRGAME_API const char* seirgame_verify_suite_name(size_t index);
SEIRGAME_API const char* seirgame_verify_suite_description(size_t index);

/* suite may be "all"; fault may be NULL or a known fault name. */
SEIRGAME_API seirgame_status seirgame_verify_run(const char* suite, const char* fault,
                                                 uint64_t seed, seirgame_verify_report** out);
SEIRGAME_API size_t seirgame_verify_report_size(const seirgame_verify_report* report);
SEIRGAME_API size_t seirgame_verify_report_failures(const seirgame_verify_report* report);

typedef struct seirgame_check {
    const char* suite;
    const char* check;
    const char* detail;
    int passed;
    double measured;
    double tolerance;
} seirgame_check;

/* Strings stay valid while the report lives. */
SEIRGAME_API seirgame_status seirgame_verify_report_check(const seirgame_verify_report* report,
                                                          size_t index, seirgame_check* out);
SEIRGAME_API void seirgame_verify_report_free(seirgame_verify_report* report);

#ifdef __cplusplus
}
#endif

#endif /* SEIRGAME_SEIRGAME_H */
