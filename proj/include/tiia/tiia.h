/* C interface to the tiia library.
 *
 * All objects are opaque handles released with their *_free function.
 * Functions returning tiia_status store a message retrievable with
 * tiia_last_error() (per thread) on failure. Strings returned as char* are
 * owned by the caller and released with tiia_string_free; const char*
 * results stay valid for the lifetime of the owning handle.
 */
#ifndef TIIA_TIIA_H
#define TIIA_TIIA_H

#include <stddef.h>

#if defined(_WIN32)
#define TIIA_API __declspec(dllexport)
#else
#define TIIA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values double as the CLI exit codes where the two overlap. */
typedef enum tiia_status {
  TIIA_OK = 0,
  TIIA_ERR_INVALID_ARGUMENT = 1,
  TIIA_ERR_SCHEMA = 2,
  TIIA_ERR_INVARIANT = 3,
  TIIA_ERR_DEGENERATE = 4,
  TIIA_ERR_STEP_UNDERFLOW = 5,
  TIIA_ERR_INSUFFICIENT_DATA = 6,
  TIIA_ERR_NO_SINGULARITY = 7,
  TIIA_ERR_IO = 8,
  TIIA_ERR_UNSUPPORTED = 9,
  TIIA_ERR_INTERNAL = 10
} tiia_status;

typedef enum tiia_termination {
  TIIA_REACHED_T_END = 0,
  TIIA_DEGENERATE = 1,
  TIIA_BLOW_UP = 2,
  TIIA_STEP_UNDERFLOW = 3
} tiia_termination;

typedef struct tiia_model tiia_model;
typedef struct tiia_validation tiia_validation;
typedef struct tiia_run tiia_run;
typedef struct tiia_report tiia_report;

typedef struct tiia_run_config {
  double t_end;
  double horizon;          /* 0: t_end */
  double rtol;
  double atol;
  double h0;
  double h_min;
  double max_step;         /* 0: t_end / 200 */
  double blowup_threshold;
  double growth_fraction;
} tiia_run_config;

TIIA_API const char* tiia_version(void);
TIIA_API const char* tiia_last_error(void);
TIIA_API const char* tiia_status_name(tiia_status status);
TIIA_API void tiia_string_free(char* s);

TIIA_API tiia_status tiia_model_load(const char* path, tiia_model** out);
TIIA_API tiia_status tiia_model_from_json(const char* json, tiia_model** out);
TIIA_API void tiia_model_free(tiia_model* model);
TIIA_API const char* tiia_model_name(const tiia_model* model);
TIIA_API size_t tiia_model_param_count(const tiia_model* model);
TIIA_API const char* tiia_model_param_name(const tiia_model* model, size_t index);
TIIA_API double tiia_model_initial(const tiia_model* model, size_t index);
TIIA_API tiia_status tiia_model_set_initial(tiia_model* model, const char* name, double value);

/* Returns TIIA_ERR_INVARIANT when a blocking check fails; *out is filled either way. */
TIIA_API tiia_status tiia_model_validate(const tiia_model* model, tiia_validation** out);
TIIA_API size_t tiia_validation_count(const tiia_validation* v);
/* warning_only: 1 when a failure of this check does not block runs. */
TIIA_API tiia_status tiia_validation_entry(const tiia_validation* v, size_t index, const char** name, int* passed,
                                           int* warning_only, const char** detail);
TIIA_API void tiia_validation_free(tiia_validation* v);

TIIA_API void tiia_run_config_default(tiia_run_config* config);
/* Events (blow-up, degeneracy, step underflow) are not errors: inspect tiia_run_termination. */
TIIA_API tiia_status tiia_run_model(const tiia_model* model, const tiia_run_config* config, tiia_run** out);
TIIA_API tiia_status tiia_run_load(const char* dir, tiia_run** out);
TIIA_API tiia_status tiia_run_write(const tiia_run* run, const char* dir);
TIIA_API void tiia_run_free(tiia_run* run);
TIIA_API tiia_termination tiia_run_termination(const tiia_run* run);
TIIA_API double tiia_run_t_est(const tiia_run* run); /* +inf when no singular time was detected */
TIIA_API size_t tiia_run_sample_count(const tiia_run* run);
TIIA_API size_t tiia_run_coeff_count(const tiia_run* run);
/* coeffs may be NULL; otherwise it receives tiia_run_coeff_count values. */
TIIA_API tiia_status tiia_run_sample(const tiia_run* run, size_t index, double* t, double* coeffs);
/* Monitor by column name: u, abs_Rm, N_sq, H, f. */
TIIA_API tiia_status tiia_run_monitor(const tiia_run* run, size_t index, const char* name, double* value);

TIIA_API tiia_status tiia_classify(const tiia_run* run, tiia_report** out);
TIIA_API const char* tiia_report_type(const tiia_report* report);
TIIA_API double tiia_report_t_est(const tiia_report* report);
TIIA_API char* tiia_report_json(const tiia_report* report);
/* Adds the report to dir/report.json. */
TIIA_API tiia_status tiia_report_attach(const tiia_report* report, const char* dir);
TIIA_API void tiia_report_free(tiia_report* report);

/* Writes sequence.csv and rescaled snapshots into dir. max_violation may be NULL. */
TIIA_API tiia_status tiia_rescale(const tiia_run* run, int count, const char* dir, size_t* written,
                                  double* max_violation);

#ifdef __cplusplus
}
#endif

#endif /* TIIA_TIIA_H */
