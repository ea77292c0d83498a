/* Exercises the C interface from C. */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "tiia/tiia.h"

static int failures = 0;

#define EXPECT(cond)                                               \
  do {                                                             \
    if (!(cond)) {                                                 \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                  \
    }                                                              \
  } while (0)

static char* model_path(const char* name) {
  static char buf[4096];
  snprintf(buf, sizeof buf, "%s/%s.json", TIIA_MODELS_DIR, name);
  return buf;
}

int main(int argc, char** argv) {
  const char* out_dir = argc > 1 ? argv[1] : "c_api_run";
  tiia_model* model = NULL;
  tiia_validation* val = NULL;
  tiia_run* run = NULL;
  tiia_report* report = NULL;

  EXPECT(strcmp(tiia_version(), "1.0.0") == 0);
  EXPECT(tiia_model_load(NULL, &model) == TIIA_ERR_INVALID_ARGUMENT);
  EXPECT(tiia_model_load("/nonexistent.json", &model) == TIIA_ERR_IO);
  EXPECT(model == NULL);
  EXPECT(strlen(tiia_last_error()) > 0);
  EXPECT(tiia_model_from_json("{\"name\": 1}", &model) == TIIA_ERR_SCHEMA);

  /* literal variant: invariant failure, report still available */
  EXPECT(tiia_model_load(model_path("tomassini_vezzoni_paper_literal"), &model) == TIIA_OK);
  EXPECT(tiia_model_validate(model, &val) == TIIA_ERR_INVARIANT);
  EXPECT(val != NULL && tiia_validation_count(val) > 0);
  {
    const char *name = NULL, *detail = NULL;
    int passed = 1, warning = 0;
    EXPECT(tiia_validation_entry(val, 1, &name, &passed, &warning, &detail) == TIIA_OK);
    EXPECT(strcmp(name, "unimodular") == 0 && !passed && warning);
    EXPECT(tiia_validation_entry(val, 999, &name, &passed, &warning, &detail) == TIIA_ERR_INVALID_ARGUMENT);
  }
  tiia_validation_free(val);
  tiia_model_free(model);

  EXPECT(tiia_model_load(model_path("nilmanifold_example2"), &model) == TIIA_OK);
  EXPECT(strcmp(tiia_model_name(model), "nilmanifold_example2") == 0);
  EXPECT(tiia_model_param_count(model) == 2);
  EXPECT(strcmp(tiia_model_param_name(model, 1), "b") == 0);
  EXPECT(tiia_model_param_name(model, 2) == NULL);
  EXPECT(tiia_model_set_initial(model, "zz", 1.0) == TIIA_ERR_SCHEMA);
  EXPECT(tiia_model_set_initial(model, "b", 0.0) == TIIA_OK);
  EXPECT(tiia_model_initial(model, 0) == 0.0);
  EXPECT(tiia_model_validate(model, &val) == TIIA_OK);
  tiia_validation_free(val);

  tiia_run_config cfg;
  tiia_run_config_default(&cfg);
  EXPECT(cfg.rtol == 1e-9);
  cfg.t_end = 1.0;
  EXPECT(tiia_run_model(model, &cfg, &run) == TIIA_OK);
  EXPECT(tiia_run_termination(run) == TIIA_REACHED_T_END);
  EXPECT(isinf(tiia_run_t_est(run)));
  {
    size_t n = tiia_run_sample_count(run);
    double t = 0.0, c[2] = {0.0, 0.0}, h = 0.0;
    EXPECT(n > 100);
    EXPECT(tiia_run_coeff_count(run) == 2);
    EXPECT(tiia_run_sample(run, n - 1, &t, c) == TIIA_OK);
    EXPECT(t == 1.0 && fabs(c[0] - 8.0) < 1e-6 && fabs(c[1]) < 1e-10);
    EXPECT(tiia_run_monitor(run, 0, "H", &h) == TIIA_OK && fabs(h - 4.0) < 1e-12);
    EXPECT(tiia_run_monitor(run, 0, "grad_N", &h) == TIIA_ERR_INVALID_ARGUMENT);
    EXPECT(tiia_run_sample(run, n, &t, c) == TIIA_ERR_INVALID_ARGUMENT);
  }
  EXPECT(tiia_run_write(run, out_dir) == TIIA_OK);
  tiia_run_free(run);
  run = NULL;

  EXPECT(tiia_run_load(out_dir, &run) == TIIA_OK);
  EXPECT(tiia_classify(run, &report) == TIIA_OK);
  if (report) {
    EXPECT(strcmp(tiia_report_type(report), "IIb") == 0);
    char* json = tiia_report_json(report);
    EXPECT(json != NULL && strstr(json, "\"type\"") != NULL);
    tiia_string_free(json);
    EXPECT(tiia_report_attach(report, out_dir) == TIIA_OK);
    tiia_report_free(report);
  }
  {
    size_t written = 99;
    EXPECT(tiia_rescale(run, 0, out_dir, &written, NULL) == TIIA_OK && written == 0);
  }
  tiia_run_free(run);

  /* blow-up */
  tiia_model_free(model);
  EXPECT(tiia_model_load(model_path("tomassini_vezzoni"), &model) == TIIA_OK);
  cfg.t_end = 1.0;
  EXPECT(tiia_run_model(model, &cfg, &run) == TIIA_OK);
  EXPECT(tiia_run_termination(run) == TIIA_BLOW_UP);
  EXPECT(fabs(tiia_run_t_est(run) / 0.015590198702971401 - 1.0) < 1e-6);
  EXPECT(tiia_classify(run, &report) == TIIA_OK);
  EXPECT(strcmp(tiia_report_type(report), "I") == 0);
  tiia_report_free(report);
  tiia_run_free(run);
  tiia_model_free(model);

  /* null handles are harmless */
  tiia_model_free(NULL);
  tiia_run_free(NULL);
  tiia_report_free(NULL);
  tiia_validation_free(NULL);
  tiia_string_free(NULL);
  EXPECT(strcmp(tiia_status_name(TIIA_ERR_NO_SINGULARITY), "no singularity") == 0);

  if (failures) fprintf(stderr, "%d failure(s)\n", failures);
  else printf("c api: all checks passed\n");
  return failures ? 1 : 0;
}
