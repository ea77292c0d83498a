#include "tiia/tiia.h"

#include <cstring>
#include <exception>
#include <limits>
#include <new>
#include <string>

#include "tiia/errors.hpp"
#include "tiia/run.hpp"

struct tiia_model {
  tiia::ModelFile file;
};

struct tiia_validation {
  std::vector<tiia::ModelCheck> checks;
};

struct tiia_run {
  tiia::RunRecord record;
};

struct tiia_report {
  tiia::SingularityReport report;
  std::string type;
};

namespace {

thread_local std::string g_last_error;

tiia_status status_of(tiia::ErrorCode code) {
  using tiia::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::DegreeOverflow:
    case ErrorCode::DegreeMismatch: return TIIA_ERR_INVALID_ARGUMENT;
    case ErrorCode::Schema: return TIIA_ERR_SCHEMA;
    case ErrorCode::InvariantViolation:
    case ErrorCode::NotPrimitive:
    case ErrorCode::AnsatzNotPreserved: return TIIA_ERR_INVARIANT;
    case ErrorCode::DegenerateMetric:
    case ErrorCode::DegenerateSymplectic:
    case ErrorCode::DegenerateForm:
    case ErrorCode::WrongOrientation: return TIIA_ERR_DEGENERATE;
    case ErrorCode::StepUnderflow: return TIIA_ERR_STEP_UNDERFLOW;
    case ErrorCode::InsufficientData: return TIIA_ERR_INSUFFICIENT_DATA;
    case ErrorCode::NoSingularity: return TIIA_ERR_NO_SINGULARITY;
    case ErrorCode::Io: return TIIA_ERR_IO;
    case ErrorCode::Unsupported: return TIIA_ERR_UNSUPPORTED;
  }
  return TIIA_ERR_INTERNAL;
}

template <typename F>
tiia_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return TIIA_OK;
  } catch (const tiia::Error& e) {
    g_last_error = std::string(tiia::to_string(e.code())) + ": " + e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return TIIA_ERR_INTERNAL;
}

tiia_status null_argument(const char* what) {
  g_last_error = std::string("null argument: ") + what;
  return TIIA_ERR_INVALID_ARGUMENT;
}

}  // namespace

extern "C" {

const char* tiia_version(void) { return tiia::kVersion; }

const char* tiia_last_error(void) { return g_last_error.c_str(); }

const char* tiia_status_name(tiia_status status) {
  switch (status) {
    case TIIA_OK: return "ok";
    case TIIA_ERR_INVALID_ARGUMENT: return "invalid argument";
    case TIIA_ERR_SCHEMA: return "schema error";
    case TIIA_ERR_INVARIANT: return "invariant violation";
    case TIIA_ERR_DEGENERATE: return "degenerate structure";
    case TIIA_ERR_STEP_UNDERFLOW: return "step underflow";
    case TIIA_ERR_INSUFFICIENT_DATA: return "insufficient data";
    case TIIA_ERR_NO_SINGULARITY: return "no singularity";
    case TIIA_ERR_IO: return "i/o error";
    case TIIA_ERR_UNSUPPORTED: return "unsupported";
    case TIIA_ERR_INTERNAL: return "internal error";
  }
  return "unknown";
}

void tiia_string_free(char* s) { delete[] s; }

tiia_status tiia_model_load(const char* path, tiia_model** out) {
  if (!path || !out) return null_argument("path/out");
  *out = nullptr;
  return guarded([&] { *out = new tiia_model{tiia::load_model_file(path)}; });
}

tiia_status tiia_model_from_json(const char* json, tiia_model** out) {
  if (!json || !out) return null_argument("json/out");
  *out = nullptr;
  return guarded([&] { *out = new tiia_model{tiia::parse_model(json)}; });
}

void tiia_model_free(tiia_model* model) { delete model; }

const char* tiia_model_name(const tiia_model* model) { return model ? model->file.name.c_str() : ""; }

size_t tiia_model_param_count(const tiia_model* model) { return model ? model->file.model.names.size() : 0; }

const char* tiia_model_param_name(const tiia_model* model, size_t index) {
  if (!model || index >= model->file.model.names.size()) return nullptr;
  return model->file.model.names[index].c_str();
}

double tiia_model_initial(const tiia_model* model, size_t index) {
  if (!model || index >= model->file.model.names.size()) return std::numeric_limits<double>::quiet_NaN();
  return model->file.initial[static_cast<Eigen::Index>(index)];
}

tiia_status tiia_model_set_initial(tiia_model* model, const char* name, double value) {
  if (!model || !name) return null_argument("model/name");
  return guarded([&] { model->file.set_initial(name, value); });
}

tiia_status tiia_model_validate(const tiia_model* model, tiia_validation** out) {
  if (!model || !out) return null_argument("model/out");
  *out = nullptr;
  tiia_status st = guarded([&] { *out = new tiia_validation{tiia::validate_model(model->file)}; });
  if (st != TIIA_OK) return st;
  if (const tiia::ModelCheck* bad = tiia::first_failure((*out)->checks)) {
    g_last_error = "check " + bad->name + " failed: " + bad->detail;
    return TIIA_ERR_INVARIANT;
  }
  return TIIA_OK;
}

size_t tiia_validation_count(const tiia_validation* v) { return v ? v->checks.size() : 0; }

tiia_status tiia_validation_entry(const tiia_validation* v, size_t index, const char** name, int* passed,
                                  int* warning_only, const char** detail) {
  if (!v) return null_argument("validation");
  if (index >= v->checks.size()) {
    g_last_error = "validation index out of range";
    return TIIA_ERR_INVALID_ARGUMENT;
  }
  const tiia::ModelCheck& c = v->checks[index];
  if (name) *name = c.name.c_str();
  if (passed) *passed = c.passed ? 1 : 0;
  if (warning_only) *warning_only = c.warning_only ? 1 : 0;
  if (detail) *detail = c.detail.c_str();
  return TIIA_OK;
}

void tiia_validation_free(tiia_validation* v) { delete v; }

void tiia_run_config_default(tiia_run_config* config) {
  if (!config) return;
  const tiia::IntegrateOptions o;
  config->t_end = 1.0;
  config->horizon = 0.0;
  config->rtol = o.rtol;
  config->atol = o.atol;
  config->h0 = o.h0;
  config->h_min = o.h_min;
  config->max_step = o.max_step;
  config->blowup_threshold = o.blowup_threshold;
  config->growth_fraction = o.growth_fraction;
}

tiia_status tiia_run_model(const tiia_model* model, const tiia_run_config* config, tiia_run** out) {
  if (!model || !config || !out) return null_argument("model/config/out");
  *out = nullptr;
  return guarded([&] {
    tiia::RunConfig rc;
    rc.t_end = config->t_end;
    rc.horizon = config->horizon;
    rc.integrate.rtol = config->rtol;
    rc.integrate.atol = config->atol;
    rc.integrate.h0 = config->h0;
    rc.integrate.h_min = config->h_min;
    rc.integrate.max_step = config->max_step;
    rc.integrate.blowup_threshold = config->blowup_threshold;
    rc.integrate.growth_fraction = config->growth_fraction;
    *out = new tiia_run{tiia::execute_run(model->file, rc)};
  });
}

tiia_status tiia_run_load(const char* dir, tiia_run** out) {
  if (!dir || !out) return null_argument("dir/out");
  *out = nullptr;
  return guarded([&] { *out = new tiia_run{tiia::load_run(dir)}; });
}

tiia_status tiia_run_write(const tiia_run* run, const char* dir) {
  if (!run || !dir) return null_argument("run/dir");
  return guarded([&] { tiia::write_run(run->record, dir); });
}

void tiia_run_free(tiia_run* run) { delete run; }

tiia_termination tiia_run_termination(const tiia_run* run) {
  if (!run) return TIIA_REACHED_T_END;
  switch (run->record.trajectory.termination) {
    case tiia::Termination::ReachedTEnd: return TIIA_REACHED_T_END;
    case tiia::Termination::Degenerate: return TIIA_DEGENERATE;
    case tiia::Termination::BlowUp: return TIIA_BLOW_UP;
    case tiia::Termination::StepUnderflow: return TIIA_STEP_UNDERFLOW;
  }
  return TIIA_REACHED_T_END;
}

double tiia_run_t_est(const tiia_run* run) {
  return run ? run->record.trajectory.t_est : std::numeric_limits<double>::quiet_NaN();
}

size_t tiia_run_sample_count(const tiia_run* run) { return run ? run->record.trajectory.samples.size() : 0; }

size_t tiia_run_coeff_count(const tiia_run* run) { return run ? run->record.model.model.names.size() : 0; }

tiia_status tiia_run_sample(const tiia_run* run, size_t index, double* t, double* coeffs) {
  if (!run) return null_argument("run");
  const auto& s = run->record.trajectory.samples;
  if (index >= s.size()) {
    g_last_error = "sample index out of range";
    return TIIA_ERR_INVALID_ARGUMENT;
  }
  if (t) *t = s[index].t;
  if (coeffs) {
    for (Eigen::Index i = 0; i < s[index].coeffs.size(); ++i) coeffs[i] = s[index].coeffs[i];
  }
  return TIIA_OK;
}

tiia_status tiia_run_monitor(const tiia_run* run, size_t index, const char* name, double* value) {
  if (!run || !name || !value) return null_argument("run/name/value");
  const auto& s = run->record.trajectory.samples;
  if (index >= s.size()) {
    g_last_error = "sample index out of range";
    return TIIA_ERR_INVALID_ARGUMENT;
  }
  const tiia::Monitors& m = s[index].monitors;
  const std::string n(name);
  if (n == "u") {
    *value = m.u;
  } else if (n == "abs_Rm") {
    *value = m.abs_rm;
  } else if (n == "N_sq") {
    *value = m.n_sq;
  } else if (n == "H") {
    *value = m.hitchin;
  } else if (n == "f") {
    *value = m.f;
  } else {
    g_last_error = "unknown monitor '" + n + "'";
    return TIIA_ERR_INVALID_ARGUMENT;
  }
  return TIIA_OK;
}

tiia_status tiia_classify(const tiia_run* run, tiia_report** out) {
  if (!run || !out) return null_argument("run/out");
  *out = nullptr;
  return guarded([&] {
    auto* r = new tiia_report{tiia::classify_run(run->record), {}};
    r->type = tiia::to_string(r->report.type);
    *out = r;
  });
}

const char* tiia_report_type(const tiia_report* report) { return report ? report->type.c_str() : ""; }

double tiia_report_t_est(const tiia_report* report) {
  return report ? report->report.t_est : std::numeric_limits<double>::quiet_NaN();
}

char* tiia_report_json(const tiia_report* report) {
  if (!report) return nullptr;
  const std::string s = tiia::report_to_json(report->report);
  char* out = new (std::nothrow) char[s.size() + 1];
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

tiia_status tiia_report_attach(const tiia_report* report, const char* dir) {
  if (!report || !dir) return null_argument("report/dir");
  return guarded([&] { tiia::attach_report(dir, report->report); });
}

void tiia_report_free(tiia_report* report) { delete report; }

tiia_status tiia_rescale(const tiia_run* run, int count, const char* dir, size_t* written, double* max_violation) {
  if (!run || !dir) return null_argument("run/dir");
  return guarded([&] {
    const tiia::RescaleResult res = tiia::rescale_run(run->record, count);
    tiia::write_rescale(res, run->record, dir);
    if (written) *written = res.snapshots.size();
    if (max_violation) {
      double v = 0.0;
      for (const auto& b : res.report.bounds) v = std::max(v, b.max_violation);
      *max_violation = v;
    }
  });
}

}  // extern "C"
