// tiia command-line front end. Links only the C API.
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "tiia/tiia.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 1;

std::mutex g_out_mutex;

void print_line(const std::string& s) {
  std::lock_guard<std::mutex> lock(g_out_mutex);
  std::fputs(s.c_str(), stdout);
  std::fputc('\n', stdout);
  std::fflush(stdout);
}

int fail(tiia_status st, const std::string& context) {
  std::lock_guard<std::mutex> lock(g_out_mutex);
  std::fprintf(stderr, "tiia: %s: %s\n", context.c_str(), tiia_last_error());
  return static_cast<int>(st);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

struct ModelHandle {
  tiia_model* p = nullptr;
  ~ModelHandle() { tiia_model_free(p); }
};
struct RunHandle {
  tiia_run* p = nullptr;
  ~RunHandle() { tiia_run_free(p); }
};
struct ReportHandle {
  tiia_report* p = nullptr;
  ~ReportHandle() { tiia_report_free(p); }
};
struct ValidationHandle {
  tiia_validation* p = nullptr;
  ~ValidationHandle() { tiia_validation_free(p); }
};

int cmd_validate(const std::string& path) {
  ModelHandle m;
  if (tiia_status st = tiia_model_load(path.c_str(), &m.p); st != TIIA_OK) return fail(st, path);
  ValidationHandle v;
  const tiia_status st = tiia_model_validate(m.p, &v.p);
  if (!v.p) return fail(st, path);
  print_line(std::string("model ") + tiia_model_name(m.p));
  for (size_t i = 0; i < tiia_validation_count(v.p); ++i) {
    const char* name = nullptr;
    const char* detail = nullptr;
    int passed = 0, warning = 0;
    tiia_validation_entry(v.p, i, &name, &passed, &warning, &detail);
    const char* tag = passed ? "pass" : (warning ? "warn" : "FAIL");
    std::string line = std::string("  ") + tag + "  " + name;
    if (detail && *detail) line += "  (" + std::string(detail) + ")";
    print_line(line);
  }
  if (st != TIIA_OK) return fail(st, path);
  return 0;
}

struct Sweep {
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;

  size_t size() const {
    size_t n = 1;
    for (const auto& v : values) n *= v.size();
    return n;
  }
  std::vector<double> at(size_t k) const {
    std::vector<double> out(names.size());
    for (size_t q = names.size(); q-- > 0;) {
      out[q] = values[q][k % values[q].size()];
      k /= values[q].size();
    }
    return out;
  }
};

Sweep parse_sweep(const std::vector<std::string>& assignments) {
  Sweep s;
  for (const std::string& assignment : assignments) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw CLI::ValidationError("--set", "expected name=v1[,v2...]: " + assignment);
    std::vector<double> vals;
    std::string rest = assignment.substr(eq + 1);
    size_t pos = 0;
    while (pos <= rest.size()) {
      const auto comma = rest.find(',', pos);
      const std::string item = rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      try {
        size_t used = 0;
        vals.push_back(std::stod(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw CLI::ValidationError("--set", "not a number: '" + item + "'");
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    s.names.push_back(assignment.substr(0, eq));
    s.values.push_back(std::move(vals));
  }
  return s;
}

struct RunOptions {
  std::string model;
  std::string out;
  double t_end = 0.0;
  double horizon = 0.0;
  double rtol = 0.0;
  double atol = 0.0;
  double max_step = 0.0;
  unsigned jobs = 1;
  std::vector<std::string> sets;
};

int exit_for(tiia_termination term) {
  switch (term) {
    case TIIA_REACHED_T_END: return 0;
    case TIIA_DEGENERATE:
    case TIIA_BLOW_UP: return TIIA_ERR_DEGENERATE;
    case TIIA_STEP_UNDERFLOW: return TIIA_ERR_STEP_UNDERFLOW;
  }
  return 0;
}

const char* termination_name(tiia_termination term) {
  switch (term) {
    case TIIA_REACHED_T_END: return "ReachedTEnd";
    case TIIA_DEGENERATE: return "Degenerate";
    case TIIA_BLOW_UP: return "BlowUp";
    case TIIA_STEP_UNDERFLOW: return "StepUnderflow";
  }
  return "?";
}

int run_one(const RunOptions& o, const Sweep& sweep, size_t k, const fs::path& dir) {
  ModelHandle m;
  if (tiia_status st = tiia_model_load(o.model.c_str(), &m.p); st != TIIA_OK) return fail(st, o.model);
  const std::vector<double> vals = sweep.at(k);
  for (size_t q = 0; q < vals.size(); ++q) {
    if (tiia_status st = tiia_model_set_initial(m.p, sweep.names[q].c_str(), vals[q]); st != TIIA_OK) {
      return fail(st, "--set");
    }
  }
  tiia_run_config cfg;
  tiia_run_config_default(&cfg);
  cfg.t_end = o.t_end;
  cfg.horizon = o.horizon;
  if (o.rtol > 0.0) cfg.rtol = o.rtol;
  if (o.atol > 0.0) cfg.atol = o.atol;
  if (o.max_step > 0.0) cfg.max_step = o.max_step;
  RunHandle r;
  if (tiia_status st = tiia_run_model(m.p, &cfg, &r.p); st != TIIA_OK) return fail(st, o.model);
  if (tiia_status st = tiia_run_write(r.p, dir.string().c_str()); st != TIIA_OK) return fail(st, dir.string());

  const tiia_termination term = tiia_run_termination(r.p);
  const size_t n = tiia_run_sample_count(r.p);
  double t_last = 0.0;
  tiia_run_sample(r.p, n - 1, &t_last, nullptr);
  std::string line = dir.string() + ": " + termination_name(term) + " at t=" + fmt(t_last) + ", " + std::to_string(n) +
                     " samples";
  const double t_est = tiia_run_t_est(r.p);
  if (std::isfinite(t_est)) line += ", T_est=" + fmt(t_est);
  print_line(line);
  return exit_for(term);
}

int cmd_run(const RunOptions& o) {
  if (!(o.t_end > 0.0)) {
    std::fprintf(stderr, "tiia: --t-end must be positive\n");
    return kExitUsage;
  }
  Sweep sweep;
  try {
    sweep = parse_sweep(o.sets);
  } catch (const CLI::Error& e) {
    std::fprintf(stderr, "tiia: %s\n", e.what());
    return kExitUsage;
  }
  const size_t total = sweep.size();
  if (total == 1) return run_one(o, sweep, 0, o.out);

  std::error_code ec;
  fs::create_directories(o.out, ec);
  {
    std::ofstream idx(fs::path(o.out) / "sweep.csv");
    if (!idx) {
      std::fprintf(stderr, "tiia: cannot write %s\n", (fs::path(o.out) / "sweep.csv").string().c_str());
      return TIIA_ERR_IO;
    }
    idx << "run";
    for (const auto& n : sweep.names) idx << ',' << n;
    idx << '\n';
    for (size_t k = 0; k < total; ++k) {
      char name[32];
      std::snprintf(name, sizeof(name), "run_%03zu", k);
      idx << name;
      for (double v : sweep.at(k)) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.16e", v);
        idx << ',' << buf;
      }
      idx << '\n';
    }
  }

  std::vector<int> codes(total, 0);
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t k = next++; k < total; k = next++) {
      char name[32];
      std::snprintf(name, sizeof(name), "run_%03zu", k);
      codes[k] = run_one(o, sweep, k, fs::path(o.out) / name);
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(o.jobs, static_cast<unsigned>(total)));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < jobs; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return *std::max_element(codes.begin(), codes.end());
}

int cmd_classify(const std::string& dir) {
  RunHandle r;
  if (tiia_status st = tiia_run_load(dir.c_str(), &r.p); st != TIIA_OK) return fail(st, dir);
  ReportHandle rep;
  if (tiia_status st = tiia_classify(r.p, &rep.p); st != TIIA_OK) return fail(st, dir);
  if (tiia_status st = tiia_report_attach(rep.p, dir.c_str()); st != TIIA_OK) return fail(st, dir);
  const std::string type = tiia_report_type(rep.p);
  std::string line = type == "None" ? std::string("None") : "Type " + type;
  const double t_est = tiia_report_t_est(rep.p);
  line += std::isfinite(t_est) ? " (T=" + fmt(t_est) + ")" : " (T=inf)";
  print_line(line);
  return 0;
}

int cmd_rescale(const std::string& dir, int count) {
  RunHandle r;
  if (tiia_status st = tiia_run_load(dir.c_str(), &r.p); st != TIIA_OK) return fail(st, dir);
  size_t written = 0;
  double violation = 0.0;
  if (tiia_status st = tiia_rescale(r.p, count, dir.c_str(), &written, &violation); st != TIIA_OK) {
    return fail(st, dir);
  }
  print_line(std::to_string(written) + " rescaled snapshots, max bound violation " + fmt(violation));
  return 0;
}

constexpr const char* kFooter = R"(Output files (run):
  trajectory.csv  t,<ansatz coefficients in model order>,u,abs_Rm,N_sq,H,f
  monitors.dat    t u abs_Rm N_sq grad_N H f phi_norm u_plus_Rm lambda
  coeffs.dat      t <ansatz coefficients>
  residuals.dat   t closed primitive
  report.json     config echo, termination, extrema, singularity report
Numbers use '.' as decimal point, scientific notation, 17 significant digits.

Exit codes: 0 ok, 1 usage, 2 schema, 3 invariant check failed,
  4 degenerate structure or blow-up (outputs written), 5 step underflow,
  6 insufficient data, 7 no singularity to rescale, 8 i/o.
TIIA_LOG=error|warn|info|debug sets verbosity (default warn).)";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Type IIA flow on invariant structures: integrate, classify singularities, rescale."};
  app.footer(kFooter);
  app.set_version_flag("--version", std::string("tiia ") + tiia_version());
  app.require_subcommand(1);

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a model file");
  validate->add_option("model", validate_path, "Model file (JSON)")->required();

  RunOptions ro;
  auto* run = app.add_subcommand("run", "Integrate the flow and write a run directory");
  run->add_option("model", ro.model, "Model file (JSON)")->required();
  run->add_option("--t-end", ro.t_end, "Final time")->required();
  run->add_option("--out", ro.out, "Output directory")->required();
  run->add_option("--rtol", ro.rtol, "Relative tolerance (default 1e-9)");
  run->add_option("--atol", ro.atol, "Absolute tolerance (default 1e-12)");
  run->add_option("--horizon", ro.horizon, "Horizon for T=inf classification (default t-end)");
  run->add_option("--max-step", ro.max_step, "Largest step (default t-end/200)");
  run->add_option("--set", ro.sets, "Initial value(s) name=v1[,v2...]; several values make a sweep into out/run_NNN")
      ->take_all();
  run->add_option("--jobs", ro.jobs, "Concurrent sweep members")->check(CLI::PositiveNumber);

  std::string classify_dir;
  auto* classify = app.add_subcommand("classify", "Classify the singularity of a run");
  classify->add_option("dir", classify_dir, "Run directory")->required();

  std::string rescale_dir;
  int count = 0;
  auto* rescale = app.add_subcommand("rescale", "Blow-up sequence and rescaled snapshots");
  rescale->add_option("dir", rescale_dir, "Run directory")->required();
  rescale->add_option("--count", count, "Sequence length")->required()->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (*validate) return cmd_validate(validate_path);
  if (*run) return cmd_run(ro);
  if (*classify) return cmd_classify(classify_dir);
  if (*rescale) return cmd_rescale(rescale_dir, count);
  return kExitUsage;
}
