#pragma once

// Runs, their on-disk layout, classification and rescaling of a run directory.
//
// A run directory holds
//   trajectory.csv   t, <ansatz names...>, u, abs_Rm, N_sq, H, f
//   monitors.dat     t u abs_Rm N_sq grad_N H f phi_norm u_plus_Rm lambda
//   coeffs.dat       t <ansatz names...>
//   residuals.dat    t closed primitive
//   report.json      config echo, termination, extrema; "singularity" after classify
// and, after rescale, sequence.csv (j, t_j, C_j) plus rescaled/snapshot_<j>.json.

#include <filesystem>
#include <string>

#include "tiia/flow.hpp"
#include "tiia/model_file.hpp"
#include "tiia/singularity.hpp"

namespace tiia {

inline constexpr const char* kVersion = "1.0.0";

struct RunConfig {
  double t_end = 1.0;
  double horizon = 0.0;  // 0: t_end
  IntegrateOptions integrate;
  ClassifyOptions classify;
};

struct RunRecord {
  ModelFile model;
  RunConfig config;
  Trajectory trajectory;
  bool loaded = false;  // monitors not stored in trajectory.csv are NaN
};

/// Validates the model (throws InvariantViolation naming the failed check), then integrates.
RunRecord execute_run(const ModelFile& model, const RunConfig& config);

/// Number formatting for every text output: '.' decimal, scientific, 17 significant digits.
std::string format_number(double v);

void write_run(const RunRecord& run, const std::filesystem::path& dir);
RunRecord load_run(const std::filesystem::path& dir);

SingularityReport classify_run(const RunRecord& run);
std::string report_to_json(const SingularityReport& report);
/// Adds or replaces the "singularity" entry of dir/report.json.
void attach_report(const std::filesystem::path& dir, const SingularityReport& report);

struct RescaledSnapshot {
  SequenceEntry entry;
  TypeIIAStructure structure;
  double abs_rm = 0.0;
  double f = 0.0;               // |phi_j|^{1/3} + |Rm_j| of the rebuilt structure
  double rescaled_F = 0.0;      // F(t_j) / C_j
  double u_original = 0.0;
};

struct RescaleResult {
  SingularityReport report;
  std::vector<RescaledSnapshot> snapshots;
};

/// Classifies, selects `count` sequence entries, rebuilds the rescaled structures
/// and checks the bounds. Throws NoSingularity for type None.
RescaleResult rescale_run(const RunRecord& run, int count);
void write_rescale(const RescaleResult& result, const RunRecord& run, const std::filesystem::path& dir);

}  // namespace tiia
