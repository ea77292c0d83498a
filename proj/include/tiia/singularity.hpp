#pragma once

// Singularity classification and blow-up sequences on sampled monitor series.
//
// Boundedness of a weighted sup is decided from the growth exponent of the
// weighted quantity over the final decade of samples: tau in
// [tau_last, 10 tau_last] with tau = T - t when T is finite, or
// t in [t_last/10, t_last] when T is infinite. The exponent is the slope of
// log Q against log(1/tau), resp. log t.

#include <limits>
#include <string>
#include <vector>

#include "tiia/flow.hpp"

namespace tiia {

enum class SingularityType { None, I, IIa, IIb, III, IVa, IVb, IVc, IVd };

const char* to_string(SingularityType t) noexcept;
SingularityType singularity_type_from_string(const std::string& s);
bool is_type_iv(SingularityType t);
bool has_finite_time(SingularityType t);

/// The scalar series the classifier works from.
struct MonitorSeries {
  std::vector<double> t;
  std::vector<double> u;
  std::vector<double> abs_rm;
  std::vector<double> f;
  Termination termination = Termination::ReachedTEnd;
  double t_est = std::numeric_limits<double>::infinity();
  double horizon = 0.0;
};

MonitorSeries series_from(const Trajectory& traj, double horizon);

struct ClassifyOptions {
  double unbounded_exponent = 0.1;
  double phi_bounded_exponent = 0.05;
  double none_exponent = 0.01;
  std::size_t min_window_samples = 50;
};

struct GrowthFit {
  double exponent = 0.0;
  double intercept = 0.0;
  std::size_t samples = 0;
};

struct SequenceEntry {
  int j = 0;
  double t = 0.0;
  double C = 0.0;
  double T_j = std::numeric_limits<double>::infinity();  // window end for IIa/IIb
  std::size_t sample = 0;
};

struct BoundRow {
  int j = 0;
  std::size_t points = 0;
  double max_ratio = 0.0;      // max of rescaled F over its bound
  double max_violation = 0.0;  // max(0, ratio - 1)
};

struct SingularityReport {
  SingularityType type = SingularityType::None;
  bool finite_time = false;
  double t_est = std::numeric_limits<double>::infinity();
  double horizon = 0.0;
  bool phi_bounded = false;
  double sup_T_minus_t_f = 0.0;
  double sup_t_f = 0.0;
  double sup_T_minus_t_rm = 0.0;
  double sup_t_rm = 0.0;
  double sup_phi = 0.0;
  double sup_u_plus_rm = 0.0;
  GrowthFit phi_fit;
  GrowthFit weighted_fit;
  GrowthFit singular_fit;  // |u| + |Rm|, used for None
  std::vector<SequenceEntry> sequence;
  std::vector<BoundRow> bounds;
  double bound_constant = 0.0;
  std::vector<std::string> notes;
};

SingularityReport classify(const MonitorSeries& series, const ClassifyOptions& options = {});

/// Discrete realizations of the blow-up sequences; throws NoSingularity for None.
std::vector<SequenceEntry> select_sequence(const MonitorSeries& series, const SingularityReport& report, int count);

/// w -> C w, and phi -> C^{3/2} phi for the Type IV family.
TypeIIAStructure rescale_state(const KForm& phi, const KForm& omega, double C, SingularityType type);

/// Rescaled F_j(s) = F(t_j + s/C_j) / C_j against the bound of the report's type at
/// every sample inside the type's window. Empty for None.
std::vector<BoundRow> verify_bounds(const MonitorSeries& series, SingularityReport& report);

}  // namespace tiia
