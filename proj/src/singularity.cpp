#include "tiia/singularity.hpp"

#include <algorithm>
#include <cmath>

#include "tiia/errors.hpp"

namespace tiia {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

GrowthFit fit_growth(const std::vector<double>& x, const std::vector<double>& values) {
  GrowthFit fit;
  const std::size_t n = x.size();
  fit.samples = n;
  if (n < 2) return fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double y = std::log(std::max(values[i], 1e-300));
    sx += x[i];
    sy += y;
    sxx += x[i] * x[i];
    sxy += x[i] * y;
  }
  const double dn = static_cast<double>(n);
  const double den = dn * sxx - sx * sx;
  if (den <= 0.0) return fit;
  fit.exponent = (dn * sxy - sx * sy) / den;
  fit.intercept = (sy - fit.exponent * sx) / dn;
  return fit;
}

double controlling(const MonitorSeries& s, std::size_t i, SingularityType type) {
  return is_type_iv(type) ? s.abs_rm[i] : s.f[i];
}

std::size_t nearest_in_log(const std::vector<double>& logs, const std::vector<std::size_t>& idx, double target) {
  std::size_t best = idx.front();
  double bd = kInf;
  for (std::size_t q = 0; q < idx.size(); ++q) {
    const double d = std::abs(logs[q] - target);
    if (d < bd) {
      bd = d;
      best = idx[q];
    }
  }
  return best;
}

}  // namespace

const char* to_string(SingularityType t) noexcept {
  switch (t) {
    case SingularityType::None: return "None";
    case SingularityType::I: return "I";
    case SingularityType::IIa: return "IIa";
    case SingularityType::IIb: return "IIb";
    case SingularityType::III: return "III";
    case SingularityType::IVa: return "IVa";
    case SingularityType::IVb: return "IVb";
    case SingularityType::IVc: return "IVc";
    case SingularityType::IVd: return "IVd";
  }
  return "Unknown";
}

SingularityType singularity_type_from_string(const std::string& s) {
  for (auto t : {SingularityType::None, SingularityType::I, SingularityType::IIa, SingularityType::IIb,
                 SingularityType::III, SingularityType::IVa, SingularityType::IVb, SingularityType::IVc,
                 SingularityType::IVd}) {
    if (s == to_string(t)) return t;
  }
  throw Error(ErrorCode::Schema, "unknown singularity type '" + s + "'");
}

bool is_type_iv(SingularityType t) {
  return t == SingularityType::IVa || t == SingularityType::IVb || t == SingularityType::IVc || t == SingularityType::IVd;
}

bool has_finite_time(SingularityType t) {
  return t == SingularityType::I || t == SingularityType::IIa || t == SingularityType::IVa || t == SingularityType::IVb;
}

MonitorSeries series_from(const Trajectory& traj, double horizon) {
  MonitorSeries s;
  for (const Sample& x : traj.samples) {
    s.t.push_back(x.t);
    s.u.push_back(x.monitors.u);
    s.abs_rm.push_back(x.monitors.abs_rm);
    s.f.push_back(x.monitors.f);
  }
  s.termination = traj.termination;
  s.t_est = traj.t_est;
  s.horizon = horizon;
  return s;
}

SingularityReport classify(const MonitorSeries& series, const ClassifyOptions& opt) {
  const std::size_t n = series.t.size();
  if (n == 0) throw Error(ErrorCode::InsufficientData, "empty trajectory");
  SingularityReport rep;
  rep.finite_time = series.termination != Termination::ReachedTEnd;
  const double t_last = series.t.back();
  if (rep.finite_time) {
    rep.t_est = std::isfinite(series.t_est) ? series.t_est : t_last;
    if (series.termination == Termination::StepUnderflow) {
      rep.notes.push_back("integration stopped by step underflow; T taken as the last time reached");
    }
  }
  rep.horizon = series.horizon > 0.0 ? std::min(series.horizon, t_last) : t_last;
  if (!rep.finite_time) rep.notes.push_back("T = infinity: the run reached its horizon without events");

  // Final decade window.
  std::vector<double> x;
  std::vector<std::size_t> idx;
  if (rep.finite_time) {
    double tau_min = kInf;
    for (std::size_t i = 0; i < n; ++i) {
      const double tau = rep.t_est - series.t[i];
      if (tau > 0.0) tau_min = std::min(tau_min, tau);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double tau = rep.t_est - series.t[i];
      if (tau > 0.0 && tau <= 10.0 * tau_min) {
        x.push_back(-std::log(tau));
        idx.push_back(i);
      }
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const double t = series.t[i];
      if (t > 0.0 && t >= rep.horizon / 10.0 && t <= rep.horizon) {
        x.push_back(std::log(t));
        idx.push_back(i);
      }
    }
  }
  if (idx.size() < opt.min_window_samples) {
    throw Error(ErrorCode::InsufficientData, "only " + std::to_string(idx.size()) + " samples in the final decade (need " +
                                                 std::to_string(opt.min_window_samples) + ")");
  }

  auto gather = [&](auto fn) {
    std::vector<double> v;
    v.reserve(idx.size());
    for (std::size_t i : idx) v.push_back(fn(i));
    return v;
  };
  rep.phi_fit = fit_growth(x, gather([&](std::size_t i) { return std::exp(series.u[i]); }));
  rep.singular_fit = fit_growth(x, gather([&](std::size_t i) { return std::abs(series.u[i]) + series.abs_rm[i]; }));
  rep.phi_bounded = rep.phi_fit.exponent <= opt.phi_bounded_exponent;

  for (std::size_t i = 0; i < n; ++i) {
    const double t = series.t[i];
    const double phi = std::exp(series.u[i]);
    rep.sup_phi = std::max(rep.sup_phi, phi);
    rep.sup_u_plus_rm = std::max(rep.sup_u_plus_rm, std::abs(series.u[i]) + series.abs_rm[i]);
    rep.sup_t_f = std::max(rep.sup_t_f, t * series.f[i]);
    rep.sup_t_rm = std::max(rep.sup_t_rm, t * series.abs_rm[i]);
    if (rep.finite_time && t < rep.t_est) {
      rep.sup_T_minus_t_f = std::max(rep.sup_T_minus_t_f, (rep.t_est - t) * series.f[i]);
      rep.sup_T_minus_t_rm = std::max(rep.sup_T_minus_t_rm, (rep.t_est - t) * series.abs_rm[i]);
    }
  }
  if (!rep.finite_time) {
    rep.sup_T_minus_t_f = kInf;
    rep.sup_T_minus_t_rm = kInf;
  }

  // Asymptotically constant |u| + |Rm|. Decaying curvature is still a (Type IV) singularity model.
  if (!rep.finite_time && std::abs(rep.singular_fit.exponent) <= opt.none_exponent) {
    rep.type = SingularityType::None;
    return rep;
  }

  const bool iv = rep.phi_bounded;
  const std::vector<double> weighted = gather([&](std::size_t i) {
    const double F = iv ? series.abs_rm[i] : series.f[i];
    return rep.finite_time ? (rep.t_est - series.t[i]) * F : series.t[i] * F;
  });
  rep.weighted_fit = fit_growth(x, weighted);
  const bool unbounded = rep.weighted_fit.exponent > opt.unbounded_exponent;
  if (rep.finite_time) {
    rep.type = iv ? (unbounded ? SingularityType::IVb : SingularityType::IVa)
                  : (unbounded ? SingularityType::IIa : SingularityType::I);
  } else {
    rep.type = iv ? (unbounded ? SingularityType::IVc : SingularityType::IVd)
                  : (unbounded ? SingularityType::IIb : SingularityType::III);
  }
  if (iv) rep.notes.push_back("|phi| bounded: |Rm| controls the classification; Type IV rescaling uses t_j + t/C_j");
  return rep;
}

std::vector<SequenceEntry> select_sequence(const MonitorSeries& s, const SingularityReport& rep, int count) {
  if (rep.type == SingularityType::None) throw Error(ErrorCode::NoSingularity, "no singularity to rescale");
  std::vector<SequenceEntry> out;
  if (count <= 0) return out;
  const std::size_t n = s.t.size();
  if (n < 2) throw Error(ErrorCode::InsufficientData, "trajectory too short for a blow-up sequence");
  const SingularityType type = rep.type;
  const double T = rep.t_est;

  // Samples usable for the type, with log of the geometric coordinate.
  std::vector<std::size_t> idx;
  std::vector<double> logs;
  for (std::size_t i = 0; i < n; ++i) {
    if (has_finite_time(type)) {
      if (s.t[i] < T) {
        idx.push_back(i);
        logs.push_back(std::log(T - s.t[i]));
      }
    } else if (s.t[i] > 0.0) {
      idx.push_back(i);
      logs.push_back(std::log(s.t[i]));
    }
  }
  if (idx.size() < 2) throw Error(ErrorCode::InsufficientData, "too few samples for a blow-up sequence");
  const double lo = logs.front();
  const double hi = logs.back();

  for (int j = 0; j < count; ++j) {
    SequenceEntry e;
    e.j = j;
    const double frac = static_cast<double>(j + 1) / count;
    switch (type) {
      case SingularityType::I:
      case SingularityType::IVa:
      case SingularityType::III:
      case SingularityType::IVd: {
        e.sample = nearest_in_log(logs, idx, lo + frac * (hi - lo));
        break;
      }
      case SingularityType::IIa:
      case SingularityType::IVb: {
        e.T_j = T - std::exp(lo + frac * (hi - lo));
        double best = -kInf;
        for (std::size_t i : idx) {
          if (s.t[i] > e.T_j) break;
          const double v = (e.T_j - s.t[i]) * controlling(s, i, type);
          if (v > best) {
            best = v;
            e.sample = i;
          }
        }
        break;
      }
      case SingularityType::IIb:
      case SingularityType::IVc: {
        const double base = std::min(10.0, s.t.back() / std::pow(2.0, count - 1));
        e.T_j = base * std::pow(2.0, j);
        double best = -kInf;
        for (std::size_t i : idx) {
          if (s.t[i] > e.T_j) break;
          const double v = s.t[i] * (e.T_j - s.t[i]) * controlling(s, i, type);
          if (v > best) {
            best = v;
            e.sample = i;
          }
        }
        break;
      }
      case SingularityType::None: break;
    }
    e.t = s.t[e.sample];
    e.C = controlling(s, e.sample, type);
    if (!(e.C > 0.0)) throw Error(ErrorCode::InsufficientData, "controlling quantity vanishes at a selected time");
    out.push_back(e);
  }
  return out;
}

TypeIIAStructure rescale_state(const KForm& phi, const KForm& omega, double C, SingularityType type) {
  if (!(C > 0.0)) throw Error(ErrorCode::InvalidArgument, "rescaling factor must be positive");
  const double phi_scale = is_type_iv(type) ? std::pow(C, 1.5) : 1.0;
  return metric_from(phi_scale * phi, C * omega);
}

std::vector<BoundRow> verify_bounds(const MonitorSeries& s, SingularityReport& rep) {
  std::vector<BoundRow> rows;
  if (rep.type == SingularityType::None) return rows;
  const SingularityType type = rep.type;
  const double T = rep.t_est;
  const std::size_t n = s.t.size();
  double A = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double F = controlling(s, i, type);
    if (has_finite_time(type)) {
      if (s.t[i] < T) A = std::max(A, (T - s.t[i]) * F);
    } else {
      A = std::max(A, s.t[i] * F);
    }
  }
  rep.bound_constant = A;

  for (const SequenceEntry& e : rep.sequence) {
    BoundRow row;
    row.j = e.j;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = s.t[i];
      const double sr = e.C * (t - e.t);             // rescaled time
      const double Fj = controlling(s, i, type) / e.C;  // rescaled controlling quantity
      double bound = kInf;
      switch (type) {
        case SingularityType::I:
        case SingularityType::IVa:
          if (t >= T) continue;
          bound = A / (e.C * (T - e.t) - sr);
          break;
        case SingularityType::IIa:
        case SingularityType::IVb:
          if (t >= e.T_j) continue;
          bound = 1.0 / (1.0 - sr / (e.C * (e.T_j - e.t)));
          break;
        case SingularityType::IIb:
        case SingularityType::IVc:
          if (t <= 0.0 || t >= e.T_j) continue;
          bound = e.t * (e.T_j - e.t) / ((e.t + sr / e.C) * (e.T_j - e.t - sr / e.C));
          break;
        case SingularityType::III:
        case SingularityType::IVd:
          if (t <= 0.0) continue;
          bound = A / (e.C * e.t + sr);
          break;
        case SingularityType::None: continue;
      }
      const double ratio = Fj / bound;
      ++row.points;
      row.max_ratio = std::max(row.max_ratio, ratio);
    }
    row.max_violation = std::max(0.0, row.max_ratio - 1.0);
    rows.push_back(row);
  }
  rep.bounds = rows;
  return rows;
}

}  // namespace tiia
