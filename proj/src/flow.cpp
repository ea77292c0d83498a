#include "tiia/flow.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "log.hpp"
#include "tiia/errors.hpp"

namespace tiia {

FlowState make_state(const InvariantModel& model, double t, const Eigen::VectorXd& coeffs) {
  FlowState s;
  s.t = t;
  s.coeffs = coeffs;
  s.cache.structure = metric_from(model.phi(coeffs), model.omega);
  s.cache.levi_civita = koszul_connection(s.cache.structure.g, model.algebra);
  s.cache.curvature = riemann_curvature(s.cache.levi_civita, model.algebra, s.cache.structure.g);
  s.cache.nijenhuis = nijenhuis(s.cache.structure.J, model.algebra);
  return s;
}

KForm rhs_primitive(const TypeIIAStructure& s, const LieAlgebra6& alg) {
  const KForm mu = reference_volume(s.omega);
  const KForm a = s.norm_sq * hodge_star(s.phi, s.g, mu);
  return ce_differential(lambda_contraction(ce_differential(a, alg), s.omega), alg);
}

KForm rhs_primitive(const FlowState& state, const InvariantModel& model) {
  return rhs_primitive(state.cache.structure, model.algebra);
}

KForm n_dagger_phi(const NijenhuisTensor& n, const TypeIIAStructure& s) {
  const auto t = full_components(s.phi);
  const Mat6& gi = s.g.inverse();
  std::array<double, 216> up{};  // N^{a b}_j at a*36 + j*6 + b
  for (int a = 0; a < kDim; ++a) {
    for (int j = 0; j < kDim; ++j) {
      for (int b = 0; b < kDim; ++b) {
        double v = 0.0;
        for (int q = 0; q < kDim; ++q) v += n(a, j, q) * gi(q, b);
        up[a * 36 + j * 6 + b] = v;
      }
    }
  }
  Mat6 m;
  for (int k = 0; k < kDim; ++k) {
    for (int j = 0; j < kDim; ++j) {
      double v = 0.0;
      for (int a = 0; a < kDim; ++a) {
        for (int b = 0; b < kDim; ++b) {
          v += up[a * 36 + j * 6 + b] * t[a * 36 + k * 6 + b] - up[a * 36 + k * 6 + b] * t[a * 36 + j * 6 + b];
        }
      }
      m(k, j) = v;
    }
  }
  return two_form_from_matrix(m);
}

KForm rhs_laplacian(const FlowState& state, const InvariantModel& model) {
  const TypeIIAStructure& s = state.cache.structure;
  const KForm scaled = s.norm_sq * s.phi;
  const KForm first = -ce_differential(codifferential(scaled, s.g, model.algebra), model.algebra);
  const KForm second = 2.0 * s.norm_sq * ce_differential(n_dagger_phi(state.cache.nijenhuis, s), model.algebra);
  return first + second;
}

MetricVelocity metric_velocity(const FlowState& state) {
  const NijenhuisTensor& n = state.cache.nijenhuis;
  Mat6 n2 = Mat6::Zero();
  for (int i = 0; i < kDim; ++i) {
    for (int j = 0; j < kDim; ++j) {
      double v = 0.0;
      for (int a = 0; a < kDim; ++a) {
        for (int b = 0; b < kDim; ++b) v += n(a, i, b) * n(b, j, a);
      }
      n2(i, j) = v;
    }
  }
  MetricVelocity out;
  out.E = state.cache.structure.norm_sq * (-2.0 * state.cache.curvature.ricci() - 4.0 * n2);
  out.E = 0.5 * (out.E + out.E.transpose());
  return out;
}

double scalar_velocity(const FlowState& state) {
  return 0.5 * state.cache.structure.norm_sq * state.cache.nijenhuis.norm_sq(state.cache.structure.g);
}

Eigen::VectorXd reduce_to_ansatz(const KForm& rhs, const InvariantModel& model) {
  if (rhs.degree() != 3) throw Error(ErrorCode::DegreeMismatch, "ansatz reduction needs a 3-form");
  const Eigen::VectorXd r = rhs.to_vector();
  const Eigen::MatrixXd b = model.basis_matrix();
  const double rn = r.norm();
  if (rn == 0.0) return Eigen::VectorXd::Zero(b.cols());
  const Eigen::VectorXd c = b.colPivHouseholderQr().solve(r);
  const double residual = (r - b * c).norm();
  if (residual > 1e-8 * rn) {
    std::ostringstream msg;
    msg << "flow leaves the ansatz: residual " << residual << " against |rhs| " << rn;
    throw Error(ErrorCode::AnsatzNotPreserved, msg.str());
  }
  return c;
}

Eigen::VectorXd coefficient_velocity(const InvariantModel& model, const Eigen::VectorXd& coeffs) {
  const TypeIIAStructure s = metric_from(model.phi(coeffs), model.omega);
  return reduce_to_ansatz(rhs_primitive(s, model.algebra), model);
}

Monitors compute_monitors(const FlowState& state, const InvariantModel& model) {
  const TypeIIAStructure& s = state.cache.structure;
  Monitors m;
  m.u = s.u;
  m.abs_rm = state.cache.curvature.norm;
  m.n_sq = state.cache.nijenhuis.norm_sq(s.g);
  m.grad_n = covariant_derivative(nijenhuis_tensor(state.cache.nijenhuis), state.cache.levi_civita, 1).norm(s.g);
  m.hitchin = hitchin_density(s);
  m.phi_norm = std::exp(s.u);
  m.f = std::cbrt(m.phi_norm) + m.abs_rm;
  m.u_plus_rm = std::abs(m.u) + m.abs_rm;
  m.lambda = s.lambda;
  m.closed_residual = ce_differential(s.phi, model.algebra).max_abs();
  m.primitive_residual = wedge(s.omega, s.phi).max_abs();
  return m;
}

const char* to_string(Termination t) noexcept {
  switch (t) {
    case Termination::ReachedTEnd: return "ReachedTEnd";
    case Termination::Degenerate: return "Degenerate";
    case Termination::BlowUp: return "BlowUp";
    case Termination::StepUnderflow: return "StepUnderflow";
  }
  return "Unknown";
}

Termination termination_from_string(const std::string& s) {
  if (s == "ReachedTEnd") return Termination::ReachedTEnd;
  if (s == "Degenerate") return Termination::Degenerate;
  if (s == "BlowUp") return Termination::BlowUp;
  if (s == "StepUnderflow") return Termination::StepUnderflow;
  throw Error(ErrorCode::Schema, "unknown termination '" + s + "'");
}

double estimate_blowup_time(const std::vector<Sample>& samples, int points) {
  const int n = std::min<int>(points, static_cast<int>(samples.size()));
  if (n < 2) return samples.empty() ? std::numeric_limits<double>::infinity() : samples.back().t;
  // q = 1/|c| vanishes at T; r = q/q' = -|c|^2/(c.c') is asymptotically linear in t.
  // Times are centered on the last sample: near T their spread is many orders below t.
  const double t_last = samples.back().t;
  double st = 0, sr = 0, stt = 0, str = 0;
  int used = 0;
  for (int k = static_cast<int>(samples.size()) - n; k < static_cast<int>(samples.size()); ++k) {
    const Sample& s = samples[static_cast<std::size_t>(k)];
    const double dot = s.coeffs.dot(s.velocity);
    if (dot == 0.0) continue;
    const double r = -s.coeffs.squaredNorm() / dot;
    const double x = s.t - t_last;
    st += x;
    sr += r;
    stt += x * x;
    str += x * r;
    ++used;
  }
  if (used < 2) return t_last;
  const double den = used * stt - st * st;
  if (!(den > 0.0)) return t_last;
  const double slope = (used * str - st * sr) / den;
  const double icpt = (sr - slope * st) / used;
  if (!(slope > 0.0)) return t_last;
  const double root = t_last - icpt / slope;
  if (!std::isfinite(root)) return t_last;
  return std::max(root, t_last);
}

namespace {

// Dormand-Prince 5(4).
constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {0, 0, 0, 0, 0, 0},
    {1.0 / 5, 0, 0, 0, 0, 0},
    {3.0 / 40, 9.0 / 40, 0, 0, 0, 0},
    {44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0},
    {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr double kE[7] = {71.0 / 57600, 0, -71.0 / 16695, 71.0 / 1920, -17253.0 / 339200, 22.0 / 525, -1.0 / 40};

bool degenerate_code(ErrorCode c) {
  return c == ErrorCode::DegenerateForm || c == ErrorCode::WrongOrientation || c == ErrorCode::DegenerateMetric;
}

}  // namespace

Trajectory integrate(const InvariantModel& model, const Eigen::VectorXd& initial, double t_end,
                     const IntegrateOptions& opt) {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw Error(ErrorCode::InvalidArgument, "t_end must be positive");
  Trajectory traj;
  traj.t_end = t_end;
  const double h_max = opt.max_step > 0.0 ? opt.max_step : t_end / 200.0;
  const Eigen::Index n = initial.size();

  auto rhs = [&](const Eigen::VectorXd& c) {
    ++traj.rhs_evaluations;
    return coefficient_velocity(model, c);
  };
  auto record = [&](double t, const Eigen::VectorXd& c, const Eigen::VectorXd& v) {
    Sample s;
    s.t = t;
    s.coeffs = c;
    s.velocity = v;
    s.monitors = compute_monitors(make_state(model, t, c), model);
    traj.samples.push_back(std::move(s));
  };

  double t = 0.0;
  Eigen::VectorXd y = initial;
  Eigen::VectorXd k[7];
  k[0] = rhs(y);
  record(t, y, k[0]);
  const double c0 = std::max(1.0, initial.cwiseAbs().maxCoeff());
  const double f0 = std::max(1.0, traj.samples.front().monitors.f);
  double h = std::min(opt.h0, h_max);
  std::size_t steps = 0;

  while (t < t_end * (1.0 - 1e-15)) {
    if (++steps > opt.max_steps) {
      traj.termination = Termination::StepUnderflow;
      traj.message = "step budget exhausted at t = " + std::to_string(t);
      break;
    }
    double hs = std::min({h, h_max, t_end - t});
    const double vn = k[0].norm();
    if (vn > 0.0) hs = std::min(hs, opt.growth_fraction * std::max(1.0, y.norm()) / vn);
    // Below a few ulps of t the step no longer advances time.
    const double h_floor = std::max(opt.h_min, 4.0 * std::numeric_limits<double>::epsilon() * std::abs(t));
    if (hs < h_floor) {
      traj.termination = Termination::StepUnderflow;
      traj.message = "step size fell below h_min at t = " + std::to_string(t);
      break;
    }

    bool degenerate = false;
    Eigen::VectorXd stage(n);
    try {
      for (int s = 1; s < 7; ++s) {
        stage = y;
        for (int q = 0; q < s; ++q) {
          if (kA[s][q] != 0.0) stage += hs * kA[s][q] * k[q];
        }
        k[s] = rhs(stage);
      }
    } catch (const Error& e) {
      if (!degenerate_code(e.code())) throw;
      degenerate = true;
    }
    if (degenerate) {
      h = 0.5 * hs;
      ++traj.rejected_steps;
      if (h < h_floor) {
        traj.termination = Termination::Degenerate;
        traj.t_est = t;
        traj.message = "3-form degenerates near t = " + std::to_string(t);
        break;
      }
      continue;
    }

    Eigen::VectorXd err = Eigen::VectorXd::Zero(n);
    for (int q = 0; q < 7; ++q) {
      if (kE[q] != 0.0) err += hs * kE[q] * k[q];
    }
    const Eigen::VectorXd y_new = stage;  // stage 7 is the 5th-order solution
    double en = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
      en = std::max(en, std::abs(err[i]) / sc);
    }

    if (en <= 1.0) {
      t += hs;
      y = y_new;
      k[0] = k[6];
      try {
        record(t, y, k[0]);
      } catch (const Error& e) {
        if (!degenerate_code(e.code())) throw;
        traj.termination = Termination::Degenerate;
        traj.t_est = t;
        traj.message = e.what();
        break;
      }
      const Monitors& m = traj.samples.back().monitors;
      if (y.cwiseAbs().maxCoeff() > opt.blowup_threshold * c0 || m.f > opt.blowup_threshold * f0) {
        traj.termination = Termination::BlowUp;
        traj.t_est = estimate_blowup_time(traj.samples, opt.t_est_points);
        traj.message = "coefficients exceed the blow-up threshold at t = " + std::to_string(t);
        break;
      }
      const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
      h = hs * fac;
    } else {
      ++traj.rejected_steps;
      h = hs * std::max(0.2, 0.9 * std::pow(en, -0.25));
      if (h < h_floor) {
        traj.termination = Termination::StepUnderflow;
        traj.message = "error control drove the step below h_min at t = " + std::to_string(t);
        break;
      }
    }
  }
  std::ostringstream msg;
  msg << "integration finished: " << to_string(traj.termination) << " after " << traj.samples.size()
      << " samples, t = " << t;
  log::info(msg.str());
  return traj;
}

}  // namespace tiia
