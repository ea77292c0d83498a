#pragma once

// The flow d/dt phi = d Lambda d(|phi|^2 * phi) on invariant closed primitive
// 3-forms, reduced to an ODE on ansatz coefficients.

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "tiia/hitchin.hpp"
#include "tiia/homogeneous.hpp"

namespace tiia {

struct Geometry {
  TypeIIAStructure structure;
  Connection levi_civita;
  CurvatureTensor curvature;
  NijenhuisTensor nijenhuis;
};

struct FlowState {
  double t = 0.0;
  Eigen::VectorXd coeffs;
  Geometry cache;
};

/// Rebuilds the whole cache from the coefficients.
FlowState make_state(const InvariantModel& model, double t, const Eigen::VectorXd& coeffs);

KForm rhs_primitive(const TypeIIAStructure& s, const LieAlgebra6& alg);
KForm rhs_primitive(const FlowState& state, const InvariantModel& model);

/// -d d^dagger(|phi|^2 phi) + 2 |phi|^2 d(N^dagger . phi).
KForm rhs_laplacian(const FlowState& state, const InvariantModel& model);

/// (N^dagger . phi)_{kj} = N^{a b}_j phi_{akb} - N^{a b}_k phi_{ajb}, N^{a b}_j = N^a_{js} g^{sb}.
KForm n_dagger_phi(const NijenhuisTensor& n, const TypeIIAStructure& s);

struct MetricVelocity {
  Mat6 E = Mat6::Zero();
};

/// E = e^{2u} (-2 Ric - 4 N2), N2_{ij} = N^a_{ib} N^b_{ja}.
MetricVelocity metric_velocity(const FlowState& state);

/// du/dt = 1/2 e^{2u} |N|^2.
double scalar_velocity(const FlowState& state);

/// Least-squares coordinates of rhs in the ansatz basis. Throws
/// AnsatzNotPreserved when the residual exceeds 1e-8 |rhs|.
Eigen::VectorXd reduce_to_ansatz(const KForm& rhs, const InvariantModel& model);

/// Coefficient velocity: rhs_primitive followed by reduce_to_ansatz.
Eigen::VectorXd coefficient_velocity(const InvariantModel& model, const Eigen::VectorXd& coeffs);

struct Monitors {
  double u = 0.0;
  double abs_rm = 0.0;
  double n_sq = 0.0;
  double grad_n = 0.0;
  double hitchin = 0.0;
  double f = 0.0;           // |phi|^{1/3} + |Rm|
  double phi_norm = 0.0;
  double u_plus_rm = 0.0;   // |u| + |Rm|
  double lambda = 0.0;
  double closed_residual = 0.0;     // max |d phi|
  double primitive_residual = 0.0;  // max |w ^ phi|
};

Monitors compute_monitors(const FlowState& state, const InvariantModel& model);

enum class Termination { ReachedTEnd, Degenerate, BlowUp, StepUnderflow };

const char* to_string(Termination t) noexcept;
Termination termination_from_string(const std::string& s);

struct IntegrateOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  double h0 = 1e-3;
  double h_min = 1e-14;
  double max_step = 0.0;            // 0: t_end / 200
  double blowup_threshold = 1e4;    // relative to max(1, initial value)
  double growth_fraction = 0.01;    // h <= fraction * max(|c|, 1) / |c'|
  std::size_t max_steps = 2000000;
  int t_est_points = 5;
};

struct Sample {
  double t = 0.0;
  Eigen::VectorXd coeffs;
  Eigen::VectorXd velocity;
  Monitors monitors;
};

struct Trajectory {
  std::vector<Sample> samples;
  Termination termination = Termination::ReachedTEnd;
  double t_est = std::numeric_limits<double>::infinity();
  double t_end = 0.0;
  std::string message;
  std::size_t rejected_steps = 0;
  std::size_t rhs_evaluations = 0;
};

Trajectory integrate(const InvariantModel& model, const Eigen::VectorXd& initial, double t_end,
                     const IntegrateOptions& options = {});

/// Root of a linear fit of r = -|c|^2 / (c . c') over the last `points` samples.
double estimate_blowup_time(const std::vector<Sample>& samples, int points);

}  // namespace tiia
