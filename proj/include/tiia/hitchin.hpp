#pragma once

// Pointwise construction of (J, g) from a primitive nondegenerate 3-form.
//
// K is represented relative to the reference volume mu = w^3/3!, so that
// K_phi(v) = (K v) (x) mu. With that normalization lambda = tr(K^2)/6 and
// J = K / sqrt(-lambda). For phi0 = e^135 - e^146 - e^245 - e^236 and
// w0 = e^12 + e^34 + e^56 this gives J e_1 = e_2, J e_3 = e_4, J e_5 = e_6 and
// g = Id.

#include "tiia/forms6.hpp"

namespace tiia {

struct EndoDensity {
  Mat6 K = Mat6::Zero();
};

struct TypeIIAStructure {
  KForm omega{2};
  KForm phi{3};
  Mat6 J = Mat6::Zero();
  MetricTensor g = MetricTensor::identity();
  double lambda = 0.0;    // coefficient against mu (x) mu
  double mu = 0.0;        // coefficient of w^3/3! on e^123456
  double norm_sq = 0.0;   // |phi|^2_g
  double u = 0.0;         // log |phi|_g
};

/// Reference volume w^3/3!.
KForm reference_volume(const KForm& omega);

EndoDensity k_map(const KForm& phi, const KForm& mu);
double lambda_invariant(const EndoDensity& k);

/// K / sqrt(-lambda). Throws DegenerateForm when lambda >= -1e-10 scale^4 / mu^2,
/// scale = max |phi_I|.
Mat6 j_from_phi(const KForm& phi, const KForm& mu);

/// Checks, in order: w nondegenerate, w ^ phi = 0, lambda < 0, g definite.
/// If w(X, JX) < 0 for all X the opposite root -J is taken.
TypeIIAStructure metric_from(const KForm& phi, const KForm& omega);

/// phi_hat(X,Y,Z) = phi(JX,JY,JZ) = -phi(JX,Y,Z); Omega = phi + i phi_hat is (3,0).
KForm phi_hat(const TypeIIAStructure& s);

/// h with phi ^ phi_hat = h mu. Equals |phi|^2 = 2 sqrt(-lambda).
double hitchin_density(const TypeIIAStructure& s);

/// gt_{jk} = -phi_{jab} phi_{kcd} w^{ac} w^{bd}, w^{ab} the inverse matrix of w_{ab}.
Mat6 coordinate_metric_raw(const KForm& phi, const KForm& omega);

/// The constant kappa with g = kappa gt / |phi|^2, measured on (phi0, w0).
double coordinate_metric_kappa();

/// kappa gt / |phi|^2_g, an independent route to g.
Mat6 coordinate_metric(const KForm& phi, const KForm& omega, double norm_sq);

/// Fully antisymmetric components T[a*36 + b*6 + c] of a 3-form.
std::array<double, 216> full_components(const KForm& phi);

/// Rebuild a 3-form from fully antisymmetric components.
KForm form_from_components(const std::array<double, 216>& t);

}  // namespace tiia
