#include "tiia/hitchin.hpp"

#include <cmath>

#include "tiia/errors.hpp"

namespace tiia {

namespace {

double primitivity_tolerance(const KForm& phi, const KForm& omega) {
  return 1e-10 * std::max(1.0, phi.max_abs() * omega.max_abs());
}

}  // namespace

KForm reference_volume(const KForm& omega) {
  if (omega.degree() != 2) throw Error(ErrorCode::DegreeMismatch, "omega must be a 2-form");
  return (1.0 / 6.0) * wedge(wedge(omega, omega), omega);
}

EndoDensity k_map(const KForm& phi, const KForm& mu) {
  if (phi.degree() != 3) throw Error(ErrorCode::DegreeMismatch, "k_map needs a 3-form");
  if (mu.degree() != kDim) throw Error(ErrorCode::DegreeMismatch, "k_map needs a 6-form volume");
  const double m = top_coefficient(mu);
  if (m == 0.0) throw Error(ErrorCode::InvalidArgument, "zero reference volume");
  EndoDensity out;
  for (int v = 0; v < kDim; ++v) {
    const KForm five = -wedge(interior_basis(v, phi), phi);
    // i_w (m e^123456) = m sum_r (-1)^r w_r e^{123456 without r}
    for (int r = 0; r < kDim; ++r) {
      const double sign = (r & 1) ? -1.0 : 1.0;
      out.K(r, v) = five.coeff(kTopMask & ~(1u << r)) / (sign * m);
    }
  }
  return out;
}

double lambda_invariant(const EndoDensity& k) { return (k.K * k.K).trace() / 6.0; }

// Relative to the size of phi. lambda / |phi|^4 decays like 1/a^2 along the nilmanifold
// solution, so this must stay well below 1e-10 for long runs; tr(K^2) roundoff is ~1e-15.
constexpr double kDegeneracyTolerance = 1e-13;

Mat6 j_from_phi(const KForm& phi, const KForm& mu) {
  const EndoDensity k = k_map(phi, mu);
  const double lam = lambda_invariant(k);
  const double scale = phi.max_abs();
  const double m = top_coefficient(mu);
  if (!(lam < -kDegeneracyTolerance * std::pow(scale, 4) / (m * m))) {
    throw Error(ErrorCode::DegenerateForm, "3-form is degenerate (lambda = " + std::to_string(lam) + ")");
  }
  return k.K / std::sqrt(-lam);
}

TypeIIAStructure metric_from(const KForm& phi, const KForm& omega) {
  if (phi.degree() != 3) throw Error(ErrorCode::DegreeMismatch, "phi must be a 3-form");
  const KForm mu = reference_volume(omega);
  const double m = top_coefficient(mu);
  const double wscale = omega.max_abs();
  if (!(std::abs(m) > 1e-12 * std::pow(wscale, 3)) || wscale == 0.0) {
    throw Error(ErrorCode::DegenerateSymplectic, "omega is degenerate");
  }
  if (wedge(omega, phi).max_abs() > primitivity_tolerance(phi, omega)) {
    throw Error(ErrorCode::NotPrimitive, "omega ^ phi != 0");
  }

  TypeIIAStructure s;
  s.omega = omega;
  s.phi = phi;
  s.mu = m;
  const EndoDensity k = k_map(phi, mu);
  s.lambda = lambda_invariant(k);
  Mat6 J = j_from_phi(phi, mu);

  const Mat6 W = two_form_matrix(omega);
  Mat6 g = W * J;  // g(X,Y) = w(X, JY)
  const double gscale = std::max(1e-300, g.cwiseAbs().maxCoeff());
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-8 * gscale) {
    throw Error(ErrorCode::NotPrimitive, "w(., J.) is not symmetric");
  }
  g = 0.5 * (g + g.transpose());
  const Eigen::SelfAdjointEigenSolver<Mat6> eig(g, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (hi < 0.0) {
    J = -J;
    g = -g;
  } else if (lo <= 0.0) {
    throw Error(ErrorCode::WrongOrientation, "w(X, JX) changes sign: g is indefinite");
  }
  s.J = J;
  s.g = MetricTensor(g);
  s.norm_sq = norm_squared(phi, s.g);
  s.u = 0.5 * std::log(s.norm_sq);
  return s;
}

std::array<double, 216> full_components(const KForm& phi) {
  if (phi.degree() != 3) throw Error(ErrorCode::DegreeMismatch, "expected a 3-form");
  std::array<double, 216> t{};
  for (int a = 0; a < kDim; ++a) {
    for (int b = 0; b < kDim; ++b) {
      for (int c = 0; c < kDim; ++c) {
        const int idx[3] = {a, b, c};
        t[a * 36 + b * 6 + c] = phi.component(idx);
      }
    }
  }
  return t;
}

KForm form_from_components(const std::array<double, 216>& t) {
  KForm out(3);
  for (unsigned m : masks_of_degree(3)) {
    const auto ix = MultiIndex::from_mask(m).indices();
    out.coeff(m) = t[(ix[0] - 1) * 36 + (ix[1] - 1) * 6 + (ix[2] - 1)];
  }
  return out;
}

KForm phi_hat(const TypeIIAStructure& s) {
  const auto t = full_components(s.phi);
  KForm out(3);
  for (unsigned m : masks_of_degree(3)) {
    const auto ix = MultiIndex::from_mask(m).indices();
    const int a = ix[0] - 1, b = ix[1] - 1, c = ix[2] - 1;
    double v = 0.0;
    for (int r = 0; r < kDim; ++r) v -= s.J(r, a) * t[r * 36 + b * 6 + c];
    out.coeff(m) = v;
  }
  return out;
}

double hitchin_density(const TypeIIAStructure& s) {
  return top_coefficient(wedge(s.phi, phi_hat(s))) / s.mu;
}

Mat6 coordinate_metric_raw(const KForm& phi, const KForm& omega) {
  const auto t = full_components(phi);
  const Mat6 winv = two_form_matrix(omega).inverse();
  // contract phi_{kcd} with w^{ac} w^{bd} first: P_k^{ab}
  std::array<double, 216> p{};
  for (int k = 0; k < kDim; ++k) {
    for (int a = 0; a < kDim; ++a) {
      for (int b = 0; b < kDim; ++b) {
        double v = 0.0;
        for (int c = 0; c < kDim; ++c) {
          if (winv(a, c) == 0.0) continue;
          for (int d = 0; d < kDim; ++d) v += winv(a, c) * winv(b, d) * t[k * 36 + c * 6 + d];
        }
        p[k * 36 + a * 6 + b] = v;
      }
    }
  }
  Mat6 out;
  for (int j = 0; j < kDim; ++j) {
    for (int k = 0; k < kDim; ++k) {
      double v = 0.0;
      for (int ab = 0; ab < 36; ++ab) v += t[j * 36 + ab] * p[k * 36 + ab];
      out(j, k) = -v;
    }
  }
  return out;
}

double coordinate_metric_kappa() {
  static const double kappa = [] {
    const KForm phi0 = KForm::monomial({1, 3, 5}) - KForm::monomial({1, 4, 6}) -
                       KForm::monomial({2, 4, 5}) - KForm::monomial({2, 3, 6});
    const KForm w0 = KForm::monomial({1, 2}) + KForm::monomial({3, 4}) + KForm::monomial({5, 6});
    const TypeIIAStructure s = metric_from(phi0, w0);
    const Mat6 raw = coordinate_metric_raw(phi0, w0) / s.norm_sq;
    return s.g.matrix().trace() / raw.trace();
  }();
  return kappa;
}

Mat6 coordinate_metric(const KForm& phi, const KForm& omega, double norm_sq) {
  return coordinate_metric_kappa() * coordinate_metric_raw(phi, omega) / norm_sq;
}

}  // namespace tiia
