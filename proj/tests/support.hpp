#pragma once

#include <cmath>
#include <random>
#include <string>

#include "tiia/errors.hpp"
#include "tiia/flow.hpp"
#include "tiia/hitchin.hpp"
#include "tiia/homogeneous.hpp"
#include "tiia/model_file.hpp"

namespace testing {

using namespace tiia;

inline KForm omega0() {
  return KForm::monomial({1, 2}) + KForm::monomial({3, 4}) + KForm::monomial({5, 6});
}

// Real part of (e1 + i e2)(e3 + i e4)(e5 + i e6).
inline KForm phi0() {
  return KForm::monomial({1, 3, 5}) - KForm::monomial({1, 4, 6}) - KForm::monomial({2, 3, 6}) -
         KForm::monomial({2, 4, 5});
}

inline std::string model_path(const std::string& name) { return std::string(TIIA_MODELS_DIR) + "/" + name + ".json"; }

inline ModelFile shipped(const std::string& name) { return load_model_file(model_path(name)); }

inline KForm random_form(std::mt19937_64& rng, int k, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  KForm a(k);
  for (unsigned m : masks_of_degree(k)) a.coeff(m) = u(rng);
  return a;
}

inline Mat6 random_matrix(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Mat6 m;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) m(i, j) = u(rng);
  return m;
}

inline Mat6 random_spd(std::mt19937_64& rng) {
  const Mat6 a = random_matrix(rng);
  return a * a.transpose() + 0.5 * Mat6::Identity();
}

// Near-identity frame change; keeps the orientation.
inline Mat6 random_frame(std::mt19937_64& rng, double spread = 0.4) {
  return Mat6::Identity() + random_matrix(rng, spread);
}

// (A^* a)(X, Y, Z) = a(AX, AY, AZ), written out on components.
inline KForm pullback3(const KForm& a, const Mat6& A) {
  const auto c = full_components(a);
  std::array<double, 216> out{};
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      for (int k = 0; k < 6; ++k) {
        double s = 0.0;
        for (int p = 0; p < 6; ++p)
          for (int q = 0; q < 6; ++q)
            for (int r = 0; r < 6; ++r) s += A(p, i) * A(q, j) * A(r, k) * c[p * 36 + q * 6 + r];
        out[i * 36 + j * 6 + k] = s;
      }
  return form_from_components(out);
}

inline KForm pullback2(const KForm& w, const Mat6& A) {
  return two_form_from_matrix(A.transpose() * two_form_matrix(w) * A);
}

struct RandomPair {
  KForm phi;
  KForm omega;
};

// A random nondegenerate, primitive pair: a frame change of (phi0, omega0), rescaled.
inline RandomPair random_pair(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> s(0.3, 3.0);
  const Mat6 A = random_frame(rng);
  return {s(rng) * pullback3(phi0(), A), s(rng) * pullback2(omega0(), A)};
}

// Random ansatz coefficients that give a valid state of the model.
inline Eigen::VectorXd random_state(std::mt19937_64& rng, const ModelFile& mf) {
  const Eigen::Index n = mf.initial.size();
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int tries = 0; tries < 10000; ++tries) {
    Eigen::VectorXd c(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double base = mf.initial[i];
      // Scale-like perturbation around the shipped initial data.
      c[i] = base == 0.0 ? 3.0 * u(rng) : base * std::exp(u(rng));
    }
    try {
      const TypeIIAStructure s = metric_from(mf.model.phi(c), mf.model.omega);
      if (s.g.is_riemannian()) return c;
    } catch (const Error&) {
    }
  }
  throw Error(ErrorCode::InvalidArgument, "no valid random state for " + mf.name);
}

inline double max_abs_diff(const KForm& a, const KForm& b) { return (a - b).max_abs(); }

}  // namespace testing
