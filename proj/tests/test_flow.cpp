#include <doctest.h>

#include "support.hpp"

using namespace tiia;
using namespace testing;

namespace {

const double kLambda = std::log((3.0 + std::sqrt(5.0)) / 2.0);

double closed_form_T(double a, double b, double g, double d) {
  const double p = a * d, q = b * g;
  const double ratio = p == q ? 1.0 / p : (std::log(q) - std::log(p)) / (q - p);
  return ratio / (32.0 * kLambda * kLambda);
}

}  // namespace

TEST_CASE("velocity at reference states") {
  const ModelFile nil = shipped("nilmanifold_example2");
  const Eigen::VectorXd v = coefficient_velocity(nil.model, Eigen::Vector2d::Zero());
  CHECK(v[0] == doctest::Approx(8.0).epsilon(1e-14));
  CHECK(std::abs(v[1]) < 1e-14);
  const KForm rhs = rhs_primitive(metric_from(phi0(), omega0()), nil.model.algebra);
  CHECK(rhs.coeff(0x15) == doctest::Approx(8.0));
  CHECK(rhs.max_abs() == doctest::Approx(8.0));

  const ModelFile tv = shipped("tomassini_vezzoni");
  const Eigen::VectorXd w = coefficient_velocity(tv.model, Eigen::Vector4d::Ones());
  for (int i = 0; i < 4; ++i) CHECK(w[i] == doctest::Approx(16.0 * kLambda * kLambda).epsilon(1e-13));

  const ModelFile torus = shipped("torus");
  CHECK(coefficient_velocity(torus.model, torus.initial).norm() == 0.0);
}

TEST_CASE("right-hand side is closed, primitive and matches the Laplacian form") {
  std::mt19937_64 rng(41);
  for (const char* name : {"torus", "nilmanifold_example2", "tomassini_vezzoni"}) {
    const ModelFile mf = shipped(name);
    for (int trial = 0; trial < 60; ++trial) {
      const FlowState st = make_state(mf.model, 0.0, random_state(rng, mf));
      const KForm a = rhs_primitive(st, mf.model);
      const KForm b = rhs_laplacian(st, mf.model);
      CHECK((a - b).flat_norm() <= 1e-9 * a.flat_norm());
      CHECK(ce_differential(a, mf.model.algebra).max_abs() <= 1e-12 * std::max(1.0, a.max_abs()));
      CHECK(wedge(mf.model.omega, a).max_abs() <= 1e-12 * std::max(1.0, a.max_abs()));
    }
  }
}

TEST_CASE("metric and scalar velocity against finite differences") {
  std::mt19937_64 rng(42);
  for (const char* name : {"nilmanifold_example2", "tomassini_vezzoni"}) {
    const ModelFile mf = shipped(name);
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::VectorXd c = random_state(rng, mf);
      const FlowState st = make_state(mf.model, 0.0, c);
      const KForm phi = mf.model.phi(c);
      const KForm dphi = rhs_primitive(st, mf.model);
      const double h = 1e-4 * phi.max_abs() / std::max(1e-300, dphi.max_abs());
      const TypeIIAStructure sp = metric_from(phi + h * dphi, mf.model.omega);
      const TypeIIAStructure sm = metric_from(phi - h * dphi, mf.model.omega);
      const Mat6 fd = (sp.g.matrix() - sm.g.matrix()) / (2.0 * h);
      const Mat6 E = metric_velocity(st).E;
      CHECK((fd - E).norm() <= 1e-6 * std::max(1.0, E.norm()));
      const double du = (sp.u - sm.u) / (2.0 * h);
      CHECK(scalar_velocity(st) == doctest::Approx(du).epsilon(1e-6));
      const double n2 = st.cache.nijenhuis.norm_sq(st.cache.structure.g);
      CHECK(scalar_velocity(st) == doctest::Approx(0.5 * st.cache.structure.norm_sq * n2).epsilon(1e-12));
    }
  }
}

TEST_CASE("ansatz reduction rejects forms outside the span") {
  const ModelFile nil = shipped("nilmanifold_example2");
  try {
    reduce_to_ansatz(KForm::monomial({2, 4, 6}), nil.model);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AnsatzNotPreserved);
  }
  const Eigen::VectorXd c = reduce_to_ansatz(3.0 * KForm::monomial({1, 3, 5}), nil.model);
  CHECK(c[0] == doctest::Approx(3.0));
}

TEST_CASE("nilmanifold solution is linear in t") {
  const ModelFile nil = shipped("nilmanifold_example2");
  const Trajectory tr = integrate(nil.model, nil.initial, 1.0);
  CHECK(tr.termination == Termination::ReachedTEnd);
  for (const Sample& s : tr.samples) {
    CHECK(s.coeffs[0] == doctest::Approx(8.0 * s.t).epsilon(1e-9).scale(1.0));
    CHECK(std::abs(s.coeffs[1]) <= 1e-10);
    CHECK(s.monitors.closed_residual == 0.0);
  }
  CHECK(tr.samples.back().t == 1.0);
  for (std::size_t i = 1; i < tr.samples.size(); ++i) {
    CHECK(tr.samples[i].monitors.hitchin >= tr.samples[i - 1].monitors.hitchin - 1e-9);
  }
  // deterministic
  const Trajectory again = integrate(nil.model, nil.initial, 1.0);
  REQUIRE(again.samples.size() == tr.samples.size());
  CHECK(again.samples.back().coeffs == tr.samples.back().coeffs);
}

TEST_CASE("torus is stationary") {
  const ModelFile torus = shipped("torus");
  const Trajectory tr = integrate(torus.model, torus.initial, 5.0);
  CHECK(tr.termination == Termination::ReachedTEnd);
  for (const Sample& s : tr.samples) {
    CHECK(s.coeffs[0] == 1.0);
    CHECK(s.monitors.abs_rm == 0.0);
    CHECK(s.monitors.u == doctest::Approx(std::log(2.0)));
  }
}

TEST_CASE("solvmanifold: conserved quantity, norm identity and blow-up time") {
  const ModelFile tv = shipped("tomassini_vezzoni");
  const Eigen::Vector4d init(1.0, 3.0, 2.0, 1.0);
  const Trajectory tr = integrate(tv.model, init, 1.0);
  CHECK(tr.termination == Termination::BlowUp);
  const double q0 = init[0] * init[3] - init[1] * init[2];
  for (const Sample& s : tr.samples) {
    const auto& c = s.coeffs;
    const double scale = std::max(1.0, std::abs(c[1] * c[2]));
    CHECK(std::abs(c[0] * c[3] - c[1] * c[2] - q0) <= 1e-7 * scale);
    const double nsq = std::exp(2.0 * s.monitors.u);
    CHECK(nsq * nsq == doctest::Approx(64.0 * c[0] * c[1] * c[2] * c[3]).epsilon(1e-9));
  }
  const double T = closed_form_T(1, 3, 2, 1);
  CHECK(tr.t_est == doctest::Approx(T).epsilon(1e-6));
  CHECK(tr.t_est >= tr.samples.back().t);
}

TEST_CASE("blow-up time from a synthetic power law") {
  std::vector<Sample> samples;
  const double T = 0.75;
  for (int k = 0; k < 8; ++k) {
    Sample s;
    s.t = T - 1e-3 * std::pow(0.9, k);
    const double tau = T - s.t;
    s.coeffs = Eigen::Vector2d(1.0, 2.0) * std::pow(tau, -0.5);
    s.velocity = 0.5 * s.coeffs / tau;
    samples.push_back(s);
  }
  CHECK(estimate_blowup_time(samples, 5) == doctest::Approx(T).epsilon(1e-12));
  CHECK(std::isinf(estimate_blowup_time({}, 5)));
}

TEST_CASE("termination names round trip") {
  for (Termination t : {Termination::ReachedTEnd, Termination::Degenerate, Termination::BlowUp,
                        Termination::StepUnderflow}) {
    CHECK(termination_from_string(to_string(t)) == t);
  }
  CHECK_THROWS_AS(termination_from_string("Sideways"), Error);
}

TEST_CASE("impossible tolerances underflow the step") {
  const ModelFile nil = shipped("nilmanifold_example2");
  IntegrateOptions o;
  o.rtol = 1e-300;
  o.atol = 1e-300;
  const Trajectory tr = integrate(nil.model, nil.initial, 1.0, o);
  CHECK(tr.termination == Termination::StepUnderflow);
}
