#include <doctest.h>

#include <functional>

#include "support.hpp"
#include "tiia/singularity.hpp"

using namespace tiia;
using namespace testing;

namespace {

using Fn = std::function<double(double)>;

// Finite T: tau = T - t from T down to T * 1e-6, 100 samples per decade.
MonitorSeries finite_series(double T, Fn u, Fn rm, Fn f) {
  MonitorSeries s;
  s.t.push_back(0.0);
  for (int k = 1; k <= 600; ++k) s.t.push_back(T - T * std::pow(10.0, -k / 100.0));
  for (double t : s.t) {
    const double tau = T - t;
    s.u.push_back(u(tau));
    s.abs_rm.push_back(rm(tau));
    s.f.push_back(f(tau));
  }
  s.termination = Termination::BlowUp;
  s.t_est = T;
  s.horizon = 1.0;
  return s;
}

// Infinite T: t from 1e-2 to the horizon 1e3.
MonitorSeries infinite_series(Fn u, Fn rm, Fn f, double horizon = 1e3) {
  MonitorSeries s;
  for (int k = -200; k <= 300; ++k) s.t.push_back(std::pow(10.0, k / 100.0) * horizon / 1e3);
  for (double t : s.t) {
    s.u.push_back(u(t));
    s.abs_rm.push_back(rm(t));
    s.f.push_back(f(t));
  }
  s.termination = Termination::ReachedTEnd;
  s.horizon = horizon;
  return s;
}

void check_sequence_and_bounds(const MonitorSeries& s, SingularityReport rep) {
  rep.sequence = select_sequence(s, rep, 5);
  REQUIRE(rep.sequence.size() == 5);
  for (std::size_t j = 0; j < rep.sequence.size(); ++j) {
    CHECK(rep.sequence[j].C > 0.0);
    if (j > 0) CHECK(rep.sequence[j].t >= rep.sequence[j - 1].t);
    if (has_finite_time(rep.type)) CHECK(rep.sequence[j].t < rep.t_est);
  }
  const auto rows = verify_bounds(s, rep);
  REQUIRE(rows.size() == 5);
  for (const BoundRow& r : rows) {
    CHECK(r.points > 0u);
    CHECK(r.max_violation <= 1e-3);
  }
  CHECK(select_sequence(s, rep, 0).empty());
}

}  // namespace

TEST_CASE("type names round trip") {
  for (auto t : {SingularityType::None, SingularityType::I, SingularityType::IIa, SingularityType::IIb,
                 SingularityType::III, SingularityType::IVa, SingularityType::IVb, SingularityType::IVc,
                 SingularityType::IVd}) {
    CHECK(singularity_type_from_string(to_string(t)) == t);
  }
  CHECK_THROWS_AS(singularity_type_from_string("V"), Error);
  CHECK(is_type_iv(SingularityType::IVc));
  CHECK_FALSE(is_type_iv(SingularityType::III));
  CHECK(has_finite_time(SingularityType::IIa));
  CHECK_FALSE(has_finite_time(SingularityType::IIb));
}

TEST_CASE("finite-time types") {
  auto grow = [](double tau) { return -0.5 * std::log(tau); };
  auto flat = [](double) { return 0.2; };
  auto one = [](double) { return 1.0; };
  struct Case {
    const char* name;
    Fn u, rm, f;
    SingularityType expected;
  };
  const Case cases[] = {
      {"I", grow, one, [](double tau) { return 1.0 / tau; }, SingularityType::I},
      {"I slow", grow, one, [](double tau) { return std::pow(tau, -1.0 / 6.0); }, SingularityType::I},
      {"IIa", grow, one, [](double tau) { return std::pow(tau, -2.0); }, SingularityType::IIa},
      {"IVa", flat, [](double tau) { return 3.0 / tau; }, [](double tau) { return 1.0 + 3.0 / tau; },
       SingularityType::IVa},
      {"IVb", flat, [](double tau) { return std::pow(tau, -1.5); }, [](double tau) { return 1.0 + std::pow(tau, -1.5); },
       SingularityType::IVb},
  };
  for (const Case& c : cases) {
    CAPTURE(c.name);
    const MonitorSeries s = finite_series(0.02, c.u, c.rm, c.f);
    const SingularityReport rep = classify(s);
    CHECK(rep.type == c.expected);
    CHECK(rep.finite_time);
    CHECK(rep.t_est == 0.02);
    check_sequence_and_bounds(s, rep);
  }
}

TEST_CASE("infinite-time types") {
  auto grow = [](double t) { return 0.25 * std::log(t); };
  auto flat = [](double) { return 0.2; };
  struct Case {
    const char* name;
    Fn u, rm, f;
    SingularityType expected;
  };
  const Case cases[] = {
      {"IIb", grow, [](double t) { return 1.0 / (1.0 + t); }, [](double t) { return std::pow(t, -0.5); },
       SingularityType::IIb},
      {"III", grow, [](double t) { return 1.0 / (1.0 + t); }, [](double t) { return 2.0 / t; }, SingularityType::III},
      {"IVc", flat, [](double t) { return std::pow(t, -0.5); }, [](double t) { return 1.0 + std::pow(t, -0.5); },
       SingularityType::IVc},
      {"IVd", flat, [](double t) { return 1.0 / t; }, [](double t) { return 1.0 + 1.0 / t; }, SingularityType::IVd},
  };
  for (const Case& c : cases) {
    CAPTURE(c.name);
    const MonitorSeries s = infinite_series(c.u, c.rm, c.f);
    const SingularityReport rep = classify(s);
    CHECK(rep.type == c.expected);
    CHECK_FALSE(rep.finite_time);
    check_sequence_and_bounds(s, rep);
  }
}

TEST_CASE("no singularity") {
  const MonitorSeries s = infinite_series([](double) { return 0.3; }, [](double) { return 1.0; },
                                         [](double) { return 2.0; });
  const SingularityReport rep = classify(s);
  CHECK(rep.type == SingularityType::None);
  try {
    select_sequence(s, rep, 3);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoSingularity);
  }
  SingularityReport copy = rep;
  CHECK(verify_bounds(s, copy).empty());
}

TEST_CASE("too few samples") {
  MonitorSeries s;
  s.t = {0.0, 0.5, 1.0};
  s.u = {0.0, 0.0, 0.0};
  s.abs_rm = {1.0, 1.0, 1.0};
  s.f = {1.0, 1.0, 1.0};
  s.horizon = 1.0;
  try {
    classify(s);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientData);
  }
  CHECK_THROWS_AS(classify(MonitorSeries{}), Error);
}

TEST_CASE("classification is stable under parabolic rescaling") {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> logc(-3.0, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double C = std::exp(logc(rng));
    // g -> C g(t / C): times scale by 1/C... here t' = t / C, f' = C f
    const MonitorSeries a = infinite_series([](double t) { return 0.25 * std::log(t); },
                                            [](double t) { return 1.0 / (1.0 + t); },
                                            [](double t) { return std::pow(t, -0.5); });
    MonitorSeries b = a;
    for (std::size_t i = 0; i < b.t.size(); ++i) {
      b.t[i] /= C;
      b.f[i] *= C;
      b.abs_rm[i] *= C;
    }
    b.horizon = a.horizon / C;
    CHECK(classify(b).type == classify(a).type);

    const MonitorSeries fa = finite_series(0.02, [](double tau) { return -0.5 * std::log(tau); },
                                           [](double) { return 1.0; }, [](double tau) { return 1.0 / tau; });
    MonitorSeries fb = fa;
    for (std::size_t i = 0; i < fb.t.size(); ++i) {
      fb.t[i] /= C;
      fb.f[i] *= C;
    }
    fb.t_est = fa.t_est / C;
    CHECK(classify(fb).type == classify(fa).type);
  }
}

TEST_CASE("rescaled states") {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 50; ++trial) {
    const RandomPair p = random_pair(rng);
    const TypeIIAStructure s = metric_from(p.phi, p.omega);
    const double C = std::exp(std::uniform_real_distribution<double>(-4.0, 4.0)(rng));
    const TypeIIAStructure iv = rescale_state(p.phi, p.omega, C, SingularityType::IVc);
    CHECK(std::abs(iv.u - s.u) <= 1e-10);
    CHECK((iv.g.matrix() - C * s.g.matrix()).norm() <= 1e-9 * C * s.g.matrix().norm());
    const TypeIIAStructure ii = rescale_state(p.phi, p.omega, C, SingularityType::IIb);
    CHECK(max_abs_diff(ii.phi, p.phi) == 0.0);
    CHECK(max_abs_diff(ii.omega, C * p.omega) <= 1e-15 * C);
  }
  CHECK_THROWS_AS(rescale_state(phi0(), omega0(), 0.0, SingularityType::I), Error);
}

TEST_CASE("trajectory series") {
  const ModelFile nil = shipped("nilmanifold_example2");
  const Trajectory tr = integrate(nil.model, nil.initial, 1.0);
  const MonitorSeries s = series_from(tr, 1.0);
  REQUIRE(s.t.size() == tr.samples.size());
  CHECK(s.f.back() == tr.samples.back().monitors.f);
  CHECK(s.termination == Termination::ReachedTEnd);
}
