#include <doctest.h>

#include "support.hpp"

using namespace tiia;
using namespace testing;

TEST_CASE("multi-index and monomials") {
  CHECK(MultiIndex({1, 3, 5}).mask() == 0x15);
  CHECK(MultiIndex::from_mask(0x2a).indices() == std::vector<int>{2, 4, 6});
  CHECK_THROWS_AS(MultiIndex({3, 1}), Error);
  CHECK(binomial6(3) == 20);
  CHECK(masks_of_degree(2).size() == 15u);
  // e^{31} = -e^{13}
  CHECK(KForm::monomial({3, 1}).coeff(0x5) == -1.0);
  CHECK(KForm::monomial({2, 2, 4}).max_abs() == 0.0);
}

TEST_CASE("wedge of fixed monomials") {
  const KForm top = wedge(KForm::monomial({1, 3, 5}), KForm::monomial({2, 4, 6}));
  CHECK(top.degree() == 6);
  CHECK(top_coefficient(top) == -1.0);
  CHECK(top_coefficient(wedge(wedge(omega0(), omega0()), omega0())) == 6.0);
  CHECK_THROWS_AS(wedge(KForm::monomial({1, 2, 3, 4}), KForm::monomial({5, 6, 1})), Error);
}

TEST_CASE("wedge is graded-commutative and associative") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    for (int p = 1; p <= 3; ++p)
      for (int q = 1; p + q <= 6; ++q) {
        const KForm a = random_form(rng, p), b = random_form(rng, q);
        const double sign = (p * q) % 2 == 0 ? 1.0 : -1.0;
        CHECK(max_abs_diff(wedge(a, b), sign * wedge(b, a)) < 1e-14);
      }
    const KForm a = random_form(rng, 1), b = random_form(rng, 2), c = random_form(rng, 2);
    CHECK(max_abs_diff(wedge(wedge(a, b), c), wedge(a, wedge(b, c))) < 1e-13);
  }
}

TEST_CASE("interior product is an antiderivation") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const KForm a = random_form(rng, 2), b = random_form(rng, 3);
    FrameVector v = FrameVector::Random();
    const KForm lhs = interior_product(v, wedge(a, b));
    const KForm rhs = wedge(interior_product(v, a), b) + wedge(a, interior_product(v, b));
    CHECK(max_abs_diff(lhs, rhs) < 1e-13);
    CHECK(interior_product(v, interior_product(v, b)).max_abs() < 1e-14);
  }
}

TEST_CASE("hodge star on the flat metric") {
  const MetricTensor id = MetricTensor::identity();
  const KForm vol = KForm::monomial({1, 2, 3, 4, 5, 6});
  const KForm s = hodge_star(KForm::monomial({1, 3, 5}), id, vol);
  CHECK(s.coeff(0x2a) == doctest::Approx(-1.0));
  CHECK(s.max_abs() == doctest::Approx(1.0));
  CHECK(norm_squared(phi0(), id) == doctest::Approx(4.0));
  CHECK(top_coefficient(hodge_star(KForm::scalar(1.0), id, vol)) == doctest::Approx(1.0));
}

TEST_CASE("hodge star identities on random metrics") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 40; ++trial) {
    const MetricTensor g(random_spd(rng));
    const KForm vol = KForm::monomial({1, 2, 3, 4, 5, 6});
    const double vol_g = std::sqrt(g.det());
    for (int k = 0; k <= 6; ++k) {
      const KForm a = random_form(rng, k), b = random_form(rng, k);
      const KForm sb = hodge_star(b, g, vol);
      // a ^ *b = <a,b> vol_g
      CHECK(top_coefficient(wedge(a, sb)) == doctest::Approx(inner_product(a, b, g) * vol_g).epsilon(1e-10));
      // ** = (-1)^{k(6-k)}
      const double sign = (k * (6 - k)) % 2 == 0 ? 1.0 : -1.0;
      CHECK(max_abs_diff(hodge_star(sb, g, vol), sign * b) < 1e-9 * std::max(1.0, b.max_abs()));
      // isometry
      CHECK(norm_squared(sb, g) == doctest::Approx(norm_squared(b, g)).epsilon(1e-10));
    }
  }
}

TEST_CASE("induced gram is the determinant rule") {
  std::mt19937_64 rng(14);
  const Mat6 gi = random_spd(rng);
  const Eigen::MatrixXd G1 = induced_gram(gi, 1);
  CHECK((G1 - Eigen::MatrixXd(gi)).norm() < 1e-14);
  const Eigen::MatrixXd G2 = induced_gram(gi, 2);
  // <e^12, e^34> = g^13 g^24 - g^14 g^23
  const int a = position_of_mask(0x3), b = position_of_mask(0xc);
  CHECK(G2(a, b) == doctest::Approx(gi(0, 2) * gi(1, 3) - gi(0, 3) * gi(1, 2)));
}

TEST_CASE("Lambda contraction") {
  CHECK(top_coefficient(KForm::scalar(0.0)) == 0.0);
  const KForm l = lambda_contraction(omega0(), omega0());
  CHECK(l.degree() == 0);
  CHECK(l.coeff(0) == doctest::Approx(3.0));
  CHECK(lambda_contraction(phi0(), omega0()).max_abs() < 1e-15);
}

TEST_CASE("Lambda phi = 0 iff omega ^ phi = 0 on 3-forms") {
  std::mt19937_64 rng(15);
  // Matrix of phi -> omega ^ phi; its kernel is the primitive 3-forms.
  for (int trial = 0; trial < 20; ++trial) {
    const Mat6 A = random_frame(rng);
    const KForm w = pullback2(omega0(), A);
    Eigen::MatrixXd L(6, 20);
    for (int c = 0; c < 20; ++c) {
      KForm e(3);
      e.coeff(masks_of_degree(3)[c]) = 1.0;
      L.col(c) = wedge(w, e).to_vector();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(L, Eigen::ComputeFullV);
    // dim of primitive 3-forms = 20 - 6 = 14
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i) rank += svd.singularValues()[i] > 1e-10;
    CHECK(rank == 6);
    for (int c = rank; c < 20; ++c) {
      const KForm p = KForm::from_vector(3, svd.matrixV().col(c));
      CHECK(lambda_contraction(p, w).max_abs() < 1e-10);
    }
    const KForm generic = random_form(rng, 3);
    CHECK(wedge(w, generic).max_abs() > 1e-6);
    CHECK(lambda_contraction(generic, w).max_abs() > 1e-6);
  }
}

TEST_CASE("degenerate inputs") {
  CHECK_THROWS_AS(MetricTensor(Mat6::Zero()), Error);
  Mat6 asym = Mat6::Identity();
  asym(0, 1) = 0.5;
  CHECK_THROWS_AS(MetricTensor{asym}, Error);
  CHECK_THROWS_AS(lambda_contraction(phi0(), KForm::monomial({1, 2})), Error);
}
