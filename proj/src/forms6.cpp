#include "tiia/forms6.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "tiia/errors.hpp"

namespace tiia {

namespace {

struct DegreeTables {
  std::array<std::vector<unsigned>, kDim + 1> masks;
  std::array<int, 64> position{};

  DegreeTables() {
    // Lexicographic order of sorted tuples == order produced by walking
    // combinations recursively; build it explicitly.
    for (int k = 0; k <= kDim; ++k) {
      std::vector<int> idx(k);
      for (int i = 0; i < k; ++i) idx[i] = i;
      while (true) {
        unsigned m = 0;
        for (int i : idx) m |= 1u << i;
        position[m] = static_cast<int>(masks[k].size());
        masks[k].push_back(m);
        int p = k - 1;
        while (p >= 0 && idx[p] == kDim - k + p) --p;
        if (p < 0) break;
        ++idx[p];
        for (int q = p + 1; q < k; ++q) idx[q] = idx[q - 1] + 1;
      }
    }
  }
};

const DegreeTables& tables() {
  static const DegreeTables t;
  return t;
}

void check_degree(int k) {
  if (k < 0 || k > kDim) {
    throw Error(ErrorCode::DegreeOverflow, "form degree " + std::to_string(k) + " outside 0..6");
  }
}

double det_small(const Eigen::MatrixXd& m) {
  switch (m.rows()) {
    case 0: return 1.0;
    case 1: return m(0, 0);
    case 2: return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    default: return m.determinant();
  }
}

}  // namespace

MultiIndex::MultiIndex(std::initializer_list<int> indices) {
  int prev = 0;
  unsigned m = 0;
  for (int i : indices) {
    if (i < 1 || i > kDim || i <= prev) {
      throw Error(ErrorCode::InvalidArgument, "multi-index must be strictly increasing in 1..6");
    }
    m |= 1u << (i - 1);
    prev = i;
  }
  mask_ = static_cast<std::uint8_t>(m);
}

MultiIndex MultiIndex::from_mask(unsigned mask) {
  if (mask > kTopMask) throw Error(ErrorCode::InvalidArgument, "mask outside 6 bits");
  MultiIndex r;
  r.mask_ = static_cast<std::uint8_t>(mask);
  return r;
}

int MultiIndex::degree() const { return std::popcount(static_cast<unsigned>(mask_)); }

std::vector<int> MultiIndex::indices() const {
  std::vector<int> out;
  for (int i = 0; i < kDim; ++i) {
    if (mask_ & (1u << i)) out.push_back(i + 1);
  }
  return out;
}

const std::vector<unsigned>& masks_of_degree(int k) {
  check_degree(k);
  return tables().masks[k];
}

int position_of_mask(unsigned mask) { return tables().position[mask & kTopMask]; }

int binomial6(int k) { return static_cast<int>(masks_of_degree(k).size()); }

int wedge_sign(unsigned a, unsigned b) {
  int inversions = 0;
  for (int j = 0; j < kDim; ++j) {
    if (b & (1u << j)) inversions += std::popcount(a & ~((2u << j) - 1u));
  }
  return (inversions & 1) ? -1 : 1;
}

KForm::KForm(int degree) : degree_(degree) { check_degree(degree); }

KForm KForm::monomial(std::initializer_list<int> indices, double coeff) {
  return monomial(std::span<const int>(indices.begin(), indices.size()), coeff);
}

KForm KForm::monomial(std::span<const int> indices, double coeff) {
  KForm f(static_cast<int>(indices.size()));
  unsigned mask = 0;
  int sign = 1;
  for (int i : indices) {
    if (i < 1 || i > kDim) throw Error(ErrorCode::InvalidArgument, "frame index outside 1..6");
    const unsigned bit = 1u << (i - 1);
    if (mask & bit) return f;
    sign *= wedge_sign(mask, bit);
    mask |= bit;
  }
  f.c_[mask] = sign * coeff;
  return f;
}

KForm KForm::scalar(double value) {
  KForm f(0);
  f.c_[0] = value;
  return f;
}

KForm KForm::from_vector(int degree, const Eigen::VectorXd& coeffs) {
  KForm f(degree);
  const auto& ms = masks_of_degree(degree);
  if (coeffs.size() != static_cast<Eigen::Index>(ms.size())) {
    throw Error(ErrorCode::DegreeMismatch, "coefficient vector length does not match degree");
  }
  for (std::size_t p = 0; p < ms.size(); ++p) f.c_[ms[p]] = coeffs[static_cast<Eigen::Index>(p)];
  return f;
}

double KForm::component(std::span<const int> indices) const {
  if (static_cast<int>(indices.size()) != degree_) {
    throw Error(ErrorCode::DegreeMismatch, "component index count differs from degree");
  }
  unsigned mask = 0;
  int sign = 1;
  for (int i : indices) {
    const unsigned bit = 1u << i;
    if (mask & bit) return 0.0;
    sign *= wedge_sign(mask, bit);
    mask |= bit;
  }
  return sign * c_[mask];
}

Eigen::VectorXd KForm::to_vector() const {
  const auto& ms = masks_of_degree(degree_);
  Eigen::VectorXd v(static_cast<Eigen::Index>(ms.size()));
  for (std::size_t p = 0; p < ms.size(); ++p) v[static_cast<Eigen::Index>(p)] = c_[ms[p]];
  return v;
}

double KForm::max_abs() const {
  double m = 0.0;
  for (double x : c_) m = std::max(m, std::abs(x));
  return m;
}

double KForm::flat_norm() const {
  double s = 0.0;
  for (double x : c_) s += x * x;
  return std::sqrt(s);
}

KForm& KForm::operator+=(const KForm& other) {
  if (other.degree_ != degree_) throw Error(ErrorCode::DegreeMismatch, "adding forms of different degree");
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += other.c_[i];
  return *this;
}

KForm& KForm::operator-=(const KForm& other) {
  if (other.degree_ != degree_) throw Error(ErrorCode::DegreeMismatch, "subtracting forms of different degree");
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= other.c_[i];
  return *this;
}

KForm& KForm::operator*=(double s) {
  for (double& x : c_) x *= s;
  return *this;
}

KForm operator+(KForm a, const KForm& b) { return a += b; }
KForm operator-(KForm a, const KForm& b) { return a -= b; }
KForm operator-(KForm a) { return a *= -1.0; }
KForm operator*(double s, KForm a) { return a *= s; }
KForm operator*(KForm a, double s) { return a *= s; }

MetricTensor::MetricTensor(const Mat6& g) : g_(g) {
  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw Error(ErrorCode::InvalidArgument, "metric tensor is not symmetric");
  }
  g_ = 0.5 * (g + g.transpose());
  det_ = g_.determinant();
  if (!(std::abs(det_) > 1e-300) || !std::isfinite(det_)) {
    throw Error(ErrorCode::DegenerateMetric, "metric tensor is singular");
  }
  ginv_ = g_.inverse();
  riemannian_ = true;
  for (int k = 1; k <= kDim; ++k) {
    if (!(g_.topLeftCorner(k, k).determinant() > 0.0)) {
      riemannian_ = false;
      break;
    }
  }
}

MetricTensor MetricTensor::identity() { return MetricTensor(Mat6::Identity()); }

Eigen::MatrixXd induced_gram(const Mat6& ginv, int k) {
  const auto& ms = masks_of_degree(k);
  const auto n = static_cast<Eigen::Index>(ms.size());
  Eigen::MatrixXd gram(n, n);
  Eigen::MatrixXd sub(k, k);
  for (Eigen::Index a = 0; a < n; ++a) {
    const auto ia = MultiIndex::from_mask(ms[a]).indices();
    for (Eigen::Index b = a; b < n; ++b) {
      const auto ib = MultiIndex::from_mask(ms[b]).indices();
      for (int r = 0; r < k; ++r) {
        for (int c = 0; c < k; ++c) sub(r, c) = ginv(ia[r] - 1, ib[c] - 1);
      }
      gram(a, b) = gram(b, a) = det_small(sub);
    }
  }
  return gram;
}

Mat6 two_form_matrix(const KForm& w) {
  if (w.degree() != 2) throw Error(ErrorCode::DegreeMismatch, "expected a 2-form");
  Mat6 m = Mat6::Zero();
  for (int a = 0; a < kDim; ++a) {
    for (int b = a + 1; b < kDim; ++b) {
      const double x = w.coeff((1u << a) | (1u << b));
      m(a, b) = x;
      m(b, a) = -x;
    }
  }
  return m;
}

KForm two_form_from_matrix(const Mat6& m) {
  KForm w(2);
  for (int a = 0; a < kDim; ++a) {
    for (int b = a + 1; b < kDim; ++b) w.coeff((1u << a) | (1u << b)) = 0.5 * (m(a, b) - m(b, a));
  }
  return w;
}

KForm wedge(const KForm& a, const KForm& b) {
  const int deg = a.degree() + b.degree();
  if (deg > kDim) {
    throw Error(ErrorCode::DegreeOverflow, "wedge product degree " + std::to_string(deg) + " exceeds 6");
  }
  KForm out(deg);
  for (unsigned ma : masks_of_degree(a.degree())) {
    const double x = a.coeff(ma);
    if (x == 0.0) continue;
    for (unsigned mb : masks_of_degree(b.degree())) {
      if (ma & mb) continue;
      const double y = b.coeff(mb);
      if (y == 0.0) continue;
      out.coeff(ma | mb) += wedge_sign(ma, mb) * x * y;
    }
  }
  return out;
}

KForm interior_basis(int index, const KForm& a) {
  if (a.degree() < 1) throw Error(ErrorCode::DegreeMismatch, "interior product of a 0-form");
  KForm out(a.degree() - 1);
  const unsigned bit = 1u << index;
  const int below_shift = index;
  for (unsigned m : masks_of_degree(a.degree())) {
    if (!(m & bit)) continue;
    const int below = std::popcount(m & ((1u << below_shift) - 1u));
    out.coeff(m & ~bit) += ((below & 1) ? -1.0 : 1.0) * a.coeff(m);
  }
  return out;
}

KForm interior_product(const FrameVector& v, const KForm& a) {
  if (a.degree() < 1) throw Error(ErrorCode::DegreeMismatch, "interior product of a 0-form");
  KForm out(a.degree() - 1);
  for (int i = 0; i < kDim; ++i) {
    if (v[i] != 0.0) out += v[i] * interior_basis(i, a);
  }
  return out;
}

double inner_product(const KForm& a, const KForm& b, const MetricTensor& g) {
  if (a.degree() != b.degree()) throw Error(ErrorCode::DegreeMismatch, "inner product of forms of different degree");
  const Eigen::MatrixXd gram = induced_gram(g.inverse(), a.degree());
  return a.to_vector().dot(gram * b.to_vector());
}

double norm_squared(const KForm& a, const MetricTensor& g) { return inner_product(a, a, g); }

KForm hodge_star(const KForm& a, const MetricTensor& g, const KForm& orientation) {
  if (orientation.degree() != kDim) throw Error(ErrorCode::DegreeMismatch, "orientation must be a 6-form");
  const double o = top_coefficient(orientation);
  if (o == 0.0) throw Error(ErrorCode::InvalidArgument, "zero orientation form");
  if (!(g.det() > 0.0)) throw Error(ErrorCode::DegenerateMetric, "Hodge star needs a positive-definite metric");
  const double vol = (o > 0.0 ? 1.0 : -1.0) * std::sqrt(g.det());

  const int k = a.degree();
  const Eigen::MatrixXd gram = induced_gram(g.inverse(), k);
  const Eigen::VectorXd paired = gram * a.to_vector();  // <e^I, a>
  const auto& ms = masks_of_degree(k);
  KForm out(kDim - k);
  for (std::size_t p = 0; p < ms.size(); ++p) {
    const unsigned comp = kTopMask & ~ms[p];
    out.coeff(comp) = paired[static_cast<Eigen::Index>(p)] * vol * wedge_sign(ms[p], comp);
  }
  return out;
}

KForm lambda_contraction(const KForm& a, const KForm& omega) {
  if (a.degree() < 2) throw Error(ErrorCode::DegreeMismatch, "Lambda needs a form of degree >= 2");
  const Mat6 w = two_form_matrix(omega);
  const double det = w.determinant();
  if (!(std::abs(det) > 1e-24 * std::pow(std::max(1e-300, w.cwiseAbs().maxCoeff()), 6))) {
    throw Error(ErrorCode::DegenerateSymplectic, "symplectic form is degenerate");
  }
  const Mat6 winv = w.inverse();
  KForm out(a.degree() - 2);
  for (int p = 0; p < kDim; ++p) {
    for (int q = p + 1; q < kDim; ++q) {
      // 1/2 (winv_pq i_p i_q + winv_qp i_q i_p) = winv_pq i_p i_q
      if (winv(p, q) == 0.0) continue;
      out += winv(p, q) * interior_basis(p, interior_basis(q, a));
    }
  }
  return out;
}

}  // namespace tiia
