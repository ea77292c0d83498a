#pragma once

// Exterior algebra on a fixed oriented 6-dimensional frame e^1..e^6.
//
// A degree-k form is stored densely over all C(6,k) sorted multi-indices. A
// multi-index is a bitmask: bit (i-1) is set when e^i is present, so iterating
// set bits from low to high yields the strictly increasing index tuple.
//
// Conventions:
//   * <a,a> with g = Id is the sum of squares of the sorted coefficients.
//   * The Hodge star is defined by a ^ *b = <a,b> vol_g.
//   * Lambda = 1/2 w^{ab} i(e_a) i(e_b), w^{ab} the matrix inverse of w_{ab},
//     so that Lambda(e^12 + e^34 + e^56) = 3.

#include <array>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace tiia {

inline constexpr int kDim = 6;
inline constexpr unsigned kTopMask = 0x3F;

using Mat6 = Eigen::Matrix<double, kDim, kDim>;
using Vec6 = Eigen::Matrix<double, kDim, 1>;
using FrameVector = Vec6;

class MultiIndex {
 public:
  constexpr MultiIndex() = default;

  /// 1-based, strictly increasing indices; throws InvalidArgument otherwise.
  MultiIndex(std::initializer_list<int> indices);

  static MultiIndex from_mask(unsigned mask);

  unsigned mask() const { return mask_; }
  int degree() const;
  std::vector<int> indices() const;

  friend bool operator==(MultiIndex, MultiIndex) = default;

 private:
  std::uint8_t mask_ = 0;
};

/// Masks of popcount k in lexicographic order of their sorted index tuples.
const std::vector<unsigned>& masks_of_degree(int k);
/// Position of a mask inside masks_of_degree(popcount(mask)).
int position_of_mask(unsigned mask);
int binomial6(int k);

/// Sign that sorts the concatenation (sorted a)(sorted b); a and b disjoint.
int wedge_sign(unsigned a, unsigned b);

class KForm {
 public:
  explicit KForm(int degree = 0);

  /// e^{i1} ^ ... ^ e^{ik} times coeff, 1-based indices in any order.
  /// Repeated indices give the zero form.
  static KForm monomial(std::initializer_list<int> indices, double coeff = 1.0);
  static KForm monomial(std::span<const int> indices, double coeff = 1.0);
  static KForm scalar(double value);
  static KForm from_vector(int degree, const Eigen::VectorXd& coeffs);

  int degree() const { return degree_; }

  double operator[](MultiIndex idx) const { return c_[idx.mask()]; }
  double& operator[](MultiIndex idx) { return c_[idx.mask()]; }
  double coeff(unsigned mask) const { return c_[mask]; }
  double& coeff(unsigned mask) { return c_[mask]; }

  /// Fully antisymmetric component a_{i1..ik}, 0-based indices in any order.
  double component(std::span<const int> indices) const;

  /// Coefficients in masks_of_degree(degree()) order.
  Eigen::VectorXd to_vector() const;

  double max_abs() const;
  /// Euclidean norm of the sorted coefficients (the g = Id norm).
  double flat_norm() const;

  KForm& operator+=(const KForm& other);
  KForm& operator-=(const KForm& other);
  KForm& operator*=(double s);

 private:
  int degree_;
  std::array<double, 64> c_{};
};

KForm operator+(KForm a, const KForm& b);
KForm operator-(KForm a, const KForm& b);
KForm operator-(KForm a);
KForm operator*(double s, KForm a);
KForm operator*(KForm a, double s);

class MetricTensor {
 public:
  /// Throws InvalidArgument if g is not symmetric, DegenerateMetric if singular.
  explicit MetricTensor(const Mat6& g);
  static MetricTensor identity();

  const Mat6& matrix() const { return g_; }
  const Mat6& inverse() const { return ginv_; }
  double det() const { return det_; }
  /// All leading principal minors positive.
  bool is_riemannian() const { return riemannian_; }

 private:
  Mat6 g_;
  Mat6 ginv_;
  double det_ = 0.0;
  bool riemannian_ = false;
};

/// Gram matrix of the induced inner product on degree-k forms, indexed in
/// masks_of_degree(k) order: <e^I, e^J> = det(ginv[I, J]).
Eigen::MatrixXd induced_gram(const Mat6& ginv, int k);

/// The antisymmetric matrix w_{ab} = w(e_a, e_b) of a 2-form.
Mat6 two_form_matrix(const KForm& w);
KForm two_form_from_matrix(const Mat6& m);

KForm wedge(const KForm& a, const KForm& b);
KForm interior_product(const FrameVector& v, const KForm& a);
/// Interior product with the frame vector e_{index}, 0-based.
KForm interior_basis(int index, const KForm& a);
double inner_product(const KForm& a, const KForm& b, const MetricTensor& g);
double norm_squared(const KForm& a, const MetricTensor& g);
KForm hodge_star(const KForm& a, const MetricTensor& g, const KForm& orientation);
KForm lambda_contraction(const KForm& a, const KForm& omega);

/// Coefficient of e^{123456} in a top-degree form.
inline double top_coefficient(const KForm& top) { return top.coeff(kTopMask); }

}  // namespace tiia
