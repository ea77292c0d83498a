#pragma once

// Left-invariant geometry on a 6-dimensional Lie algebra.
//
// Structure equations de^k = sum_{i<j} A^k_{ij} e^{ij}; brackets
// [e_i, e_j] = c^k_{ij} e_k with c = -A. Connections use
// nabla_{e_i} e_j = Gamma^l_{ij} e_l and curvature R(e_i,e_j)e_k = R^l_{ijk} e_l.
// All indices below are 0-based.

#include <string>
#include <vector>

#include "tiia/forms6.hpp"
#include "tiia/hitchin.hpp"

namespace tiia {

class LieAlgebra6 {
 public:
  LieAlgebra6();  // abelian
  explicit LieAlgebra6(const std::array<KForm, kDim>& de);

  const KForm& de(int k) const { return de_[k]; }
  double c(int k, int i, int j) const { return c_[k * 36 + i * 6 + j]; }
  /// Matrix of d on degree-k forms in masks_of_degree order (rows: degree k+1).
  const Eigen::MatrixXd& d_matrix(int k) const { return dmat_[k]; }

  /// max_k |d(de^k)|; zero iff the Jacobi identity holds.
  double jacobi_residual() const;
  /// max_j |sum_i c^i_{ij}|.
  double unimodularity_defect() const;

 private:
  std::array<KForm, kDim> de_;
  std::array<double, 216> c_{};
  std::array<Eigen::MatrixXd, kDim> dmat_;
};

KForm ce_differential(const KForm& a, const LieAlgebra6& alg);

/// d^dagger = -*d* on k-forms (k >= 1), using the g-volume orientation.
KForm codifferential(const KForm& a, const MetricTensor& g, const LieAlgebra6& alg);

/// A general invariant tensor. upper[i] marks contravariant slots.
class Tensor {
 public:
  explicit Tensor(std::vector<bool> upper);
  int rank() const { return static_cast<int>(upper_.size()); }
  const std::vector<bool>& upper() const { return upper_; }
  double& at(std::span<const int> idx);
  double at(std::span<const int> idx) const;
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }
  /// Full contraction with g (covariant slots raised by g^{-1}, contravariant lowered by g).
  double norm(const MetricTensor& g) const;

 private:
  std::vector<bool> upper_;
  std::vector<double> data_;
};

struct Connection {
  std::array<double, 216> gamma{};
  double operator()(int l, int i, int j) const { return gamma[l * 36 + i * 6 + j]; }
  double& operator()(int l, int i, int j) { return gamma[l * 36 + i * 6 + j]; }
};

Connection koszul_connection(const MetricTensor& g, const LieAlgebra6& alg);

/// max |Gamma^k_{ij} - Gamma^k_{ji} - c^k_{ij}|.
double torsion_residual(const Connection& conn, const LieAlgebra6& alg);
/// max |(nabla g)_{ijk}|.
double metric_compatibility_residual(const Connection& conn, const MetricTensor& g);
/// max |(nabla J)^a_{ij}|.
double complex_compatibility_residual(const Connection& conn, const Mat6& J);

struct CurvatureTensor {
  std::vector<double> R = std::vector<double>(1296, 0.0);  // R^l_{ijk} at l*216 + i*36 + j*6 + k
  double norm = 0.0;                                        // |Rm|_g
  double operator()(int l, int i, int j, int k) const { return R[l * 216 + i * 36 + j * 6 + k]; }
  Mat6 ricci() const;
};

CurvatureTensor riemann_curvature(const Connection& conn, const LieAlgebra6& alg, const MetricTensor& g);

double bianchi_residual(const CurvatureTensor& rm);
/// max |R_{ijkl} - R_{klij}| with R_{ijkl} = g_{lm} R^m_{ijk}.
double pair_symmetry_residual(const CurvatureTensor& rm, const MetricTensor& g);

struct NijenhuisTensor {
  std::array<double, 216> N{};  // N^a_{ij} at a*36 + i*6 + j
  double operator()(int a, int i, int j) const { return N[a * 36 + i * 6 + j]; }
  /// g_{ab} g^{ik} g^{jl} N^a_{ij} N^b_{kl}
  double norm_sq(const MetricTensor& g) const;
  /// Rank of N as a map Lambda^2 -> T.
  int rank() const;
};

/// 4N(X,Y) = [JX,JY] - J[JX,Y] - J[X,JY] - [X,Y].
NijenhuisTensor nijenhuis(const Mat6& J, const LieAlgebra6& alg);

struct GauduchonParts {
  Connection connection;
  std::array<double, 216> U{};  // (1,1) part of 1/2 (d^c wt)^k_{jp}
  std::array<double, 216> V{};  // (2,0)+(0,2) part
};

/// D^t = nablat - Nt - U - tV with Nt^k_{jp} = gt_{ja} gt^{ks} N^a_{ps}.
GauduchonParts gauduchon_parts(double t, const MetricTensor& gt, const Mat6& J, const LieAlgebra6& alg);
Connection gauduchon_connection(double t, const MetricTensor& gt, const Mat6& J, const LieAlgebra6& alg);

/// nabla - 1/2 J (nabla J), built directly from the Levi-Civita connection.
Connection projected_levi_civita(const MetricTensor& g, const Mat6& J, const LieAlgebra6& alg);

/// (D_i T)_{abc} for an invariant 3-form given by full components.
std::array<double, 1296> covariant_derivative_3form(const Connection& conn, const std::array<double, 216>& t);

Tensor covariant_derivative(const Tensor& t, const Connection& conn, int order);

Tensor metric_tensor(const MetricTensor& g);
Tensor nijenhuis_tensor(const NijenhuisTensor& n);
Tensor curvature_tensor(const CurvatureTensor& rm);

struct HolonomyReport {
  double omega_parallel = 0.0;  // |Dt(Omega / |Omega|_gt)|_gt
  double omega_holomorphic = 0.0;  // |D^{0,1} Omega|
  double unitarity = 0.0;  // max(|D gt|, |D J|)
  int nijenhuis_rank = 0;
};

HolonomyReport verify_holonomy(const TypeIIAStructure& s, const LieAlgebra6& alg);

/// Invariant symplectic model with an affine 3-form ansatz phi = offset + sum c_i basis_i.
struct InvariantModel {
  std::string name;
  LieAlgebra6 algebra;
  KForm omega{2};
  KForm offset{3};
  std::vector<KForm> basis;
  std::vector<std::string> names;

  KForm phi(const Eigen::VectorXd& coeffs) const;
  /// 20 x n matrix of basis coefficient vectors.
  Eigen::MatrixXd basis_matrix() const;
};

}  // namespace tiia
