#include "tiia/homogeneous.hpp"

#include <bit>
#include <cmath>

#include "tiia/errors.hpp"

namespace tiia {

namespace {

using Arr216 = std::array<double, 216>;

inline int ix3(int a, int b, int c) { return a * 36 + b * 6 + c; }

Vec6 bracket(const LieAlgebra6& alg, const Vec6& x, const Vec6& y) {
  Vec6 out = Vec6::Zero();
  for (int i = 0; i < kDim; ++i) {
    if (x[i] == 0.0) continue;
    for (int j = 0; j < kDim; ++j) {
      if (y[j] == 0.0) continue;
      const double s = x[i] * y[j];
      for (int k = 0; k < kDim; ++k) out[k] += alg.c(k, i, j) * s;
    }
  }
  return out;
}

}  // namespace

LieAlgebra6::LieAlgebra6() : LieAlgebra6(std::array<KForm, kDim>{KForm(2), KForm(2), KForm(2), KForm(2), KForm(2), KForm(2)}) {}

LieAlgebra6::LieAlgebra6(const std::array<KForm, kDim>& de) : de_(de) {
  for (int k = 0; k < kDim; ++k) {
    if (de_[k].degree() != 2) throw Error(ErrorCode::DegreeMismatch, "structure equations must be 2-forms");
    const Mat6 a = two_form_matrix(de_[k]);
    for (int i = 0; i < kDim; ++i) {
      for (int j = 0; j < kDim; ++j) c_[ix3(k, i, j)] = -a(i, j);
    }
  }
  for (int k = 0; k < kDim; ++k) {
    const auto& cols = masks_of_degree(k);
    const auto& rows = masks_of_degree(k + 1);
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()),
                                              static_cast<Eigen::Index>(cols.size()));
    for (std::size_t col = 0; col < cols.size(); ++col) {
      const unsigned m = cols[col];
      KForm acc(k + 1);
      for (int i = 0; i < kDim; ++i) {
        const unsigned bit = 1u << i;
        if (!(m & bit)) continue;
        const unsigned left = m & (bit - 1u);
        const unsigned right = m & ~((bit << 1) - 1u);
        KForm l(std::popcount(left));
        l.coeff(left) = 1.0;
        KForm r(std::popcount(right));
        r.coeff(right) = 1.0;
        KForm term = wedge(wedge(l, de_[i]), r);
        if (std::popcount(left) & 1) term *= -1.0;
        acc += term;
      }
      d.col(static_cast<Eigen::Index>(col)) = acc.to_vector();
    }
    dmat_[k] = std::move(d);
  }
}

double LieAlgebra6::jacobi_residual() const {
  double r = 0.0;
  for (int k = 0; k < kDim; ++k) r = std::max(r, ce_differential(de_[k], *this).max_abs());
  return r;
}

double LieAlgebra6::unimodularity_defect() const {
  double r = 0.0;
  for (int j = 0; j < kDim; ++j) {
    double s = 0.0;
    for (int i = 0; i < kDim; ++i) s += c(i, i, j);
    r = std::max(r, std::abs(s));
  }
  return r;
}

KForm ce_differential(const KForm& a, const LieAlgebra6& alg) {
  if (a.degree() >= kDim) throw Error(ErrorCode::DegreeOverflow, "d of a top-degree form");
  return KForm::from_vector(a.degree() + 1, alg.d_matrix(a.degree()) * a.to_vector());
}

KForm codifferential(const KForm& a, const MetricTensor& g, const LieAlgebra6& alg) {
  if (a.degree() < 1) throw Error(ErrorCode::DegreeMismatch, "codifferential of a 0-form");
  const KForm vol = KForm::monomial({1, 2, 3, 4, 5, 6});
  return -hodge_star(ce_differential(hodge_star(a, g, vol), alg), g, vol);
}

Tensor::Tensor(std::vector<bool> upper) : upper_(std::move(upper)) {
  std::size_t n = 1;
  for (std::size_t i = 0; i < upper_.size(); ++i) n *= kDim;
  data_.assign(n, 0.0);
}

double& Tensor::at(std::span<const int> idx) {
  std::size_t p = 0;
  for (int i : idx) p = p * kDim + static_cast<std::size_t>(i);
  return data_[p];
}

double Tensor::at(std::span<const int> idx) const {
  std::size_t p = 0;
  for (int i : idx) p = p * kDim + static_cast<std::size_t>(i);
  return data_[p];
}

double Tensor::norm(const MetricTensor& g) const {
  std::vector<double> cur = data_;
  std::vector<double> next(cur.size());
  const std::size_t total = cur.size();
  std::size_t stride = total;
  for (int s = 0; s < rank(); ++s) {
    stride /= kDim;
    const Mat6& m = upper_[s] ? g.matrix() : g.inverse();
    for (std::size_t p = 0; p < total; ++p) {
      const std::size_t digit = (p / stride) % kDim;
      const std::size_t base = p - digit * stride;
      double v = 0.0;
      for (int q = 0; q < kDim; ++q) v += m(static_cast<int>(digit), q) * cur[base + q * stride];
      next[p] = v;
    }
    std::swap(cur, next);
  }
  double acc = 0.0;
  for (std::size_t p = 0; p < total; ++p) acc += cur[p] * data_[p];
  return std::sqrt(std::max(0.0, acc));
}

Connection koszul_connection(const MetricTensor& g, const LieAlgebra6& alg) {
  const Mat6& gm = g.matrix();
  Arr216 cl{};  // g([e_i,e_j], e_k)
  for (int i = 0; i < kDim; ++i) {
    for (int j = 0; j < kDim; ++j) {
      for (int k = 0; k < kDim; ++k) {
        double v = 0.0;
        for (int m = 0; m < kDim; ++m) v += alg.c(m, i, j) * gm(m, k);
        cl[ix3(i, j, k)] = v;
      }
    }
  }
  Connection out;
  const Mat6& gi = g.inverse();
  for (int i = 0; i < kDim; ++i) {
    for (int j = 0; j < kDim; ++j) {
      double low[kDim];
      for (int k = 0; k < kDim; ++k) {
        low[k] = 0.5 * (cl[ix3(i, j, k)] - cl[ix3(j, k, i)] + cl[ix3(k, i, j)]);
      }
      for (int l = 0; l < kDim; ++l) {
        double v = 0.0;
        for (int k = 0; k < kDim; ++k) v += low[k] * gi(k, l);
        out(l, i, j) = v;
      }
    }
  }
  return out;
}

double torsion_residual(const Connection& conn, const LieAlgebra6& alg) {
  double r = 0.0;
  for (int k = 0; k < kDim; ++k) {
    for (int i = 0; i < kDim; ++i) {
      for (int j = 0; j < kDim; ++j) r = std::max(r, std::abs(conn(k, i, j) - conn(k, j, i) - alg.c(k, i, j)));
    }
  }
  return r;
}

double metric_compatibility_residual(const Connection& conn, const MetricTensor& g) {
  const Mat6& gm = g.matrix();
  double r = 0.0;
  for (int i = 0; i < kDim; ++i) {
    for (int j = 0; j < kDim; ++j) {
      for (int k = 0; k < kDim; ++k) {
        double v = 0.0;
        for (int m = 0; m < kDim; ++m) v -= conn(m, i, j) * gm(m, k) + conn(m, i, k) * gm(j, m);
        r = std::max(r, std::abs(v));
      }
    }
  }
  return r;
}

double complex_compatibility_residual(const Connection& conn, const Mat6& J) {
  double r = 0.0;
  for (int i = 0; i < kDim; ++i) {
    for (int a = 0; a < kDim; ++a) {
      for (int j = 0; j < kDim; ++j) {
        double v = 0.0;
        for (int m = 0; m < kDim; ++m) v += conn(a, i, m) * J(m, j) - J(a, m) * conn(m, i, j);
        r = std::max(r, std::abs(v));
      }
    }
  }
  return r;
}

Mat6 CurvatureTensor::ricci() const {
  Mat6 ric = Mat6::Zero();
  for (int j = 0; j < kDim; ++j) {
    for (int k = 0; k < kDim; ++k) {
      for (int i = 0; i < kDim; ++i) ric(j, k) += (*this)(i, i, j, k);
    }
  }
  return ric;
}

CurvatureTensor riemann_curvature(const Connection& conn, const LieAlgebra6& alg, const MetricTensor& g) {
  CurvatureTensor out;
  for (int l = 0; l < kDim; ++l) {
    for (int i = 0; i < kDim; ++i) {
      for (int j = 0; j < kDim; ++j) {
        for (int k = 0; k < kDim; ++k) {
          double v = 0.0;
          for (int m = 0; m < kDim; ++m) {
            v += conn(m, j, k) * conn(l, i, m) - conn(m, i, k) * conn(l, j, m) - alg.c(m, i, j) * conn(l, m, k);
          }
          out.R[l * 216 + ix3(i, j, k)] = v;
        }
      }
    }
  }
  out.norm = curvature_tensor(out).norm(g);
  return out;
}

double bianchi_residual(const CurvatureTensor& rm) {
  double r = 0.0;
  for (int l = 0; l < kDim; ++l) {
    for (int i = 0; i < kDim; ++i) {
      for (int j = 0; j < kDim; ++j) {
        for (int k = 0; k < kDim; ++k) r = std::max(r, std::abs(rm(l, i, j, k) + rm(l, j, k, i) + rm(l, k, i, j)));
      }
    }
  }
  return r;
}

double pair_symmetry_residual(const CurvatureTensor& rm, const MetricTensor& g) {
  std::vector<double> low(1296, 0.0);
  for (int i = 0; i < kDim; ++i) {
    for (int j = 0; j < kDim; ++j) {
      for (int k = 0; k < kDim; ++k) {
        for (int l = 0; l < kDim; ++l) {
          double v = 0.0;
          for (int m = 0; m < kDim; ++m) v += g.matrix()(l, m) * rm(m, i, j, k);
          low[i * 216 + ix3(j, k, l)] = v;
        }
      }
    }
  }
  double r = 0.0;
  for (int i = 0; i < kDim; ++i) {
    for (int j = 0; j < kDim; ++j) {
      for (int k = 0; k < kDim; ++k) {
        for (int l = 0; l < kDim; ++l) r = std::max(r, std::abs(low[i * 216 + ix3(j, k, l)] - low[k * 216 + ix3(l, i, j)]));
      }
    }
  }
  return r;
}

double NijenhuisTensor::norm_sq(const MetricTensor& g) const {
  const double n = nijenhuis_tensor(*this).norm(g);
  return n * n;
}

int NijenhuisTensor::rank() const {
  Eigen::Matrix<double, kDim, 15> m;
  int col = 0;
  for (int i = 0; i < kDim; ++i) {
    for (int j = i + 1; j < kDim; ++j, ++col) {
      for (int a = 0; a < kDim; ++a) m(a, col) = (*this)(a, i, j);
    }
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  const double top = sv.size() ? sv[0] : 0.0;
  if (top == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > 1e-10 * top) ++rank;
  }
  return rank;
}

NijenhuisTensor nijenhuis(const Mat6& J, const LieAlgebra6& alg) {
  NijenhuisTensor out;
  for (int i = 0; i < kDim; ++i) {
    const Vec6 x = Vec6::Unit(i);
    const Vec6 jx = J.col(i);
    for (int j = 0; j < kDim; ++j) {
      const Vec6 y = Vec6::Unit(j);
      const Vec6 jy = J.col(j);
      const Vec6 n = 0.25 * (bracket(alg, jx, jy) - J * bracket(alg, jx, y) - J * bracket(alg, x, jy) - bracket(alg, x, y));
      for (int a = 0; a < kDim; ++a) out.N[ix3(a, i, j)] = n[a];
    }
  }
  return out;
}

GauduchonParts gauduchon_parts(double t, const MetricTensor& gt, const Mat6& J, const LieAlgebra6& alg) {
  GauduchonParts out;
  const Connection lc = koszul_connection(gt, alg);
  const NijenhuisTensor n = nijenhuis(J, alg);
  const Mat6& g = gt.matrix();
  const Mat6& gi = gt.inverse();

  Arr216 nt{};  // Nt^k_{jp} = gt_{ja} gt^{ks} N^a_{ps}
  for (int k = 0; k < kDim; ++k) {
    for (int j = 0; j < kDim; ++j) {
      for (int p = 0; p < kDim; ++p) {
        double v = 0.0;
        for (int a = 0; a < kDim; ++a) {
          for (int s = 0; s < kDim; ++s) v += g(j, a) * gi(k, s) * n(a, p, s);
        }
        nt[ix3(k, j, p)] = v;
      }
    }
  }

  // wt(X,Y) = gt(JX, Y); J acts on k-forms by (J a)(X,..) = a(JX,..).
  const Mat6 wt = J.transpose() * g;
  const Mat6 jwt = J.transpose() * wt * J;
  const auto beta = full_components(ce_differential(two_form_from_matrix(jwt), alg));
  Arr216 dc{};  // d^c wt = J^{-1} d J wt on 2-forms; J^{-1} = -J
  for (int a = 0; a < kDim; ++a) {
    for (int b = 0; b < kDim; ++b) {
      for (int c = 0; c < kDim; ++c) {
        double v = 0.0;
        for (int m = 0; m < kDim; ++m) {
          for (int q = 0; q < kDim; ++q) {
            const double jj = J(m, a) * J(q, b);
            if (jj == 0.0) continue;
            for (int r = 0; r < kDim; ++r) v += jj * J(r, c) * beta[ix3(m, q, r)];
          }
        }
        dc[ix3(a, b, c)] = -v;
      }
    }
  }
  Arr216 b{};
  for (int k = 0; k < kDim; ++k) {
    for (int j = 0; j < kDim; ++j) {
      for (int p = 0; p < kDim; ++p) {
        double v = 0.0;
        for (int s = 0; s < kDim; ++s) v += gi(k, s) * dc[ix3(s, j, p)];
        b[ix3(k, j, p)] = 0.5 * v;
      }
    }
  }
  for (int k = 0; k < kDim; ++k) {
    for (int j = 0; j < kDim; ++j) {
      for (int p = 0; p < kDim; ++p) {
        double v = 0.0;
        for (int x = 0; x < kDim; ++x) {
          for (int y = 0; y < kDim; ++y) v += J(x, j) * J(y, p) * b[ix3(k, x, y)];
        }
        out.U[ix3(k, j, p)] = 0.5 * (b[ix3(k, j, p)] + v);
        out.V[ix3(k, j, p)] = b[ix3(k, j, p)] - out.U[ix3(k, j, p)];
      }
    }
  }
  for (int q = 0; q < 216; ++q) out.connection.gamma[q] = lc.gamma[q] - nt[q] - out.U[q] - t * out.V[q];
  return out;
}

Connection gauduchon_connection(double t, const MetricTensor& gt, const Mat6& J, const LieAlgebra6& alg) {
  return gauduchon_parts(t, gt, J, alg).connection;
}

Connection projected_levi_civita(const MetricTensor& g, const Mat6& J, const LieAlgebra6& alg) {
  const Connection lc = koszul_connection(g, alg);
  Connection out = lc;
  for (int i = 0; i < kDim; ++i) {
    Mat6 nj;  // (nabla_i J)^a_j
    for (int a = 0; a < kDim; ++a) {
      for (int j = 0; j < kDim; ++j) {
        double v = 0.0;
        for (int m = 0; m < kDim; ++m) v += lc(a, i, m) * J(m, j) - J(a, m) * lc(m, i, j);
        nj(a, j) = v;
      }
    }
    const Mat6 corr = 0.5 * J * nj;
    for (int l = 0; l < kDim; ++l) {
      for (int j = 0; j < kDim; ++j) out(l, i, j) -= corr(l, j);
    }
  }
  return out;
}

std::array<double, 1296> covariant_derivative_3form(const Connection& conn, const std::array<double, 216>& t) {
  std::array<double, 1296> out{};
  for (int i = 0; i < kDim; ++i) {
    for (int a = 0; a < kDim; ++a) {
      for (int b = 0; b < kDim; ++b) {
        for (int c = 0; c < kDim; ++c) {
          double v = 0.0;
          for (int m = 0; m < kDim; ++m) {
            v += conn(m, i, a) * t[ix3(m, b, c)] + conn(m, i, b) * t[ix3(a, m, c)] + conn(m, i, c) * t[ix3(a, b, m)];
          }
          out[i * 216 + ix3(a, b, c)] = -v;
        }
      }
    }
  }
  return out;
}

namespace {

Tensor derivative_once(const Tensor& t, const Connection& conn) {
  std::vector<bool> up{false};
  up.insert(up.end(), t.upper().begin(), t.upper().end());
  Tensor out(up);
  const int r = t.rank();
  const std::size_t n = t.data().size();
  std::vector<std::size_t> stride(static_cast<std::size_t>(r));
  std::size_t s = 1;
  for (int q = r - 1; q >= 0; --q) {
    stride[static_cast<std::size_t>(q)] = s;
    s *= kDim;
  }
  for (int i = 0; i < kDim; ++i) {
    for (std::size_t p = 0; p < n; ++p) {
      double v = 0.0;
      for (int q = 0; q < r; ++q) {
        const std::size_t st = stride[static_cast<std::size_t>(q)];
        const int digit = static_cast<int>((p / st) % kDim);
        const std::size_t base = p - static_cast<std::size_t>(digit) * st;
        for (int m = 0; m < kDim; ++m) {
          const double tv = t.data()[base + static_cast<std::size_t>(m) * st];
          if (tv == 0.0) continue;
          if (t.upper()[static_cast<std::size_t>(q)]) {
            v += conn(digit, i, m) * tv;
          } else {
            v -= conn(m, i, digit) * tv;
          }
        }
      }
      out.data()[static_cast<std::size_t>(i) * n + p] = v;
    }
  }
  return out;
}

}  // namespace

Tensor covariant_derivative(const Tensor& t, const Connection& conn, int order) {
  if (order < 0 || order > 2) {
    throw Error(ErrorCode::Unsupported, "covariant derivatives of order " + std::to_string(order) + " are not supported");
  }
  Tensor out = t;
  for (int k = 0; k < order; ++k) out = derivative_once(out, conn);
  return out;
}

Tensor metric_tensor(const MetricTensor& g) {
  Tensor t({false, false});
  for (int i = 0; i < kDim; ++i) {
    for (int j = 0; j < kDim; ++j) t.data()[static_cast<std::size_t>(i * 6 + j)] = g.matrix()(i, j);
  }
  return t;
}

Tensor nijenhuis_tensor(const NijenhuisTensor& n) {
  Tensor t({true, false, false});
  std::copy(n.N.begin(), n.N.end(), t.data().begin());
  return t;
}

Tensor curvature_tensor(const CurvatureTensor& rm) {
  Tensor t({true, false, false, false});
  std::copy(rm.R.begin(), rm.R.end(), t.data().begin());
  return t;
}

HolonomyReport verify_holonomy(const TypeIIAStructure& s, const LieAlgebra6& alg) {
  HolonomyReport out;
  const MetricTensor gt(s.norm_sq * s.g.matrix());
  const Connection d = gauduchon_connection(0.0, gt, s.J, alg);
  const auto re = full_components(s.phi);
  const auto im = full_components(phi_hat(s));
  const KForm ph = phi_hat(s);
  const double omega_norm = std::sqrt(norm_squared(s.phi, gt) + norm_squared(ph, gt));

  const auto dre = covariant_derivative_3form(d, re);
  const auto dim = covariant_derivative_3form(d, im);
  const std::vector<bool> slots{false, false, false, false};
  auto norm_of = [&](const std::array<double, 1296>& a, const MetricTensor& g) {
    Tensor t(slots);
    std::copy(a.begin(), a.end(), t.data().begin());
    return t.norm(g) / std::sqrt(6.0);  // 3-form part uses the sorted-index norm
  };
  out.omega_parallel = std::hypot(norm_of(dre, gt), norm_of(dim, gt)) / omega_norm;

  // D^{0,1} Omega (X) = D_X Omega + i D_{JX} Omega
  std::array<double, 1296> hre{}, him{};
  for (int i = 0; i < kDim; ++i) {
    for (int p = 0; p < 216; ++p) {
      double jre = 0.0, jim = 0.0;
      for (int m = 0; m < kDim; ++m) {
        jre += s.J(m, i) * dre[m * 216 + p];
        jim += s.J(m, i) * dim[m * 216 + p];
      }
      hre[i * 216 + p] = dre[i * 216 + p] - jim;
      him[i * 216 + p] = dim[i * 216 + p] + jre;
    }
  }
  out.omega_holomorphic = std::hypot(norm_of(hre, gt), norm_of(him, gt));
  out.unitarity = std::max(metric_compatibility_residual(d, gt), complex_compatibility_residual(d, s.J));
  out.nijenhuis_rank = nijenhuis(s.J, alg).rank();
  return out;
}

KForm InvariantModel::phi(const Eigen::VectorXd& coeffs) const {
  if (coeffs.size() != static_cast<Eigen::Index>(basis.size())) {
    throw Error(ErrorCode::InvalidArgument, "coefficient count does not match the ansatz");
  }
  KForm out = offset;
  for (std::size_t i = 0; i < basis.size(); ++i) out += coeffs[static_cast<Eigen::Index>(i)] * basis[i];
  return out;
}

Eigen::MatrixXd InvariantModel::basis_matrix() const {
  Eigen::MatrixXd b(20, static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i) b.col(static_cast<Eigen::Index>(i)) = basis[i].to_vector();
  return b;
}

}  // namespace tiia
