#pragma once

// Random inputs and independent oracles shared by the test suites. Oracles
// deliberately avoid the library's own helpers: powers are formed by repeated
// multiplication, binomials by Pascal's triangle, square roots by a direct
// eigendecomposition.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "dilab/linalg.hpp"

namespace oracle {

using dilab::Complex;
using dilab::ComplexMatrix;
using dilab::Index;

inline ComplexMatrix random_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexMatrix a(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) a(i, j) = Complex(g(rng), g(rng));
  return a;
}

inline double spectral_norm(const ComplexMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::BDCSVD<ComplexMatrix> svd(a);
  return svd.singularValues()(0);
}

/// Random matrix rescaled to the given spectral norm.
inline ComplexMatrix random_with_norm(Index d, double norm, std::mt19937_64& rng) {
  ComplexMatrix a = random_matrix(d, d, rng);
  return a * (norm / spectral_norm(a));
}

/// Strictly upper triangular, hence nilpotent of index <= d.
inline ComplexMatrix random_nilpotent(Index d, double norm, std::mt19937_64& rng) {
  ComplexMatrix a = random_matrix(d, d, rng);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j <= i; ++j) a(i, j) = 0.0;
  const double s = spectral_norm(a);
  return s == 0.0 ? a : ComplexMatrix(a * (norm / s));
}

inline ComplexMatrix jordan(double a) {
  ComplexMatrix j = ComplexMatrix::Zero(2, 2);
  j(0, 1) = a;
  return j;
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      for (Index k = 0; k < b.rows(); ++k)
        for (Index l = 0; l < b.cols(); ++l) out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

inline double choose(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  std::vector<double> row(1, 1.0);
  for (int r = 1; r <= n; ++r) {
    std::vector<double> next(r + 1, 1.0);
    for (int c = 1; c < r; ++c) next[c] = row[c - 1] + row[c];
    row = std::move(next);
  }
  return row[k];
}

inline ComplexMatrix power(const ComplexMatrix& t, int k) {
  ComplexMatrix out = ComplexMatrix::Identity(t.rows(), t.cols());
  for (int i = 0; i < k; ++i) out = out * t;
  return out;
}

/// sum_k (-1)^k C(m, k) T^k T*^k by brute force.
inline ComplexMatrix bm_defect_square(const ComplexMatrix& t, int m) {
  ComplexMatrix out = ComplexMatrix::Zero(t.rows(), t.cols());
  for (int k = 0; k <= m; ++k) {
    const ComplexMatrix p = power(t, k);
    out += ((k % 2 ? -1.0 : 1.0) * choose(m, k)) * (p * p.adjoint());
  }
  return out;
}

/// Two-variable joint defect square prod_i B_{m_i}^{-1} with T_1 powers outermost.
inline ComplexMatrix joint_defect_square(const ComplexMatrix& t1, const ComplexMatrix& t2, int m1, int m2) {
  ComplexMatrix out = ComplexMatrix::Zero(t1.rows(), t1.cols());
  for (int j1 = 0; j1 <= m1; ++j1) {
    for (int j2 = 0; j2 <= m2; ++j2) {
      const ComplexMatrix p = power(t1, j1) * power(t2, j2);
      out += (((j1 + j2) % 2 ? -1.0 : 1.0) * choose(m1, j1) * choose(m2, j2)) * (p * p.adjoint());
    }
  }
  return out;
}

inline ComplexMatrix sqrt_psd(const ComplexMatrix& h) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (h + h.adjoint()));
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

/// Rows of block k: sqrt(C(m+k-1,k)) D T*^k, ambient coefficients.
inline ComplexMatrix dilation_1d(const ComplexMatrix& t, int m, int degree) {
  const Index d = t.rows();
  const ComplexMatrix dd = sqrt_psd(bm_defect_square(t, m));
  ComplexMatrix out((degree + 1) * d, d);
  for (int k = 0; k <= degree; ++k) {
    out.middleRows(k * d, d) = std::sqrt(choose(m + k - 1, k)) * dd * power(t.adjoint(), k);
  }
  return out;
}

/// Rows of block (k1, k2): sqrt(c1 c2) D T1*^k1 T2*^k2, ambient coefficients.
inline ComplexMatrix dilation_2d(const ComplexMatrix& t1, const ComplexMatrix& t2, int m1, int m2, int degree) {
  const Index d = t1.rows();
  const ComplexMatrix dd = sqrt_psd(joint_defect_square(t1, t2, m1, m2));
  ComplexMatrix out((degree + 1) * (degree + 1) * d, d);
  for (int k1 = 0; k1 <= degree; ++k1) {
    for (int k2 = 0; k2 <= degree; ++k2) {
      const double c = std::sqrt(choose(m1 + k1 - 1, k1) * choose(m2 + k2 - 1, k2));
      out.middleRows((k1 * (degree + 1) + k2) * d, d) =
          c * dd * power(t1.adjoint(), k1) * power(t2.adjoint(), k2);
    }
  }
  return out;
}

/// One-axis shift on orthonormal monomials: e_k -> (||z^{k+1}|| / ||z^k||) e_{k+1}.
inline ComplexMatrix shift_1d(int m, int degree) {
  ComplexMatrix s = ComplexMatrix::Zero(degree + 1, degree + 1);
  for (int k = 0; k < degree; ++k) {
    const double nk = 1.0 / std::sqrt(choose(m + k - 1, k));
    const double nk1 = 1.0 / std::sqrt(choose(m + k, k + 1));
    s(k + 1, k) = nk1 / nk;
  }
  return s;
}

/// Orthonormal basis of the Krylov space span{M^j f_i} by block Arnoldi with
/// full reorthogonalization; M-invariant to roundoff.
inline ComplexMatrix krylov_basis(const ComplexMatrix& shift, const ComplexMatrix& generators) {
  auto orth_new = [](const ComplexMatrix& basis, ComplexMatrix block) {
    for (int pass = 0; pass < 2; ++pass)
      if (basis.cols() > 0) block -= basis * (basis.adjoint() * block);
    Eigen::JacobiSVD<ComplexMatrix> svd(block, Eigen::ComputeThinU);
    Index r = 0;
    while (r < svd.singularValues().size() && svd.singularValues()(r) > 1e-8) ++r;
    return ComplexMatrix(svd.matrixU().leftCols(r));
  };
  ComplexMatrix basis = orth_new(ComplexMatrix(generators.rows(), 0), generators);
  ComplexMatrix fresh = basis;
  while (fresh.cols() > 0) {
    fresh = orth_new(basis, shift * fresh);
    ComplexMatrix next(basis.rows(), basis.cols() + fresh.cols());
    next << basis, fresh;
    basis = std::move(next);
  }
  return basis;
}

inline ComplexMatrix complement_basis(const ComplexMatrix& basis) {
  const Index n = basis.rows();
  const ComplexMatrix p = ComplexMatrix::Identity(n, n) - basis * basis.adjoint();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (p + p.adjoint()));
  std::vector<Index> keep;
  for (Index i = 0; i < n; ++i)
    if (es.eigenvalues()(i) > 0.5) keep.push_back(i);
  ComplexMatrix out(n, static_cast<Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) out.col(static_cast<Index>(c)) = es.eigenvectors().col(keep[c]);
  return out;
}

/// Truncated kernel vector of A^2_m at w in orthonormal coordinates: sqrt(C(m+k-1,k)) conj(w)^k.
inline dilab::ComplexVector kernel_column(int m, int degree, Complex w) {
  dilab::ComplexVector out(degree + 1);
  for (int k = 0; k <= degree; ++k) out(k) = std::sqrt(choose(m + k - 1, k)) * std::pow(std::conj(w), k);
  return out;
}

/// Orthonormal basis of span{K_w : w in points}; after truncation M_z*-invariant
/// only up to |w|^(degree+1).
inline ComplexMatrix kernel_span(int m, int degree, const std::vector<Complex>& points) {
  ComplexMatrix cols(degree + 1, static_cast<Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) cols.col(static_cast<Index>(i)) = kernel_column(m, degree, points[i]);
  Eigen::JacobiSVD<ComplexMatrix> svd(cols, Eigen::ComputeThinU);
  const double top = svd.singularValues()(0);
  Index r = 0;
  while (r < svd.singularValues().size() && svd.singularValues()(r) > 1e-9 * top) ++r;
  return svd.matrixU().leftCols(r);
}

inline Complex random_point(double radius, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return std::polar(radius * std::sqrt(u(rng)), 6.283185307179586 * u(rng));
}

/// Random M_z-invariant subspace of truncated A^2_m (x) C^c: the complement of
/// span{K_w (x) eta} over a few points of modulus <= radius, plus
/// span{z^k (x) eta'} for k below a random order. The second part is exactly
/// co-invariant; the kernel part up to |w|^(degree+1), negligible at small radius.
inline ComplexMatrix random_invariant_subspace(int m, int degree, Index c, double radius, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(1, 3), order(0, 2);
  const int points = count(rng), low = order(rng);
  const Index total = (degree + 1) * c;
  ComplexMatrix co(total, points + low * c);
  Index col = 0;
  for (int i = 0; i < points; ++i, ++col) {
    const dilab::ComplexVector k = kernel_column(m, degree, random_point(radius, rng));
    const ComplexMatrix eta = random_matrix(c, 1, rng);
    for (int j = 0; j <= degree; ++j) co.block(j * c, col, c, 1) = k(j) * eta;
  }
  for (int j = 0; j < low; ++j)
    for (Index e = 0; e < c; ++e, ++col) co.col(col) = ComplexMatrix::Identity(total, total).col(j * c + e);
  Eigen::JacobiSVD<ComplexMatrix> svd(co, Eigen::ComputeThinU);
  const double top = svd.singularValues()(0);
  Index r = 0;
  while (r < svd.singularValues().size() && svd.singularValues()(r) > 1e-9 * top) ++r;
  return complement_basis(svd.matrixU().leftCols(r));
}

}  // namespace oracle
