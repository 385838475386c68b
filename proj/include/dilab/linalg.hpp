#pragma once

// Dense complex matrix substrate shared by every module: Hermitian spectra,
// PSD certification and square roots, Kronecker products, subspace frames and
// nearest-Kronecker factorization.
//
// Kronecker convention: the first factor varies slowest, i.e.
//   kron(A, B)(i * rows(B) + k, j * cols(B) + l) = A(i, j) * B(k, l).

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dilab/error.hpp"

namespace dilab {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

struct Tolerances {
  double psd = 1e-10;       // eigenvalue floor
  double residual = 1e-8;   // operator-norm residual
  double ortho = 1e-10;     // orthonormality of frames
  double rank = 1e-8;       // relative singular-value threshold

  // Throws InvalidArgument unless every entry lies in (0, 1).
  void validate() const;
};

/// Throws InvalidArgument when an entry is NaN/Inf or the matrix is empty.
void require_finite(const ComplexMatrix& a, const char* what);

/// Spectral norm. Exact (singular values) up to a few hundred rows; above
/// that a block power iteration on A*A, accurate to about four digits.
double op_norm(const ComplexMatrix& a);

ComplexMatrix hermitian_part(const ComplexMatrix& a);

/// ||H - H*||, the quantity compared against tol.residual * (1 + ||H||).
double hermitian_defect(const ComplexMatrix& h);

struct PsdCheck {
  bool is_psd = false;
  double min_eig = 0.0;
};

/// Symmetrizes H and reports its smallest eigenvalue. Throws NonHermitian if
/// ||H - H*|| > tol.residual * (1 + ||H||).
PsdCheck psd_check(const ComplexMatrix& h, const Tolerances& tol = {});

/// PSD square root. Eigenvalues in [-tol.psd, 0) are clamped to zero; throws
/// NotPSD below that.
ComplexMatrix psd_sqrt(const ComplexMatrix& h, const Tolerances& tol = {});

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix kron(std::span<const ComplexMatrix> factors);

struct KronFactorization {
  std::vector<ComplexMatrix> factors;
  double relative_residual = 0.0;  // ||P - F1 x ... x Fn||_F / ||P||_F
};

/// Rank-one tensor approximation of a square matrix acting on
/// C^{d1} x ... x C^{dn} via the Van Loan--Pitsianis rearrangement, peeling
/// off one factor at a time.
KronFactorization nearest_kron_factorization(const ComplexMatrix& p,
                                             std::span<const std::size_t> dims);

double spectral_radius(const ComplexMatrix& t);

/// Rotates each column so that its first significant entry is real positive.
void normalize_column_phases(ComplexMatrix& columns);

/// ||A B*|| for tall thin A, B without forming the product.
double low_rank_product_norm(const ComplexMatrix& a, const ComplexMatrix& b);

struct SingularTriplet {
  double sigma = 0.0;
  ComplexVector left;
  ComplexVector right;
};

/// Largest singular value with its vectors (A v = sigma u).
SingularTriplet dominant_singular_triplet(const ComplexMatrix& a);

/// Matrix-free operator, used for product-space maps too large to store.
struct LinearOperator {
  Index rows = 0;
  Index cols = 0;
  std::function<ComplexMatrix(const ComplexMatrix&)> apply;
  std::function<ComplexMatrix(const ComplexMatrix&)> apply_adjoint;

  ComplexMatrix to_dense() const;
};

LinearOperator as_operator(const ComplexMatrix& a);
LinearOperator operator_difference(LinearOperator a, LinearOperator b);
LinearOperator operator_product(LinearOperator a, LinearOperator b);

/// Spectral norm of a matrix-free operator. Dense SVD when the operator is
/// small, otherwise a seeded block power iteration (deterministic) stopped
/// once successive estimates agree to `rel_tol`.
double estimate_norm(const LinearOperator& op, double rel_tol = 1e-10);

/// Orthonormal basis of a closed subspace of C^ambient.
class SubspaceFrame {
 public:
  SubspaceFrame() = default;
  explicit SubspaceFrame(Index ambient_dim);  // the zero subspace

  /// Wraps columns that are already orthonormal; throws InvalidArgument when
  /// ||F*F - I|| > tol.ortho (scaled by the column count).
  SubspaceFrame(ComplexMatrix orthonormal_columns, const Tolerances& tol);

  /// Column span of an arbitrary spanning set, rank decided by singular values
  /// relative to the largest one.
  static SubspaceFrame span_of(const ComplexMatrix& columns, const Tolerances& tol = {});

  /// Span of the eigenvectors of a Hermitian matrix whose eigenvalues are at
  /// least `threshold`, ordered by decreasing eigenvalue, phases normalized.
  static SubspaceFrame eigenspace_above(const ComplexMatrix& hermitian, double threshold);

  Index ambient_dim() const { return ambient_; }
  Index dim() const { return basis_.cols(); }
  bool empty() const { return basis_.cols() == 0; }
  const ComplexMatrix& basis() const { return basis_; }

  ComplexMatrix projection() const;
  SubspaceFrame complement() const;

 private:
  Index ambient_ = 0;
  ComplexMatrix basis_;
};

}  // namespace dilab
