#pragma once

// Truncated vector-valued weighted Bergman spaces A^2_m(C^d) over the
// polydisc. The truncation is a full box 0 <= k_i <= N on every axis, so the
// space factors exactly as A^2_{m_1} x ... x A^2_{m_n} x C^d.
//
// Basis vector (k, e) is sqrt(prod_i C(m_i + k_i - 1, k_i)) z^k x e_e and is
// enumerated lexicographically in (k_1, ..., k_n, e): e varies fastest.
// Axes are 0-based throughout the API.

#include <vector>

#include "dilab/hereditary.hpp"
#include "dilab/linalg.hpp"

namespace dilab {

class TruncatedSpace {
 public:
  TruncatedSpace() = default;
  TruncatedSpace(Weights weights, int degree, Index coeff_dim);

  std::size_t n() const { return weights_.n(); }
  const Weights& weights() const { return weights_; }
  int degree() const { return degree_; }
  Index coeff_dim() const { return coeff_dim_; }
  /// (N + 1)^n, the number of monomials in the box.
  Index monomial_count() const { return monomials_; }
  Index total_dim() const { return monomials_ * coeff_dim_; }

  Index index(const MultiIndex& k, Index e) const;
  Index monomial_index(const MultiIndex& k) const;
  MultiIndex multi_index(Index monomial) const;

  /// sqrt(prod_i C(m_i + k_i - 1, k_i)), the factor turning monomial
  /// coefficients into orthonormal coordinates inverted.
  double basis_scale(const MultiIndex& k) const;

  /// Same box with a different coefficient dimension.
  TruncatedSpace with_coeff_dim(Index d) const { return {weights_, degree_, d}; }

  bool operator==(const TruncatedSpace&) const = default;

 private:
  Weights weights_;
  int degree_ = 0;
  Index coeff_dim_ = 1;
  Index monomials_ = 1;
};

struct SpaceVector {
  TruncatedSpace space;
  ComplexVector coeffs;  // orthonormal coordinates, length space.total_dim()

  /// f(z) as a vector of length coeff_dim.
  ComplexVector evaluate(const std::vector<Complex>& z) const;
};

/// ||z^k|| in A^2_m, i.e. C(m + k - 1, k)^{-1/2}.
double monomial_norm(int m, int k);

/// Truncation of B_m(., w) eta. Throws PointOutsideDisc or ShapeMismatch.
SpaceVector kernel_vector(const TruncatedSpace& space, const std::vector<Complex>& w,
                          const ComplexVector& eta);

/// B_m(z, w) = prod_i (1 - z_i conj(w_i))^{-m_i}.
Complex bergman_kernel(const Weights& m, const std::vector<Complex>& z,
                       const std::vector<Complex>& w);

/// Sum over multi-indices outside the box of prod_i C(m_i+k_i-1,k_i)|v_i w_i|^{k_i}:
/// the error of the truncated Gram identity for kernel vectors at v and w.
double gram_tail_bound(const TruncatedSpace& space, const std::vector<Complex>& v,
                       const std::vector<Complex>& w);

/// Dense matrix of M_{z_axis}. The top degree on that axis maps to zero.
ComplexMatrix shift_matrix(const TruncatedSpace& space, std::size_t axis);

/// M_{z_axis} (or its adjoint) applied to each column of x without forming
/// the matrix.
ComplexMatrix apply_shift(const TruncatedSpace& space, std::size_t axis, const ComplexMatrix& x,
                          bool adjoint = false);

/// The weight sequence sqrt((k + 1) / (m + k)) of the one-axis shift.
double shift_weight(int m, int k);

/// Copy of m with entry `axis` replaced by 1.
Weights hat_weight(const Weights& m, std::size_t axis);

}  // namespace dilab
