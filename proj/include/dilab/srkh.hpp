#pragma once

// Diagonal-kernel reproducing kernel spaces k(z, w) = sum c_k (z conj(w))^k:
// the reciprocal series of 1/k, k-contractivity of a matrix, the associated
// dilation and product kernels on the polydisc.

#include <vector>

#include "dilab/dilation.hpp"
#include "dilab/hereditary.hpp"

namespace dilab {

class DiagonalKernel {
 public:
  /// Throws InvalidArgument unless c_0 = 1, every c_k > 0 and c_k <= c_{k+1}.
  explicit DiagonalKernel(std::vector<double> coeffs);

  static DiagonalKernel hardy(int degree);
  /// c_k = C(m + k - 1, k).
  static DiagonalKernel bergman(int m, int degree);

  const std::vector<double>& coeffs() const { return c_; }
  double operator[](std::size_t k) const { return c_[k]; }
  int max_degree() const { return static_cast<int>(c_.size()) - 1; }
  /// sup_k c_k / c_{k+1}; at most 1, i.e. the shift is contractive.
  double shift_contraction_witness() const { return shift_witness_; }

  /// Norm of the truncated shift psi_k -> sqrt(c_k / c_{k+1}) psi_{k+1}.
  double truncated_shift_norm(int degree) const;

 private:
  std::vector<double> c_;
  double shift_witness_ = 0.0;
};

struct ReciprocalSeries {
  std::vector<double> coeffs;     // b_0 .. b_N
  double convolution_residual = 0.0;  // max_k |sum_j b_j c_{k-j} - delta_k0|
};

ReciprocalSeries reciprocal_series(const DiagonalKernel& kernel, int degree);

struct DecaySample {
  int order = 0;  // K
  double norm = 0.0;  // ||f_{K,C}(T)||
};

struct KContractCertificate {
  ComplexMatrix c;  // limit candidate, symmetrized partial sum S_N
  double convergence_residual = 0.0;  // ||S_N - S_{N/2}||
  double min_eig = 0.0;
  bool psd = false;
  std::vector<DecaySample> f_decay;  // K in {N/4, N/2, N}
  double spectral_radius = 0.0;
  bool verdict = false;
};

/// Partial sums of sum_k b_k T^k T*^k and the remainder I - sum_{k<K} c_k T^k C T*^k.
/// Throws SpectralRadiusTooLarge when rho(T) >= 1 - margin.
KContractCertificate k_contractivity(const ComplexMatrix& t, const DiagonalKernel& kernel, int degree,
                                     const Tolerances& tol = {});

/// Dilation into the truncated diagonal-kernel space with orthonormal basis
/// psi_k = sqrt(c_k) z^k: rows sqrt(c_k) F* C^{1/2} T*^k.
struct KernelDilation {
  DiagonalKernel kernel;
  int degree = 0;
  SubspaceFrame coeff_frame;
  ComplexMatrix matrix;  // (N + 1) r x d
  double isometry_residual = 0.0;
  double intertwining_residual = 0.0;  // ||V T* - M_z* V||
  double threshold = 0.0;
  bool pass = false;

  ComplexMatrix ambient_matrix() const;
};

/// Throws NotKContractive when the certificate fails.
KernelDilation srkh_dilation(const ComplexMatrix& t, const DiagonalKernel& kernel, int degree,
                             const Tolerances& tol = {});

struct ProductKernelCertificate {
  std::vector<KContractCertificate> axes;
  double commutator = 0.0;  // max ||C_i C_j - C_j C_i||
  ComplexMatrix c_t;        // symmetrized prod C_i
  double min_eig = 0.0;
  bool verdict = false;
  int failing_axis = -1;    // first axis whose certificate fails, 0-based
};

/// Throws NotDoublyCommuting.
ProductKernelCertificate product_kernel_certify(const OperatorTuple& t,
                                                const std::vector<DiagonalKernel>& kernels, int degree,
                                                const Tolerances& tol = {});

}  // namespace dilab
