#pragma once

// Agler-type dilations into truncated weighted Bergman spaces: the
// one-variable map (v h)(z) = D (I - z T*)^{-m} h, the doubly commuting
// multivariable map built by composing one-axis stages, the model projections
// R_j and verification of the dilation identities.

#include <cstdint>
#include <vector>

#include "dilab/bergman.hpp"
#include "dilab/hereditary.hpp"

namespace dilab {

/// Matrix of V : C^d -> A^2_m(D) truncated to the box of degree N. The
/// coefficient space D is the defect space, expressed in `coeff_frame`
/// (columns inside C^d).
struct DilationMap {
  Index source_dim = 0;
  TruncatedSpace target;
  ComplexMatrix matrix;  // target.total_dim() x source_dim
  double tail_bound = 0.0;
  Weights weights;
  SubspaceFrame coeff_frame;
  /// Stage composition versus closed product form (0 for one variable).
  double construction_discrepancy = 0.0;

  /// Same map with coefficients written in C^d instead of the defect frame;
  /// independent of the frame's basis choice.
  ComplexMatrix ambient_matrix() const;
};

/// Norms ||T^k|| for k <= 64, from which truncation tails are bounded.
class TailEstimator {
 public:
  TailEstimator(const ComplexMatrix& t, int m);

  /// sqrt(sum_{k > N} C(m+k-1, k) ||T*^k||^2); exact norms up to
  /// K0 = min(2N, 64), submultiplicativity beyond. +inf when the bound diverges.
  double tail_bound(int degree) const;

 private:
  int m_;
  std::vector<double> norms_;  // norms_[k] = ||T^k||
};

double tail_bound(const ComplexMatrix& t, int m, int degree);

/// Per-axis tails combined in quadrature.
double joint_tail_bound(const OperatorTuple& t, const Weights& m, int degree);

inline constexpr int kDefaultDegreeCap = 512;
inline constexpr double kMaxTailBound = 0.1;

/// Smallest N with joint_tail_bound <= epsilon; TailBoundTooLarge past `cap`.
int select_degree(const OperatorTuple& t, const Weights& m, double epsilon,
                  int cap = kDefaultDegreeCap);

/// One-variable dilation v_{m,T}. Throws NotBmContraction or
/// TailBoundTooLarge (tail > 0.1).
DilationMap agler_dilation(const ComplexMatrix& t, int m, int degree, const Tolerances& tol = {});
DilationMap agler_dilation(const OperatorTuple& t, const Weights& m, int degree,
                           const Tolerances& tol = {});

/// V_T = V_n o ... o V_1 for a doubly commuting B_m-contractive tuple. The
/// stage composition is cross-checked against the closed form
/// prod_i D_i B_{m_i}(z_i, T_i); the discrepancy is recorded.
DilationMap joint_dilation(const OperatorTuple& t, const Weights& m, int degree,
                           const Tolerances& tol = {});

/// Stage composition along an arbitrary axis order, returned in ambient
/// coordinates with canonical (k_1, ..., k_n, h) row order.
ComplexMatrix joint_dilation_by_stages(const OperatorTuple& t, const Weights& m, int degree,
                                       const std::vector<std::size_t>& order,
                                       const Tolerances& tol = {});

/// Closed product form in ambient coordinates.
ComplexMatrix joint_dilation_closed_form(const OperatorTuple& t, const Weights& m, int degree,
                                         const Tolerances& tol = {});

struct DilationReport {
  double tail_bound = 0.0;
  double isometry_residual = 0.0;
  double isometry_threshold = 0.0;
  std::vector<double> intertwining_residuals;
  double intertwining_threshold = 0.0;
  double kernel_residual = 0.0;  // normalized by ||K_w|| ||K_z|| ||eta||
  double kernel_threshold = 0.0;
  int kernel_samples = 0;
  bool isometry_pass = false;
  bool intertwining_pass = false;
  bool kernel_pass = false;

  bool pass() const { return isometry_pass && intertwining_pass && kernel_pass; }
  double max_intertwining() const;
};

/// Isometry, intertwining V T_i* = M_{z_i}* V and the reproducing identity
/// for V V* on kernel sections, sampled at 5 seeded points per axis inside
/// radius 0.9.
DilationReport verify_dilation_identities(const DilationMap& v, const OperatorTuple& t,
                                          const Tolerances& tol = {},
                                          std::uint64_t seed = 20140601);

/// R_j = (identity on axes != j) x (v_j v_j*) compressed to A^2_m(D_{m,T}).
/// Stored through its axis-local block; the full matrix is available for
/// small boxes via to_dense().
class ModelProjection {
 public:
  ModelProjection(TruncatedSpace target, std::size_t axis, ComplexMatrix local_factor,
                  double invariance_residual);

  const TruncatedSpace& target() const { return target_; }
  std::size_t axis() const { return axis_; }
  /// u with W_j = u u*, rows indexed by (k_j, e).
  const ComplexMatrix& local_factor() const { return factor_; }
  ComplexMatrix local_block() const { return factor_ * factor_.adjoint(); }

  /// ||(I - P) X_j P|| with P the projection onto A^2_{m_j}(D_{m,T}).
  double invariance_residual() const { return invariance_residual_; }
  double idempotency_residual() const;
  double hermitian_residual() const;

  ComplexMatrix apply(const ComplexMatrix& x) const;
  LinearOperator as_operator() const;
  ComplexMatrix to_dense() const;

 private:
  TruncatedSpace target_;
  std::size_t axis_;
  ComplexMatrix factor_;
  double invariance_residual_;
};

ModelProjection model_projection(const OperatorTuple& t, const Weights& m, std::size_t axis,
                                 int degree, const Tolerances& tol = {});

/// Applies `local` (rows indexed by (k_axis, e_out), columns by (k_axis, e_in))
/// on one axis of the box and the identity on the others. Coefficient
/// dimensions are read off the shape of `local`; only n and N of `space` matter.
ComplexMatrix apply_axis_local(const TruncatedSpace& space, std::size_t axis,
                               const ComplexMatrix& local, const ComplexMatrix& x);

LinearOperator dilation_range_projection(const DilationMap& v);

struct ProductFormulaReport {
  double commutator = 0.0;   // max ||R_i R_j - R_j R_i||
  double idempotency = 0.0;  // max ||R_i^2 - R_i||
  double hermitian = 0.0;    // max ||R_i* - R_i||
  double product_residual = 0.0;  // ||V V* - R_1 ... R_n||
  double threshold = 0.0;
  bool pass = false;
};

ProductFormulaReport verify_product_formula(const DilationMap& v,
                                            const std::vector<ModelProjection>& r,
                                            const Tolerances& tol = {});

}  // namespace dilab
