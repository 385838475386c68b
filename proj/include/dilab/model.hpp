#pragma once

// Analytic models of doubly commuting tuples: the model space ran V with its
// unitary, the Beurling-type complement sum_i Theta_i A^2_{m-hat_i}(E_i), the
// span formula for commuting projections, and quotient-module analysis on the
// scalar box.

#include <optional>
#include <string>
#include <vector>

#include "dilab/blh.hpp"
#include "dilab/dilation.hpp"

namespace dilab {

struct ModelData {
  OperatorTuple tuple;
  Weights weights;
  DilationMap dilation;
  SubspaceFrame model_frame;       // Q = ran V inside the truncated A^2_m(D)
  ComplexMatrix unitary;           // U : C^d -> Q coordinates
  OperatorTuple compressed_tuple;  // C_i = P_Q M_{z_i}|_Q
  double unitary_residual = 0.0;   // ||U*U - I||
  std::vector<double> intertwining_residuals;  // ||U T_j - C_j U||
  std::vector<double> coinvariance_residuals;  // ||(I - P_Q) M_{z_j}* P_Q||
};

/// Throws TailBoundTooLarge / certificate errors from joint_dilation.
ModelData model_space(const OperatorTuple& t, const Weights& m, int degree, const Tolerances& tol = {});

struct ComplementAxis {
  BlhResult blh;
  bool degenerate = false;  // empty complement on this axis
  double one_variable_range_residual = 0.0;  // ||M M* - (I - v v*)||
};

struct BeurlingComplement {
  std::vector<ComplementAxis> axes;
  double residual = 0.0;  // ||V V* - prod_i (I - M_Theta_i M_Theta_i*)||
  double threshold = 0.0;
  /// I - prod_i (I - P_i) against the projection onto the sum of the ranges
  /// of P_i = M_Theta_i M_Theta_i*, the latter found by intersecting the
  /// ranges of I - P_i. Absent when that intersection basis is too large.
  std::optional<double> span_residual;
  std::optional<double> complement_residual;  // ||P_sum - (I - V V*)||
};

/// Column budget of the intersection basis behind the span check.
inline constexpr Index kSpanBasisLimit = 8192;

BeurlingComplement beurling_complement(const ModelData& model, const Tolerances& tol = {});

struct SpanProjection {
  ComplexMatrix span_projection;  // I - prod (I - P_i)
  ComplexMatrix exact;            // projection onto the sum of the ranges
  double residual = 0.0;
};

/// Throws NotCommuting or NotProjection when the hypotheses fail beyond
/// tol.residual.
SpanProjection projection_span(const std::vector<ComplexMatrix>& p, const Tolerances& tol = {});

/// C_i = F* M_{z_i} F on a jointly co-invariant Q (coefficient dimension 1).
/// Throws NotCoinvariant.
OperatorTuple compress_to_quotient(const SubspaceFrame& q, const TruncatedSpace& space,
                                   const Tolerances& tol = {});

struct QuotientAnalysis {
  double dc_residual = 0.0;
  bool doubly_commuting = false;
  Index defect_rank = 0;
  double defect_identity_residual = 0.0;  // ||D^2 - P_Q P_C|_Q||
  std::optional<std::vector<SubspaceFrame>> factor_frames;
  std::optional<double> factorization_residual;  // ||P_Q - P_1 x ... x P_n||
  std::optional<double> kron_relative_residual;
  bool eq_c_consistent = true;  // false: doubly commuting yet rank > 1
  std::string note;
};

QuotientAnalysis quotient_analysis(const SubspaceFrame& q, const TruncatedSpace& space,
                                   const Tolerances& tol = {});

struct ShiftDefectReport {
  int interior_degree = 0;  // interior multi-indices have every k_i <= this
  double interior_residual = 0.0;
  double boundary_norm = 0.0;
};

/// hereditary_apply(B_m^{-1}, truncated shifts) against the projection onto
/// constants; interior block versus the top-degree correction.
ShiftDefectReport shift_defect_check(const TruncatedSpace& space, const Tolerances& tol = {});

}  // namespace dilab
