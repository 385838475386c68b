#pragma once

// Numerical Beurling--Lax--Halmos factorization: a shift-invariant subspace S
// of a truncated A^2_m(E_*) is written as the range of a partially isometric
// multiplier Theta from the Hardy space H^2(E), and one-variable multipliers
// are lifted to the polydisc box.

#include <vector>

#include "dilab/bergman.hpp"
#include "dilab/dilation.hpp"

namespace dilab {

/// Theta(z) = sum_k Theta_k z^k, Theta_k : E -> E_* (|E_*| x |E| matrices).
struct MultiplierPoly {
  Index source_coeff_dim = 0;
  TruncatedSpace target;  // one axis, weight m, coefficient dimension |E_*|
  std::vector<ComplexMatrix> coeffs;

  int degree() const { return coeffs.empty() ? 0 : static_cast<int>(coeffs.size()) - 1; }

  /// M_Theta from truncated H^2(E) (same degree N) into `target`, built from
  /// the coefficients: entry ((j + k, c), (k, e)) = Theta_j(c, e) / sqrt(C(m+j+k-1, j+k)).
  ComplexMatrix multiplication_matrix() const;

  /// Source degrees k with k + deg Theta <= N: columns whose image is not cut
  /// by the truncation.
  int interior_degree() const { return target.degree() - degree(); }
};

struct BlhResult {
  MultiplierPoly theta;
  SubspaceFrame subspace;     // S
  SubspaceFrame source_frame; // E inside the domain of X* (defect frame of I - X X*)
  double invariance_residual = 0.0;
  double spectral_radius = 0.0;  // of the compressed shift X
  double range_residual = 0.0;   // ||M M* - P_S||, interior rows and columns
  double range_residual_full = 0.0;
  double partial_isometry_residual = 0.0;  // interior columns
};

/// Compress M_z to S, Hardy-dilate the compression and read off Theta.
/// Throws NotInvariant when ||(I - P_S) M_z P_S|| > tol.residual and NotC0
/// when the compression has spectral radius >= 1 - margin.
BlhResult blh_multiplier(const TruncatedSpace& space, const SubspaceFrame& s,
                         const Tolerances& tol = {});

struct PartialIsometryReport {
  int interior_degree = 0;
  Index top_degree_columns = 0;  // source columns outside the interior box
  double partial_isometry = 0.0;  // ||(M M* M - M)|| on interior columns
  double range = 0.0;             // ||M M* - P_ran|| on interior target degrees
  double intertwining = 0.0;      // ||M S - M_z M|| on interior columns
  double partial_isometry_slack = 0.0;  // same quantities on the full box
  double range_slack = 0.0;
  double intertwining_slack = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

PartialIsometryReport verify_partial_isometry(const MultiplierPoly& theta, const Tolerances& tol = {});

/// (identity on axes != axis) x M_theta, from the box over A^2_{m-hat}(E)
/// into the box over A^2_m(E_*). `product` supplies n, N and the weights
/// (with weights[axis] equal to the multiplier's target weight).
ComplexMatrix theta_lift(const MultiplierPoly& theta, const TruncatedSpace& product, std::size_t axis);

/// Matrix-free version of theta_lift for boxes too large to store.
LinearOperator theta_lift_operator(const MultiplierPoly& theta, const TruncatedSpace& product,
                                   std::size_t axis);

}  // namespace dilab
