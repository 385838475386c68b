#include "dilab/blh.hpp"

#include <cmath>
#include <memory>
#include <sstream>

namespace dilab {

namespace {

constexpr double kTrimNorm = 1e-12;

double coeff(int m, int k) { return binomial(m + k - 1, m - 1); }

ComplexMatrix leading_block(const ComplexMatrix& a, Index rows, Index cols) {
  return a.topLeftCorner(std::max<Index>(rows, 0), std::max<Index>(cols, 0));
}

double norm_or_zero(const ComplexMatrix& a) { return a.size() == 0 ? 0.0 : op_norm(a); }

}  // namespace

ComplexMatrix MultiplierPoly::multiplication_matrix() const {
  const int n = target.degree();
  const int m = target.weights()[0];
  const Index c = target.coeff_dim();
  const Index e = source_coeff_dim;
  ComplexMatrix out = ComplexMatrix::Zero((n + 1) * c, (n + 1) * e);
  for (int k = 0; k <= n; ++k) {
    for (int j = 0; j <= degree() && j + k <= n; ++j) {
      out.block((j + k) * c, k * e, c, e) = coeffs[j] / std::sqrt(coeff(m, j + k));
    }
  }
  return out;
}

BlhResult blh_multiplier(const TruncatedSpace& space, const SubspaceFrame& s, const Tolerances& tol) {
  if (space.n() != 1) throw Error(ErrorCode::ArityMismatch, "blh_multiplier works on a one-axis space");
  if (s.ambient_dim() != space.total_dim()) {
    throw Error(ErrorCode::ShapeMismatch, "subspace does not live in the given space");
  }
  const int n = space.degree();
  const int m = space.weights()[0];
  const Index c = space.coeff_dim();
  const ComplexMatrix& f = s.basis();
  const Index k = f.cols();

  BlhResult out;
  out.subspace = s;
  out.theta.target = space;
  if (k == 0) {
    out.source_frame = SubspaceFrame(0);
    out.theta.coeffs = {ComplexMatrix::Zero(c, 0)};
    return out;
  }

  const ComplexMatrix mf = apply_shift(space, 0, f);
  const ComplexMatrix x = f.adjoint() * mf;
  out.invariance_residual = op_norm(mf - f * x);
  if (out.invariance_residual > tol.residual) {
    std::ostringstream os;
    os << "||(I - P_S) M_z P_S|| = " << out.invariance_residual << " exceeds " << tol.residual;
    throw Error(ErrorCode::NotInvariant, os.str());
  }
  out.spectral_radius = spectral_radius(x);
  if (out.spectral_radius >= 1.0 - kC0Margin) {
    std::ostringstream os;
    os << "compressed shift has spectral radius " << out.spectral_radius;
    throw Error(ErrorCode::NotC0, os.str());
  }

  // Hardy dilation of X: w h = D (I - z X*)^{-1} h, D = (I - X X*)^{1/2}.
  const ComplexMatrix defect_sq = ComplexMatrix::Identity(k, k) - x * x.adjoint();
  const ComplexMatrix d = psd_sqrt(defect_sq, tol);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(defect_sq), Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues().maxCoeff();
  out.source_frame = top > 0.0 ? SubspaceFrame::eigenspace_above(defect_sq, tol.rank * top) : SubspaceFrame(k);
  const ComplexMatrix& g = out.source_frame.basis();
  const Index e = g.cols();

  // Column block 0 of M_Theta = F w* is F D G; degree j rows give Theta_j.
  const ComplexMatrix head = f * (d * g);
  std::vector<ComplexMatrix> coeffs;
  for (int j = 0; j <= n; ++j) coeffs.push_back(std::sqrt(coeff(m, j)) * head.middleRows(j * c, c));
  int last = 0;
  for (int j = 0; j <= n; ++j) {
    if (coeffs[j].norm() >= kTrimNorm) last = j;
  }
  coeffs.resize(last + 1);
  out.theta.source_coeff_dim = e;
  out.theta.coeffs = std::move(coeffs);

  const ComplexMatrix mm = out.theta.multiplication_matrix();
  const ComplexMatrix gram = mm * mm.adjoint();  // target sized; mm* mm can be much larger
  const ComplexMatrix range_diff = gram - s.projection();
  const Index interior = out.theta.interior_degree() + 1;
  out.range_residual_full = op_norm(range_diff);
  out.range_residual = norm_or_zero(leading_block(range_diff, interior * c, interior * c));
  const ComplexMatrix head_cols = mm.leftCols(interior * e);
  out.partial_isometry_residual = norm_or_zero(gram * head_cols - head_cols);
  return out;
}

PartialIsometryReport verify_partial_isometry(const MultiplierPoly& theta, const Tolerances& tol) {
  PartialIsometryReport rep;
  const Index c = theta.target.coeff_dim();
  const Index e = theta.source_coeff_dim;
  const int n = theta.target.degree();
  rep.interior_degree = theta.interior_degree();
  rep.top_degree_columns = (n - rep.interior_degree) * e;
  rep.threshold = tol.residual;
  if (e == 0) {
    rep.pass = true;
    return rep;
  }
  const Index interior = rep.interior_degree + 1;
  const ComplexMatrix mm = theta.multiplication_matrix();

  const ComplexMatrix gram = mm * mm.adjoint();
  const ComplexMatrix pi_diff = gram * mm - mm;
  rep.partial_isometry = norm_or_zero(pi_diff.leftCols(interior * e));
  rep.partial_isometry_slack = op_norm(pi_diff);

  const ComplexMatrix range_diff = gram - SubspaceFrame::span_of(mm, tol).projection();
  rep.range = norm_or_zero(leading_block(range_diff, interior * c, interior * c));
  rep.range_slack = op_norm(range_diff);

  const TruncatedSpace hardy(Weights({1}), n, e);
  const ComplexMatrix tw = apply_shift(hardy, 0, mm.adjoint(), true).adjoint() - apply_shift(theta.target, 0, mm);
  // M S has columns M S e_k = M e_{k+1}; interior needs k + 1 <= interior degree.
  rep.intertwining = norm_or_zero(tw.leftCols(rep.interior_degree * e));
  rep.intertwining_slack = op_norm(tw);

  rep.pass = rep.partial_isometry <= rep.threshold && rep.range <= rep.threshold &&
             rep.intertwining <= rep.threshold;
  return rep;
}

namespace {

void check_lift_shapes(const MultiplierPoly& theta, const TruncatedSpace& product, std::size_t axis) {
  if (axis >= product.n()) throw Error(ErrorCode::AxisOutOfRange, "lift axis out of range");
  if (product.degree() != theta.target.degree() || product.weights()[axis] != theta.target.weights()[0] ||
      product.coeff_dim() != theta.target.coeff_dim()) {
    throw Error(ErrorCode::ShapeMismatch, "multiplier does not fit the product slot");
  }
}

}  // namespace

ComplexMatrix theta_lift(const MultiplierPoly& theta, const TruncatedSpace& product, std::size_t axis) {
  check_lift_shapes(theta, product, axis);
  const Index source_total = product.monomial_count() * theta.source_coeff_dim;
  return apply_axis_local(product, axis, theta.multiplication_matrix(),
                          ComplexMatrix::Identity(source_total, source_total));
}

LinearOperator theta_lift_operator(const MultiplierPoly& theta, const TruncatedSpace& product,
                                   std::size_t axis) {
  check_lift_shapes(theta, product, axis);
  auto local = std::make_shared<ComplexMatrix>(theta.multiplication_matrix());
  auto local_adj = std::make_shared<ComplexMatrix>(local->adjoint());
  const Index source_total = product.monomial_count() * theta.source_coeff_dim;
  return {product.total_dim(), source_total,
          [=](const ComplexMatrix& x) -> ComplexMatrix { return apply_axis_local(product, axis, *local, x); },
          [=](const ComplexMatrix& x) -> ComplexMatrix { return apply_axis_local(product, axis, *local_adj, x); }};
}

}  // namespace dilab
