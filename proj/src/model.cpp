#include "dilab/model.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

namespace dilab {

namespace {

constexpr double kResidualNormTol = 1e-3;

ComplexMatrix compress(const TruncatedSpace& space, std::size_t axis, const ComplexMatrix& f) {
  return f.adjoint() * apply_shift(space, axis, f);
}

// Columns of (identity on the other axes) x g, where g has rows indexed by
// (k_axis, e): an orthonormal basis of the lifted range of g.
ComplexMatrix lifted_basis(const TruncatedSpace& space, std::size_t axis, const ComplexMatrix& g) {
  const Index side = space.degree() + 1;
  const Index r = g.rows() / side;
  Index stride = 1;
  for (std::size_t i = axis + 1; i < space.n(); ++i) stride *= side;
  const Index bases = space.monomial_count() / side;
  ComplexMatrix out = ComplexMatrix::Zero(space.monomial_count() * r, bases * g.cols());
  Index col = 0;
  for (Index base = 0; base < space.monomial_count(); ++base) {
    if ((base / stride) % side != 0) continue;
    for (Index c = 0; c < g.cols(); ++c, ++col) {
      for (Index k = 0; k < side; ++k) out.block((base + k * stride) * r, col, r, 1) = g.block(k * r, c, r, 1);
    }
  }
  return out;
}

LinearOperator low_rank_projection(const ComplexMatrix& basis) {
  auto b = std::make_shared<ComplexMatrix>(basis);
  auto f = [b](const ComplexMatrix& x) -> ComplexMatrix { return *b * (b->adjoint() * x); };
  return {basis.rows(), basis.rows(), f, f};
}

}  // namespace

ModelData model_space(const OperatorTuple& t, const Weights& m, int degree, const Tolerances& tol) {
  ModelData out;
  out.tuple = t;
  out.weights = m;
  out.dilation = joint_dilation(t, m, degree, tol);
  const DilationMap& v = out.dilation;
  out.model_frame = SubspaceFrame::span_of(v.matrix, tol);
  const ComplexMatrix& f = out.model_frame.basis();
  out.unitary = f.adjoint() * v.matrix;
  out.unitary_residual =
      op_norm(out.unitary.adjoint() * out.unitary - ComplexMatrix::Identity(t.dim(), t.dim()));

  std::vector<ComplexMatrix> c;
  for (std::size_t i = 0; i < t.n(); ++i) {
    c.push_back(compress(v.target, i, f));
    out.intertwining_residuals.push_back(op_norm(out.unitary * t[i] - c.back() * out.unitary));
    const ComplexMatrix back = apply_shift(v.target, i, f, true);
    out.coinvariance_residuals.push_back(op_norm(back - f * (f.adjoint() * back)));
  }
  out.compressed_tuple = OperatorTuple(std::move(c));
  return out;
}

BeurlingComplement beurling_complement(const ModelData& model, const Tolerances& tol) {
  const DilationMap& v = model.dilation;
  const TruncatedSpace& target = v.target;
  const std::size_t n = target.n();
  const int degree = target.degree();
  const Index r = target.coeff_dim();
  const Index side = degree + 1;

  BeurlingComplement out;
  out.threshold = tol.residual + 10.0 * v.tail_bound;
  // Truncation leaves the complements invariant only up to the tail.
  Tolerances axis_tol = tol;
  axis_tol.residual = out.threshold;
  std::vector<ComplexMatrix> range_blocks;  // M_theta M_theta* per axis, axis-local
  for (std::size_t j = 0; j < n; ++j) {
    const ModelProjection rj = model_projection(model.tuple, model.weights, j, degree, tol);
    const TruncatedSpace axis_space(Weights({model.weights[j]}), degree, r);
    // Q_j = ran(v v*) inside the one-axis space; its complement is M_z-invariant.
    const SubspaceFrame qj = SubspaceFrame::span_of(rj.local_factor(), tol);
    const SubspaceFrame sj = qj.complement();
    ComplementAxis axis;
    axis.degenerate = sj.empty();
    axis.blh = blh_multiplier(axis_space, sj, axis_tol);
    const ComplexMatrix mm = axis.blh.theta.multiplication_matrix();
    range_blocks.push_back(mm * mm.adjoint());
    axis.one_variable_range_residual =
        op_norm(range_blocks.back() - (ComplexMatrix::Identity(side * r, side * r) - rj.local_block()));
    out.axes.push_back(std::move(axis));
  }

  // prod_i (I - M_Theta_i M_Theta_i*) against V V*, matrix-free.
  std::vector<ComplexMatrix> complements;
  for (const auto& b : range_blocks) complements.push_back(ComplexMatrix::Identity(side * r, side * r) - b);
  auto product = [&target, complements](const ComplexMatrix& x) -> ComplexMatrix {
    ComplexMatrix y = x;
    for (std::size_t i = complements.size(); i-- > 0;) y = apply_axis_local(target, i, complements[i], y);
    return y;
  };
  auto product_adj = [&target, complements](const ComplexMatrix& x) -> ComplexMatrix {
    ComplexMatrix y = x;
    for (std::size_t i = 0; i < complements.size(); ++i) y = apply_axis_local(target, i, complements[i], y);
    return y;
  };
  const LinearOperator prod{target.total_dim(), target.total_dim(), product, product_adj};
  out.residual = estimate_norm(operator_difference(dilation_range_projection(v), prod), kResidualNormTol);

  // Span formula: the sum of the ranges of the P_i = M_Theta_i M_Theta_i* is
  // the complement of the intersection of the ranges of I - P_i. Those are
  // low rank along their axis, so the intersection is found inside the lift
  // of the first one, independently of the product formula.
  SubspaceFrame first = SubspaceFrame::eigenspace_above(complements[0], 0.5);
  if (first.dim() * (target.monomial_count() / side) <= kSpanBasisLimit) {
    ComplexMatrix inter = lifted_basis(target, 0, first.basis());
    for (std::size_t i = 1; i < n && inter.cols() > 0; ++i) {
      const ComplexMatrix moved = apply_axis_local(target, i, complements[i], inter);
      const ComplexMatrix g = SubspaceFrame::eigenspace_above(hermitian_part(inter.adjoint() * moved), 0.5).basis();
      inter = inter * g;
    }
    const LinearOperator exact_complement = low_rank_projection(inter);
    out.span_residual = estimate_norm(operator_difference(prod, exact_complement), kResidualNormTol);
    out.complement_residual =
        estimate_norm(operator_difference(exact_complement, dilation_range_projection(v)), kResidualNormTol);
  }
  return out;
}

SpanProjection projection_span(const std::vector<ComplexMatrix>& p, const Tolerances& tol) {
  if (p.empty()) throw Error(ErrorCode::InvalidArgument, "projection_span needs at least one projection");
  const Index dim = p.front().rows();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i].rows() != dim || p[i].cols() != dim) {
      throw Error(ErrorCode::ShapeMismatch, "projections must be square of equal size");
    }
    const double idem = op_norm(p[i] * p[i] - p[i]);
    const double herm = op_norm(p[i] - p[i].adjoint());
    if (idem > tol.residual || herm > tol.residual) {
      std::ostringstream os;
      os << "P_" << i + 1 << ": ||P^2 - P|| = " << idem << ", ||P - P*|| = " << herm;
      throw Error(ErrorCode::NotProjection, os.str());
    }
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = i + 1; j < p.size(); ++j) {
      const double c = op_norm(p[i] * p[j] - p[j] * p[i]);
      if (c > tol.residual) {
        std::ostringstream os;
        os << "||P_" << i + 1 << " P_" << j + 1 << " - P_" << j + 1 << " P_" << i + 1 << "|| = " << c;
        throw Error(ErrorCode::NotCommuting, os.str());
      }
    }
  }
  SpanProjection out;
  const ComplexMatrix id = ComplexMatrix::Identity(dim, dim);
  ComplexMatrix prod = id;
  ComplexMatrix sum = ComplexMatrix::Zero(dim, dim);
  for (const auto& pi : p) {
    prod = prod * (id - pi);
    sum += pi;
  }
  out.span_projection = id - prod;
  // Commuting projections: sum P_i has integer spectrum, so 1/2 separates
  // the sum of the ranges from its complement.
  out.exact = SubspaceFrame::eigenspace_above(sum, 0.5).projection();
  out.residual = op_norm(out.span_projection - out.exact);
  return out;
}

OperatorTuple compress_to_quotient(const SubspaceFrame& q, const TruncatedSpace& space, const Tolerances& tol) {
  if (q.ambient_dim() != space.total_dim()) throw Error(ErrorCode::ShapeMismatch, "subspace is not in the box");
  if (q.empty()) throw Error(ErrorCode::InvalidArgument, "cannot compress to the zero subspace");
  const ComplexMatrix& f = q.basis();
  std::vector<ComplexMatrix> c;
  for (std::size_t i = 0; i < space.n(); ++i) {
    const ComplexMatrix back = apply_shift(space, i, f, true);
    const double res = op_norm(back - f * (f.adjoint() * back));
    if (res > tol.residual) {
      std::ostringstream os;
      os << "||(I - P_Q) M_z" << i + 1 << "* P_Q|| = " << res << " exceeds " << tol.residual;
      throw Error(ErrorCode::NotCoinvariant, os.str());
    }
    c.push_back(compress(space, i, f));
  }
  return OperatorTuple(std::move(c));
}

QuotientAnalysis quotient_analysis(const SubspaceFrame& q, const TruncatedSpace& space, const Tolerances& tol) {
  if (space.coeff_dim() != 1) throw Error(ErrorCode::InvalidArgument, "quotient analysis is for scalar boxes");
  if (q.ambient_dim() != space.total_dim()) throw Error(ErrorCode::ShapeMismatch, "subspace is not in the box");
  const std::size_t n = space.n();
  const Index side = space.degree() + 1;
  QuotientAnalysis out;

  if (q.empty()) {
    out.doubly_commuting = true;
    out.note = "zero subspace";
    return out;
  }
  if (q.dim() == space.total_dim()) {
    // Compressions are the truncated shifts themselves: tensor slots, defect P_C.
    out.doubly_commuting = true;
    out.defect_rank = 1;
    out.note = "full box";
    std::vector<SubspaceFrame> frames;
    for (std::size_t i = 0; i < n; ++i) frames.emplace_back(ComplexMatrix::Identity(side, side), tol);
    out.factor_frames = std::move(frames);
    out.factorization_residual = 0.0;
    out.kron_relative_residual = 0.0;
    return out;
  }

  const OperatorTuple c = compress_to_quotient(q, space, tol);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      out.dc_residual = std::max(out.dc_residual, op_norm(c[i].adjoint() * c[j] - c[j] * c[i].adjoint()));
    }
  }
  out.doubly_commuting = out.dc_residual <= tol.residual;

  const ComplexMatrix d2 = hereditary_apply(bergman_inverse_poly(space.weights()), c, tol);
  const ComplexMatrix& f = q.basis();
  const ComplexMatrix pc = f.row(0).adjoint() * f.row(0);
  out.defect_identity_residual = op_norm(d2 - pc);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(d2), Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues().maxCoeff();
  if (top > 0.0) {
    for (Index i = 0; i < es.eigenvalues().size(); ++i) {
      if (es.eigenvalues()(i) >= tol.rank * top) ++out.defect_rank;
    }
  }
  out.eq_c_consistent = !(out.doubly_commuting && out.defect_rank > 1);
  if (!out.eq_c_consistent) out.note = "doubly commuting but defect rank exceeds 1";
  if (!out.doubly_commuting) return out;

  const ComplexMatrix pq = q.projection();
  const std::vector<std::size_t> dims(n, static_cast<std::size_t>(side));
  const KronFactorization kf = nearest_kron_factorization(pq, dims);
  out.kron_relative_residual = kf.relative_residual;
  std::vector<SubspaceFrame> frames;
  std::vector<ComplexMatrix> rounded;
  for (const auto& a : kf.factors) {
    // A = s P_i for an exact product; ||A||_F^2 / conj(tr A) recovers s.
    const Complex tr = a.trace();
    if (std::abs(tr) < 1e-12) {
      out.note = "Kronecker factor with vanishing trace";
      return out;
    }
    const Complex alpha = a.squaredNorm() / std::conj(tr);
    frames.push_back(SubspaceFrame::eigenspace_above(hermitian_part(a / alpha), 0.5));
    rounded.push_back(frames.back().projection());
  }
  out.factorization_residual = op_norm(pq - kron(rounded));
  out.factor_frames = std::move(frames);
  return out;
}

ShiftDefectReport shift_defect_check(const TruncatedSpace& space, const Tolerances& tol) {
  const std::size_t n = space.n();
  std::vector<ComplexMatrix> shifts;
  for (std::size_t i = 0; i < n; ++i) shifts.push_back(shift_matrix(space, i));
  const ComplexMatrix h = hereditary_apply(bergman_inverse_poly(space.weights()), OperatorTuple(shifts), tol);
  const Index total = space.total_dim();
  const Index r = space.coeff_dim();
  ComplexMatrix pc = ComplexMatrix::Zero(total, total);
  pc.topLeftCorner(r, r).setIdentity();

  ShiftDefectReport rep;
  rep.interior_degree = space.degree() - space.weights().max();
  const ComplexMatrix diff = h - pc;
  rep.boundary_norm = op_norm(diff);
  if (rep.interior_degree < 0) return rep;
  std::vector<Index> rows;
  for (Index mi = 0; mi < space.monomial_count(); ++mi) {
    const MultiIndex k = space.multi_index(mi);
    if (*std::max_element(k.begin(), k.end()) > rep.interior_degree) continue;
    for (Index e = 0; e < r; ++e) rows.push_back(mi * r + e);
  }
  ComplexMatrix block(rows.size(), rows.size());
  for (std::size_t a = 0; a < rows.size(); ++a) {
    for (std::size_t b = 0; b < rows.size(); ++b) block(a, b) = diff(rows[a], rows[b]);
  }
  rep.interior_residual = op_norm(block);
  return rep;
}

}  // namespace dilab
