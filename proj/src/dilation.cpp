#include "dilab/dilation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>

namespace dilab {

namespace {

// Residual norms only need a couple of digits; a looser stopping rule keeps
// the power iteration short when the residual is roundoff noise.
constexpr double kResidualNormTol = 1e-3;

double coeff(int m, int k) { return binomial(m + k - 1, m - 1); }

[[noreturn]] void throw_certificate_failure(const Certificate& c, ErrorCode fallback) {
  std::ostringstream os;
  ErrorCode code = fallback;
  for (const auto& w : c.witnesses) {
    if (w.pass) continue;
    if (w.label == "commutation" || w.label == "double-commutation") code = ErrorCode::NotDoublyCommuting;
    os << w.label << " = " << w.value << (w.lower_bound ? " < " : " > ") << w.threshold << "; ";
  }
  throw Error(code, os.str());
}

void require_joint_certificate(const OperatorTuple& t, const Weights& m, const Tolerances& tol) {
  if (m.n() != t.n()) throw Error(ErrorCode::ArityMismatch, "weights and tuple lengths differ");
  const Certificate c = certify(t, m, CertificateKind::DoublyCommutingJoint, tol);
  if (!c.verdict) throw_certificate_failure(c, ErrorCode::NotBmContraction);
}

// Rows sqrt(C(m+k-1,k)) * left * T*^k for k = 0..N, stacked.
ComplexMatrix stacked_powers(const ComplexMatrix& left, const ComplexMatrix& t, int m, int degree) {
  const Index r = left.rows();
  ComplexMatrix out(r * (degree + 1), t.cols());
  ComplexMatrix block = left;
  const ComplexMatrix ta = t.adjoint();
  for (int k = 0; k <= degree; ++k) {
    out.middleRows(k * r, r) = std::sqrt(coeff(m, k)) * block;
    if (k < degree) block = block * ta;
  }
  return out;
}

// Coefficient rows (k, e) mapped to ambient rows (k, h) through `frame`.
ComplexMatrix to_ambient(const ComplexMatrix& coeffs, const ComplexMatrix& frame, Index monomials) {
  const Index r = frame.cols();
  const Index d = frame.rows();
  ComplexMatrix out(monomials * d, coeffs.cols());
  for (Index mi = 0; mi < monomials; ++mi) {
    out.middleRows(mi * d, d) = frame * coeffs.middleRows(mi * r, r);
  }
  return out;
}

ComplexMatrix to_frame(const ComplexMatrix& ambient, const ComplexMatrix& frame, Index monomials) {
  const Index r = frame.cols();
  const Index d = frame.rows();
  ComplexMatrix out(monomials * r, ambient.cols());
  for (Index mi = 0; mi < monomials; ++mi) {
    out.middleRows(mi * r, r) = frame.adjoint() * ambient.middleRows(mi * d, d);
  }
  return out;
}

struct StageResult {
  ComplexMatrix coeffs;  // canonical rows (k, e) in the final frame
  ComplexMatrix frame;   // d x r_final
};

StageResult compose_stages(const OperatorTuple& t, const Weights& m, int degree,
                           const std::vector<std::size_t>& order, const Tolerances& tol) {
  const std::size_t n = t.n();
  const Index d = t.dim();
  const Index side = degree + 1;
  ComplexMatrix frame = ComplexMatrix::Identity(d, d);
  std::vector<ComplexMatrix> phi{ComplexMatrix::Identity(d, d)};
  for (std::size_t axis : order) {
    const Index r = frame.cols();
    std::vector<ComplexMatrix> next;
    next.reserve(phi.size() * side);
    if (r == 0) {
      for (const auto& p : phi) next.insert(next.end(), side, ComplexMatrix(0, p.cols()));
      phi = std::move(next);
      continue;
    }
    // T_j restricted to the current (reducing) coefficient space.
    const ComplexMatrix tr = frame.adjoint() * t[axis] * frame;
    const ComplexMatrix dr = defect(tr, m[axis], tol).defect_op;
    const ComplexMatrix g = defect_frame_of(dr, tol).basis();
    const ComplexMatrix blocks = stacked_powers(g.adjoint() * dr, tr, m[axis], degree);
    const Index rn = g.cols();
    for (const auto& p : phi) {
      for (Index k = 0; k < side; ++k) next.push_back(blocks.middleRows(k * rn, rn) * p);
    }
    phi = std::move(next);
    frame = frame * g;
  }

  const Index r = frame.cols();
  StageResult out;
  out.frame = frame;
  out.coeffs = ComplexMatrix::Zero(static_cast<Index>(phi.size()) * r, d);
  std::vector<Index> stride(n, 1);
  for (std::size_t i = n; i-- > 1;) stride[i - 1] = stride[i] * side;
  for (std::size_t p = 0; p < phi.size(); ++p) {
    // p enumerates digits k_{order[0]}, ..., k_{order[n-1]}, first slowest.
    Index rem = static_cast<Index>(p);
    Index canonical = 0;
    for (std::size_t s = n; s-- > 0;) {
      canonical += (rem % side) * stride[order[s]];
      rem /= side;
    }
    if (r > 0) out.coeffs.middleRows(canonical * r, r) = phi[p];
  }
  return out;
}

}  // namespace

ComplexMatrix DilationMap::ambient_matrix() const {
  return to_ambient(matrix, coeff_frame.basis(), target.monomial_count());
}

double DilationReport::max_intertwining() const {
  double out = 0.0;
  for (double r : intertwining_residuals) out = std::max(out, r);
  return out;
}

TailEstimator::TailEstimator(const ComplexMatrix& t, int m) : m_(m), norms_(65, 0.0) {
  if (t.rows() != t.cols()) throw Error(ErrorCode::ShapeMismatch, "tail bound needs a square matrix");
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "weight must be >= 1");
  norms_[0] = 1.0;
  ComplexMatrix p = ComplexMatrix::Identity(t.rows(), t.cols());
  for (std::size_t k = 1; k < norms_.size(); ++k) {
    p = p * t;
    norms_[k] = op_norm(p);
    if (norms_[k] == 0.0) break;  // exact nilpotency: all later powers vanish
  }
}

double TailEstimator::tail_bound(int degree) const {
  if (degree < 0) throw Error(ErrorCode::InvalidArgument, "truncation degree must be >= 0");
  for (int j = 1; j <= std::min(degree + 1, 64); ++j) {
    if (norms_[j] == 0.0) return 0.0;
  }
  const int k0 = std::max(1, std::min(2 * degree, 64));
  double sum = 0.0;
  for (int k = degree + 1; k <= k0; ++k) sum += coeff(m_, k) * norms_[k] * norms_[k];
  const double q = norms_[k0];
  if (q == 0.0) return std::sqrt(sum);
  if (q >= 1.0) return std::numeric_limits<double>::infinity();

  // ||T^{a K0 + b}|| <= q^a ||T^b||; once a whole block is summed, later blocks
  // shrink at least geometrically with the block-to-block ratio bound.
  const int start = std::max(degree + 1, k0 + 1);
  double block = 0.0;
  for (int k = start;; ++k) {
    if (k > 1000000) return std::numeric_limits<double>::infinity();
    const int a = k / k0;
    const int b = k % k0;
    if (b == 0) block = 0.0;
    const double bound = std::pow(q, a) * norms_[b];
    const double term = coeff(m_, k) * bound * bound;
    sum += term;
    block += term;
    if (b == k0 - 1 && a * k0 >= start) {
      const double rho = q * q * std::pow((a * k0 + k0 + 1.0) / (a * k0 + 1.0), m_ - 1);
      if (rho < 0.9) {
        sum += block * rho / (1.0 - rho);
        break;
      }
    }
  }
  return std::sqrt(sum);
}

double tail_bound(const ComplexMatrix& t, int m, int degree) {
  return TailEstimator(t, m).tail_bound(degree);
}

double joint_tail_bound(const OperatorTuple& t, const Weights& m, int degree) {
  if (m.n() != t.n()) throw Error(ErrorCode::ArityMismatch, "weights and tuple lengths differ");
  double sq = 0.0;
  for (std::size_t i = 0; i < t.n(); ++i) {
    const double b = tail_bound(t[i], m[i], degree);
    sq += b * b;
  }
  return std::sqrt(sq);
}

int select_degree(const OperatorTuple& t, const Weights& m, double epsilon, int cap) {
  if (m.n() != t.n()) throw Error(ErrorCode::ArityMismatch, "weights and tuple lengths differ");
  if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
  std::vector<TailEstimator> est;
  for (std::size_t i = 0; i < t.n(); ++i) est.emplace_back(t[i], m[i]);
  double last = 0.0;
  for (int n = 0; n <= cap; ++n) {
    double sq = 0.0;
    for (const auto& e : est) {
      const double b = e.tail_bound(n);
      sq += b * b;
    }
    last = std::sqrt(sq);
    if (last <= epsilon) return n;
  }
  std::ostringstream os;
  os << "tail bound " << last << " at the degree cap " << cap << " exceeds epsilon " << epsilon;
  throw Error(ErrorCode::TailBoundTooLarge, os.str());
}

DilationMap agler_dilation(const ComplexMatrix& t, int m, int degree, const Tolerances& tol) {
  return agler_dilation(OperatorTuple({t}), Weights({m}), degree, tol);
}

DilationMap agler_dilation(const OperatorTuple& t, const Weights& m, int degree,
                           const Tolerances& tol) {
  if (t.n() != 1 || m.n() != 1) {
    throw Error(ErrorCode::ArityMismatch, "agler_dilation takes a single operator and weight");
  }
  const Certificate c = certify(t, m, CertificateKind::Bm, tol);
  if (!c.verdict) throw_certificate_failure(c, ErrorCode::NotBmContraction);
  const double tail = tail_bound(t[0], m[0], degree);
  if (tail > kMaxTailBound) {
    std::ostringstream os;
    os << "tail bound " << tail << " at degree " << degree;
    throw Error(ErrorCode::TailBoundTooLarge, os.str());
  }
  const DefectData dd = defect(t[0], m[0], tol);
  const ComplexMatrix& f = dd.defect_frame.basis();

  DilationMap v;
  v.source_dim = t.dim();
  v.weights = m;
  v.target = TruncatedSpace(m, degree, f.cols());
  v.matrix = stacked_powers(f.adjoint() * dd.defect_op, t[0], m[0], degree);
  v.tail_bound = tail;
  v.coeff_frame = dd.defect_frame;
  return v;
}

ComplexMatrix joint_dilation_closed_form(const OperatorTuple& t, const Weights& m, int degree,
                                         const Tolerances& tol) {
  require_joint_certificate(t, m, tol);
  const Index d = t.dim();
  std::vector<ComplexMatrix> cur{ComplexMatrix::Identity(d, d)};
  for (std::size_t i = 0; i < t.n(); ++i) {
    const ComplexMatrix a = stacked_powers(defect(t[i], m[i], tol).defect_op, t[i], m[i], degree);
    std::vector<ComplexMatrix> next;
    next.reserve(cur.size() * (degree + 1));
    for (const auto& c : cur) {
      for (int k = 0; k <= degree; ++k) next.push_back(c * a.middleRows(k * d, d));
    }
    cur = std::move(next);
  }
  ComplexMatrix out(static_cast<Index>(cur.size()) * d, d);
  for (std::size_t mi = 0; mi < cur.size(); ++mi) out.middleRows(static_cast<Index>(mi) * d, d) = cur[mi];
  return out;
}

ComplexMatrix joint_dilation_by_stages(const OperatorTuple& t, const Weights& m, int degree,
                                       const std::vector<std::size_t>& order,
                                       const Tolerances& tol) {
  require_joint_certificate(t, m, tol);
  std::vector<std::size_t> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted.size() != t.n() || sorted[i] != i) {
      throw Error(ErrorCode::InvalidArgument, "stage order must be a permutation of the axes");
    }
  }
  const StageResult s = compose_stages(t, m, degree, order, tol);
  Index monomials = 1;
  for (std::size_t i = 0; i < t.n(); ++i) monomials *= degree + 1;
  return to_ambient(s.coeffs, s.frame, monomials);
}

DilationMap joint_dilation(const OperatorTuple& t, const Weights& m, int degree,
                           const Tolerances& tol) {
  require_joint_certificate(t, m, tol);
  const double tail = joint_tail_bound(t, m, degree);
  if (tail > kMaxTailBound) {
    std::ostringstream os;
    os << "tail bound " << tail << " at degree " << degree;
    throw Error(ErrorCode::TailBoundTooLarge, os.str());
  }
  const DefectData dd = defect(t, m, tol);
  const ComplexMatrix& f = dd.defect_frame.basis();

  std::vector<std::size_t> order(t.n());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const StageResult s = compose_stages(t, m, degree, order, tol);

  DilationMap v;
  v.source_dim = t.dim();
  v.weights = m;
  v.target = TruncatedSpace(m, degree, f.cols());
  v.tail_bound = tail;
  v.coeff_frame = dd.defect_frame;
  // Stage output lives in its own frame; rewrite it in the joint defect frame.
  const ComplexMatrix change = f.adjoint() * s.frame;
  const Index monomials = v.target.monomial_count();
  v.matrix = ComplexMatrix(monomials * f.cols(), t.dim());
  const Index rs = s.frame.cols();
  for (Index mi = 0; mi < monomials; ++mi) {
    v.matrix.middleRows(mi * f.cols(), f.cols()) = change * s.coeffs.middleRows(mi * rs, rs);
  }
  const ComplexMatrix closed = joint_dilation_closed_form(t, m, degree, tol);
  v.construction_discrepancy = op_norm(to_ambient(s.coeffs, s.frame, monomials) - closed);
  return v;
}

namespace {

// Per-axis table sqrt(C(m+k-1,k)) x^k.
std::vector<Complex> axis_table(int m, int degree, Complex x) {
  std::vector<Complex> out(degree + 1);
  Complex p = 1.0;
  for (int k = 0; k <= degree; ++k) {
    out[k] = std::sqrt(coeff(m, k)) * p;
    p *= x;
  }
  return out;
}

// Coordinates of the scalar kernel section at w (conj(w)) or evaluation
// functional at z (z), one entry per monomial.
ComplexVector monomial_values(const TruncatedSpace& space, const std::vector<Complex>& x) {
  std::vector<std::vector<Complex>> tables;
  for (std::size_t i = 0; i < space.n(); ++i) {
    tables.push_back(axis_table(space.weights()[i], space.degree(), x[i]));
  }
  ComplexVector out(space.monomial_count());
  const Index side = space.degree() + 1;
  for (Index mi = 0; mi < space.monomial_count(); ++mi) {
    Complex v = 1.0;
    Index rem = mi;
    for (std::size_t i = space.n(); i-- > 0;) {
      v *= tables[i][rem % side];
      rem /= side;
    }
    out(mi) = v;
  }
  return out;
}

// (I - x T*)^{-m} or, with adjoint, ((I - x T*)^{-m})*.
ComplexMatrix resolvent_power(const ComplexMatrix& t, Complex x, int m) {
  const Index d = t.rows();
  const ComplexMatrix inv =
      (ComplexMatrix::Identity(d, d) - x * t.adjoint()).partialPivLu().inverse();
  ComplexMatrix out = ComplexMatrix::Identity(d, d);
  for (int i = 0; i < m; ++i) out = out * inv;
  return out;
}

}  // namespace

DilationReport verify_dilation_identities(const DilationMap& v, const OperatorTuple& t,
                                          const Tolerances& tol, std::uint64_t seed) {
  const std::size_t n = v.target.n();
  if (t.n() != n) throw Error(ErrorCode::ArityMismatch, "tuple and dilation arity differ");
  if (t.dim() != v.source_dim) throw Error(ErrorCode::ShapeMismatch, "tuple and dilation dimensions differ");
  const Index d = v.source_dim;
  const Index r = v.target.coeff_dim();
  const ComplexMatrix& f = v.coeff_frame.basis();

  DilationReport rep;
  rep.tail_bound = v.tail_bound;
  rep.isometry_residual = op_norm(v.matrix.adjoint() * v.matrix - ComplexMatrix::Identity(d, d));
  rep.isometry_threshold = 2.0 * v.tail_bound + tol.residual;
  rep.isometry_pass = rep.isometry_residual <= rep.isometry_threshold;

  rep.intertwining_threshold = 2.0 * v.tail_bound + tol.residual;
  rep.intertwining_pass = true;
  for (std::size_t i = 0; i < n; ++i) {
    const ComplexMatrix diff = v.matrix * t[i].adjoint() - apply_shift(v.target, i, v.matrix, true);
    rep.intertwining_residuals.push_back(op_norm(diff));
    rep.intertwining_pass = rep.intertwining_pass && rep.intertwining_residuals.back() <= rep.intertwining_threshold;
  }

  rep.kernel_threshold = tol.residual + 4.0 * v.tail_bound;
  if (r == 0) {
    rep.kernel_pass = true;
    return rep;
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss;
  constexpr int kPointsPerAxis = 5;
  constexpr int kVectorsPerPoint = 2;
  auto sample_axis_points = [&]() {
    std::vector<std::vector<Complex>> pts(n);
    for (auto& axis : pts) {
      for (int p = 0; p < kPointsPerAxis; ++p) {
        axis.push_back(std::polar(0.9 * std::sqrt(unif(rng)), 2.0 * std::numbers::pi * unif(rng)));
      }
    }
    return pts;
  };
  const auto wpts = sample_axis_points();
  const auto zpts = sample_axis_points();

  std::vector<ComplexMatrix> axis_defect;
  for (std::size_t i = 0; i < n; ++i) axis_defect.push_back(defect(t[i], v.weights[i], tol).defect_op);
  // factor[i][zp][wp] = D_i B(z, T_i) B(w, T_i)* D_i
  std::vector<std::vector<std::vector<ComplexMatrix>>> factor(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<ComplexMatrix> bz, bw;
    for (int p = 0; p < kPointsPerAxis; ++p) {
      bz.push_back(resolvent_power(t[i], zpts[i][p], v.weights[i]));
      bw.push_back(resolvent_power(t[i], wpts[i][p], v.weights[i]).adjoint());
    }
    factor[i].assign(kPointsPerAxis, std::vector<ComplexMatrix>(kPointsPerAxis));
    for (int zp = 0; zp < kPointsPerAxis; ++zp) {
      for (int wp = 0; wp < kPointsPerAxis; ++wp) {
        factor[i][zp][wp] = axis_defect[i] * bz[zp] * bw[wp] * axis_defect[i];
      }
    }
  }

  Index grid = 1;
  for (std::size_t i = 0; i < n; ++i) grid *= kPointsPerAxis;
  auto grid_digits = [&](Index g) {
    std::vector<int> idx(n);
    for (std::size_t i = n; i-- > 0;) {
      idx[i] = static_cast<int>(g % kPointsPerAxis);
      g /= kPointsPerAxis;
    }
    return idx;
  };
  auto kernel_norm = [&](const std::vector<Complex>& x) {
    double s = 1.0;
    for (std::size_t i = 0; i < n; ++i) s *= std::pow(1.0 - std::norm(x[i]), -0.5 * v.weights[i]);
    return s;
  };

  // Evaluation functionals at every z, as rows.
  const Index monomials = v.target.monomial_count();
  ComplexMatrix eval(grid, monomials);
  std::vector<double> znorm(grid);
  for (Index g = 0; g < grid; ++g) {
    const auto idx = grid_digits(g);
    std::vector<Complex> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = zpts[i][idx[i]];
    eval.row(g) = monomial_values(v.target, z).transpose();
    znorm[g] = kernel_norm(z);
  }

  // Kernel sections B_m(., w) eta, eta random unit vectors in the defect space.
  const Index cols = grid * kVectorsPerPoint;
  ComplexMatrix sections(v.target.total_dim(), cols);
  ComplexMatrix etas(r, cols);
  std::vector<double> wnorm(cols);
  std::vector<std::vector<int>> widx(cols);
  for (Index g = 0; g < grid; ++g) {
    const auto idx = grid_digits(g);
    std::vector<Complex> wc(n);
    for (std::size_t i = 0; i < n; ++i) wc[i] = std::conj(wpts[i][idx[i]]);
    const ComplexVector vals = monomial_values(v.target, wc);
    std::vector<Complex> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = wpts[i][idx[i]];
    for (int s = 0; s < kVectorsPerPoint; ++s) {
      const Index c = g * kVectorsPerPoint + s;
      ComplexVector eta(r);
      for (Index e = 0; e < r; ++e) eta(e) = Complex(gauss(rng), gauss(rng));
      eta.normalize();
      etas.col(c) = eta;
      for (Index mi = 0; mi < monomials; ++mi) sections.col(c).segment(mi * r, r) = vals(mi) * eta;
      wnorm[c] = kernel_norm(w);
      widx[c] = idx;
    }
  }

  const ComplexMatrix image = v.matrix * (v.matrix.adjoint() * sections);
  double worst = 0.0;
  for (Index c = 0; c < cols; ++c) {
    Eigen::Map<const ComplexMatrix> coeffs(image.col(c).data(), r, monomials);
    const ComplexMatrix lhs = f * (coeffs * eval.transpose());  // d x grid
    const ComplexVector eta_amb = f * etas.col(c);
    for (Index g = 0; g < grid; ++g) {
      const auto zidx = grid_digits(g);
      ComplexVector rhs = eta_amb;
      for (std::size_t i = n; i-- > 0;) rhs = factor[i][zidx[i]][widx[c][i]] * rhs;
      const double err = (lhs.col(g) - rhs).norm() / (wnorm[c] * znorm[g]);
      worst = std::max(worst, err);
      ++rep.kernel_samples;
    }
  }
  rep.kernel_residual = worst;
  rep.kernel_pass = worst <= rep.kernel_threshold;
  return rep;
}

ComplexMatrix apply_axis_local(const TruncatedSpace& space, std::size_t axis,
                               const ComplexMatrix& local, const ComplexMatrix& x) {
  if (axis >= space.n()) throw Error(ErrorCode::AxisOutOfRange, "axis out of range");
  const Index side = space.degree() + 1;
  if (local.rows() % side != 0 || local.cols() % side != 0) {
    throw Error(ErrorCode::ShapeMismatch, "axis-local operator does not match the box");
  }
  const Index r_out = local.rows() / side;
  const Index r_in = local.cols() / side;
  const Index monomials = space.monomial_count();
  if (x.rows() != monomials * r_in) throw Error(ErrorCode::ShapeMismatch, "axis-local input rows");
  Index stride = 1;
  for (std::size_t i = axis + 1; i < space.n(); ++i) stride *= side;
  ComplexMatrix out(monomials * r_out, x.cols());
  ComplexMatrix block(side * r_in, x.cols());
  for (Index base = 0; base < monomials; ++base) {
    if ((base / stride) % side != 0) continue;
    for (Index k = 0; k < side; ++k) block.middleRows(k * r_in, r_in) = x.middleRows((base + k * stride) * r_in, r_in);
    const ComplexMatrix y = local * block;
    for (Index k = 0; k < side; ++k) out.middleRows((base + k * stride) * r_out, r_out) = y.middleRows(k * r_out, r_out);
  }
  return out;
}

ModelProjection::ModelProjection(TruncatedSpace target, std::size_t axis, ComplexMatrix local_factor,
                                 double invariance_residual)
    : target_(std::move(target)),
      axis_(axis),
      factor_(std::move(local_factor)),
      invariance_residual_(invariance_residual) {
  if (axis_ >= target_.n()) throw Error(ErrorCode::AxisOutOfRange, "projection axis out of range");
  if (factor_.rows() != (target_.degree() + 1) * target_.coeff_dim()) {
    throw Error(ErrorCode::ShapeMismatch, "local factor rows do not match the space");
  }
}

double ModelProjection::idempotency_residual() const {
  // W = u u*: W^2 - W = u (G - I) u* with G = u* u, whose norm is max |g^2 - g|.
  if (factor_.cols() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(factor_.adjoint() * factor_, Eigen::EigenvaluesOnly);
  double out = 0.0;
  for (Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double g = es.eigenvalues()(i);
    out = std::max(out, std::abs(g * g - g));
  }
  return out;
}

double ModelProjection::hermitian_residual() const {
  // Frobenius norm: an upper bound for the operator norm, cheap on large boxes.
  const ComplexMatrix w = local_block();
  return (w - w.adjoint()).norm();
}

ComplexMatrix ModelProjection::apply(const ComplexMatrix& x) const {
  const Index r = target_.coeff_dim();
  const Index side = target_.degree() + 1;
  if (x.rows() != target_.total_dim()) throw Error(ErrorCode::ShapeMismatch, "projection input rows");
  Index stride = 1;
  for (std::size_t i = axis_ + 1; i < target_.n(); ++i) stride *= side;
  ComplexMatrix out(x.rows(), x.cols());
  ComplexMatrix block(side * r, x.cols());
  for (Index base = 0; base < target_.monomial_count(); ++base) {
    if ((base / stride) % side != 0) continue;
    for (Index k = 0; k < side; ++k) block.middleRows(k * r, r) = x.middleRows((base + k * stride) * r, r);
    const ComplexMatrix y = factor_ * (factor_.adjoint() * block);
    for (Index k = 0; k < side; ++k) out.middleRows((base + k * stride) * r, r) = y.middleRows(k * r, r);
  }
  return out;
}

LinearOperator ModelProjection::as_operator() const {
  auto self = std::make_shared<ModelProjection>(*this);
  return {target_.total_dim(), target_.total_dim(),
          [self](const ComplexMatrix& x) -> ComplexMatrix { return self->apply(x); },
          [self](const ComplexMatrix& x) -> ComplexMatrix { return self->apply(x); }};
}

ComplexMatrix ModelProjection::to_dense() const {
  return apply(ComplexMatrix::Identity(target_.total_dim(), target_.total_dim()));
}

ModelProjection model_projection(const OperatorTuple& t, const Weights& m, std::size_t axis,
                                 int degree, const Tolerances& tol) {
  if (axis >= t.n()) {
    std::ostringstream os;
    os << "axis " << axis << " out of range for a " << t.n() << "-tuple";
    throw Error(ErrorCode::AxisOutOfRange, os.str());
  }
  require_joint_certificate(t, m, tol);
  const DefectData joint = defect(t, m, tol);
  const ComplexMatrix& f = joint.defect_frame.basis();
  const ComplexMatrix dj = defect(t[axis], m[axis], tol).defect_op;

  // v_j in ambient coefficients, then split along the joint defect space.
  const ComplexMatrix v_amb = stacked_powers(dj, t[axis], m[axis], degree);
  const Index side = degree + 1;
  const ComplexMatrix inside = to_ambient(to_frame(v_amb, f, side), f, side);
  const double invariance = low_rank_product_norm(v_amb - inside, inside);

  return ModelProjection(TruncatedSpace(m, degree, f.cols()), axis, to_frame(v_amb, f, side), invariance);
}

LinearOperator dilation_range_projection(const DilationMap& v) {
  auto mat = std::make_shared<ComplexMatrix>(v.matrix);
  auto f = [mat](const ComplexMatrix& x) -> ComplexMatrix { return *mat * (mat->adjoint() * x); };
  return {v.target.total_dim(), v.target.total_dim(), f, f};
}

ProductFormulaReport verify_product_formula(const DilationMap& v,
                                            const std::vector<ModelProjection>& r,
                                            const Tolerances& tol) {
  const std::size_t n = v.target.n();
  if (r.size() != n) throw Error(ErrorCode::ArityMismatch, "one model projection per axis expected");
  std::vector<const ModelProjection*> by_axis(n, nullptr);
  for (const auto& p : r) {
    if (!(p.target() == v.target)) throw Error(ErrorCode::ShapeMismatch, "projection built on another space");
    if (by_axis[p.axis()]) throw Error(ErrorCode::InvalidArgument, "duplicate projection axis");
    by_axis[p.axis()] = &p;
  }

  ProductFormulaReport rep;
  for (const auto* p : by_axis) {
    rep.idempotency = std::max(rep.idempotency, p->idempotency_residual());
    rep.hermitian = std::max(rep.hermitian, p->hermitian_residual());
  }
  std::vector<LinearOperator> ops;
  for (const auto* p : by_axis) ops.push_back(p->as_operator());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const LinearOperator c =
          operator_difference(operator_product(ops[i], ops[j]), operator_product(ops[j], ops[i]));
      rep.commutator = std::max(rep.commutator, estimate_norm(c, kResidualNormTol));
    }
  }
  LinearOperator prod = ops[0];
  for (std::size_t i = 1; i < n; ++i) prod = operator_product(prod, ops[i]);
  rep.product_residual =
      estimate_norm(operator_difference(dilation_range_projection(v), prod), kResidualNormTol);
  rep.threshold = tol.residual + 10.0 * v.tail_bound;
  rep.pass = rep.commutator <= rep.threshold && rep.idempotency <= rep.threshold &&
             rep.hermitian <= rep.threshold && rep.product_residual <= rep.threshold;
  return rep;
}

}  // namespace dilab
