#include "dilab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>

namespace dilab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonHermitian: return "NonHermitian";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::NonCommutingTuple: return "NonCommutingTuple";
    case ErrorCode::NotBmContraction: return "NotBmContraction";
    case ErrorCode::NotDoublyCommuting: return "NotDoublyCommuting";
    case ErrorCode::TailBoundTooLarge: return "TailBoundTooLarge";
    case ErrorCode::AxisOutOfRange: return "AxisOutOfRange";
    case ErrorCode::PointOutsideDisc: return "PointOutsideDisc";
    case ErrorCode::NotInvariant: return "NotInvariant";
    case ErrorCode::NotCoinvariant: return "NotCoinvariant";
    case ErrorCode::NotC0: return "NotC0";
    case ErrorCode::NotCommuting: return "NotCommuting";
    case ErrorCode::NotProjection: return "NotProjection";
    case ErrorCode::SpectralRadiusTooLarge: return "SpectralRadiusTooLarge";
    case ErrorCode::NotKContractive: return "NotKContractive";
    case ErrorCode::Schema: return "Schema";
  }
  return "Unknown";
}

void Tolerances::validate() const {
  for (double v : {psd, residual, ortho, rank}) {
    if (!(v > 0.0 && v < 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "tolerances must lie strictly between 0 and 1");
    }
  }
}

void require_finite(const ComplexMatrix& a, const char* what) {
  if (a.rows() < 1 || a.cols() < 1) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be non-empty");
  }
  if (!a.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " has non-finite entries");
  }
}

namespace {

constexpr Index kDenseLimit = 256;
// Large dense norms are residual checks; a few digits are enough and noise
// matrices would otherwise run the iteration to its cap.
constexpr double kLargeNormTol = 1e-4;
constexpr std::uint64_t kPowerSeed = 0x5eed5eedULL;
// Residual operators are often pure roundoff, where the iteration converges
// slowly; below this level the estimate is settled two orders under any
// threshold in use.
constexpr double kNoiseFloor = 1e-13;

ComplexMatrix random_block(Index rows, Index cols) {
  std::mt19937_64 rng(kPowerSeed);
  std::normal_distribution<double> g;
  ComplexMatrix q(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) q(i, j) = Complex(g(rng), g(rng));
  }
  return q;
}

ComplexMatrix thin_q(const ComplexMatrix& a) {
  Eigen::HouseholderQR<ComplexMatrix> qr(a);
  return qr.householderQ() * ComplexMatrix::Identity(a.rows(), a.cols());
}

// Subspace iteration on A*A. Returns the Ritz estimate of the top singular
// value together with the converged orthonormal block.
double block_power(const LinearOperator& op, ComplexMatrix* block_out, double rel_tol = 1e-10) {
  const Index b = std::min<Index>(4, op.cols);
  ComplexMatrix q = thin_q(random_block(op.cols, b));
  double sigma = 0.0;
  for (int it = 0; it < 400; ++it) {
    ComplexMatrix y = op.apply(q);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(y.adjoint() * y, Eigen::EigenvaluesOnly);
    const double next = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
    ComplexMatrix z = op.apply_adjoint(y);
    if (z.norm() == 0.0) {
      sigma = next;
      break;
    }
    q = thin_q(z);
    const bool converged = it >= 4 && (std::abs(next - sigma) <= rel_tol * std::max(next, 1e-300) ||
                                       std::max(next, sigma) <= kNoiseFloor);
    sigma = next;
    if (converged) break;
  }
  if (block_out) *block_out = q;
  return sigma;
}

}  // namespace

ComplexMatrix LinearOperator::to_dense() const {
  return apply(ComplexMatrix::Identity(cols, cols));
}

LinearOperator as_operator(const ComplexMatrix& a) {
  auto shared = std::make_shared<ComplexMatrix>(a);
  return {a.rows(), a.cols(),
          [shared](const ComplexMatrix& x) -> ComplexMatrix { return *shared * x; },
          [shared](const ComplexMatrix& x) -> ComplexMatrix { return shared->adjoint() * x; }};
}

LinearOperator operator_difference(LinearOperator a, LinearOperator b) {
  if (a.rows != b.rows || a.cols != b.cols) {
    throw Error(ErrorCode::ShapeMismatch, "operator difference of unequal shapes");
  }
  return {a.rows, a.cols,
          [a, b](const ComplexMatrix& x) -> ComplexMatrix { return a.apply(x) - b.apply(x); },
          [a, b](const ComplexMatrix& x) -> ComplexMatrix {
            return a.apply_adjoint(x) - b.apply_adjoint(x);
          }};
}

LinearOperator operator_product(LinearOperator a, LinearOperator b) {
  if (a.cols != b.rows) throw Error(ErrorCode::ShapeMismatch, "operator product shapes");
  return {a.rows, b.cols,
          [a, b](const ComplexMatrix& x) -> ComplexMatrix { return a.apply(b.apply(x)); },
          [a, b](const ComplexMatrix& x) -> ComplexMatrix {
            return b.apply_adjoint(a.apply_adjoint(x));
          }};
}

double estimate_norm(const LinearOperator& op, double rel_tol) {
  if (op.rows == 0 || op.cols == 0) return 0.0;
  if (std::min(op.rows, op.cols) <= kDenseLimit) return op_norm(op.to_dense());
  return block_power(op, nullptr, rel_tol);
}

double op_norm(const ComplexMatrix& a) {
  if (a.size() == 0) return 0.0;
  if (std::min(a.rows(), a.cols()) <= kDenseLimit) {
    Eigen::BDCSVD<ComplexMatrix> svd(a);
    return svd.singularValues()(0);
  }
  return block_power(as_operator(a), nullptr, kLargeNormTol);
}

ComplexMatrix hermitian_part(const ComplexMatrix& a) {
  return (a + a.adjoint()) * 0.5;
}

double hermitian_defect(const ComplexMatrix& h) {
  return op_norm(h - h.adjoint());
}

PsdCheck psd_check(const ComplexMatrix& h, const Tolerances& tol) {
  if (h.rows() != h.cols()) throw Error(ErrorCode::ShapeMismatch, "psd_check needs a square matrix");
  require_finite(h, "psd_check input");
  const double scale = 1.0 + op_norm(h);
  const double defect = hermitian_defect(h);
  if (defect > tol.residual * scale) {
    std::ostringstream os;
    os << "||H - H*|| = " << defect << " exceeds " << tol.residual * scale;
    throw Error(ErrorCode::NonHermitian, os.str());
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(h), Eigen::EigenvaluesOnly);
  PsdCheck out;
  out.min_eig = es.eigenvalues()(0);
  out.is_psd = out.min_eig >= -tol.psd;
  return out;
}

ComplexMatrix psd_sqrt(const ComplexMatrix& h, const Tolerances& tol) {
  const PsdCheck check = psd_check(h, tol);
  if (!check.is_psd) {
    std::ostringstream os;
    os << "smallest eigenvalue " << check.min_eig << " below -" << tol.psd;
    throw Error(ErrorCode::NotPSD, os.str());
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(h));
  RealVector roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  ComplexMatrix r = es.eigenvectors() * roots.cast<Complex>().asDiagonal() *
                    es.eigenvectors().adjoint();
  return hermitian_part(r);
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

ComplexMatrix kron(std::span<const ComplexMatrix> factors) {
  if (factors.empty()) return ComplexMatrix::Identity(1, 1);
  ComplexMatrix out = factors.front();
  for (std::size_t i = 1; i < factors.size(); ++i) out = kron(out, factors[i]);
  return out;
}

SingularTriplet dominant_singular_triplet(const ComplexMatrix& a) {
  SingularTriplet t;
  if (a.size() == 0) return t;
  if (std::min(a.rows(), a.cols()) <= 96) {
    Eigen::BDCSVD<ComplexMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    t.sigma = svd.singularValues()(0);
    t.left = svd.matrixU().col(0);
    t.right = svd.matrixV().col(0);
    return t;
  }
  // Power iteration on a block, finished with a small SVD of A Q.
  const Index b = std::min<Index>(4, a.cols());
  ComplexMatrix q = thin_q(random_block(a.cols(), b));
  for (int it = 0; it < 2000; ++it) {
    ComplexMatrix y = a * q;
    Eigen::BDCSVD<ComplexMatrix> small(y, Eigen::ComputeThinU | Eigen::ComputeThinV);
    t.sigma = small.singularValues()(0);
    t.left = small.matrixU().col(0);
    t.right = q * small.matrixV().col(0);
    if (t.sigma == 0.0) return t;
    const double res = (a.adjoint() * t.left - t.sigma * t.right).norm();
    if (res <= 1e-14 * t.sigma) break;
    q = thin_q(a.adjoint() * y);
  }
  return t;
}

KronFactorization nearest_kron_factorization(const ComplexMatrix& p,
                                             std::span<const std::size_t> dims) {
  if (dims.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "nearest_kron_factorization needs at least two factors");
  }
  const std::size_t total = std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                                            std::multiplies<>());
  if (p.rows() != p.cols() || static_cast<std::size_t>(p.rows()) != total) {
    std::ostringstream os;
    os << "matrix of size " << p.rows() << "x" << p.cols() << " does not match product " << total;
    throw Error(ErrorCode::ShapeMismatch, os.str());
  }
  KronFactorization out;
  ComplexMatrix rest = p;
  for (std::size_t f = 0; f + 1 < dims.size(); ++f) {
    const Index d1 = static_cast<Index>(dims[f]);
    const Index dr = rest.rows() / d1;
    ComplexMatrix r(d1 * d1, dr * dr);
    for (Index i1 = 0; i1 < d1; ++i1)
      for (Index j1 = 0; j1 < d1; ++j1)
        for (Index i2 = 0; i2 < dr; ++i2)
          for (Index j2 = 0; j2 < dr; ++j2)
            r(i1 * d1 + j1, i2 * dr + j2) = rest(i1 * dr + i2, j1 * dr + j2);
    const SingularTriplet t = dominant_singular_triplet(r);
    const double s = std::sqrt(t.sigma);
    ComplexMatrix a(d1, d1), b(dr, dr);
    for (Index i = 0; i < d1; ++i)
      for (Index j = 0; j < d1; ++j) a(i, j) = s * t.left(i * d1 + j);
    for (Index i = 0; i < dr; ++i)
      for (Index j = 0; j < dr; ++j) b(i, j) = s * std::conj(t.right(i * dr + j));
    out.factors.push_back(std::move(a));
    rest = std::move(b);
  }
  out.factors.push_back(std::move(rest));
  const double pn = p.norm();
  out.relative_residual = pn == 0.0 ? 0.0 : (p - kron(out.factors)).norm() / pn;
  return out;
}

double spectral_radius(const ComplexMatrix& t) {
  if (t.rows() != t.cols()) throw Error(ErrorCode::ShapeMismatch, "spectral_radius needs a square matrix");
  Eigen::ComplexEigenSolver<ComplexMatrix> es(t, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

void normalize_column_phases(ComplexMatrix& columns) {
  for (Index j = 0; j < columns.cols(); ++j) {
    const double peak = columns.col(j).cwiseAbs().maxCoeff();
    if (peak == 0.0) continue;
    for (Index i = 0; i < columns.rows(); ++i) {
      const double mag = std::abs(columns(i, j));
      if (mag > 1e-6 * peak) {
        columns.col(j) *= std::conj(columns(i, j)) / mag;
        columns(i, j) = Complex(mag, 0.0);
        break;
      }
    }
  }
}

double low_rank_product_norm(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows()) throw Error(ErrorCode::ShapeMismatch, "low_rank_product_norm rows");
  if (a.cols() == 0 || b.cols() == 0) return 0.0;
  if (a.rows() <= a.cols() || a.rows() <= b.cols()) return op_norm(a * b.adjoint());
  auto r_factor = [](const ComplexMatrix& m) -> ComplexMatrix {
    Eigen::HouseholderQR<ComplexMatrix> qr(m);
    return qr.matrixQR().topRows(m.cols()).triangularView<Eigen::Upper>();
  };
  return op_norm(r_factor(a) * r_factor(b).adjoint());
}

SubspaceFrame::SubspaceFrame(Index ambient_dim) : ambient_(ambient_dim), basis_(ambient_dim, 0) {}

SubspaceFrame::SubspaceFrame(ComplexMatrix orthonormal_columns, const Tolerances& tol)
    : ambient_(orthonormal_columns.rows()), basis_(std::move(orthonormal_columns)) {
  if (basis_.cols() > ambient_) {
    throw Error(ErrorCode::InvalidArgument, "frame has more columns than its ambient dimension");
  }
  if (basis_.cols() > 0) {
    const Index k = basis_.cols();
    const double err =
        op_norm(basis_.adjoint() * basis_ - ComplexMatrix::Identity(k, k));
    if (err > tol.ortho * static_cast<double>(std::max<Index>(k, 1)) * 10.0) {
      std::ostringstream os;
      os << "frame columns are not orthonormal (||F*F - I|| = " << err << ")";
      throw Error(ErrorCode::InvalidArgument, os.str());
    }
  }
}

SubspaceFrame SubspaceFrame::span_of(const ComplexMatrix& columns, const Tolerances& tol) {
  SubspaceFrame out(columns.rows());
  if (columns.cols() == 0 || columns.rows() == 0) return out;
  Eigen::BDCSVD<ComplexMatrix> svd(columns, Eigen::ComputeThinU);
  const RealVector& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return out;
  Index r = 0;
  while (r < s.size() && s(r) >= tol.rank * s(0)) ++r;
  out.basis_ = svd.matrixU().leftCols(r);
  normalize_column_phases(out.basis_);
  return out;
}

SubspaceFrame SubspaceFrame::eigenspace_above(const ComplexMatrix& hermitian, double threshold) {
  SubspaceFrame out(hermitian.rows());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(hermitian));
  const Index n = hermitian.rows();
  Index keep = 0;
  for (Index i = n - 1; i >= 0 && es.eigenvalues()(i) >= threshold; --i) ++keep;
  out.basis_.resize(n, keep);
  for (Index c = 0; c < keep; ++c) out.basis_.col(c) = es.eigenvectors().col(n - 1 - c);
  normalize_column_phases(out.basis_);
  return out;
}

ComplexMatrix SubspaceFrame::projection() const {
  return basis_ * basis_.adjoint();
}

SubspaceFrame SubspaceFrame::complement() const {
  SubspaceFrame out(ambient_);
  if (basis_.cols() == 0) {
    out.basis_ = ComplexMatrix::Identity(ambient_, ambient_);
    return out;
  }
  Eigen::HouseholderQR<ComplexMatrix> qr(basis_);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(ambient_, ambient_);
  out.basis_ = q.rightCols(ambient_ - basis_.cols());
  return out;
}

}  // namespace dilab
