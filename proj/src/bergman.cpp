#include "dilab/bergman.hpp"

#include <cmath>
#include <sstream>

namespace dilab {

TruncatedSpace::TruncatedSpace(Weights weights, int degree, Index coeff_dim)
    : weights_(std::move(weights)), degree_(degree), coeff_dim_(coeff_dim) {
  if (degree_ < 0) throw Error(ErrorCode::InvalidArgument, "truncation degree must be >= 0");
  if (coeff_dim_ < 0) throw Error(ErrorCode::InvalidArgument, "coefficient dimension must be >= 0");
  monomials_ = 1;
  for (std::size_t i = 0; i < weights_.n(); ++i) monomials_ *= degree_ + 1;
}

Index TruncatedSpace::monomial_index(const MultiIndex& k) const {
  if (k.size() != n()) throw Error(ErrorCode::ArityMismatch, "multi-index length");
  Index idx = 0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (k[i] < 0 || k[i] > degree_) throw Error(ErrorCode::InvalidArgument, "multi-index outside box");
    idx = idx * (degree_ + 1) + k[i];
  }
  return idx;
}

Index TruncatedSpace::index(const MultiIndex& k, Index e) const {
  return monomial_index(k) * coeff_dim_ + e;
}

MultiIndex TruncatedSpace::multi_index(Index monomial) const {
  MultiIndex k(n());
  for (std::size_t i = n(); i-- > 0;) {
    k[i] = static_cast<int>(monomial % (degree_ + 1));
    monomial /= degree_ + 1;
  }
  return k;
}

double TruncatedSpace::basis_scale(const MultiIndex& k) const {
  double s = 1.0;
  for (std::size_t i = 0; i < n(); ++i) s *= std::sqrt(binomial(weights_[i] + k[i] - 1, k[i]));
  return s;
}

double monomial_norm(int m, int k) {
  if (m < 1 || k < 0) throw Error(ErrorCode::InvalidArgument, "monomial_norm needs m >= 1, k >= 0");
  return 1.0 / std::sqrt(binomial(m + k - 1, k));
}

double shift_weight(int m, int k) {
  return std::sqrt(static_cast<double>(k + 1) / static_cast<double>(m + k));
}

namespace {

void require_in_disc(const std::vector<Complex>& w, std::size_t n) {
  if (w.size() != n) throw Error(ErrorCode::ArityMismatch, "point has the wrong number of coordinates");
  for (const auto& c : w) {
    if (!(std::abs(c) < 1.0)) {
      std::ostringstream os;
      os << "coordinate " << c << " is not in the open unit disc";
      throw Error(ErrorCode::PointOutsideDisc, os.str());
    }
  }
}

}  // namespace

ComplexVector SpaceVector::evaluate(const std::vector<Complex>& z) const {
  require_in_disc(z, space.n());
  const Index d = space.coeff_dim();
  ComplexVector out = ComplexVector::Zero(d);
  for (Index mi = 0; mi < space.monomial_count(); ++mi) {
    const MultiIndex k = space.multi_index(mi);
    Complex mono = space.basis_scale(k);
    for (std::size_t i = 0; i < k.size(); ++i) mono *= std::pow(z[i], k[i]);
    out += mono * coeffs.segment(mi * d, d);
  }
  return out;
}

SpaceVector kernel_vector(const TruncatedSpace& space, const std::vector<Complex>& w,
                          const ComplexVector& eta) {
  require_in_disc(w, space.n());
  if (eta.size() != space.coeff_dim()) {
    throw Error(ErrorCode::ShapeMismatch, "kernel coefficient vector has the wrong length");
  }
  const Index d = space.coeff_dim();
  SpaceVector v{space, ComplexVector::Zero(space.total_dim())};
  for (Index mi = 0; mi < space.monomial_count(); ++mi) {
    const MultiIndex k = space.multi_index(mi);
    Complex c = space.basis_scale(k);
    for (std::size_t i = 0; i < k.size(); ++i) c *= std::pow(std::conj(w[i]), k[i]);
    v.coeffs.segment(mi * d, d) = c * eta;
  }
  return v;
}

Complex bergman_kernel(const Weights& m, const std::vector<Complex>& z,
                       const std::vector<Complex>& w) {
  require_in_disc(z, m.n());
  require_in_disc(w, m.n());
  Complex out = 1.0;
  for (std::size_t i = 0; i < m.n(); ++i) out *= std::pow(1.0 - z[i] * std::conj(w[i]), -m[i]);
  return out;
}

double gram_tail_bound(const TruncatedSpace& space, const std::vector<Complex>& v,
                       const std::vector<Complex>& w) {
  require_in_disc(v, space.n());
  require_in_disc(w, space.n());
  double full = 1.0;
  double box = 1.0;
  for (std::size_t i = 0; i < space.n(); ++i) {
    const double x = std::abs(v[i] * w[i]);
    const int m = space.weights()[i];
    full *= std::pow(1.0 - x, -m);
    double partial = 0.0;
    double xk = 1.0;
    for (int k = 0; k <= space.degree(); ++k) {
      partial += binomial(m + k - 1, k) * xk;
      xk *= x;
    }
    box *= partial;
  }
  return std::max(0.0, full - box);
}

ComplexMatrix apply_shift(const TruncatedSpace& space, std::size_t axis, const ComplexMatrix& x,
                          bool adjoint) {
  if (axis >= space.n()) {
    std::ostringstream os;
    os << "axis " << axis << " out of range for a " << space.n() << "-variable space";
    throw Error(ErrorCode::AxisOutOfRange, os.str());
  }
  if (x.rows() != space.total_dim()) throw Error(ErrorCode::ShapeMismatch, "apply_shift rows");
  const Index d = space.coeff_dim();
  const Index side = space.degree() + 1;
  Index stride = 1;
  for (std::size_t i = axis + 1; i < space.n(); ++i) stride *= side;
  const int m = space.weights()[axis];
  ComplexMatrix out = ComplexMatrix::Zero(x.rows(), x.cols());
  for (Index mi = 0; mi < space.monomial_count(); ++mi) {
    const Index k = (mi / stride) % side;
    if (!adjoint && k + 1 < side) {
      out.middleRows((mi + stride) * d, d) = shift_weight(m, static_cast<int>(k)) * x.middleRows(mi * d, d);
    } else if (adjoint && k > 0) {
      out.middleRows((mi - stride) * d, d) = shift_weight(m, static_cast<int>(k - 1)) * x.middleRows(mi * d, d);
    }
  }
  return out;
}

ComplexMatrix shift_matrix(const TruncatedSpace& space, std::size_t axis) {
  return apply_shift(space, axis, ComplexMatrix::Identity(space.total_dim(), space.total_dim()));
}

Weights hat_weight(const Weights& m, std::size_t axis) {
  if (axis >= m.n()) throw Error(ErrorCode::AxisOutOfRange, "hat_weight axis out of range");
  std::vector<int> v = m.values();
  v[axis] = 1;
  return Weights(std::move(v));
}

}  // namespace dilab
