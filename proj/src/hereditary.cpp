#include "dilab/hereditary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dilab {

OperatorTuple::OperatorTuple(std::vector<ComplexMatrix> ops) : ops_(std::move(ops)) {
  if (ops_.empty()) throw Error(ErrorCode::InvalidArgument, "operator tuple must be non-empty");
  const Index d = ops_.front().rows();
  for (const auto& t : ops_) {
    require_finite(t, "tuple operator");
    if (t.rows() != t.cols() || t.rows() != d) {
      throw Error(ErrorCode::ShapeMismatch, "tuple operators must be square of equal size");
    }
  }
  for (std::size_t i = 0; i < ops_.size(); ++i) {
    for (std::size_t j = i + 1; j < ops_.size(); ++j) {
      commutation_residual_ =
          std::max(commutation_residual_, op_norm(ops_[i] * ops_[j] - ops_[j] * ops_[i]));
    }
    for (std::size_t j = 0; j < ops_.size(); ++j) {
      if (i == j) continue;
      double_commutation_residual_ = std::max(
          double_commutation_residual_,
          op_norm(ops_[i] * ops_[j].adjoint() - ops_[j].adjoint() * ops_[i]));
    }
  }
}

Weights::Weights(std::vector<int> m) : m_(std::move(m)) {
  if (m_.empty()) throw Error(ErrorCode::InvalidArgument, "weight multi-index must be non-empty");
  for (int v : m_) {
    if (v < 1) throw Error(ErrorCode::InvalidArgument, "weights must be >= 1");
  }
}

int Weights::max() const { return *std::max_element(m_.begin(), m_.end()); }

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return c < 9e15 ? std::round(c) : c;
}

HereditaryPolynomial HereditaryPolynomial::constant(std::size_t n, Complex c) {
  HereditaryPolynomial p(n);
  p.add_term(MultiIndex(n, 0), MultiIndex(n, 0), c);
  return p;
}

Complex HereditaryPolynomial::coefficient(const MultiIndex& p, const MultiIndex& q) const {
  auto it = terms_.find({p, q});
  return it == terms_.end() ? Complex{} : it->second;
}

void HereditaryPolynomial::add_term(const MultiIndex& p, const MultiIndex& q, Complex c) {
  if (p.size() != n_ || q.size() != n_) {
    throw Error(ErrorCode::ArityMismatch, "multi-index length differs from polynomial arity");
  }
  for (std::size_t i = 0; i < n_; ++i) {
    if (p[i] < 0 || q[i] < 0) throw Error(ErrorCode::InvalidArgument, "negative exponent");
  }
  auto& slot = terms_[{p, q}];
  slot += c;
  if (slot == Complex{}) terms_.erase({p, q});
}

bool HereditaryPolynomial::is_self_adjoint(double tol) const {
  for (const auto& [key, a] : terms_) {
    if (std::abs(a - std::conj(coefficient(key.second, key.first))) > tol) return false;
  }
  return true;
}

HereditaryPolynomial HereditaryPolynomial::operator+(const HereditaryPolynomial& other) const {
  if (other.n_ != n_) throw Error(ErrorCode::ArityMismatch, "adding polynomials of different arity");
  HereditaryPolynomial out = *this;
  for (const auto& [key, a] : other.terms_) out.add_term(key.first, key.second, a);
  return out;
}

HereditaryPolynomial HereditaryPolynomial::operator*(const HereditaryPolynomial& other) const {
  if (other.n_ != n_) throw Error(ErrorCode::ArityMismatch, "multiplying polynomials of different arity");
  HereditaryPolynomial out(n_);
  for (const auto& [k1, a] : terms_) {
    for (const auto& [k2, b] : other.terms_) {
      MultiIndex p(n_), q(n_);
      for (std::size_t i = 0; i < n_; ++i) {
        p[i] = k1.first[i] + k2.first[i];
        q[i] = k1.second[i] + k2.second[i];
      }
      out.add_term(p, q, a * b);
    }
  }
  return out;
}

HereditaryPolynomial HereditaryPolynomial::operator*(Complex s) const {
  HereditaryPolynomial out(n_);
  for (const auto& [key, a] : terms_) out.add_term(key.first, key.second, a * s);
  return out;
}

PowerCache::PowerCache(const OperatorTuple& t) : tuple_(t) {}

const ComplexMatrix& PowerCache::power(const MultiIndex& p) { return lookup(p, false); }

const ComplexMatrix& PowerCache::adjoint_power(const MultiIndex& q) { return lookup(q, true); }

const ComplexMatrix& PowerCache::lookup(const MultiIndex& k, bool adjoint) {
  auto& cache = adjoint ? adjoint_powers_ : powers_;
  if (auto it = cache.find(k); it != cache.end()) return it->second;
  std::size_t last = k.size();
  for (std::size_t i = k.size(); i-- > 0;) {
    if (k[i] > 0) {
      last = i;
      break;
    }
  }
  if (last == k.size()) {
    return cache.emplace(k, ComplexMatrix::Identity(tuple_.dim(), tuple_.dim())).first->second;
  }
  MultiIndex lower = k;
  --lower[last];
  const ComplexMatrix& base = lookup(lower, adjoint);
  ComplexMatrix next = adjoint ? ComplexMatrix(base * tuple_[last].adjoint())
                               : ComplexMatrix(base * tuple_[last]);
  return cache.emplace(k, std::move(next)).first->second;
}

ComplexMatrix hereditary_apply(const HereditaryPolynomial& p, const OperatorTuple& t,
                               const Tolerances& tol) {
  if (p.n() != t.n()) {
    std::ostringstream os;
    os << "polynomial in " << p.n() << " variables applied to a " << t.n() << "-tuple";
    throw Error(ErrorCode::ArityMismatch, os.str());
  }
  double scale = 0.0;
  for (const auto& op : t.ops()) scale = std::max(scale, op_norm(op));
  if (t.commutation_residual() > tol.residual * (1.0 + scale * scale)) {
    std::ostringstream os;
    os << "commutation residual " << t.commutation_residual();
    throw Error(ErrorCode::NonCommutingTuple, os.str());
  }
  PowerCache cache(t);
  ComplexMatrix out = ComplexMatrix::Zero(t.dim(), t.dim());
  for (const auto& [key, a] : p.terms()) {
    out.noalias() += a * (cache.power(key.first) * cache.adjoint_power(key.second));
  }
  if (p.is_self_adjoint(1e-14)) out = hermitian_part(out);
  return out;
}

HereditaryPolynomial bergman_inverse_poly(const Weights& m) {
  const std::size_t n = m.n();
  HereditaryPolynomial out = HereditaryPolynomial::constant(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    HereditaryPolynomial axis(n);
    for (int k = 0; k <= m[i]; ++k) {
      MultiIndex e(n, 0);
      e[i] = k;
      const double sign = (k % 2 == 0) ? 1.0 : -1.0;
      axis.add_term(e, e, sign * binomial(m[i], k));
    }
    out = out * axis;
  }
  return out;
}

SubspaceFrame defect_frame_of(const ComplexMatrix& defect_op, const Tolerances& tol) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(defect_op), Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues().cwiseAbs().maxCoeff();
  if (top == 0.0) return SubspaceFrame(defect_op.rows());
  // rank is decided on D^2: eigenvalues of D^2 at least tol.rank times the largest
  return SubspaceFrame::eigenspace_above(defect_op, std::sqrt(tol.rank) * top);
}

namespace {

DefectData defect_from_square(const ComplexMatrix& square, const Tolerances& tol) {
  const PsdCheck check = psd_check(square, tol);
  if (!check.is_psd) {
    std::ostringstream os;
    os << "hereditary positivity fails: smallest eigenvalue " << check.min_eig;
    throw Error(ErrorCode::NotPSD, os.str());
  }
  DefectData out;
  out.min_eig_of_square = check.min_eig;
  out.defect_op = psd_sqrt(square, tol);
  out.defect_frame = defect_frame_of(out.defect_op, tol);
  out.rank = out.defect_frame.dim();
  return out;
}

}  // namespace

DefectData defect(const OperatorTuple& t, const Weights& m, const Tolerances& tol) {
  return defect_from_square(hereditary_apply(bergman_inverse_poly(m), t, tol), tol);
}

DefectData defect(const ComplexMatrix& t, int m, const Tolerances& tol) {
  return defect(OperatorTuple({t}), Weights({m}), tol);
}

std::string to_string(CertificateKind kind) {
  switch (kind) {
    case CertificateKind::Bm: return "Bm";
    case CertificateKind::Hypercontraction: return "Hypercontraction";
    case CertificateKind::JointBm: return "JointBm";
    case CertificateKind::DoublyCommutingJoint: return "DoublyCommutingJoint";
  }
  return "?";
}

const Witness* Certificate::find(const std::string& label) const {
  for (const auto& w : witnesses) {
    if (w.label == label) return &w;
  }
  return nullptr;
}

namespace {

void push_lower(Certificate& c, std::string label, double value, double threshold) {
  c.witnesses.push_back({std::move(label), value, threshold, true, value >= threshold});
}

void push_upper(Certificate& c, std::string label, double value, double threshold) {
  c.witnesses.push_back({std::move(label), value, threshold, false, value <= threshold});
}

double hereditary_min_eig(const ComplexMatrix& t, int m, const Tolerances& tol) {
  const ComplexMatrix h = hereditary_apply(bergman_inverse_poly(Weights({m})), OperatorTuple({t}), tol);
  return psd_check(h, tol).min_eig;
}

}  // namespace

Certificate certify(const OperatorTuple& t, const Weights& m, CertificateKind mode,
                    const Tolerances& tol) {
  const bool joint = mode == CertificateKind::JointBm || mode == CertificateKind::DoublyCommutingJoint;
  if (m.n() != t.n() && (joint || m.n() != 1)) {
    std::ostringstream os;
    os << "weights of length " << m.n() << " for a " << t.n() << "-tuple";
    throw Error(ErrorCode::ArityMismatch, os.str());
  }
  auto weight = [&](std::size_t i) { return m.n() == 1 ? m[0] : m[i]; };

  Certificate c;
  c.kind = mode;
  for (std::size_t i = 0; i < t.n(); ++i) {
    const double rho = spectral_radius(t[i]);
    c.spectral_radii.push_back(rho);
    push_upper(c, "spectral-radius[" + std::to_string(i + 1) + "]", rho, 1.0 - kC0Margin);
  }
  for (std::size_t i = 0; i < t.n(); ++i) {
    const std::string axis = std::to_string(i + 1);
    if (mode == CertificateKind::Hypercontraction) {
      for (int p = 1; p <= weight(i); ++p) {
        push_lower(c, "hypercontraction[" + axis + ",p=" + std::to_string(p) + "]",
                   hereditary_min_eig(t[i], p, tol), -tol.psd);
      }
    } else {
      push_lower(c, "Bm-positivity[" + axis + "]", hereditary_min_eig(t[i], weight(i), tol), -tol.psd);
    }
  }
  if (joint) {
    push_upper(c, "commutation", t.commutation_residual(), tol.residual);
    if (t.is_commuting(tol)) {
      const ComplexMatrix h = hereditary_apply(bergman_inverse_poly(m), t, tol);
      push_lower(c, "joint-positivity", psd_check(h, tol).min_eig, -tol.psd);
    } else {
      push_lower(c, "joint-positivity", -std::numeric_limits<double>::infinity(), -tol.psd);
    }
    if (mode == CertificateKind::DoublyCommutingJoint) {
      push_upper(c, "double-commutation", t.double_commutation_residual(), tol.residual);
    }
  }
  c.verdict = std::all_of(c.witnesses.begin(), c.witnesses.end(),
                          [](const Witness& w) { return w.pass; });
  return c;
}

DefectCommutationReport verify_defect_commutation(const OperatorTuple& t, const Weights& m,
                                                  const Tolerances& tol) {
  if (m.n() != t.n()) throw Error(ErrorCode::ArityMismatch, "weights and tuple lengths differ");
  if (!t.is_doubly_commuting(tol)) {
    std::ostringstream os;
    os << "double commutation residual " << t.double_commutation_residual();
    throw Error(ErrorCode::NotDoublyCommuting, os.str());
  }
  DefectCommutationReport r;
  double scale = 0.0;
  for (std::size_t i = 0; i < t.n(); ++i) {
    r.axis_defects.push_back(defect(t[i], m[i], tol).defect_op);
    scale = std::max({scale, op_norm(t[i]), op_norm(r.axis_defects.back())});
  }
  for (std::size_t i = 0; i < t.n(); ++i) {
    for (std::size_t j = 0; j < t.n(); ++j) {
      if (i == j) continue;
      const auto& dj = r.axis_defects[j];
      r.op_defect_commutator = std::max(r.op_defect_commutator, op_norm(t[i] * dj - dj * t[i]));
      r.defect_defect_commutator = std::max(
          r.defect_defect_commutator, op_norm(r.axis_defects[i] * dj - dj * r.axis_defects[i]));
    }
  }
  ComplexMatrix product = ComplexMatrix::Identity(t.dim(), t.dim());
  for (const auto& d : r.axis_defects) product = product * d;
  r.product_residual = op_norm(defect(t, m, tol).defect_op - product);
  r.threshold = tol.residual * (1.0 + scale * scale);
  r.pass = r.op_defect_commutator <= r.threshold && r.defect_defect_commutator <= r.threshold &&
           r.product_residual <= r.threshold;
  return r;
}

}  // namespace dilab
