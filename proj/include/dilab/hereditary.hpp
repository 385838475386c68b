#pragma once

// Hereditary functional calculus p(z, w)(T, T*) for commuting operator
// tuples, the inverse Bergman symbols, defect operators and positivity
// certificates.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dilab/linalg.hpp"

namespace dilab {

using MultiIndex = std::vector<int>;

/// n square matrices of equal size together with their (double) commutation
/// residuals, measured once at construction.
class OperatorTuple {
 public:
  OperatorTuple() = default;
  explicit OperatorTuple(std::vector<ComplexMatrix> ops);

  std::size_t n() const { return ops_.size(); }
  Index dim() const { return ops_.empty() ? 0 : ops_.front().rows(); }
  const ComplexMatrix& operator[](std::size_t i) const { return ops_[i]; }
  const std::vector<ComplexMatrix>& ops() const { return ops_; }

  /// max_{i,j} ||T_i T_j - T_j T_i||
  double commutation_residual() const { return commutation_residual_; }
  /// max_{p != q} ||T_p T_q* - T_q* T_p||
  double double_commutation_residual() const { return double_commutation_residual_; }

  bool is_commuting(const Tolerances& tol) const { return commutation_residual_ <= tol.residual; }
  bool is_doubly_commuting(const Tolerances& tol) const {
    return is_commuting(tol) && double_commutation_residual_ <= tol.residual;
  }

 private:
  std::vector<ComplexMatrix> ops_;
  double commutation_residual_ = 0.0;
  double double_commutation_residual_ = 0.0;
};

/// Weight multi-index m = (m_1, ..., m_n), every m_i >= 1.
class Weights {
 public:
  Weights() = default;
  Weights(std::initializer_list<int> m) : Weights(std::vector<int>(m)) {}
  explicit Weights(std::vector<int> m);

  std::size_t n() const { return m_.size(); }
  int operator[](std::size_t i) const { return m_[i]; }
  const std::vector<int>& values() const { return m_; }
  int max() const;

  bool operator==(const Weights&) const = default;

 private:
  std::vector<int> m_;
};

/// p(z, w) = sum a_{pq} z^p conj(w)^q, evaluated as sum a_{pq} T^p T*^q.
class HereditaryPolynomial {
 public:
  using Key = std::pair<MultiIndex, MultiIndex>;

  explicit HereditaryPolynomial(std::size_t n) : n_(n) {}

  static HereditaryPolynomial constant(std::size_t n, Complex c);

  std::size_t n() const { return n_; }
  const std::map<Key, Complex>& terms() const { return terms_; }
  std::size_t term_count() const { return terms_.size(); }

  Complex coefficient(const MultiIndex& p, const MultiIndex& q) const;
  /// Adds c to the coefficient of z^p conj(w)^q; zero sums are dropped.
  void add_term(const MultiIndex& p, const MultiIndex& q, Complex c);

  /// a_{pq} = conj(a_{qp}) for every stored term.
  bool is_self_adjoint(double tol = 0.0) const;

  HereditaryPolynomial operator+(const HereditaryPolynomial& other) const;
  HereditaryPolynomial operator*(const HereditaryPolynomial& other) const;
  HereditaryPolynomial operator*(Complex s) const;

 private:
  std::size_t n_;
  std::map<Key, Complex> terms_;
};

/// Caches T^p and T*^q along a lattice walk so that every power is one
/// multiplication away from a stored lower power.
class PowerCache {
 public:
  explicit PowerCache(const OperatorTuple& t);

  const ComplexMatrix& power(const MultiIndex& p);
  const ComplexMatrix& adjoint_power(const MultiIndex& q);

 private:
  const ComplexMatrix& lookup(const MultiIndex& k, bool adjoint);

  const OperatorTuple& tuple_;
  std::map<MultiIndex, ComplexMatrix> powers_;
  std::map<MultiIndex, ComplexMatrix> adjoint_powers_;
};

/// sum a_{pq} T^p T*^q. Throws ArityMismatch or NonCommutingTuple (when the
/// commutation residual exceeds tol.residual * (1 + max ||T_i||^2)).
/// Self-adjoint symbols yield a symmetrized result.
ComplexMatrix hereditary_apply(const HereditaryPolynomial& p, const OperatorTuple& t,
                               const Tolerances& tol = {});

/// prod_i sum_k (-1)^k C(m_i, k) z_i^k conj(w_i)^k.
HereditaryPolynomial bergman_inverse_poly(const Weights& m);

/// Binomial coefficient as a double, built by running products.
double binomial(int n, int k);

struct DefectData {
  ComplexMatrix defect_op;     // (B_m^{-1}(T, T*))^{1/2}
  SubspaceFrame defect_frame;  // closure of its range
  Index rank = 0;
  double min_eig_of_square = 0.0;
};

/// Joint defect of T for the weights m (n = m.n()). Throws NotPSD when the
/// hereditary positivity fails beyond tol.psd.
DefectData defect(const OperatorTuple& t, const Weights& m, const Tolerances& tol = {});

/// Defect of a single operator with weight m.
DefectData defect(const ComplexMatrix& t, int m, const Tolerances& tol = {});

/// Defect frame of a PSD defect operator: eigenvectors of D whose D^2
/// eigenvalue is at least tol.rank times the largest.
SubspaceFrame defect_frame_of(const ComplexMatrix& defect_op, const Tolerances& tol);

enum class CertificateKind { Bm, Hypercontraction, JointBm, DoublyCommutingJoint };

std::string to_string(CertificateKind kind);

struct Witness {
  std::string label;
  double value = 0.0;      // min eigenvalue or residual
  double threshold = 0.0;  // pass iff value >= threshold (lower) or value <= threshold (upper)
  bool lower_bound = true;
  bool pass = false;
};

struct Certificate {
  CertificateKind kind = CertificateKind::Bm;
  bool verdict = false;
  std::vector<Witness> witnesses;
  std::vector<double> spectral_radii;

  const Witness* find(const std::string& label) const;
};

/// Margin used for the finite-dimensional C_{.0} test rho(T) < 1 - margin.
inline constexpr double kC0Margin = 1e-9;

Certificate certify(const OperatorTuple& t, const Weights& m, CertificateKind mode,
                    const Tolerances& tol = {});

struct DefectCommutationReport {
  double op_defect_commutator = 0.0;      // max_{i != j} ||T_i D_j - D_j T_i||
  double defect_defect_commutator = 0.0;  // max_{i != j} ||D_i D_j - D_j D_i||
  double product_residual = 0.0;          // ||D_{m,T} - prod_i D_{m_i,T_i}||
  double threshold = 0.0;
  bool pass = false;
  std::vector<ComplexMatrix> axis_defects;  // D_{m_i, T_i}
};

/// Checks the defect identities of a doubly commuting B_m-contractive tuple.
/// Throws NotDoublyCommuting when the tuple fails that hypothesis.
DefectCommutationReport verify_defect_commutation(const OperatorTuple& t, const Weights& m,
                                                  const Tolerances& tol = {});

}  // namespace dilab
