#include <doctest.h>

#include "dilab/hereditary.hpp"
#include "support.hpp"

using namespace dilab;

namespace {

ComplexMatrix scalar(Complex z) { return ComplexMatrix::Constant(1, 1, z); }

}  // namespace

TEST_SUITE("hereditary") {

TEST_CASE("bergman_inverse_poly coefficients") {
  const auto p1 = bergman_inverse_poly(Weights{1});
  CHECK(p1.term_count() == 2);
  CHECK(p1.coefficient({0}, {0}) == Complex(1.0));
  CHECK(p1.coefficient({1}, {1}) == Complex(-1.0));
  // (-1)^k C(m, k) on the diagonal
  const auto p2 = bergman_inverse_poly(Weights{2});
  CHECK(p2.term_count() == 3);
  CHECK(p2.coefficient({0}, {0}) == Complex(1.0));
  CHECK(p2.coefficient({1}, {1}) == Complex(-2.0));
  CHECK(p2.coefficient({2}, {2}) == Complex(1.0));
  const auto p11 = bergman_inverse_poly(Weights{1, 1});
  CHECK(p11.term_count() == 4);
  CHECK(p11.coefficient({0, 0}, {0, 0}) == Complex(1.0));
  CHECK(p11.coefficient({1, 0}, {1, 0}) == Complex(-1.0));
  CHECK(p11.coefficient({0, 1}, {0, 1}) == Complex(-1.0));
  CHECK(p11.coefficient({1, 1}, {1, 1}) == Complex(1.0));
  CHECK(p11.is_self_adjoint());
}

TEST_CASE("binomial matches Pascal's triangle") {
  for (int n = 0; n <= 40; ++n)
    for (int k = 0; k <= n; ++k) CHECK(binomial(n, k) == oracle::choose(n, k));
}

TEST_CASE("hereditary_apply examples") {
  std::mt19937_64 rng(21);
  const OperatorTuple t({oracle::random_matrix(3, 3, rng)});
  CHECK((hereditary_apply(HereditaryPolynomial::constant(1, 1.0), t) - ComplexMatrix::Identity(3, 3)).norm() == 0.0);

  const Complex lam(0.3, -0.4);
  const ComplexMatrix s = hereditary_apply(bergman_inverse_poly(Weights{2}), OperatorTuple({scalar(lam)}));
  CHECK(std::abs(s(0, 0) - std::pow(1.0 - std::norm(lam), 2)) <= 1e-15);

  for (double a : {0.3, 0.5, 0.8}) {
    const ComplexMatrix j = hereditary_apply(bergman_inverse_poly(Weights{2}), OperatorTuple({oracle::jordan(a)}));
    ComplexMatrix expect = ComplexMatrix::Zero(2, 2);
    expect(0, 0) = 1.0 - 2.0 * a * a;
    expect(1, 1) = 1.0;
    CHECK((j - expect).norm() <= 1e-15);
  }
}

TEST_CASE("hereditary_apply against the brute-force sum") {
  std::mt19937_64 rng(22);
  for (int m = 1; m <= 5; ++m) {
    const ComplexMatrix t = oracle::random_with_norm(4, 0.7, rng);
    const ComplexMatrix h = hereditary_apply(bergman_inverse_poly(Weights{m}), OperatorTuple({t}));
    CHECK(oracle::spectral_norm(h - oracle::bm_defect_square(t, m)) <= 1e-12);
  }
  const ComplexMatrix a = oracle::random_with_norm(2, 0.5, rng), b = oracle::random_with_norm(3, 0.5, rng);
  const ComplexMatrix t1 = oracle::kron(a, ComplexMatrix::Identity(3, 3));
  const ComplexMatrix t2 = oracle::kron(ComplexMatrix::Identity(2, 2), b);
  const ComplexMatrix h = hereditary_apply(bergman_inverse_poly(Weights{2, 3}), OperatorTuple({t1, t2}));
  CHECK(oracle::spectral_norm(h - oracle::joint_defect_square(t1, t2, 2, 3)) <= 1e-12);
}

TEST_CASE("hereditary_apply is linear in the symbol") {
  std::mt19937_64 rng(23);
  const OperatorTuple t({oracle::random_with_norm(3, 0.9, rng)});
  HereditaryPolynomial p(1), q(1);
  p.add_term({2}, {1}, Complex(0.5, 1.0));
  p.add_term({0}, {3}, 2.0);
  q.add_term({1}, {1}, -1.5);
  q.add_term({2}, {1}, Complex(0.25, 0.0));
  const ComplexMatrix lhs = hereditary_apply(p + q, t);
  const ComplexMatrix rhs = hereditary_apply(p, t) + hereditary_apply(q, t);
  CHECK(oracle::spectral_norm(lhs - rhs) <= 1e-12 * (1.0 + oracle::spectral_norm(lhs)));
  // hereditary order: T powers left of T* powers
  const ComplexMatrix expect = Complex(0.5, 1.0) * oracle::power(t[0], 2) * t[0].adjoint() +
                               2.0 * oracle::power(t[0].adjoint(), 3);
  CHECK(oracle::spectral_norm(hereditary_apply(p, t) - expect) <= 1e-12);
}

TEST_CASE("hereditary_apply on normal matrices") {
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 10; ++trial) {
    const ComplexMatrix u = Eigen::HouseholderQR<ComplexMatrix>(oracle::random_matrix(4, 4, rng)).householderQ();
    std::uniform_real_distribution<double> r(0.0, 0.95), th(0.0, 6.28);
    Eigen::VectorXcd lam(4);
    for (int i = 0; i < 4; ++i) lam(i) = std::polar(r(rng), th(rng));
    const ComplexMatrix t = u * lam.asDiagonal() * u.adjoint();
    const int m = 1 + trial % 4;
    Eigen::VectorXcd f(4);
    for (int i = 0; i < 4; ++i) f(i) = std::pow(1.0 - std::norm(lam(i)), m);
    const ComplexMatrix expect = u * f.asDiagonal() * u.adjoint();
    CHECK(oracle::spectral_norm(hereditary_apply(bergman_inverse_poly(Weights{m}), OperatorTuple({t})) - expect) <=
          1e-12);
  }
}

TEST_CASE("hereditary_apply rejects non-commuting tuples and wrong arity") {
  std::mt19937_64 rng(25);
  const OperatorTuple t({oracle::random_matrix(3, 3, rng), oracle::random_matrix(3, 3, rng)});
  CHECK_THROWS_AS(hereditary_apply(bergman_inverse_poly(Weights{1, 1}), t), Error);
  CHECK_THROWS_AS(hereditary_apply(bergman_inverse_poly(Weights{1}), t), Error);
}

TEST_CASE("defect examples") {
  const DefectData z = defect(OperatorTuple({ComplexMatrix::Zero(3, 3)}), Weights{2});
  CHECK((z.defect_op - ComplexMatrix::Identity(3, 3)).norm() <= 1e-15);
  CHECK(z.rank == 3);
  for (int m = 1; m <= 4; ++m) {
    const DefectData s = defect(scalar(Complex(0.6, 0.0)), m);
    CHECK(std::abs(s.defect_op(0, 0) - std::pow(1.0 - 0.36, m / 2.0)) <= 1e-14);
  }
  const DefectData j = defect(oracle::jordan(0.5), 2);
  CHECK(std::abs(j.defect_op(0, 0) - std::sqrt(0.5)) <= 1e-14);
  CHECK(std::abs(j.defect_op(1, 1) - 1.0) <= 1e-14);
  CHECK(std::abs(j.defect_op(0, 1)) <= 1e-14);
  CHECK(j.rank == 2);
  CHECK_THROWS_AS(defect(oracle::jordan(0.8), 2), Error);
}

TEST_CASE("defect rank equals the numerical rank of the defect square") {
  std::mt19937_64 rng(26);
  for (int trial = 0; trial < 10; ++trial) {
    // an isometric piece gives a rank-deficient defect for m = 1
    const ComplexMatrix n = oracle::random_nilpotent(4, 1.0, rng);
    const ComplexMatrix h = oracle::bm_defect_square(n, 1);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
    const double top = es.eigenvalues().cwiseAbs().maxCoeff();
    Index r = 0;
    for (Index i = 0; i < 4; ++i) r += es.eigenvalues()(i) >= Tolerances{}.rank * top;
    CHECK(defect(n, 1).rank == r);
  }
}

TEST_CASE("certify examples") {
  for (auto mode : {CertificateKind::Bm, CertificateKind::Hypercontraction, CertificateKind::JointBm,
                    CertificateKind::DoublyCommutingJoint}) {
    CHECK(certify(OperatorTuple({scalar(0.7)}), Weights{3}, mode).verdict);
  }
  const Certificate j = certify(OperatorTuple({oracle::jordan(0.8)}), Weights{2}, CertificateKind::Bm);
  CHECK_FALSE(j.verdict);
  const Witness* w = j.find("Bm-positivity[1]");
  REQUIRE(w != nullptr);
  CHECK(w->value == doctest::Approx(-0.28).epsilon(1e-12));

  const Certificate p =
      certify(OperatorTuple({scalar(0.5), scalar(0.5)}), Weights{1, 1}, CertificateKind::DoublyCommutingJoint);
  CHECK(p.verdict);
  const Witness* jw = p.find("joint-positivity");
  REQUIRE(jw != nullptr);
  CHECK(jw->value == doctest::Approx(0.5625).epsilon(1e-14));
}

TEST_CASE("certify rejects non-C0 and non-doubly-commuting input") {
  CHECK_FALSE(certify(OperatorTuple({scalar(1.0)}), Weights{1}, CertificateKind::Bm).verdict);
  // commuting but not doubly commuting: T1 = T2 = Jordan
  const ComplexMatrix j = oracle::jordan(0.3);
  const Certificate c = certify(OperatorTuple({j, j}), Weights{1, 1}, CertificateKind::DoublyCommutingJoint);
  CHECK_FALSE(c.verdict);
  const Witness* w = c.find("double-commutation");
  REQUIRE(w != nullptr);
  CHECK_FALSE(w->pass);
}

TEST_CASE("verify_defect_commutation") {
  const ComplexMatrix d1 = Eigen::Vector3cd(0.1, 0.4, -0.2).asDiagonal();
  const ComplexMatrix d2 = Eigen::Vector3cd(0.3, 0.0, 0.5).asDiagonal();
  auto r = verify_defect_commutation(OperatorTuple({d1, d2}), Weights{2, 3});
  CHECK(r.pass);
  CHECK(r.op_defect_commutator <= 1e-12);
  CHECK(r.defect_defect_commutator <= 1e-12);
  CHECK(r.product_residual <= 1e-12);

  const ComplexMatrix j = oracle::jordan(0.4), i2 = ComplexMatrix::Identity(2, 2);
  auto t = verify_defect_commutation(OperatorTuple({oracle::kron(j, i2), oracle::kron(i2, j)}), Weights{2, 2});
  CHECK(t.pass);
  CHECK(t.op_defect_commutator <= 1e-10);
  CHECK(t.defect_defect_commutator <= 1e-10);
  CHECK(t.product_residual <= 1e-10);

  auto s = verify_defect_commutation(OperatorTuple({scalar(0.3), scalar(Complex(0.0, 0.6))}), Weights{1, 2});
  CHECK(s.product_residual == 0.0);
  CHECK_THROWS_AS(verify_defect_commutation(OperatorTuple({j, j}), Weights{1, 1}), Error);
}

}
