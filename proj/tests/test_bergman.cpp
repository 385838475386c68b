#include <doctest.h>

#include "dilab/bergman.hpp"
#include "support.hpp"

using namespace dilab;

TEST_SUITE("bergman") {

TEST_CASE("monomial_norm") {
  for (int k = 0; k < 20; ++k) CHECK(monomial_norm(1, k) == 1.0);
  CHECK(monomial_norm(2, 1) == doctest::Approx(0.70711).epsilon(1e-5));
  CHECK(monomial_norm(3, 2) == doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-15));
  for (int m = 2; m <= 5; ++m)
    for (int k = 0; k < 30; ++k) {
      CHECK(monomial_norm(m, k + 1) < monomial_norm(m, k));
      CHECK(monomial_norm(m, k) == doctest::Approx(1.0 / std::sqrt(oracle::choose(m + k - 1, k))).epsilon(1e-14));
    }
}

TEST_CASE("space indexing") {
  const TruncatedSpace s(Weights{2, 3}, 4, 2);
  CHECK(s.monomial_count() == 25);
  CHECK(s.total_dim() == 50);
  CHECK(s.index({0, 0}, 1) == 1);
  CHECK(s.index({1, 0}, 0) == 10);
  CHECK(s.index({0, 1}, 0) == 2);
  for (Index i = 0; i < s.monomial_count(); ++i) CHECK(s.monomial_index(s.multi_index(i)) == i);
  CHECK(s.basis_scale({1, 2}) == doctest::Approx(std::sqrt(2.0 * 6.0)));
}

TEST_CASE("kernel_vector") {
  const TruncatedSpace s(Weights{2}, 6, 3);
  const ComplexVector eta = ComplexVector::LinSpaced(3, 1.0, 3.0);
  const SpaceVector k0 = kernel_vector(s, {0.0}, eta);
  CHECK((k0.coeffs.head(3) - eta).norm() == 0.0);
  CHECK(k0.coeffs.tail(s.total_dim() - 3).norm() == 0.0);

  const TruncatedSpace h(Weights{1}, 3, 1);
  const SpaceVector g = kernel_vector(h, {0.5}, ComplexVector::Ones(1));
  CHECK(std::abs(g.coeffs(0) - 1.0) <= 1e-15);
  CHECK(std::abs(g.coeffs(1) - 0.5) <= 1e-15);
  CHECK(std::abs(g.coeffs(2) - 0.25) <= 1e-15);
  CHECK(std::abs(g.coeffs(3) - 0.125) <= 1e-15);
  CHECK_THROWS_AS(kernel_vector(h, {1.2}, ComplexVector::Ones(1)), Error);
  CHECK_THROWS_AS(kernel_vector(h, {0.2}, ComplexVector::Ones(2)), Error);
}

TEST_CASE("reproducing property against direct evaluation") {
  std::mt19937_64 rng(31);
  const TruncatedSpace s(Weights{2, 1}, 8, 2);
  SpaceVector f{s, oracle::random_matrix(s.total_dim(), 1, rng).col(0)};
  const std::vector<Complex> w{Complex(0.3, 0.2), Complex(-0.4, 0.1)};
  const ComplexVector eta = oracle::random_matrix(2, 1, rng).col(0);
  // f(w) through monomial coefficients: e_k = z^k / ||z^k||
  ComplexVector fw = ComplexVector::Zero(2);
  for (int k1 = 0; k1 <= 8; ++k1)
    for (int k2 = 0; k2 <= 8; ++k2) {
      const double norm = 1.0 / (monomial_norm(2, k1) * monomial_norm(1, k2));
      for (Index e = 0; e < 2; ++e)
        fw(e) += f.coeffs(s.index({k1, k2}, e)) * norm * std::pow(w[0], k1) * std::pow(w[1], k2);
    }
  CHECK((f.evaluate(w) - fw).norm() <= 1e-12);
  const Complex lhs = kernel_vector(s, w, eta).coeffs.dot(f.coeffs);  // <f, K_w eta>
  CHECK(std::abs(lhs - eta.dot(fw)) <= 1e-12);
}

TEST_CASE("Gram identity within the tail bound") {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  for (int trial = 0; trial < 10; ++trial) {
    const TruncatedSpace s(Weights{1 + trial % 3, 2}, 10, 1);
    const std::vector<Complex> v{Complex(u(rng), u(rng)), Complex(u(rng), u(rng))};
    const std::vector<Complex> w{Complex(u(rng), u(rng)), Complex(u(rng), u(rng))};
    const ComplexVector one = ComplexVector::Ones(1);
    const Complex gram = kernel_vector(s, v, one).coeffs.dot(kernel_vector(s, w, one).coeffs);  // <K_w, K_v>
    const double err = std::abs(gram - bergman_kernel(s.weights(), v, w));
    const double tail = gram_tail_bound(s, v, w);
    CHECK(err <= tail * (1.0 + 1e-10) + 1e-14);
    CHECK(tail < 1.0);
  }
}

TEST_CASE("shift_matrix") {
  const ComplexMatrix h = shift_matrix(TruncatedSpace(Weights{1}, 5, 1), 0);
  ComplexMatrix sub = ComplexMatrix::Zero(6, 6);
  for (int k = 0; k < 5; ++k) sub(k + 1, k) = 1.0;
  CHECK((h - sub).norm() == 0.0);
  for (int m = 1; m <= 4; ++m) {
    const ComplexMatrix s = shift_matrix(TruncatedSpace(Weights{m}, 12, 1), 0);
    CHECK((s - oracle::shift_1d(m, 12)).norm() <= 1e-14);
    CHECK(s.col(12).norm() == 0.0);
    CHECK(oracle::spectral_norm(s) <= 1.0 + 1e-15);
  }
  const ComplexMatrix b = shift_matrix(TruncatedSpace(Weights{2}, 4, 1), 0);
  CHECK(std::abs(b(1, 0) - std::sqrt(0.5)) <= 1e-15);
  CHECK(std::abs(b(2, 1) - std::sqrt(2.0 / 3.0)) <= 1e-15);
  CHECK(std::abs(b(3, 2) - std::sqrt(0.75)) <= 1e-15);
}

TEST_CASE("product shifts have tensor structure") {
  const TruncatedSpace s(Weights{2, 3}, 5, 2);
  const ComplexMatrix m1 = shift_matrix(s, 0), m2 = shift_matrix(s, 1);
  CHECK((m1 * m2 - m2 * m1).norm() == 0.0);
  CHECK((m1 * m2.adjoint() - m2.adjoint() * m1).norm() == 0.0);
  const ComplexMatrix i6 = ComplexMatrix::Identity(6, 6), i2 = ComplexMatrix::Identity(2, 2);
  CHECK((m1 - oracle::kron(oracle::kron(oracle::shift_1d(2, 5), i6), i2)).norm() <= 1e-14);
  CHECK((m2 - oracle::kron(oracle::kron(i6, oracle::shift_1d(3, 5)), i2)).norm() <= 1e-14);
  std::mt19937_64 rng(33);
  const ComplexMatrix x = oracle::random_matrix(s.total_dim(), 3, rng);
  CHECK((apply_shift(s, 1, x) - m2 * x).norm() <= 1e-13);
  CHECK((apply_shift(s, 0, x, true) - m1.adjoint() * x).norm() <= 1e-13);
  CHECK_THROWS_AS(shift_matrix(s, 2), Error);
}

TEST_CASE("hat_weight") {
  CHECK(hat_weight(Weights{2, 3}, 0) == Weights{1, 3});
  CHECK(hat_weight(Weights{2, 3}, 1) == Weights{2, 1});
  CHECK(hat_weight(Weights{1, 1, 1}, 2) == Weights{1, 1, 1});
  CHECK_THROWS_AS(hat_weight(Weights{1, 1}, 2), Error);
}

}
