#include <doctest.h>

#include <algorithm>
#include <functional>

#include "lanolem/errors.hpp"
#include "lanolem/polybasis.hpp"
#include "oracles/moments.hpp"
#include "oracles/random.hpp"

using namespace lanolem;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

long binomial(int n, int r) {
  long out = 1;
  for (int i = 1; i <= r; ++i) out = out * (n - r + i) / i;
  return out;
}

}  // namespace

TEST_CASE("basis k=2 d_phi=2 lists s1^2, s1 s2, s2^2") {
  const PolyBasis basis = enumerate_basis(2, 2);
  REQUIRE(basis.k_phi() == 3);
  CHECK(basis.monomials()[0].exponents == std::vector<int>{2, 0});
  CHECK(basis.monomials()[1].exponents == std::vector<int>{1, 1});
  CHECK(basis.monomials()[2].exponents == std::vector<int>{0, 2});
}

TEST_CASE("basis k=1 d_phi=3 lists s^2, s^3") {
  const PolyBasis basis = enumerate_basis(1, 3);
  REQUIRE(basis.k_phi() == 2);
  CHECK(basis.monomials()[0].exponents == std::vector<int>{2});
  CHECK(basis.monomials()[1].exponents == std::vector<int>{3});
}

TEST_CASE("basis size and order agree with brute-force enumeration") {
  for (int k = 1; k <= 4; ++k) {
    for (int d_phi = 2; d_phi <= 4; ++d_phi) {
      const PolyBasis basis = enumerate_basis(k, d_phi);
      CHECK(basis.k_phi() == binomial(k + d_phi, d_phi) - k - 1);
      std::vector<std::vector<int>> expected;
      for (int deg = 2; deg <= d_phi; ++deg) {
        auto level = oracle::brute_force_exponents(k, deg);
        std::sort(level.begin(), level.end(), std::greater<>());
        expected.insert(expected.end(), level.begin(), level.end());
      }
      REQUIRE(static_cast<int>(expected.size()) == basis.k_phi());
      for (int j = 0; j < basis.k_phi(); ++j) CHECK(basis.monomials()[j].exponents == expected[j]);
    }
  }
  CHECK(enumerate_basis(3, 2).k_phi() == 6);
}

TEST_CASE("basis rejects d_phi < 2 and k < 1") {
  CHECK_THROWS_AS(enumerate_basis(2, 1), InvalidArgument);
  CHECK_THROWS_AS(enumerate_basis(0, 2), InvalidArgument);
}

TEST_CASE("phi examples") {
  CHECK(phi(enumerate_basis(2, 2), vec({1, 0})).isApprox(vec({1, 0, 0})));
  CHECK(phi(enumerate_basis(2, 2), vec({2, 3})).isApprox(vec({4, 6, 9})));
  CHECK(phi(enumerate_basis(1, 3), vec({-2})).isApprox(vec({4, -8})));
}

TEST_CASE("phi matches the exponent-loop oracle") {
  oracle::Rng rng(11);
  for (int k = 1; k <= 4; ++k) {
    const PolyBasis basis = enumerate_basis(k, 4);
    const Vector s = rng.vector(k);
    const Vector got = phi(basis, s);
    for (int j = 0; j < basis.k_phi(); ++j) {
      CHECK(got[j] == doctest::Approx(oracle::monomial(basis.monomials()[j].exponents, s)).epsilon(1e-14));
    }
  }
}

TEST_CASE("phi_jacobian examples") {
  Matrix expected(3, 2);
  expected << 4, 0, 3, 2, 0, 6;
  CHECK(phi_jacobian(enumerate_basis(2, 2), vec({2, 3})).isApprox(expected));
  CHECK(phi_jacobian(enumerate_basis(1, 2), vec({0}))(0, 0) == 0.0);
}

TEST_CASE("phi_jacobian matches symbolic differentiation") {
  oracle::Rng rng(12);
  const PolyBasis basis = enumerate_basis(3, 4);
  const Vector s = rng.vector(3);
  const Matrix J = phi_jacobian(basis, s);
  for (int j = 0; j < basis.k_phi(); ++j) {
    for (int i = 0; i < 3; ++i) {
      std::vector<int> e = basis.monomials()[j].exponents;
      const int p = e[i];
      double expected = 0.0;
      if (p > 0) {
        e[i] -= 1;
        expected = p * oracle::monomial(e, s);
      } else {
        CHECK(J(j, i) == 0.0);
      }
      CHECK(J(j, i) == doctest::Approx(expected).epsilon(1e-13));
    }
  }
}

TEST_CASE("gaussian_moment examples") {
  CHECK(gaussian_moment(vec({0}), Matrix::Constant(1, 1, 1.0), {{2}}) == doctest::Approx(1.0));
  CHECK(gaussian_moment(vec({1}), Matrix::Constant(1, 1, 2.0), {{3}}) == doctest::Approx(7.0));
  Matrix corr(2, 2);
  corr << 1, 0.5, 0.5, 1;
  CHECK(gaussian_moment(vec({0, 0}), corr, {{1, 1}}) == doctest::Approx(0.5));
}

TEST_CASE("gaussian_moment univariate expansion") {
  // E[x^4] = mu^4 + 6 mu^2 s2 + 3 s2^2
  const double mu = -0.7, s2 = 1.3;
  CHECK(gaussian_moment(vec({mu}), Matrix::Constant(1, 1, s2), {{4}}) ==
        doctest::Approx(std::pow(mu, 4) + 6 * mu * mu * s2 + 3 * s2 * s2).epsilon(1e-13));
}

TEST_CASE("gaussian_moment equals Isserlis at zero mean") {
  oracle::Rng rng(13);
  for (int k = 1; k <= 4; ++k) {
    const Matrix sigma = rng.spd(k, 0.2, 2.0);
    for (int deg = 1; deg <= 4; ++deg) {
      for (const auto& e : oracle::brute_force_exponents(k, deg)) {
        CHECK(gaussian_moment(Vector::Zero(k), sigma, {e}) == doctest::Approx(oracle::isserlis_moment(e, sigma)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("gaussian_moment handles singular sigma and rejects asymmetric sigma") {
  Matrix sigma = Matrix::Zero(2, 2);
  sigma(0, 0) = 1.0;
  CHECK(gaussian_moment(vec({0, 2}), sigma, {{2, 1}}) == doctest::Approx(2.0));
  Matrix bad(2, 2);
  bad << 1, 0.3, 0.1, 1;
  CHECK_THROWS_AS(gaussian_moment(vec({0, 0}), bad, {{1, 1}}), InvalidArgument);
  CHECK_THROWS_AS(gaussian_moment(vec({0, 0}), Matrix::Identity(3, 2), {{1, 1}}), InvalidArgument);
}

TEST_CASE("expected_phi examples") {
  CHECK(expected_phi(enumerate_basis(1, 2), vec({1}), Matrix::Constant(1, 1, 1.0)).isApprox(vec({2})));
  CHECK(expected_phi(enumerate_basis(2, 2), vec({0, 0}), Matrix::Identity(2, 2)).isApprox(vec({1, 0, 1})));
  const PolyBasis basis = enumerate_basis(3, 3);
  const Vector mu = vec({0.3, -1.2, 2.0});
  CHECK((expected_phi(basis, mu, Matrix::Zero(3, 3)) - phi(basis, mu)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("monomial labels") {
  CHECK(monomial_label({2, 0, 1}) == "x1^2 x3");
  CHECK(monomial_label({0, 1}, "s") == "s2");
}
