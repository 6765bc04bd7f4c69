#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "ndlab/numkit.hpp"

using namespace ndlab;

namespace {

CMatrix random_matrix(std::mt19937_64& rng, Index r, Index c) {
  std::normal_distribution<double> g;
  CMatrix m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = Complex(g(rng), g(rng));
  return m;
}

// Largest singular value by power iteration on A*A, independent of the
// eigensolver path used by the library.
double power_norm(const CMatrix& a) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Ones(a.cols());
  double est = 0.0;
  for (int it = 0; it < 2000; ++it) {
    Eigen::VectorXcd w = a.adjoint() * (a * v);
    double nw = w.norm();
    if (nw == 0.0) return 0.0;
    v = w / nw;
    est = std::sqrt(nw);
  }
  return est;
}

}  // namespace

TEST_CASE("operator norm examples") {
  CHECK(operator_norm(CMatrix::Identity(5, 5)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(operator_norm(CMatrix::Zero(3, 4)) == 0.0);
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = Complex(0.0, -4.0);
  CHECK(operator_norm(d) == doctest::Approx(4.0).epsilon(1e-12));
  CMatrix bad = CMatrix::Identity(2, 2);
  bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(operator_norm(bad), InputError);
}

TEST_CASE("operator norm agrees with power iteration") {
  std::mt19937_64 rng(derive_seed(0, 1));
  for (int t = 0; t < 20; ++t) {
    CMatrix a = random_matrix(rng, 7, 5);
    CHECK(operator_norm(a) == doctest::Approx(power_norm(a)).epsilon(1e-8));
  }
}

TEST_CASE("norm is submultiplicative and satisfies the C* identity") {
  std::mt19937_64 rng(derive_seed(0, 2));
  for (int t = 0; t < 50; ++t) {
    CMatrix a = random_matrix(rng, 6, 6), b = random_matrix(rng, 6, 6);
    CHECK(operator_norm(a * b) <= operator_norm(a) * operator_norm(b) + 1e-9);
    double na = operator_norm(a);
    CHECK(std::abs(operator_norm(a.adjoint() * a) - na * na) <= 1e-8 * na * na);
  }
}

TEST_CASE("psd check") {
  CMatrix ones = CMatrix::Ones(2, 2);
  auto r = psd_check(ones, 1e-12);
  CHECK(r.is_psd);
  CHECK(std::abs(r.min_eigenvalue) < 1e-12);
  CMatrix flip(2, 2);
  flip << 0, 1, 1, 0;
  r = psd_check(flip, 1e-12);
  CHECK_FALSE(r.is_psd);
  CHECK(r.min_eigenvalue == doctest::Approx(-1.0));
  CMatrix skew(2, 2);
  skew << 0, 1, 0, 0;
  CHECK_THROWS_AS(psd_check(skew, 1e-12), InputError);
}

TEST_CASE("functional calculus") {
  std::mt19937_64 rng(derive_seed(0, 3));
  CMatrix x = random_matrix(rng, 5, 5);
  CMatrix h = x + x.adjoint();
  CHECK((hermitian_funcalc(h, [](double t) { return t; }) - h).cwiseAbs().maxCoeff() < 1e-12);
  // polynomial f(t) = 2 t^3 - t + 0.5 against direct evaluation
  CMatrix poly = 2.0 * h * h * h - h + 0.5 * CMatrix::Identity(5, 5);
  CMatrix fc = hermitian_funcalc(h, [](double t) { return 2 * t * t * t - t + 0.5; });
  CHECK((fc - poly).cwiseAbs().maxCoeff() < 1e-9);

  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 4;
  d(1, 1) = 9;
  CMatrix sq = hermitian_funcalc(d, [](double t) { return t * t; });
  CHECK(sq(0, 0).real() == doctest::Approx(16));
  CHECK(sq(1, 1).real() == doctest::Approx(81));

  d(0, 0) = 0.3;
  d(1, 1) = 0.7;
  CMatrix p = hermitian_funcalc(d, step_function(0.5));
  CHECK(std::abs(p(0, 0)) < 1e-15);
  CHECK(p(1, 1).real() == doctest::Approx(1.0));
  CHECK((p * p - p).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(step_function(0.5)(0.5) == 1.0);
}

TEST_CASE("pseudo inverse square root") {
  CHECK((pseudo_inverse_sqrt(CMatrix::Identity(3, 3)) - CMatrix::Identity(3, 3)).norm() < 1e-12);
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 4;
  CMatrix p = pseudo_inverse_sqrt(d, 1e-8);
  CHECK(p(0, 0).real() == doctest::Approx(0.5));
  CHECK(std::abs(p(1, 1)) < 1e-15);
  d(0, 0) = 9;
  d(1, 1) = 1e-12;
  p = pseudo_inverse_sqrt(d, 1e-8);
  CHECK(p(0, 0).real() == doctest::Approx(1.0 / 3.0));
  CHECK(std::abs(p(1, 1)) < 1e-15);
  d(1, 1) = -1.0;
  CHECK_THROWS_AS(pseudo_inverse_sqrt(d, 1e-8), InputError);
}

TEST_CASE("sparse operator matches dense arithmetic") {
  std::mt19937_64 rng(derive_seed(0, 4));
  std::uniform_int_distribution<int> coin(0, 3);
  auto sparse_random = [&](Index r, Index c) {
    CMatrix m = random_matrix(rng, r, c);
    for (Index i = 0; i < r; ++i)
      for (Index j = 0; j < c; ++j)
        if (coin(rng) != 0) m(i, j) = 0.0;
    return m;
  };
  for (int t = 0; t < 20; ++t) {
    CMatrix a = sparse_random(9, 7), b = sparse_random(7, 8), c = sparse_random(9, 7);
    SparseOp sa = SparseOp::from_dense(a), sb = SparseOp::from_dense(b), sc = SparseOp::from_dense(c);
    CHECK(((sa * sb).to_dense() - a * b).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(((sa + sc).to_dense() - (a + c)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(((sa - sc).to_dense() - (a - c)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((sa.adjoint().to_dense() - a.adjoint()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(operator_norm(sa) == doctest::Approx(operator_norm(a)).epsilon(1e-10));
    CMatrix h = a * a.adjoint() - 0.5 * CMatrix::Identity(9, 9);
    double lo = Eigen::SelfAdjointEigenSolver<CMatrix>(h).eigenvalues().minCoeff();
    CHECK(hermitian_min_eigenvalue(SparseOp::from_dense(h)) == doctest::Approx(lo).epsilon(1e-10));
    CHECK((kron(sa, sb).to_dense() - kron(a, b)).cwiseAbs().maxCoeff() < 1e-15);
  }
  SparseOp z = SparseOp::from_dense(CMatrix::Identity(3, 3)) - SparseOp::identity(3);
  CHECK(z.empty());
  CHECK(operator_norm(z) == 0.0);
}

TEST_CASE("sparse minimum eigenvalue counts uncovered indices as zero") {
  SparseOp m(4, 4, {{0, 0, 2.0}, {1, 1, 3.0}});
  CHECK(hermitian_min_eigenvalue(m) == 0.0);
  SparseOp full(2, 2, {{0, 0, 2.0}, {1, 1, 3.0}});
  CHECK(hermitian_min_eigenvalue(full) == doctest::Approx(2.0));
}

TEST_CASE("rationals are exact") {
  Rational a(1, 3), b(2, 7), c(-5, 11);
  CHECK((a + b) + c == a + (b + c));
  CHECK(a * b == b * a);
  CHECK((a * b) * c == a * (b * c));
  CHECK(to_string(Rational(6, 4)) == "3/2");
  CHECK(to_string(Rational(4, 2)) == "2");
  CHECK(parse_rational("-10/4") == Rational(-5, 2));
  CHECK(parse_rational("7") == Rational(7));
  CHECK_THROWS_AS(parse_rational("1/0"), InputError);
  CHECK_THROWS_AS(parse_rational("x"), InputError);
  CHECK(boost::multiprecision::denominator(Rational(10, 4)) == 2);
}

TEST_CASE("seed derivation is counter based") {
  CHECK(derive_seed(0, 5) == derive_seed(0, 5));
  CHECK(derive_seed(0, 5) != derive_seed(0, 6));
  CHECK(derive_seed(1, 5) != derive_seed(0, 5));
}
