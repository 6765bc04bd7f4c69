#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "ndlab/fock.hpp"
#include "support.hpp"

using namespace ndlab;

namespace {

Word w(std::initializer_list<int> letters) { return Word{letters}; }

std::vector<Word> words_up_to(int n, Index len) {
  std::vector<Word> out{Word{}};
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].length() == len) continue;
    for (int a = 1; a <= n; ++a) {
      Word next = out[i];
      next.letters.push_back(a);
      out.push_back(next);
    }
  }
  return out;
}

// T_mu T_nu^* as a product of creation matrices.
CMatrix creation_product(const TruncatedFock& fock, const Word& mu, const Word& nu) {
  CMatrix m = CMatrix::Identity(fock.dim(), fock.dim());
  for (int a : mu.letters) m = m * creation(fock, a).matrix.to_dense();
  for (auto it = nu.letters.rbegin(); it != nu.letters.rend(); ++it) m = m * creation(fock, *it).matrix.to_dense().adjoint();
  return m;
}

// A_k + B_k built by placing kappa blocks on the diagonal of an N x N matrix.
RationalMatrix direct_ab(Index k, Index N) {
  const Index l = (k + 1) / 2;
  const RationalMatrix kappa = kappa_matrix(k);
  RationalMatrix m(N, N);
  for (Index start : {k, k + l}) {
    for (Index b = start; b < N; b += k)
      for (Index i = 0; i < k && b + i < N; ++i)
        for (Index j = 0; j < k && b + j < N; ++j) m(b + i, b + j) += kappa(i, j);
  }
  return m;
}

}  // namespace

TEST_CASE("truncated Fock basis") {
  for (int n : {2, 3, 5})
    for (Index L : {0, 1, 4}) {
      TruncatedFock f(n, L);
      Index expected = 0, p = 1;
      for (Index l = 0; l <= L; ++l, p *= n) {
        CHECK(f.level_size(l) == p);
        expected += p;
      }
      CHECK(f.dim() == expected);
      for (Index i = 0; i < f.dim(); ++i) CHECK(f.index(f.word(i)) == i);
    }
  TruncatedFock f(2, 2);
  CHECK(f.index(Word{}) == 0);
  CHECK(f.index(w({1, 2})) == 4);
  CHECK_THROWS_AS(f.index(w({1, 1, 1})), InputError);
  CHECK_THROWS_AS(f.index(w({3})), InputError);
  CHECK_THROWS_AS(TruncatedFock(1, 3), InputError);
}

TEST_CASE("d_k is congruent to k mod n - 1") {
  for (int n = 2; n <= 6; ++n)
    for (int k = 1; k <= 20; ++k) {
      const BigInt d = fock_dk(n, k);
      CHECK(d % (n - 1) == BigInt(k) % (n - 1));
      if (k <= 8) CHECK(d == BigInt(TruncatedFock(n, k - 1).dim()));
    }
}

TEST_CASE("creation operators") {
  TruncatedFock f(2, 4);
  const CMatrix t1 = creation(f, 1).matrix.to_dense();
  const CMatrix t2 = creation(f, 2).matrix.to_dense();
  CHECK(t1(f.index(w({1})), 0) == Complex(1.0));
  CHECK(t1.col(0).norm() == doctest::Approx(1.0));

  CMatrix top = CMatrix::Zero(f.dim(), f.dim());
  for (Index i = f.level_offset(4); i < f.dim(); ++i) top(i, i) = 1.0;
  const CMatrix one = CMatrix::Identity(f.dim(), f.dim());
  CHECK((t1.adjoint() * t1 - (one - top)).norm() == 0.0);
  CHECK((t2.adjoint() * t2 - (one - top)).norm() == 0.0);
  CHECK(t1.adjoint() * t2 == CMatrix::Zero(f.dim(), f.dim()));

  // Sum of range projections: everything except the vacuum.
  CMatrix vac = CMatrix::Zero(f.dim(), f.dim());
  vac(0, 0) = 1.0;
  CHECK((t1 * t1.adjoint() + t2 * t2.adjoint() - (one - vac)).norm() == 0.0);
  CHECK_THROWS_AS(creation(f, 3), InputError);
  CHECK(creation(f, 1).level_band() == 1);
}

TEST_CASE("word operators") {
  TruncatedFock f(2, 2);
  CHECK(word_op(f, Word{}, Word{}).matrix.to_dense() == CMatrix::Identity(f.dim(), f.dim()));

  const SparseOp s = word_op(f, w({1}), Word{}).matrix;
  CHECK(s.nonzeros() == 3);
  CHECK(s.coeff(f.index(w({1})), f.index(Word{})) == Complex(1.0));
  CHECK(s.coeff(f.index(w({1, 1})), f.index(w({1}))) == Complex(1.0));
  CHECK(s.coeff(f.index(w({1, 2})), f.index(w({2}))) == Complex(1.0));
  CHECK_THROWS_AS(word_op(f, w({1, 1, 1}), Word{}), InputError);

  for (auto [n, L] : {std::pair{2, 5}, std::pair{3, 3}}) {
    TruncatedFock g(n, L);
    for (const Word& mu : words_up_to(n, 2))
      for (const Word& nu : words_up_to(n, 2)) {
        const LevelOperator op = word_op(g, mu, nu);
        CHECK((op.matrix.to_dense() - creation_product(g, mu, nu)).norm() == 0.0);
        CHECK(op.level_band() == std::abs(mu.length() - nu.length()));
      }
  }
}

TEST_CASE("kappa matrices") {
  const RationalMatrix k4 = kappa_matrix(4);
  const int pattern[4][4] = {{1, 1, 1, 1}, {1, 2, 2, 1}, {1, 2, 2, 1}, {1, 1, 1, 1}};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(k4(i, j) == Rational(pattern[i][j], 3));
  CHECK(kappa_matrix(5)(2, 2) == Rational(3, 4));
  CHECK(kappa_matrix(1)(0, 0) == Rational(1, 2));
  CHECK_THROWS_AS(kappa_matrix(0), InputError);

  for (Index k = 1; k <= 64; ++k) {
    const RationalMatrix q = kappa_matrix(k);
    for (Index i = 0; i < k; ++i)
      for (Index j = 0; j < k; ++j) {
        CHECK(q(i, j) == q(j, i));
        CHECK(q(i, j) >= 0);
        CHECK(q(i, j) <= 1);
      }
    const RMatrix r = q.to_real();
    Eigen::SelfAdjointEigenSolver<RMatrix> es(r);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
    // As a matrix kappa_k is not a contraction once k >= 3 (row sums grow
    // with k); as a Schur multiplier its norm is the largest diagonal entry.
    if (k >= 3) CHECK(es.eigenvalues().maxCoeff() > 1.0);
    const Index l = (k + 1) / 2;
    CHECK(q.to_real().diagonal().maxCoeff() == doctest::Approx(double(l) / double(l + 1)));
  }
  CHECK(kappa_matrix(2).to_real().norm() == doctest::Approx(1.0));

  std::mt19937_64 rng(derive_seed(0, 3));
  for (Index k : {3, 8, 17}) {
    const RMatrix q = kappa_matrix(k).to_real();
    for (int trial = 0; trial < 20; ++trial) {
      const CMatrix x = testing::random_matrix(rng, k, k);
      CHECK(operator_norm(CMatrix(x.cwiseProduct(q.cast<Complex>()))) <= operator_norm(x) + 1e-12);
    }
  }
}

TEST_CASE("sigma profile matches direct summation") {
  for (Index k = 2; k <= 12; ++k) {
    const SchurProfile prof(k);
    const Index N = prof.stable_start() + 3 * k;
    const RationalMatrix ab = direct_ab(k, N);
    for (Index i = 1; i <= N; ++i)
      for (Index j = 1; j <= N; ++j) REQUIRE(prof.sigma(i, j) == ab(i - 1, j - 1));
  }
  const SchurProfile p4(4);
  CHECK(p4.sigma(7, 7) == 1);
  CHECK(p4.sigma(5, 5) == Rational(1, 3));
  CHECK(p4.sigma(6, 6) == Rational(2, 3));
  CHECK(p4.at_levels(4, 4) == Rational(1, 3));
  const SchurProfile p6(6);
  Rational d = 1 - p6.sigma(12, 14);
  CHECK(abs(d) <= Rational(4, 4));
  CHECK_THROWS_AS(SchurProfile(1), InputError);
  CHECK_THROWS_AS(p4.sigma(0, 1), InputError);
}

TEST_CASE("sigma claims in the stable zone") {
  for (Index k = 2; k <= 32; ++k) {
    const SchurProfile prof(k);
    const Index l = prof.l();
    Index below_one = 0;
    for (Index i = k + l + 1; i <= k + l + 2 * k; ++i) {
      // Odd k: the two diagonal tents add up to l + 1 on about half the residues.
      if (k % 2 == 0) {
        CHECK(prof.sigma(i, i) == 1);
      } else if (prof.sigma(i, i) != 1) {
        CHECK(prof.sigma(i, i) == Rational(l, l + 1));
        ++below_one;
      }
      for (Index p = 1; p < l; ++p) {
        Rational d = 1 - prof.sigma(i, i + p);
        CHECK(abs(d) <= Rational(2 + p, l + 1));
      }
    }
    CHECK(below_one == (k % 2 == 0 ? 0 : k - 1));
    // Inside (k, k + l] the diagonal is below 1.
    for (Index i = k + 1; i <= k + l; ++i) CHECK(prof.sigma(i, i) < 1);
  }
}

TEST_CASE("schur multiplication") {
  TruncatedFock f(2, 6);
  std::mt19937_64 rng(derive_seed(0, 1));
  const CMatrix dense = testing::random_matrix(rng, f.dim(), f.dim());
  const LevelOperator a{f, SparseOp::from_dense(dense)};
  const Index first = 2, k = 3;
  const Index lo = f.level_offset(first), dim = f.level_offset(first + k) - lo;

  RationalMatrix ones(k, k), zeros(k, k);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j) ones(i, j) = 1;
  const FockWindow same = schur_mult(ones, a, first);
  CHECK((same.matrix.to_dense() - dense.block(lo, lo, dim, dim)).norm() == 0.0);
  CHECK(schur_mult(zeros, a, first).matrix.empty());

  const FockWindow diag = schur_mult(kappa_matrix(4), identity_op(f), 1);
  const RMatrix k4 = kappa_matrix(4).to_real();
  for (Index i = 0; i < diag.dim(); ++i)
    CHECK(diag.matrix.coeff(i, i).real() == doctest::Approx(k4(f.level_of(i + f.level_offset(1)) - 1, f.level_of(i + f.level_offset(1)) - 1)));
  CHECK(operator_norm(schur_mult(kappa_matrix(3), a, 2).matrix) <= operator_norm(dense) + 1e-9);
  CHECK_THROWS_AS(schur_mult(kappa_matrix(4), a, 4), InputError);
}

TEST_CASE("Lambda_k") {
  TruncatedFock f(2, 6);
  const Index k = 2, first = 2;
  FockWindow unit = make_window(f, first, k, SparseOp::identity(f.level_offset(first + k) - f.level_offset(first)));
  const SparseOp id = lambda_k(unit).matrix;
  for (Index i = 0; i < f.dim(); ++i) CHECK(id.coeff(i, i) == Complex(f.level_of(i) >= first ? 1.0 : 0.0));
  CHECK(id.nonzeros() == f.dim() - f.level_offset(first));

  // Lambda_k(e_{mu,nu}) is T_mu T_nu^* kept on suffixes of length 0 mod k.
  for (const Word& mu : words_up_to(2, 3))
    for (const Word& nu : words_up_to(2, 3)) {
      if (mu.length() < first || nu.length() < first) continue;
      const Index s = f.index(mu) - f.level_offset(first), t = f.index(nu) - f.level_offset(first);
      const SparseOp lam = lambda_k_unit(f, first, k, s, t, LambdaMode::Partial);
      std::vector<Triplet> kept;
      word_op(f, mu, nu).matrix.for_each([&](Index r, Index c, Complex v) {
        if ((f.level_of(r) - mu.length()) % k == 0) kept.push_back({r, c, v});
      });
      CHECK((lam - SparseOp(f.dim(), f.dim(), kept)).empty());
    }

  // *-homomorphism on complete copies.
  TruncatedFock g(2, 9);
  std::mt19937_64 rng(derive_seed(0, 2));
  for (Index r : {0, 1, 3}) {
    const Index dim = g.level_offset(r + 3) - g.level_offset(r);
    const CMatrix x = testing::random_matrix(rng, dim, dim), y = testing::random_matrix(rng, dim, dim);
    auto lam = [&](const CMatrix& m) { return lambda_k(make_window(g, r, 3, SparseOp::from_dense(m)), LambdaMode::CompleteCopies).matrix; };
    CHECK(operator_norm(lam(x * y) - lam(x) * lam(y)) <= 1e-10);
    CHECK(operator_norm(lam(x.adjoint()) - lam(x).adjoint()) <= 1e-10);
    CHECK(is_order_zero(lambda_source(g, r, 3, LambdaMode::CompleteCopies), 1e-10));
  }
  CHECK_THROWS_AS(make_window(g, 8, 3, SparseOp(1, 1)), InputError);
}

TEST_CASE("psi_k and phi_k") {
  TruncatedFock f(2, 10);
  const Index k = 4;
  CHECK(psi_min_depth(k) == 9);
  CHECK_THROWS_AS(psi_k(identity_op(TruncatedFock(2, 8)), k), InputError);

  const FockPair zero = psi_k(LevelOperator{f, SparseOp(f.dim(), f.dim())}, k);
  CHECK(zero.p.matrix.empty());
  CHECK(zero.q.matrix.empty());
  CHECK(phi_k(zero).matrix.empty());

  const FockPair one = psi_k(identity_op(f), k);
  CHECK(one.p.first == 4);
  CHECK(one.q.first == 6);
  CHECK(one.p.dim() == 16 + 32 + 64 + 128);
  CHECK(one.q.matrix.coeff(0, 0) == Complex(1.0 / 3.0));

  const FockTripleReport rep = fock_triple_report(f, k);
  CHECK(rep.psi_norm == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(rep.phi_norm == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(rep.psi_profile_min_eigenvalue >= -1e-10);
  CHECK(rep.p_summand.residual() <= 1e-10);
  CHECK(rep.q_summand.residual() <= 1e-10);
  CHECK(rep.p_summand.orthogonality <= 1e-10);
}

TEST_CASE("psi_k Choi matrix, dense") {
  TruncatedFock f(2, 4);
  const Index k = 2, d = f.dim();
  const Index dp = f.level_offset(4) - f.level_offset(2), dq = f.level_offset(5) - f.level_offset(3);
  const Index D = dp + dq;
  CMatrix choi = CMatrix::Zero(d * D, d * D);
  for (Index s = 0; s < d; ++s)
    for (Index t = 0; t < d; ++t) {
      const FockPair img = psi_k(LevelOperator{f, SparseOp(d, d, {{s, t, 1.0}})}, k);
      choi.block(s * D, t * D, dp, dp) = img.p.matrix.to_dense();
      choi.block(s * D + dp, t * D + dp, dq, dq) = img.q.matrix.to_dense();
    }
  CHECK(psd_check(choi, 1e-10).is_psd);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(window_profile(f, 2, k), Eigen::EigenvaluesOnly);
  CHECK(es.eigenvalues().minCoeff() >= -1e-10);
}

TEST_CASE("Calkin defect") {
  const CalkinDefect same = calkin_defect(w({1, 2}), w({2, 1}), 8);
  CHECK(same.exact_sup == 0);
  CHECK(same.paper_bound == Rational(1, 2));
  CHECK_FALSE(same.composite_matches_schur.has_value());

  const CalkinDefect shift = calkin_defect(w({1}), Word{}, 8);
  CHECK(shift.paper_bound == Rational(3, 4));
  CHECK(shift.exact_sup == Rational(1, 5));
  CHECK(shift.holds());
  CHECK_THROWS_AS(calkin_defect(w({1, 1}), Word{}, 4), PreconditionError);

  // Direct tail scan of the profile.
  for (Index k : {6, 9, 14}) {
    const SchurProfile prof(k);
    for (Index p = -2; p <= 2; ++p) {
      Word mu, nu;
      mu.letters.assign(static_cast<std::size_t>(p < 0 ? -p : 0), 1);
      nu.letters.assign(static_cast<std::size_t>(p > 0 ? p : 0), 2);
      Rational best = 0;
      for (Index i = 5 * k; i < 9 * k; ++i) {
        Rational d = 1 - prof.sigma(i, i + p);
        best = std::max(best, d < 0 ? Rational(-d) : d);
      }
      CHECK(calkin_defect(mu, nu, k).exact_sup == best);
    }
  }

  const std::vector<Word> short_words = words_up_to(2, 2);
  for (const Word& mu : short_words)
    for (const Word& nu : short_words) {
      Rational prev = -1;
      for (Index k = 8; k <= 32; k += 4) {
        const CalkinDefect c = calkin_defect(mu, nu, k);
        CHECK(c.holds());
        if (prev >= 0) CHECK(c.exact_sup <= prev);
        prev = c.exact_sup;
      }
    }

  const TruncatedFock f(2, 11);
  for (const Word& mu : words_up_to(2, 1))
    for (const Word& nu : words_up_to(2, 1)) {
      const CalkinDefect c = calkin_defect(mu, nu, 4, f);
      REQUIRE(c.composite_matches_schur.has_value());
      CHECK(*c.composite_matches_schur);
    }
}
