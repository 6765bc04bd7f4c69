#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ndlab/roe.hpp"
#include "support.hpp"

using namespace ndlab;

namespace {

std::shared_ptr<const CoarseSpace> interval(Index len) {
  return std::make_shared<const CoarseSpace>(CoarseSpace::z_interval(len));
}

CMatrix diag_of(const std::vector<double>& d) {
  CMatrix m = CMatrix::Zero(static_cast<Index>(d.size()), static_cast<Index>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) m(static_cast<Index>(i), static_cast<Index>(i)) = d[i];
  return m;
}

// Pairwise same-family distances, by brute force over points.
Index brute_discreteness(const CoarseSpace& s, const DiscreteCover& c) {
  Index best = std::numeric_limits<Index>::max();
  for (const auto& fam : c.families)
    for (std::size_t u = 0; u < fam.size(); ++u)
      for (std::size_t v = u + 1; v < fam.size(); ++v)
        for (Index x : fam[u])
          for (Index y : fam[v]) best = std::min(best, s.dist(x, y));
  return best;
}

}  // namespace

TEST_CASE("coarse spaces") {
  const CoarseSpace z = CoarseSpace::z_interval(50);
  CHECK(z.ball_growth(0) == 1);
  CHECK(z.ball_growth(1) == 3);
  CHECK(z.ball_growth(5) == 11);
  const CoarseSpace g = CoarseSpace::grid(2, 10);
  CHECK(g.size() == 100);
  CHECK(g.dist(0, 99) == 18);
  CHECK(g.ball_growth(1) == 5);
  CHECK(g.ball_growth(2) == 13);
  for (Index r = 0; r < 6; ++r) CHECK(g.ball_growth(r) <= g.ball_growth(r + 1));

  CHECK_NOTHROW(CoarseSpace(3, {0, 1, 2, 1, 0, 1, 2, 1, 0}));
  CHECK_THROWS_AS(CoarseSpace(3, {0, 1, 3, 1, 0, 1, 3, 1, 0}), InputError);
  CHECK_THROWS_AS(CoarseSpace(2, {0, 1, 2, 0}), InputError);
  CHECK_THROWS_AS(CoarseSpace(2, {0, 0, 0, 0}), InputError);
  CHECK_THROWS_AS(CoarseSpace::z_interval(0), InputError);
}

TEST_CASE("norm bound for band matrices") {
  auto z = interval(50);
  const NormBound id = norm_bound_check(BandMatrix::identity(z));
  CHECK(id.norm == doctest::Approx(1.0));
  CHECK(id.bound == 1.0);
  CHECK(id.holds);
  const NormBound sh = norm_bound_check(BandMatrix::shift(z));
  CHECK(sh.bound == 3.0);
  CHECK(sh.norm <= 1.0 + 1e-12);
  CHECK(sh.norm > 0.99);

  auto g = std::make_shared<const CoarseSpace>(CoarseSpace::grid(2, 10));
  std::mt19937_64 rng(derive_seed(0, 10));
  for (int t = 0; t < 50; ++t) {
    const BandMatrix a = BandMatrix::random(g, 2, 1.0, rng);
    CHECK(a.width() == 2);
    CHECK(a.entry_bound() <= 1.0);
    CHECK(norm_bound_check(a).holds);
  }
}

TEST_CASE("covers of Z and Z^d") {
  const CoarseSpace z8 = CoarseSpace::z_interval(8);
  const DiscreteCover c = cover_Z(z8, 2);
  REQUIRE(c.num_families() == 2);
  CHECK(c.families[0] == PointSets{{0, 1, 2, 3}});
  CHECK(c.families[1] == PointSets{{4, 5, 6, 7}});

  for (Index R : {1, 2, 3, 7}) {
    const CoarseSpace z = CoarseSpace::z_interval(100);
    const DiscreteCover cz = cover_Z(z, R);
    CHECK(cz.num_families() == 2);
    CHECK(cz.discreteness == 2 * R + 1);
    CHECK(brute_discreteness(z, cz) == 2 * R + 1);
    CHECK(cz.diameter_bound == 2 * R - 1);
  }
  CHECK_THROWS_AS(cover_Z(z8, 0), InputError);
  CHECK_THROWS_AS(cover_Z(CoarseSpace::grid(2, 3), 1), InputError);

  const CoarseSpace g = CoarseSpace::grid(2, 12);
  const DiscreteCover cg = cover_Zd(g, 1, 2, 12);
  CHECK(cg.num_families() == 3);
  CHECK(brute_discreteness(g, cg) >= 3);
  CHECK(cg.discreteness == brute_discreteness(g, cg));
  std::vector<int> hits(144, 0);
  for (const auto& fam : cg.families)
    for (const auto& set : fam)
      for (Index x : set) ++hits[static_cast<std::size_t>(x)];
  CHECK(std::count(hits.begin(), hits.end(), 0) == 0);

  const CoarseSpace z24 = CoarseSpace::z_interval(24);
  const DiscreteCover d1 = cover_Zd(z24, 2, 1, 24);
  const DiscreteCover zc = cover_Z(z24, 2);
  CHECK(d1.families == zc.families);
  CHECK_THROWS_AS(cover_Zd(CoarseSpace::grid(2, 5), 1, 2, 5), InputError);
}

TEST_CASE("h family on the 8-point example") {
  const CoarseSpace z8 = CoarseSpace::z_interval(8);
  const DiscreteCover c = cover_Z(z8, 2);
  const HFamily hf = h_family(z8, c, 2);
  const Rational half(1, 2);
  const std::vector<Rational> h0{1, 1, 1, 1, half, 0, 0, 0}, h1{0, 0, 0, half, 1, 1, 1, 1};
  const std::vector<Rational> h{1, 1, 1, Rational(3, 2), Rational(3, 2), 1, 1, 1};
  CHECK(hf.h_raw[0] == h0);
  CHECK(hf.h_raw[1] == h1);
  CHECK(hf.h_total == h);
  for (Index x = 0; x < 8; ++x) {
    double s = 0.0;
    for (const auto& hi : hf.h_norm) s += hi[static_cast<std::size_t>(x)] * hi[static_cast<std::size_t>(x)];
    CHECK(std::abs(s - 1.0) <= 1e-12);
  }
  CHECK(lipschitz_excess(z8, hf) <= 0);
  CHECK_THROWS_AS(h_family(z8, cover_Z(CoarseSpace::z_interval(20), 2), 3), PreconditionError);

  const CoarseSpace g = CoarseSpace::grid(2, 12);
  const HFamily hg = h_family(g, cover_Zd(g, 1, 2, 12), 1);
  CHECK(lipschitz_excess(g, hg) <= 0);
  for (const Rational& t : hg.h_total) {
    CHECK(t >= 1);
    CHECK(t <= 3);
  }
}

TEST_CASE("commutator bounds") {
  auto z8 = interval(8);
  const DiscreteCover c = cover_Z(*z8, 2);
  const HFamily hf = h_family(*z8, c, 2);
  const BandMatrix a = BandMatrix::shift(z8);

  CMatrix h0 = CMatrix::Zero(8, 8);
  const double h0v[8] = {1, 1, 1, 1, 0.5, 0, 0, 0};
  for (int x = 0; x < 8; ++x) h0(x, x) = h0v[x];
  const double direct = operator_norm(CMatrix(h0 * a.entries - a.entries * h0));
  CHECK(direct == doctest::Approx(0.5));

  const CommutatorReport rep = commutator_report(a, hf);
  CHECK(rep.per_family[0] == doctest::Approx(direct));
  CHECK(rep.per_family_bound[0] == doctest::Approx(0.5 * 3.0 * operator_norm(a.entries)));
  CHECK(rep.holds);

  const CommutatorReport d = commutator_report(BandMatrix::diagonal(z8, {1, 2, 3, 4, 5, 6, 7, 8}), hf);
  CHECK(d.total == 0.0);
  CHECK(d.per_family[0] == 0.0);

  auto z = interval(200);
  std::mt19937_64 rng(derive_seed(0, 11));
  for (Index r : {2, 4, 8}) {
    const DiscreteCover cz = cover_Z(*z, r);
    const HFamily hz = h_family(*z, cz, r);
    for (int t = 0; t < 10; ++t) {
      const BandMatrix b = BandMatrix::random(z, 1 + t % 3, 1.0, rng);
      CHECK(commutator_report(b, hz).holds);
    }
  }
}

TEST_CASE("Psi_r blocks") {
  auto z8 = interval(8);
  const DiscreteCover c = cover_Z(*z8, 2);
  const HFamily hf = h_family(*z8, c, 2);

  const PsiBlocks id = psi_r(BandMatrix::identity(z8), hf, c);
  CHECK(id.max_residual() == 0.0);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t u = 0; u < id.blocks[i].size(); ++u) {
      const auto& s = id.supports[i][u];
      for (std::size_t p = 0; p < s.size(); ++p) {
        const double hv = hf.h_norm[i][static_cast<std::size_t>(s[p])];
        CHECK(id.blocks[i][u](static_cast<Index>(p), static_cast<Index>(p)).real() == doctest::Approx(hv * hv));
      }
    }

  const BandMatrix a = BandMatrix::shift(z8);
  const PsiBlocks ps = psi_r(a, hf, c);
  CHECK(ps.max_residual() == 0.0);
  CHECK(ps.supports[0] == PointSets{{0, 1, 2, 3, 4}});
  CHECK(ps.supports[1] == PointSets{{3, 4, 5, 6, 7}});
  for (std::size_t i = 0; i < 2; ++i) {
    const CMatrix full = diag_of(hf.h_norm[i]) * a.entries * diag_of(hf.h_norm[i]);
    const auto& s = ps.supports[i][0];
    for (std::size_t p = 0; p < s.size(); ++p)
      for (std::size_t q = 0; q < s.size(); ++q)
        CHECK(std::abs(ps.blocks[i][0](static_cast<Index>(p), static_cast<Index>(q)) - full(s[p], s[q])) <= 1e-15);
    CHECK(operator_norm(ps.blocks[i][0]) <= operator_norm(a.entries) + 1e-12);
  }
}

TEST_CASE("Phi_r Psi_r defect") {
  auto z = interval(200);
  std::mt19937_64 rng(derive_seed(0, 12));
  double prev = std::numeric_limits<double>::infinity();
  for (Index r : {2, 4, 8, 16, 32}) {
    const DiscreteCover c = cover_Z(*z, r);
    const HFamily hf = h_family(*z, c, r);
    const PhiPsiReport one = phi_psi_defect(BandMatrix::identity(z), hf, c);
    CHECK(one.defect <= 1e-12);
    CHECK(one.unital_defect <= 1e-12);
    std::vector<double> d(200);
    for (double& v : d) v = std::uniform_real_distribution<double>(-1, 1)(rng);
    CHECK(phi_psi_defect(BandMatrix::diagonal(z, d), hf, c).defect <= 1e-12);

    const PhiPsiReport sh = phi_psi_defect(BandMatrix::shift(z), hf, c);
    CHECK(sh.residual == 0.0);
    CHECK(sh.holds);
    CHECK(sh.defect < prev);
    CHECK(sh.fitted_c == doctest::Approx(sh.defect * double(r)));
    prev = sh.defect;
  }
}

TEST_CASE("block embedding is a *-homomorphism") {
  std::mt19937_64 rng(derive_seed(0, 13));
  const PointSets supports{{0, 3, 4}, {1, 2}, {6}};
  std::vector<CMatrix> x, y, xy, xs;
  for (const auto& s : supports) {
    const auto m = static_cast<Index>(s.size());
    x.push_back(testing::random_matrix(rng, m, m));
    y.push_back(testing::random_matrix(rng, m, m));
    xy.push_back(x.back() * y.back());
    xs.push_back(x.back().adjoint());
  }
  const CMatrix ex = embed_blocks(supports, x, 8), ey = embed_blocks(supports, y, 8);
  CHECK((embed_blocks(supports, xy, 8) - ex * ey).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((embed_blocks(supports, xs, 8) - ex.adjoint()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK_THROWS_AS(embed_blocks(PointSets{{0, 1}, {1}}, {CMatrix::Zero(2, 2), CMatrix::Zero(1, 1)}, 3), InputError);
}
