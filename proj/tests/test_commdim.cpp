#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "ndlab/commdim.hpp"

using namespace ndlab;

namespace {

std::vector<double> sample(Index n, double (*f)(double)) {
  std::vector<double> v;
  for (Index p = 0; p < n; ++p) v.push_back(f(static_cast<double>(p) / static_cast<double>(n - 1)));
  return v;
}

// Brute-force chromatic number of the overlap graph (small graphs only).
int chromatic_number(const PointSets& sets) {
  const std::size_t n = sets.size();
  std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v)
      for (Index x : sets[u])
        if (std::find(sets[v].begin(), sets[v].end(), x) != sets[v].end()) adj[u][v] = adj[v][u] = 1;
  for (int k = 1;; ++k) {
    std::vector<int> col(n, -1);
    std::function<bool(std::size_t)> place = [&](std::size_t u) {
      if (u == n) return true;
      for (int c = 0; c < k; ++c) {
        bool ok = true;
        for (std::size_t v = 0; v < u && ok; ++v) ok = !(adj[u][v] && col[v] == c);
        if (!ok) continue;
        col[u] = c;
        if (place(u + 1)) return true;
      }
      col[u] = -1;
      return false;
    };
    if (place(0)) return k;
  }
}

int max_multiplicity(const PointSets& sets, Index n) {
  std::vector<int> count(static_cast<std::size_t>(n), 0);
  for (const auto& s : sets)
    for (Index x : s) ++count[static_cast<std::size_t>(x)];
  return *std::max_element(count.begin(), count.end());
}

}  // namespace

TEST_CASE("finite spaces") {
  FinSpace p = FinSpace::path(5);
  CHECK(p.dist(0, 4) == 4.0);
  FinSpace c = FinSpace::cycle(6);
  CHECK(c.dist(0, 5) == 1.0);
  CHECK(c.dist(0, 3) == 3.0);
  FinSpace g = FinSpace::grid(3, 4);
  CHECK(g.size() == 12);
  CHECK(g.dist(0, 11) == 5.0);
  CHECK(g.diameter({0, 5, 6}) == 3.0);
  RMatrix bad(3, 3);
  bad << 0, 1, 5, 1, 0, 1, 5, 1, 0;
  CHECK_THROWS_AS(FinSpace{bad}, InputError);
  RMatrix asym(2, 2);
  asym << 0, 1, 2, 0;
  CHECK_THROWS_AS(FinSpace{asym}, InputError);
}

TEST_CASE("greedy coloring") {
  FinSpace p = FinSpace::path(9);
  auto disjoint = greedy_color({{0, 1, 2}, {3, 4, 5}, {6, 7, 8}}, p);
  CHECK(disjoint.num_colors == 1);
  auto intervals = greedy_color({{0, 1, 2, 3}, {3, 4, 5}, {5, 6, 7}, {7, 8}}, p);
  CHECK(intervals.num_colors == 2);
  CHECK(intervals.color == std::vector<int>{0, 1, 0, 1});
  CHECK_THROWS_AS(greedy_color({{0, 1}, {3, 4}}, FinSpace::path(5)), InputError);
}

TEST_CASE("brick cover of a grid needs three colors") {
  const Index rows = 16, cols = 16;
  FinSpace g = FinSpace::grid(rows, cols);
  ColoredCover cover = grid_brick_cover(g, rows, cols, 1);
  CHECK(max_multiplicity(cover.sets, g.size()) == 3);
  CHECK(cover.num_colors == 3);
  CHECK(chromatic_number(cover.sets) == 3);
  CHECK(cover.num_colors <= 1 + max_multiplicity(cover.sets, g.size()));
}

TEST_CASE("interval covers of a path") {
  for (Index n : {16, 32, 128})
    for (double mesh : {1.0 / 8, 1.0 / 16, 1.0 / 32}) {
      FinSpace p = FinSpace::path(n);
      ColoredCover c = interval_cover(p, mesh);
      CHECK(c.num_colors == 2);
      CHECK_NOTHROW(c.validate(p));
    }
  ColoredCover c = interval_cover(FinSpace::path(128), 1.0 / 16);
  CHECK(c.diameter_bound / 127.0 <= 1.0 / 16);
}

TEST_CASE("partitions of unity") {
  FinSpace p = FinSpace::path(6);
  ColoredCover whole = greedy_color({{0, 1, 2, 3, 4, 5}}, p);
  auto one = build_pou(whole, p);
  for (double v : one.theta[0]) CHECK(v == 1.0);

  ColoredCover halves = greedy_color({{0, 1, 2, 3}, {2, 3, 4, 5}}, p);
  auto two = build_pou(halves, p);
  for (Index x = 0; x < 6; ++x) {
    CHECK(two.theta[0][x] + two.theta[1][x] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(two.theta[0][x] <= 1.0);
    CHECK(two.theta[1][x] <= 1.0);
  }

  FinSpace g = FinSpace::path(16);
  ColoredCover four = greedy_color({{0, 1, 2, 3, 4}, {3, 4, 5, 6, 7, 8}, {7, 8, 9, 10, 11, 12}, {11, 12, 13, 14, 15}}, g);
  four.anchors = {2, 5, 10, 13};
  CHECK(four.num_colors == 2);
  auto pou = build_pou(four, g);
  for (Index x = 0; x < 16; ++x) {
    double s = 0.0;
    for (std::size_t u = 0; u < pou.theta.size(); ++u) {
      s += pou.theta[u][x];
      if (pou.theta[u][x] > 0.0)
        CHECK(std::find(four.sets[u].begin(), four.sets[u].end(), x) != four.sets[u].end());
    }
    CHECK(std::abs(s - 1.0) <= 1e-12);
  }

  ColoredCover bad = four;
  bad.anchors[0] = 15;
  CHECK_THROWS_AS(build_pou(bad, g), InputError);
}

TEST_CASE("commutative triple") {
  FinSpace p = FinSpace::path(32);
  ColoredCover cover = interval_cover(p, 1.0 / 8);
  auto pou = build_pou(cover, p);
  ApproxTriple t = build_commutative_triple(p, cover, pou);

  std::vector<double> constant(32, 0.7);
  CHECK(commutative_error(t, constant) <= 1e-15);

  auto coord = sample(32, [](double x) { return x; });
  const double err = commutative_error(t, coord);
  CHECK(err <= 1.0 / 8);
  CHECK(err <= oscillation_bound(coord, pou) + 1e-15);
  // oracle: sum_U theta_U(x) f(x_U) - f(x), evaluated pointwise
  double brute = 0.0;
  for (Index x = 0; x < 32; ++x) {
    double v = 0.0;
    for (std::size_t u = 0; u < pou.theta.size(); ++u) v += pou.theta[u][x] * coord[pou.anchor[u]];
    brute = std::max(brute, std::abs(v - coord[x]));
  }
  CHECK(err == doctest::Approx(brute).epsilon(1e-12));

  auto rep = validate_triple(t, {diag_matrix(coord)}, 1e-12);
  CHECK(rep.pass);
  CHECK(t.colors() == 2);
  CHECK(rep.psi_norm == 1.0);
  for (double r : rep.order_zero_residual) CHECK(r <= 1e-12);
}

TEST_CASE("commutative triple on a 16-point grid validates") {
  FinSpace g = FinSpace::path(16);
  ColoredCover cover = interval_cover(g, 0.25);
  ApproxTriple t = build_commutative_triple(g, cover, build_pou(cover, g));
  auto rep = validate_triple(t, {CMatrix::Identity(16, 16)}, 1e-10);
  CHECK(rep.pass);
  CHECK(rep.psi_norm <= 1.0);
  for (double r : rep.order_zero_residual) CHECK(r <= 1e-10);
}

TEST_CASE("grid triple uses three colors") {
  FinSpace g = FinSpace::grid(12, 12);
  ColoredCover cover = grid_brick_cover(g, 12, 12, 1);
  ApproxTriple t = build_commutative_triple(g, cover, build_pou(cover, g));
  CHECK(t.colors() == 3);
  auto rep = validate_triple(t, {CMatrix::Identity(144, 144)}, 1e-10);
  CHECK(rep.pass);
}

TEST_CASE("contractify") {
  FinSpace p = FinSpace::path(64);
  ColoredCover cover = interval_cover(p, 1.0 / 16);
  ApproxTriple t = build_commutative_triple(p, cover, build_pou(cover, p));

  std::vector<double> ones(64, 1.0);
  ApproxTriple c = contractify(t, ones, 0.1);
  CMatrix one = CMatrix::Identity(64, 64);
  CHECK((c.phi.apply(CMatrix::Identity(c.F.matrix_dim(), c.F.matrix_dim())) - 0.95 * t.phi.apply(t.psi.apply(one))).cwiseAbs().maxCoeff() < 1e-14);

  // boundary bump h and f with h f = f
  auto h = sample(64, [](double x) { return std::min(1.0, x / 0.1); });
  auto f = sample(64, [](double x) { return std::max(0.0, std::sin(x) - std::sin(0.1)); });
  for (std::size_t i = 0; i < f.size(); ++i) REQUIRE(h[i] * f[i] == f[i]);
  const double eps = 0.1;
  ApproxTriple hat = contractify(t, h, eps);
  CHECK(operator_norm(hat.phi.apply(CMatrix::Identity(hat.F.matrix_dim(), hat.F.matrix_dim()))) <= 1.0 + 1e-10);
  CHECK(commutative_error(hat, f) <= eps);
  CHECK(hat.psi.choi_min_eigenvalue() >= -1e-12);

  std::vector<double> zero(64, 0.0);
  CHECK_THROWS_AS(contractify(t, zero, 0.1), PreconditionError);
  std::vector<double> big(64, 2.0);
  CHECK_THROWS_AS(contractify(t, big, 0.1), InputError);
}
