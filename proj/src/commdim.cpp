#include "ndlab/commdim.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>

namespace ndlab {

FinSpace::FinSpace(RMatrix dist) : dist_(std::move(dist)) {
  const Index n = dist_.rows();
  if (dist_.cols() != n) throw InputError("FinSpace: distance matrix must be square");
  if (!dist_.allFinite()) throw InputError("FinSpace: distances must be finite");
  for (Index x = 0; x < n; ++x) {
    if (dist_(x, x) != 0.0) throw InputError("FinSpace: nonzero self-distance");
    for (Index y = 0; y < n; ++y) {
      if (dist_(x, y) < 0.0 || dist_(x, y) != dist_(y, x)) throw InputError("FinSpace: distances must be symmetric and nonnegative");
      if (x != y && dist_(x, y) == 0.0) throw InputError("FinSpace: distinct points at distance 0");
    }
  }
  for (Index y = 0; y < n; ++y)
    for (Index x = 0; x < n; ++x)
      for (Index z = 0; z < n; ++z)
        if (dist_(x, z) > dist_(x, y) + dist_(y, z)) throw InputError("FinSpace: triangle inequality violated");
}

FinSpace FinSpace::path(Index n) {
  if (n < 1) throw InputError("FinSpace::path: need at least one point");
  RMatrix d(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) d(i, j) = static_cast<double>(std::abs(i - j));
  return FinSpace(std::move(d));
}

FinSpace FinSpace::cycle(Index n) {
  if (n < 1) throw InputError("FinSpace::cycle: need at least one point");
  RMatrix d(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) d(i, j) = static_cast<double>(std::min(std::abs(i - j), n - std::abs(i - j)));
  return FinSpace(std::move(d));
}

FinSpace FinSpace::grid(Index rows, Index cols) {
  if (rows < 1 || cols < 1) throw InputError("FinSpace::grid: empty grid");
  const Index n = rows * cols;
  RMatrix d(n, n);
  for (Index p = 0; p < n; ++p)
    for (Index q = 0; q < n; ++q)
      d(p, q) = static_cast<double>(std::abs(p / cols - q / cols) + std::abs(p % cols - q % cols));
  return FinSpace(std::move(d));
}

double FinSpace::diameter(const std::vector<Index>& set) const {
  double d = 0.0;
  for (Index x : set)
    for (Index y : set) d = std::max(d, dist_(x, y));
  return d;
}

double FinSpace::dist_to_set(Index x, const std::vector<Index>& set) const {
  double d = std::numeric_limits<double>::infinity();
  for (Index y : set) d = std::min(d, dist_(x, y));
  return d;
}

namespace {

bool intersects(const std::vector<Index>& a, const std::vector<Index>& b) {
  // both sorted
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i == *j) return true;
    if (*i < *j) ++i;
    else ++j;
  }
  return false;
}

std::vector<Index> sorted_unique(std::vector<Index> s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

}  // namespace

void ColoredCover::validate(const FinSpace& space) const {
  const Index n = space.size();
  if (color.size() != sets.size()) throw InputError("cover: every set needs a color");
  if (!anchors.empty() && anchors.size() != sets.size()) throw InputError("cover: anchors must match sets");
  std::vector<char> covered(static_cast<std::size_t>(n), 0);
  std::vector<std::vector<Index>> sorted;
  for (std::size_t u = 0; u < sets.size(); ++u) {
    if (sets[u].empty()) throw InputError("cover: empty set");
    if (color[u] < 0 || color[u] >= num_colors) throw InputError("cover: color out of range");
    for (Index x : sets[u]) {
      if (x < 0 || x >= n) throw InputError("cover: point out of range");
      covered[static_cast<std::size_t>(x)] = 1;
    }
    if (space.diameter(sets[u]) > diameter_bound) throw InputError("cover: set exceeds the diameter bound");
    sorted.push_back(sorted_unique(sets[u]));
  }
  if (std::find(covered.begin(), covered.end(), 0) != covered.end()) throw InputError("cover: a point is covered by no set");
  for (std::size_t u = 0; u < sets.size(); ++u)
    for (std::size_t v = u + 1; v < sets.size(); ++v)
      if (color[u] == color[v] && intersects(sorted[u], sorted[v]))
        throw InputError("cover: same-colored sets overlap");
}

ColoredCover greedy_color(const PointSets& sets, const FinSpace& space) {
  ColoredCover cover;
  std::vector<std::vector<Index>> sorted;
  for (const auto& s : sets) sorted.push_back(sorted_unique(s));
  for (std::size_t u = 0; u < sets.size(); ++u) {
    std::set<int> used;
    for (std::size_t v = 0; v < u; ++v)
      if (intersects(sorted[u], sorted[v])) used.insert(cover.color[v]);
    int c = 0;
    while (used.count(c) != 0) ++c;
    cover.color.push_back(c);
    cover.num_colors = std::max(cover.num_colors, c + 1);
    cover.diameter_bound = std::max(cover.diameter_bound, space.diameter(sets[u]));
  }
  cover.sets = sets;
  cover.validate(space);
  return cover;
}

ColoredCover interval_cover(const FinSpace& path, double mesh) {
  const Index n = path.size();
  if (!(mesh > 0.0)) throw InputError("interval_cover: mesh must be positive");
  const Index half = std::max<Index>(2, static_cast<Index>(std::floor(mesh * static_cast<double>(n - 1) / 2.0)));
  const Index m = half + 1;
  PointSets sets;
  std::vector<Index> anchors;
  // consecutive anchors are m apart, so n - 1 is always within half of the last one
  for (Index a = 0; a <= n - 1; a += m) {
    std::vector<Index> s;
    for (Index p = std::max<Index>(0, a - half); p <= std::min(n - 1, a + half); ++p) s.push_back(p);
    sets.push_back(std::move(s));
    anchors.push_back(a);
  }
  ColoredCover cover = greedy_color(sets, path);
  cover.diameter_bound = static_cast<double>(2 * half);
  cover.anchors = std::move(anchors);
  return cover;
}

std::pair<PointSets, std::vector<int>> brick_sets(const std::vector<Index>& box, Index R, Index enlarge) {
  const auto d = static_cast<Index>(box.size());
  if (R < 1 || d < 1) throw InputError("brick_sets: need R >= 1 and d >= 1");
  const Index side = 2 * R * d, period = 2 * R * (d + 1);
  for (Index b : box)
    if (b < period) throw InputError("brick_sets: box must contain one full brick period");
  auto floor_div = [](Index a, Index b) { return a >= 0 ? a / b : -((-a + b - 1) / b); };
  PointSets sets;
  std::vector<int> family;
  for (Index i = 0; i <= d; ++i) {
    const Index shift = 2 * R * i;
    std::vector<std::vector<std::pair<Index, Index>>> ranges(static_cast<std::size_t>(d));
    for (Index c = 0; c < d; ++c) {
      const Index zmin = -floor_div(side - 1 + enlarge + shift, period);
      const Index zmax = floor_div(box[c] - 1 + enlarge - shift, period);
      for (Index z = zmin; z <= zmax; ++z) {
        const Index lo = std::max<Index>(0, shift + period * z - enlarge);
        const Index hi = std::min(box[c] - 1, shift + period * z + side - 1 + enlarge);
        if (lo <= hi) ranges[c].emplace_back(lo, hi);
      }
    }
    // cartesian product of per-coordinate ranges
    std::vector<std::size_t> pick(static_cast<std::size_t>(d), 0);
    for (;;) {
      std::vector<Index> pts{0};
      for (Index c = 0; c < d; ++c) {
        const auto [lo, hi] = ranges[c][pick[c]];
        std::vector<Index> next;
        for (Index base : pts)
          for (Index x = lo; x <= hi; ++x) next.push_back(base * box[c] + x);
        pts = std::move(next);
      }
      sets.push_back(std::move(pts));
      family.push_back(static_cast<int>(i));
      Index c = d - 1;
      while (c >= 0 && ++pick[c] == ranges[c].size()) pick[c--] = 0;
      if (c < 0) break;
    }
  }
  return {sets, family};
}

ColoredCover grid_brick_cover(const FinSpace& grid, Index rows, Index cols, Index R) {
  if (rows * cols != grid.size()) throw InputError("grid_brick_cover: grid shape does not match the space");
  auto [sets, family] = brick_sets({rows, cols}, R, R);
  return greedy_color(sets, grid);
}

PartitionOfUnity build_pou(const ColoredCover& cover, const FinSpace& space) {
  cover.validate(space);
  const Index n = space.size();
  PartitionOfUnity pou;
  std::vector<double> total(static_cast<std::size_t>(n), 0.0);
  for (std::size_t u = 0; u < cover.sets.size(); ++u) {
    const auto& set = cover.sets[u];
    Index a = -1;
    if (!cover.anchors.empty()) {
      a = cover.anchors[u];
      if (std::find(set.begin(), set.end(), a) == set.end()) throw InputError("build_pou: anchor outside its set");
    } else {
      double best = std::numeric_limits<double>::infinity();
      for (Index x : set) {
        double ecc = 0.0;
        for (Index y : set) ecc = std::max(ecc, space.dist(x, y));
        if (ecc < best || (ecc == best && x < a)) {
          best = ecc;
          a = x;
        }
      }
    }
    // radius one past the anchor's eccentricity: positive on all of U, zero outside
    double ecc = 0.0;
    for (Index x : set) ecc = std::max(ecc, space.dist(x, a));
    const double radius = ecc + 1.0;
    std::vector<double> tent(static_cast<std::size_t>(n), 0.0);
    for (Index x : set) {
      tent[static_cast<std::size_t>(x)] = std::max(0.0, 1.0 - space.dist(x, a) / radius);
      total[static_cast<std::size_t>(x)] += tent[static_cast<std::size_t>(x)];
    }
    pou.theta.push_back(std::move(tent));
    pou.anchor.push_back(a);
  }
  for (Index x = 0; x < n; ++x)
    if (total[static_cast<std::size_t>(x)] <= 0.0) throw InputError("build_pou: a point is covered by no tent");
  for (auto& th : pou.theta)
    for (Index x = 0; x < n; ++x) th[static_cast<std::size_t>(x)] /= total[static_cast<std::size_t>(x)];
  return pou;
}

double oscillation_bound(const std::vector<double>& f, const PartitionOfUnity& pou) {
  double bound = 0.0;
  for (const auto& th : pou.theta) {
    if (th.size() != f.size()) throw InputError("oscillation_bound: function has wrong length");
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t x = 0; x < f.size(); ++x)
      if (th[x] > 0.0) {
        lo = std::min(lo, f[x]);
        hi = std::max(hi, f[x]);
      }
    if (hi >= lo) bound = std::max(bound, hi - lo);
  }
  return bound;
}

ApproxTriple build_commutative_triple(const FinSpace& space, const ColoredCover& cover, const PartitionOfUnity& pou) {
  cover.validate(space);
  const Index n = space.size();
  const auto k = static_cast<Index>(cover.sets.size());
  if (static_cast<Index>(pou.theta.size()) != k || static_cast<Index>(pou.anchor.size()) != k)
    throw InputError("build_commutative_triple: partition of unity does not match the cover");
  std::vector<std::vector<Index>> by_anchor(static_cast<std::size_t>(n));
  for (Index u = 0; u < k; ++u) {
    const auto& set = cover.sets[static_cast<std::size_t>(u)];
    const Index a = pou.anchor[static_cast<std::size_t>(u)];
    if (std::find(set.begin(), set.end(), a) == set.end()) throw InputError("build_commutative_triple: anchor outside its set");
    by_anchor[static_cast<std::size_t>(a)].push_back(u);
  }
  FdAlgebra F = FdAlgebra::diagonal(cover.color, cover.num_colors);
  CpMap psi = CpMap::from_images(
      FdAlgebra::full_matrix(n), k,
      [&](Index, Index s, Index t) {
        std::vector<Triplet> trip;
        if (s == t)
          for (Index u : by_anchor[static_cast<std::size_t>(s)]) trip.push_back({u, u, 1.0});
        return SparseOp(k, k, std::move(trip));
      },
      F);
  CpMap phi = CpMap::from_images(F, n, [&](Index u, Index, Index) {
    std::vector<Triplet> trip;
    const auto& th = pou.theta[static_cast<std::size_t>(u)];
    for (Index x = 0; x < n; ++x)
      if (th[static_cast<std::size_t>(x)] != 0.0) trip.push_back({x, x, th[static_cast<std::size_t>(x)]});
    return SparseOp(n, n, std::move(trip));
  });
  return make_triple(std::move(F), std::move(psi), std::move(phi));
}

CMatrix diag_matrix(const std::vector<double>& f) {
  const auto n = static_cast<Index>(f.size());
  CMatrix m = CMatrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) m(i, i) = f[static_cast<std::size_t>(i)];
  return m;
}

double commutative_error(const ApproxTriple& t, const std::vector<double>& f) {
  CMatrix a = diag_matrix(f);
  return operator_norm(t.round_trip(a) - a);
}

ApproxTriple contractify(const ApproxTriple& t, const std::vector<double>& h, double eps, double cutoff) {
  const Index n = t.ambient_dim;
  if (static_cast<Index>(h.size()) != n) throw InputError("contractify: h has wrong length");
  for (double v : h)
    if (!(v >= 0.0 && v <= 1.0)) throw InputError("contractify: h must take values in [0, 1]");
  if (!(eps > 0.0 && eps < 2.0)) throw InputError("contractify: eps must lie in (0, 2)");
  for (Index r : t.F.block_sizes())
    if (r != 1) throw InputError("contractify: F must be commutative");
  const Index k = t.F.matrix_dim();
  const CMatrix psi_h = t.psi.apply(diag_matrix(h));
  std::vector<Index> keep;
  std::vector<double> inv_sqrt(static_cast<std::size_t>(k), 0.0), c(static_cast<std::size_t>(k), 0.0);
  for (Index u = 0; u < k; ++u) {
    c[static_cast<std::size_t>(u)] = psi_h(u, u).real();
    if (c[static_cast<std::size_t>(u)] >= cutoff) {
      keep.push_back(u);
      inv_sqrt[static_cast<std::size_t>(u)] = 1.0 / std::sqrt(c[static_cast<std::size_t>(u)]);
    }
  }
  if (keep.empty()) throw PreconditionError("contractify: psi(h) has trivial support");
  CpMap psi = CpMap::from_images(
                  t.psi.domain(), k,
                  [&](Index, Index s, Index tt) {
                    const double w = std::sqrt(h[static_cast<std::size_t>(s)] * h[static_cast<std::size_t>(tt)]);
                    return t.psi.image(0, s, tt).scaled(w).scale_rows(inv_sqrt).scale_cols(inv_sqrt);
                  },
                  t.F)
                  .compress_codomain(keep);
  const FdAlgebra F = t.F.restrict(keep);
  CpMap phi = CpMap::from_images(F, n, [&](Index j, Index, Index) {
    const Index u = keep[static_cast<std::size_t>(j)];
    return t.phi.image(u, 0, 0).scaled((1.0 - eps / 2.0) * c[static_cast<std::size_t>(u)]);
  });
  return make_triple(F, std::move(psi), std::move(phi));
}

}  // namespace ndlab
