#include "ndlab/roe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "ndlab/commdim.hpp"

namespace ndlab {

CoarseSpace::CoarseSpace(Index n, std::vector<Index> table) : n_(n), dist_(std::move(table)) {
  if (n < 1) throw InputError("CoarseSpace: empty space");
  if (n > kMaxPoints) throw InputError("CoarseSpace: too many points");
  if (static_cast<Index>(dist_.size()) != n * n) throw InputError("CoarseSpace: distance table must be n x n");
  for (Index x = 0; x < n; ++x)
    for (Index y = 0; y < n; ++y) {
      const Index d = dist(x, y);
      if (x == y && d != 0) throw InputError("CoarseSpace: nonzero self-distance");
      if (x != y && d <= 0) throw InputError("CoarseSpace: distinct points at distance <= 0");
      if (d != dist(y, x)) throw InputError("CoarseSpace: asymmetric distance");
    }
  for (Index z = 0; z < n; ++z)
    for (Index x = 0; x < n; ++x)
      for (Index y = 0; y < n; ++y)
        if (dist(x, y) > dist(x, z) + dist(z, y)) throw InputError("CoarseSpace: triangle inequality fails");
}

CoarseSpace CoarseSpace::z_interval(Index len) {
  if (len < 1) throw InputError("z_interval: empty range");
  if (len > kMaxPoints) throw InputError("z_interval: too many points");
  CoarseSpace s;
  s.n_ = len;
  s.dist_.resize(static_cast<std::size_t>(len * len));
  for (Index x = 0; x < len; ++x)
    for (Index y = 0; y < len; ++y) s.dist_[static_cast<std::size_t>(x * len + y)] = std::abs(x - y);
  return s;
}

CoarseSpace CoarseSpace::grid(Index d, Index side) {
  if (d < 1 || side < 1) throw InputError("grid: need d >= 1 and side >= 1");
  Index n = 1;
  for (Index c = 0; c < d; ++c) {
    n *= side;
    if (n > kMaxPoints) throw InputError("grid: too many points");
  }
  std::vector<std::vector<Index>> coords(static_cast<std::size_t>(n), std::vector<Index>(static_cast<std::size_t>(d)));
  for (Index x = 0; x < n; ++x) {
    Index rest = x;
    for (Index c = d - 1; c >= 0; --c) {
      coords[static_cast<std::size_t>(x)][static_cast<std::size_t>(c)] = rest % side;
      rest /= side;
    }
  }
  CoarseSpace s;
  s.n_ = n;
  s.dist_.resize(static_cast<std::size_t>(n * n));
  for (Index x = 0; x < n; ++x)
    for (Index y = 0; y < n; ++y) {
      Index d1 = 0;
      for (Index c = 0; c < d; ++c)
        d1 += std::abs(coords[static_cast<std::size_t>(x)][static_cast<std::size_t>(c)] -
                       coords[static_cast<std::size_t>(y)][static_cast<std::size_t>(c)]);
      s.dist_[static_cast<std::size_t>(x * n + y)] = d1;
    }
  return s;
}

Index CoarseSpace::dist_to_set(Index x, const std::vector<Index>& set) const {
  if (set.empty()) throw InputError("dist_to_set: empty set");
  Index best = std::numeric_limits<Index>::max();
  for (Index y : set) best = std::min(best, dist(x, y));
  return best;
}

Index CoarseSpace::set_distance(const std::vector<Index>& a, const std::vector<Index>& b) const {
  Index best = std::numeric_limits<Index>::max();
  for (Index x : a) best = std::min(best, dist_to_set(x, b));
  return best;
}

Index CoarseSpace::diameter(const std::vector<Index>& set) const {
  Index best = 0;
  for (Index x : set)
    for (Index y : set) best = std::max(best, dist(x, y));
  return best;
}

std::vector<Index> CoarseSpace::neighborhood(const std::vector<Index>& set, Index r) const {
  std::vector<Index> out;
  for (Index x = 0; x < n_; ++x)
    if (dist_to_set(x, set) <= r) out.push_back(x);
  return out;
}

Index CoarseSpace::ball_growth(Index r) const {
  Index best = 0;
  for (Index x = 0; x < n_; ++x) {
    Index count = 0;
    for (Index y = 0; y < n_; ++y) count += dist(x, y) <= r ? 1 : 0;
    best = std::max(best, count);
  }
  return best;
}

BandMatrix::BandMatrix(std::shared_ptr<const CoarseSpace> s, CMatrix m) : space(std::move(s)), entries(std::move(m)) {
  if (!space) throw InputError("BandMatrix: missing space");
  if (entries.rows() != space->size() || entries.cols() != space->size())
    throw InputError("BandMatrix: matrix size does not match the space");
  if (!all_finite(entries)) throw InputError("BandMatrix: non-finite entry");
}

BandMatrix BandMatrix::identity(std::shared_ptr<const CoarseSpace> s) {
  const Index n = s->size();
  return {std::move(s), CMatrix::Identity(n, n)};
}

BandMatrix BandMatrix::shift(std::shared_ptr<const CoarseSpace> s) {
  const Index n = s->size();
  CMatrix m = CMatrix::Zero(n, n);
  for (Index x = 0; x + 1 < n; ++x) m(x + 1, x) = 1.0;
  return {std::move(s), m};
}

BandMatrix BandMatrix::random(std::shared_ptr<const CoarseSpace> s, Index width, double M, std::mt19937_64& rng) {
  const Index n = s->size();
  std::uniform_real_distribution<double> radius(0.0, 1.0), angle(0.0, 2.0 * std::numbers::pi);
  CMatrix m = CMatrix::Zero(n, n);
  for (Index x = 0; x < n; ++x)
    for (Index y = 0; y < n; ++y)
      if (s->dist(x, y) <= width) m(x, y) = std::polar(M * std::sqrt(radius(rng)), angle(rng));
  return {std::move(s), m};
}

BandMatrix BandMatrix::diagonal(std::shared_ptr<const CoarseSpace> s, const std::vector<double>& d) {
  const Index n = s->size();
  if (static_cast<Index>(d.size()) != n) throw InputError("BandMatrix::diagonal: wrong length");
  CMatrix m = CMatrix::Zero(n, n);
  for (Index x = 0; x < n; ++x) m(x, x) = d[static_cast<std::size_t>(x)];
  return {std::move(s), m};
}

Index BandMatrix::width() const {
  Index w = 0;
  for (Index x = 0; x < entries.rows(); ++x)
    for (Index y = 0; y < entries.cols(); ++y)
      if (entries(x, y) != Complex(0.0)) w = std::max(w, space->dist(x, y));
  return w;
}

double BandMatrix::entry_bound() const { return entries.size() == 0 ? 0.0 : entries.cwiseAbs().maxCoeff(); }

NormBound norm_bound_check(const BandMatrix& a) {
  NormBound out;
  out.norm = operator_norm(a.entries);
  out.bound = static_cast<double>(a.space->ball_growth(a.width())) * a.entry_bound();
  out.holds = out.norm <= out.bound + 1e-9;
  return out;
}

DiscreteCover DiscreteCover::from_families(const CoarseSpace& space, std::vector<PointSets> families) {
  DiscreteCover c;
  c.discreteness = std::numeric_limits<Index>::max();
  for (const PointSets& fam : families) {
    for (const auto& set : fam) {
      if (set.empty()) throw InputError("cover: empty set");
      for (Index x : set)
        if (x < 0 || x >= space.size()) throw InputError("cover: point outside the space");
      c.diameter_bound = std::max(c.diameter_bound, space.diameter(set));
    }
    for (std::size_t u = 0; u < fam.size(); ++u)
      for (std::size_t v = u + 1; v < fam.size(); ++v)
        c.discreteness = std::min(c.discreteness, space.set_distance(fam[u], fam[v]));
  }
  c.families = std::move(families);
  c.validate(space);
  return c;
}

void DiscreteCover::validate(const CoarseSpace& space) const {
  std::vector<char> hit(static_cast<std::size_t>(space.size()), 0);
  for (const PointSets& fam : families)
    for (const auto& set : fam)
      for (Index x : set) hit[static_cast<std::size_t>(x)] = 1;
  if (std::find(hit.begin(), hit.end(), 0) != hit.end()) throw InputError("cover: families do not cover the space");
}

DiscreteCover cover_Z(const CoarseSpace& interval, Index R) {
  if (R < 1) throw InputError("cover_Z: R must be >= 1");
  const Index len = interval.size();
  for (Index x = 0; x + 1 < len; ++x)
    if (interval.dist(x, x + 1) != 1 || interval.dist(0, x + 1) != x + 1)
      throw InputError("cover_Z: space is not an interval of Z");
  std::vector<PointSets> fams(2);
  for (Index m = 0; 2 * R * m < len; ++m) {
    std::vector<Index> set;
    for (Index x = 2 * R * m; x < std::min(len, 2 * R * (m + 1)); ++x) set.push_back(x);
    fams[static_cast<std::size_t>(m % 2)].push_back(std::move(set));
  }
  return DiscreteCover::from_families(interval, std::move(fams));
}

DiscreteCover cover_Zd(const CoarseSpace& grid, Index R, Index d, Index side) {
  if (R < 1 || d < 1) throw InputError("cover_Zd: need R >= 1 and d >= 1");
  Index n = 1;
  for (Index c = 0; c < d; ++c) n *= side;
  if (n != grid.size()) throw InputError("cover_Zd: box does not match the space");
  auto [sets, family] = brick_sets(std::vector<Index>(static_cast<std::size_t>(d), side), R, 0);
  std::vector<PointSets> fams(static_cast<std::size_t>(d + 1));
  for (std::size_t u = 0; u < sets.size(); ++u) fams[static_cast<std::size_t>(family[u])].push_back(std::move(sets[u]));
  return DiscreteCover::from_families(grid, std::move(fams));
}

HFamily h_family(const CoarseSpace& space, const DiscreteCover& cover, Index r) {
  if (r < 1) throw InputError("h_family: r must be >= 1");
  if (cover.discreteness < 2 * r) {
    throw PreconditionError("h_family: cover discreteness " + std::to_string(cover.discreteness) +
                            " is below 2r = " + std::to_string(2 * r));
  }
  const Index n = space.size();
  HFamily hf;
  hf.r = r;
  hf.discreteness = cover.discreteness;
  hf.h_total.assign(static_cast<std::size_t>(n), Rational(0));
  for (const PointSets& fam : cover.families) {
    std::vector<Rational> h(static_cast<std::size_t>(n), Rational(0));
    for (const auto& set : fam)
      for (Index x = 0; x < n; ++x) {
        const Index d = space.dist_to_set(x, set);
        if (d < r) h[static_cast<std::size_t>(x)] += Rational(r - d, r);
      }
    for (Index x = 0; x < n; ++x) hf.h_total[static_cast<std::size_t>(x)] += h[static_cast<std::size_t>(x)];
    hf.h_raw.push_back(std::move(h));
  }
  const Rational top(static_cast<long long>(cover.num_families()));
  for (const Rational& t : hf.h_total)
    if (t < 1 || t > top) throw PreconditionError("h_family: h leaves [1, n+1]");
  for (const auto& h : hf.h_raw) {
    std::vector<double> hn(static_cast<std::size_t>(n));
    for (Index x = 0; x < n; ++x)
      hn[static_cast<std::size_t>(x)] = std::sqrt(to_double(h[static_cast<std::size_t>(x)] / hf.h_total[static_cast<std::size_t>(x)]));
    hf.h_norm.push_back(std::move(hn));
  }
  return hf;
}

Rational lipschitz_excess(const CoarseSpace& space, const HFamily& hf) {
  Rational worst = std::numeric_limits<long long>::min();
  for (const auto& h : hf.h_raw)
    for (Index x = 0; x < space.size(); ++x)
      for (Index y = 0; y < space.size(); ++y) {
        Rational diff = h[static_cast<std::size_t>(x)] - h[static_cast<std::size_t>(y)];
        if (diff < 0) diff = -diff;
        worst = std::max(worst, Rational(diff - Rational(space.dist(x, y), hf.r)));
      }
  return worst;
}

namespace {

CMatrix commutator_with_diag(const std::vector<double>& d, const CMatrix& a) {
  CMatrix c = a;
  for (Index x = 0; x < a.rows(); ++x)
    for (Index y = 0; y < a.cols(); ++y) c(x, y) *= d[static_cast<std::size_t>(x)] - d[static_cast<std::size_t>(y)];
  return c;
}

std::vector<double> to_doubles(const std::vector<Rational>& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (const Rational& q : v) out.push_back(to_double(q));
  return out;
}

void check_sizes(const BandMatrix& a, const HFamily& hf) {
  if (hf.h_raw.empty() || static_cast<Index>(hf.h_total.size()) != a.space->size())
    throw InputError("h family does not live on the band matrix's space");
}

}  // namespace

CommutatorReport commutator_report(const BandMatrix& a, const HFamily& hf) {
  check_sizes(a, hf);
  CommutatorReport out;
  out.r = hf.r;
  out.discreteness = hf.discreteness;
  out.width = a.width();
  out.ball_growth = a.space->ball_growth(out.width);
  out.norm = operator_norm(a.entries);
  const double r = static_cast<double>(hf.r);
  const double per_bound = static_cast<double>(out.width) / r * static_cast<double>(out.ball_growth) * out.norm;
  out.holds = true;
  for (const auto& h : hf.h_raw) {
    out.per_family.push_back(operator_norm(commutator_with_diag(to_doubles(h), a.entries)));
    out.per_family_bound.push_back(per_bound);
    out.holds = out.holds && out.per_family.back() <= per_bound + 1e-9;
  }
  out.total = operator_norm(commutator_with_diag(to_doubles(hf.h_total), a.entries));
  out.paper_bound = static_cast<double>(hf.num_families()) * per_bound;
  out.holds = out.holds && out.total <= out.paper_bound + 1e-9;
  return out;
}

double PsiBlocks::max_residual() const {
  double m = 0.0;
  for (double r : residual) m = std::max(m, r);
  return m;
}

CMatrix embed_blocks(const PointSets& supports, const std::vector<CMatrix>& blocks, Index n) {
  if (supports.size() != blocks.size()) throw InputError("embed_blocks: support/block count mismatch");
  CMatrix out = CMatrix::Zero(n, n);
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  for (std::size_t u = 0; u < supports.size(); ++u) {
    const auto& s = supports[u];
    const auto m = static_cast<Index>(s.size());
    if (blocks[u].rows() != m || blocks[u].cols() != m) throw InputError("embed_blocks: block size mismatch");
    for (Index x : s) {
      if (x < 0 || x >= n) throw InputError("embed_blocks: index outside the space");
      if (used[static_cast<std::size_t>(x)]) throw InputError("embed_blocks: overlapping supports");
      used[static_cast<std::size_t>(x)] = 1;
    }
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < m; ++j) out(s[static_cast<std::size_t>(i)], s[static_cast<std::size_t>(j)]) = blocks[u](i, j);
  }
  return out;
}

PsiBlocks psi_r(const BandMatrix& a, const HFamily& hf, const DiscreteCover& cover) {
  check_sizes(a, hf);
  if (cover.num_families() != hf.num_families()) throw InputError("psi_r: cover and h family disagree");
  const CoarseSpace& space = *a.space;
  const Index n = space.size();
  PsiBlocks out;
  out.r = hf.r;
  out.discreteness = hf.discreteness;
  for (std::size_t i = 0; i < cover.num_families(); ++i) {
    const auto& hi = hf.h_norm[i];
    CMatrix y = a.entries;
    for (Index x = 0; x < n; ++x)
      for (Index z = 0; z < n; ++z) y(x, z) *= hi[static_cast<std::size_t>(x)] * hi[static_cast<std::size_t>(z)];
    PointSets supports;
    std::vector<CMatrix> blocks;
    for (const auto& set : cover.families[i]) {
      std::vector<Index> s = space.neighborhood(set, hf.r - 1);
      const auto m = static_cast<Index>(s.size());
      CMatrix b(m, m);
      for (Index p = 0; p < m; ++p)
        for (Index q = 0; q < m; ++q) b(p, q) = y(s[static_cast<std::size_t>(p)], s[static_cast<std::size_t>(q)]);
      supports.push_back(std::move(s));
      blocks.push_back(std::move(b));
    }
    const CMatrix compressed = embed_blocks(supports, blocks, n);
    out.residual.push_back(operator_norm(CMatrix(y - compressed)));
    out.supports.push_back(std::move(supports));
    out.blocks.push_back(std::move(blocks));
  }
  return out;
}

CMatrix phi_r(const PsiBlocks& blocks, Index n) {
  CMatrix out = CMatrix::Zero(n, n);
  for (std::size_t i = 0; i < blocks.blocks.size(); ++i) out += embed_blocks(blocks.supports[i], blocks.blocks[i], n);
  return out;
}

PhiPsiReport phi_psi_defect(const BandMatrix& a, const HFamily& hf, const DiscreteCover& cover) {
  const Index n = a.space->size();
  PhiPsiReport out;
  out.r = hf.r;
  out.discreteness = hf.discreteness;
  const PsiBlocks blocks = psi_r(a, hf, cover);
  out.residual = 0.0;
  for (double r : blocks.residual) out.residual += r;
  out.defect = operator_norm(CMatrix(phi_r(blocks, n) - a.entries));
  for (const auto& hi : hf.h_norm) out.commutator_sum += operator_norm(commutator_with_diag(hi, a.entries));

  const BandMatrix one = BandMatrix::identity(a.space);
  const CMatrix unit_image = phi_r(psi_r(one, hf, cover), n);
  out.unital_defect = operator_norm(CMatrix(unit_image - CMatrix::Identity(n, n)));
  out.fitted_c = out.defect * static_cast<double>(hf.r);
  out.holds = out.defect <= out.commutator_sum + out.residual + 1e-9;
  return out;
}

}  // namespace ndlab
