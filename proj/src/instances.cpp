#include "ndlab/instances.hpp"

#include <algorithm>

namespace ndlab {

CMatrix random_matrix(std::mt19937_64& rng, Index r, Index c) {
  std::normal_distribution<double> g;
  CMatrix m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = Complex(g(rng), g(rng));
  return m;
}

CMatrix random_unitary(std::mt19937_64& rng, Index d) {
  Eigen::HouseholderQR<CMatrix> qr(random_matrix(rng, d, d));
  return qr.householderQ() * CMatrix::Identity(d, d);
}

CMatrix random_positive(std::mt19937_64& rng, Index d, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  CMatrix q = random_unitary(rng, d);
  CMatrix diag = CMatrix::Zero(d, d);
  for (Index i = 0; i < d; ++i) diag(i, i) = u(rng);
  return q * diag * q.adjoint();
}

CMatrix unit(Index d, Index s, Index t) {
  CMatrix e = CMatrix::Zero(d, d);
  e(s, t) = 1.0;
  return e;
}

std::vector<CMatrix> diagonal_units(Index d) {
  std::vector<CMatrix> out;
  for (Index i = 0; i < d; ++i) out.push_back(unit(d, i, i));
  return out;
}

OrderZeroInstance random_order_zero(std::mt19937_64& rng, Index max_dim) {
  std::uniform_int_distribution<int> nblocks(1, 3), bsize(1, 3), mult(1, 2), pad(0, 2);
  for (;;) {
    const int nb = nblocks(rng);
    std::vector<Index> sizes, mults;
    for (int j = 0; j < nb; ++j) {
      sizes.push_back(bsize(rng));
      mults.push_back(mult(rng));
    }
    const Index z = pad(rng);
    Index D = z;
    for (int j = 0; j < nb; ++j) D += sizes[j] * mults[j];
    if (D > max_dim) continue;
    FdAlgebra F(sizes, std::vector<int>(static_cast<std::size_t>(nb), 0), 1);
    std::vector<CMatrix> c;
    for (int j = 0; j < nb; ++j) c.push_back(random_positive(rng, mults[j], 0.2, 1.0));
    const CMatrix U = random_unitary(rng, D);
    auto image = [&](Index j, Index s, Index t, bool with_h) {
      CMatrix inner = CMatrix::Zero(D, D);
      Index off = 0;
      for (Index b = 0; b < j; ++b) off += sizes[b] * mults[b];
      const Index m = mults[j];
      CMatrix blk = with_h ? c[j] : CMatrix::Identity(m, m);
      inner.block(off + s * m, off + t * m, m, m) = blk;
      return CMatrix(U * inner * U.adjoint());
    };
    OrderZeroInstance inst;
    inst.F = F;
    inst.D = D;
    inst.pi = CpMap::from_images(F, D, [&](Index j, Index s, Index t) { return SparseOp::from_dense(image(j, s, t, false)); });
    inst.phi = CpMap::from_images(F, D, [&](Index j, Index s, Index t) { return SparseOp::from_dense(image(j, s, t, true)); });
    inst.h = inst.phi.apply(CMatrix::Identity(F.matrix_dim(), F.matrix_dim()));
    return inst;
  }
}

ApproxTriple diagonal_triple(const std::vector<int>& colors, int num_colors) {
  const auto d = static_cast<Index>(colors.size());
  FdAlgebra F = FdAlgebra::diagonal(colors, num_colors);
  CpMap psi = CpMap::from_images(
      FdAlgebra::full_matrix(d), d,
      [&](Index, Index s, Index t) { return s == t ? SparseOp(d, d, {{s, s, 1.0}}) : SparseOp(d, d); }, F);
  CpMap phi = CpMap::from_images(F, d, [&](Index j, Index, Index) { return SparseOp(d, d, {{j, j, 1.0}}); });
  return make_triple(F, psi, phi);
}

ApproxTriple triple_with_bad_blocks(const std::vector<int>& colors, int num_colors, const std::vector<BadBlock>& bad) {
  const auto d = static_cast<Index>(colors.size());
  std::vector<int> all = colors;
  for (const BadBlock& b : bad) {
    if (b.a < 0 || b.b < 0 || b.a >= d || b.b >= d || b.a == b.b) throw InputError("bad block: need two distinct points");
    all.push_back(b.color);
  }
  FdAlgebra F = FdAlgebra::diagonal(all, num_colors);
  const Index D = F.matrix_dim();
  CpMap psi = CpMap::from_images(
      FdAlgebra::full_matrix(d), D,
      [&](Index, Index s, Index t) {
        std::vector<Triplet> trip;
        if (s != t) return SparseOp(D, D);
        trip.push_back({s, s, 1.0});
        for (std::size_t j = 0; j < bad.size(); ++j) {
          const Index pos = d + static_cast<Index>(j);
          if (s == bad[j].a || s == bad[j].b) trip.push_back({pos, pos, 0.5});
        }
        return SparseOp(D, D, std::move(trip));
      },
      F);
  CpMap phi = CpMap::from_images(F, d, [&](Index j, Index, Index) {
    if (j < d) return SparseOp(d, d, {{j, j, 1.0}});
    const BadBlock& b = bad[static_cast<std::size_t>(j - d)];
    return SparseOp(d, d, {{b.a, b.a, b.delta}});
  });
  return make_triple(F, psi, phi);
}

ApproxTriple triple_with_bad_block(const std::vector<int>& colors, int num_colors, double delta) {
  return triple_with_bad_blocks(colors, num_colors, {BadBlock{0, 1, 1, delta}});
}

PruneInstance random_prune_instance(std::mt19937_64& rng, double eps, int max_colors) {
  std::uniform_int_distribution<int> npts(3, 6), ncol(2, std::max(2, max_colors)), nbad(0, 2);
  std::uniform_real_distribution<double> mass(0.01, 0.1);
  const int d = npts(rng);
  const int colors = ncol(rng);
  std::uniform_int_distribution<int> pick_color(0, colors - 1), pick_point(0, d - 1);
  std::vector<int> col(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) col[static_cast<std::size_t>(i)] = i < colors ? i : pick_color(rng);
  std::shuffle(col.begin(), col.end(), rng);

  PruneInstance inst;
  const int planted = nbad(rng);
  for (int j = 0; j < planted; ++j) {
    BadBlock b;
    b.a = pick_point(rng);
    do {
      b.b = pick_point(rng);
    } while (b.b == b.a);
    b.color = pick_color(rng);
    b.delta = mass(rng) * eps;
    inst.planted.push_back(b);
  }
  inst.triple = triple_with_bad_blocks(col, colors, inst.planted);
  inst.testset = diagonal_units(d);
  return inst;
}

ApproxTriple random_block_triple(std::mt19937_64& rng, Index d, int num_colors) {
  if (num_colors < 1 || d < num_colors) throw InputError("random_block_triple: need d >= colors >= 1");
  std::uniform_int_distribution<int> bsize(1, 3);
  std::vector<Index> sizes;
  for (;;) {
    sizes.clear();
    Index left = d;
    while (left > 0) {
      const Index s = std::min<Index>(left, bsize(rng));
      sizes.push_back(s);
      left -= s;
    }
    if (static_cast<int>(sizes.size()) >= num_colors) break;
  }
  std::vector<int> colors(sizes.size());
  std::uniform_int_distribution<int> pick(0, num_colors - 1);
  for (std::size_t j = 0; j < colors.size(); ++j) colors[j] = j < static_cast<std::size_t>(num_colors) ? static_cast<int>(j) : pick(rng);
  std::shuffle(colors.begin(), colors.end(), rng);
  FdAlgebra F(sizes, colors, num_colors);
  const CMatrix U = random_unitary(rng, d);
  CpMap psi = CpMap::from_function(
      FdAlgebra::full_matrix(d), d, [&](const CMatrix& a) { return FdElement::from_matrix(F, U.adjoint() * a * U).to_matrix(); }, F);
  CpMap phi = CpMap::from_function(F, d, [&](const CMatrix& x) { return CMatrix(U * x * U.adjoint()); });
  return make_triple(F, psi, phi);
}

DominationInstance random_domination_instance(std::mt19937_64& rng, Index d) {
  CMatrix a = random_positive(rng, d, 0.0, 0.5), ap = random_positive(rng, d, 0.0, 0.5);
  CMatrix c = random_matrix(rng, d, 2), cp = random_matrix(rng, d, 2);
  CMatrix b = a + c * c.adjoint(), bp = ap + cp * cp.adjoint();
  const double nb = std::max(1.0, operator_norm(b)), nbp = std::max(1.0, operator_norm(bp));
  return {a / nb, ap / nbp, b / nb, bp / nbp};
}

}  // namespace ndlab
