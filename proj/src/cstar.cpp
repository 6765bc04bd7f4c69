#include "ndlab/cstar.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace ndlab {

// ---------------------------------------------------------------------------
// FdAlgebra / FdElement
// ---------------------------------------------------------------------------

FdAlgebra::FdAlgebra(std::vector<Index> block_sizes, std::vector<int> color_of_block, int num_colors)
    : block_sizes_(std::move(block_sizes)), color_of_block_(std::move(color_of_block)) {
  if (block_sizes_.size() != color_of_block_.size())
    throw InputError("FdAlgebra: every block needs exactly one color");
  int max_color = -1;
  for (std::size_t j = 0; j < block_sizes_.size(); ++j) {
    if (block_sizes_[j] <= 0) throw InputError("FdAlgebra: block sizes must be positive");
    if (color_of_block_[j] < 0) throw InputError("FdAlgebra: colors must be nonnegative");
    max_color = std::max(max_color, color_of_block_[j]);
  }
  num_colors_ = num_colors < 0 ? std::max(1, max_color + 1) : num_colors;
  if (num_colors_ < 1 || max_color >= num_colors_) throw InputError("FdAlgebra: color out of range");
  offsets_.assign(1, 0);
  for (Index r : block_sizes_) offsets_.push_back(offsets_.back() + r);
}

FdAlgebra FdAlgebra::full_matrix(Index d) {
  if (d <= 0) return FdAlgebra({}, {}, 1);
  return FdAlgebra({d}, {0}, 1);
}

FdAlgebra FdAlgebra::diagonal(const std::vector<int>& colors, int num_colors) {
  return FdAlgebra(std::vector<Index>(colors.size(), 1), colors, num_colors);
}

Index FdAlgebra::total_dim() const {
  Index s = 0;
  for (Index r : block_sizes_) s += r * r;
  return s;
}

std::vector<Index> FdAlgebra::blocks_of_color(int i) const {
  std::vector<Index> out;
  for (std::size_t j = 0; j < color_of_block_.size(); ++j)
    if (color_of_block_[j] == i) out.push_back(static_cast<Index>(j));
  return out;
}

FdAlgebra FdAlgebra::restrict(const std::vector<Index>& blocks) const {
  std::vector<Index> sizes;
  std::vector<int> colors;
  for (Index j : blocks) {
    if (j < 0 || j >= num_blocks()) throw InputError("FdAlgebra::restrict: block index out of range");
    sizes.push_back(block_size(j));
    colors.push_back(color(j));
  }
  return FdAlgebra(std::move(sizes), std::move(colors), num_colors_);
}

FdElement FdElement::zero(const FdAlgebra& alg) {
  FdElement e{alg, {}};
  for (Index r : alg.block_sizes()) e.blocks.push_back(CMatrix::Zero(r, r));
  return e;
}

FdElement FdElement::unit(const FdAlgebra& alg) {
  FdElement e{alg, {}};
  for (Index r : alg.block_sizes()) e.blocks.push_back(CMatrix::Identity(r, r));
  return e;
}

FdElement FdElement::color_unit(const FdAlgebra& alg, int color) {
  FdElement e = zero(alg);
  for (Index j : alg.blocks_of_color(color)) e.blocks[static_cast<std::size_t>(j)].setIdentity();
  return e;
}

FdElement FdElement::from_matrix(const FdAlgebra& alg, const CMatrix& m) {
  if (m.rows() != alg.matrix_dim() || m.cols() != alg.matrix_dim())
    throw InputError("FdElement::from_matrix: dimension mismatch");
  FdElement e{alg, {}};
  for (Index j = 0; j < alg.num_blocks(); ++j) {
    Index off = alg.offset(j), r = alg.block_size(j);
    e.blocks.push_back(m.block(off, off, r, r));
  }
  return e;
}

CMatrix FdElement::to_matrix() const {
  CMatrix m = CMatrix::Zero(algebra.matrix_dim(), algebra.matrix_dim());
  for (Index j = 0; j < algebra.num_blocks(); ++j) {
    Index off = algebra.offset(j), r = algebra.block_size(j);
    m.block(off, off, r, r) = blocks[static_cast<std::size_t>(j)];
  }
  return m;
}

FdElement FdElement::operator*(const FdElement& rhs) const {
  if (!(algebra == rhs.algebra)) throw InputError("FdElement: algebra mismatch");
  FdElement e{algebra, {}};
  for (std::size_t j = 0; j < blocks.size(); ++j) e.blocks.push_back(blocks[j] * rhs.blocks[j]);
  return e;
}

FdElement FdElement::operator-(const FdElement& rhs) const {
  if (!(algebra == rhs.algebra)) throw InputError("FdElement: algebra mismatch");
  FdElement e{algebra, {}};
  for (std::size_t j = 0; j < blocks.size(); ++j) e.blocks.push_back(blocks[j] - rhs.blocks[j]);
  return e;
}

// ---------------------------------------------------------------------------
// CpMap
// ---------------------------------------------------------------------------

namespace {

SparseOp embed(const SparseOp& m, Index dim, Index row_offset, Index col_offset) {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(m.nonzeros()));
  m.for_each([&](Index r, Index c, Complex v) { t.push_back({r + row_offset, c + col_offset, v}); });
  return SparseOp(dim, dim, std::move(t));
}

}  // namespace

CpMap::CpMap(FdAlgebra domain, Index codomain_dim, std::vector<std::vector<SparseOp>> images,
             std::optional<FdAlgebra> codomain_algebra)
    : domain_(std::move(domain)),
      codomain_dim_(codomain_dim),
      images_(std::move(images)),
      codomain_algebra_(std::move(codomain_algebra)) {
  if (codomain_algebra_ && codomain_algebra_->matrix_dim() != codomain_dim_)
    throw InputError("CpMap: codomain algebra does not match codomain dimension");
  if (static_cast<Index>(images_.size()) != domain_.num_blocks())
    throw InputError("CpMap: one image table per domain block required");
  for (Index j = 0; j < domain_.num_blocks(); ++j) {
    Index r = domain_.block_size(j);
    const auto& tab = images_[static_cast<std::size_t>(j)];
    if (static_cast<Index>(tab.size()) != r * r) throw InputError("CpMap: image table has wrong size");
    for (const auto& im : tab)
      if (im.rows() != codomain_dim_ || im.cols() != codomain_dim_)
        throw InputError("CpMap: image has wrong dimension");
  }
}

CpMap CpMap::from_images(const FdAlgebra& domain, Index codomain_dim, const ImageFn& image,
                         std::optional<FdAlgebra> codomain_algebra) {
  std::vector<std::vector<SparseOp>> images;
  for (Index j = 0; j < domain.num_blocks(); ++j) {
    Index r = domain.block_size(j);
    std::vector<SparseOp> tab;
    tab.reserve(static_cast<std::size_t>(r * r));
    for (Index s = 0; s < r; ++s)
      for (Index t = 0; t < r; ++t) tab.push_back(image(j, s, t));
    images.push_back(std::move(tab));
  }
  return CpMap(domain, codomain_dim, std::move(images), std::move(codomain_algebra));
}

CpMap CpMap::from_function(const FdAlgebra& domain, Index codomain_dim,
                           const std::function<CMatrix(const CMatrix&)>& f,
                           std::optional<FdAlgebra> codomain_algebra) {
  const Index n = domain.matrix_dim();
  return from_images(
      domain, codomain_dim,
      [&](Index j, Index s, Index t) {
        CMatrix x = CMatrix::Zero(n, n);
        x(domain.offset(j) + s, domain.offset(j) + t) = 1.0;
        CMatrix y = f(x);
        if (y.rows() != codomain_dim || y.cols() != codomain_dim)
          throw InputError("CpMap::from_function: function returned wrong dimension");
        return SparseOp::from_dense(y);
      },
      std::move(codomain_algebra));
}

CpMap CpMap::zero(const FdAlgebra& domain, Index codomain_dim, std::optional<FdAlgebra> codomain_algebra) {
  return from_images(
      domain, codomain_dim, [&](Index, Index, Index) { return SparseOp(codomain_dim, codomain_dim); },
      std::move(codomain_algebra));
}

const SparseOp& CpMap::image(Index block, Index s, Index t) const {
  Index r = domain_.block_size(block);
  return images_[static_cast<std::size_t>(block)][static_cast<std::size_t>(s * r + t)];
}

SparseOp CpMap::choi(Index block) const {
  const Index r = domain_.block_size(block);
  const Index d = codomain_dim_;
  std::vector<Triplet> trip;
  for (Index s = 0; s < r; ++s)
    for (Index t = 0; t < r; ++t)
      image(block, s, t).for_each([&](Index a, Index b, Complex v) { trip.push_back({s * d + a, t * d + b, v}); });
  return SparseOp(r * d, r * d, std::move(trip));
}

double CpMap::choi_min_eigenvalue() const {
  double lo = std::numeric_limits<double>::infinity();
  for (Index j = 0; j < domain_.num_blocks(); ++j) lo = std::min(lo, hermitian_min_eigenvalue(choi(j)));
  return std::isfinite(lo) ? lo : 0.0;
}

CMatrix CpMap::apply(const CMatrix& x) const {
  if (x.rows() != domain_dim() || x.cols() != domain_dim()) throw InputError("CpMap::apply: dimension mismatch");
  CMatrix out = CMatrix::Zero(codomain_dim_, codomain_dim_);
  for (Index j = 0; j < domain_.num_blocks(); ++j) {
    const Index off = domain_.offset(j), r = domain_.block_size(j);
    for (Index s = 0; s < r; ++s)
      for (Index t = 0; t < r; ++t) {
        Complex c = x(off + s, off + t);
        if (c == Complex(0.0)) continue;
        image(j, s, t).for_each([&](Index a, Index b, Complex v) { out(a, b) += c * v; });
      }
  }
  return out;
}

CpMap CpMap::restrict_domain(const std::vector<Index>& blocks) const {
  std::vector<std::vector<SparseOp>> images;
  for (Index j : blocks) images.push_back(images_.at(static_cast<std::size_t>(j)));
  return CpMap(domain_.restrict(blocks), codomain_dim_, std::move(images), codomain_algebra_);
}

CpMap CpMap::restrict_to_color(int color) const { return restrict_domain(domain_.blocks_of_color(color)); }

CpMap CpMap::scaled(double s) const {
  CpMap out = *this;
  for (auto& tab : out.images_)
    for (auto& im : tab) im = im.scaled(s);
  return out;
}

CpMap CpMap::compress_codomain(const std::vector<Index>& blocks) const {
  if (!codomain_algebra_) throw InputError("compress_codomain: map has no codomain algebra");
  const FdAlgebra& old = *codomain_algebra_;
  FdAlgebra kept = old.restrict(blocks);
  std::vector<Index> remap(static_cast<std::size_t>(old.matrix_dim()), -1);
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    Index j = blocks[k];
    for (Index p = 0; p < old.block_size(j); ++p)
      remap[static_cast<std::size_t>(old.offset(j) + p)] = kept.offset(static_cast<Index>(k)) + p;
  }
  const Index dim = kept.matrix_dim();
  std::vector<std::vector<SparseOp>> images;
  for (const auto& tab : images_) {
    std::vector<SparseOp> nt;
    for (const auto& im : tab) {
      std::vector<Triplet> trip;
      im.for_each([&](Index a, Index b, Complex v) {
        Index na = remap[static_cast<std::size_t>(a)], nb = remap[static_cast<std::size_t>(b)];
        if (na >= 0 && nb >= 0) trip.push_back({na, nb, v});
      });
      nt.emplace_back(dim, dim, std::move(trip));
    }
    images.push_back(std::move(nt));
  }
  return CpMap(domain_, dim, std::move(images), kept);
}

ApproxTriple make_triple(FdAlgebra F, CpMap psi, CpMap phi) {
  if (!psi.codomain_algebra() || !(*psi.codomain_algebra() == F) || !(phi.domain() == F))
    throw InputError("approximation triple: color partition inconsistent with F");
  if (psi.domain().num_blocks() > 1) throw InputError("approximation triple: psi must be defined on a full matrix algebra");
  if (psi.domain_dim() != phi.codomain_dim())
    throw InputError("approximation triple: psi domain and phi codomain differ");
  Index d = phi.codomain_dim();
  return ApproxTriple{std::move(F), std::move(psi), std::move(phi), d};
}

// ---------------------------------------------------------------------------
// Order zero
// ---------------------------------------------------------------------------

UnitImageSource image_source(const CpMap& map) {
  return {map.domain(), map.codomain_dim(), [&map](Index j, Index s, Index t) { return map.image(j, s, t); }};
}

double OrderZeroDefects::residual() const { return homomorphism + std::max(reconstruction, commutation); }

namespace {

constexpr Index kDenseSupportCap = 4096;

// Support compression by h^{-1/2}: diagonal fast path, dense otherwise.
class SupportCompression {
 public:
  SupportCompression(const SparseOp& h, double cutoff) : h_(h), diagonal_(h.is_diagonal()) {
    const auto n = static_cast<std::size_t>(h.rows());
    if (diagonal_) {
      auto d = h.diagonal_entries();
      hdiag_.resize(n);
      hinv_.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        hdiag_[i] = d[i].real();
        if (hdiag_[i] < -cutoff) throw InputError("order zero check: phi(1) is not positive");
        hinv_[i] = hdiag_[i] >= cutoff ? 1.0 / std::sqrt(hdiag_[i]) : 0.0;
      }
    } else {
      if (h.rows() > kDenseSupportCap) throw InputError("order zero check: non-diagonal phi(1) too large");
      s_ = SparseOp::from_dense(pseudo_inverse_sqrt(h.to_dense(), cutoff));
    }
  }

  SparseOp pi(const SparseOp& y) const { return diagonal_ ? y.scale_rows(hinv_).scale_cols(hinv_) : s_ * y * s_; }
  SparseOp right_h(const SparseOp& y) const { return diagonal_ ? y.scale_cols(hdiag_) : y * h_; }
  SparseOp left_h(const SparseOp& y) const { return diagonal_ ? y.scale_rows(hdiag_) : h_ * y; }

 private:
  const SparseOp& h_;
  bool diagonal_;
  std::vector<double> hdiag_, hinv_;
  SparseOp s_;
};

double norm_of_difference(const SparseOp& a, const SparseOp& b) {
  SparseOp d = a - b;
  return d.empty() ? 0.0 : operator_norm(d);
}

}  // namespace

OrderZeroDefects order_zero_defects(const UnitImageSource& src, double cutoff) {
  const FdAlgebra& F = src.domain;
  const Index D = src.codomain_dim;
  OrderZeroDefects out;
  if (F.num_blocks() == 0) return out;

  std::vector<SparseOp> diag_images;
  std::vector<Triplet> h_trip;
  for (Index j = 0; j < F.num_blocks(); ++j)
    for (Index s = 0; s < F.block_size(j); ++s) {
      diag_images.push_back(src.image(j, s, s));
      auto t = diag_images.back().triplets();
      h_trip.insert(h_trip.end(), t.begin(), t.end());
    }
  const SparseOp h(D, D, std::move(h_trip));
  const SupportCompression comp(h, cutoff);

  std::vector<SparseOp> block_units;
  for (Index j = 0; j < F.num_blocks(); ++j) {
    const Index r = F.block_size(j);
    std::vector<SparseOp> col(static_cast<std::size_t>(r)), row(static_cast<std::size_t>(r));
    for (Index s = 0; s < r; ++s) {
      col[static_cast<std::size_t>(s)] = comp.pi(src.image(j, s, 0));
      row[static_cast<std::size_t>(s)] = s == 0 ? col[0] : comp.pi(src.image(j, 0, s));
    }
    const SparseOp& p00 = col[0];
    SparseOp unit(D, D);
    std::vector<Triplet> unit_trip;
    for (Index s = 0; s < r; ++s)
      for (Index t = 0; t < r; ++t) {
        const SparseOp phi_st = src.image(j, s, t);
        const SparseOp pst = t == 0 ? col[static_cast<std::size_t>(s)]
                             : s == 0 ? row[static_cast<std::size_t>(t)]
                                      : comp.pi(phi_st);
        if (s == t) {
          auto tt = pst.triplets();
          unit_trip.insert(unit_trip.end(), tt.begin(), tt.end());
        }
        out.homomorphism = std::max(
            out.homomorphism, norm_of_difference(col[static_cast<std::size_t>(s)] * row[static_cast<std::size_t>(t)], pst));
        const SparseOp inner = row[static_cast<std::size_t>(s)] * col[static_cast<std::size_t>(t)];
        out.homomorphism = std::max(out.homomorphism, s == t ? norm_of_difference(inner, p00)
                                                             : (inner.empty() ? 0.0 : operator_norm(inner)));
        const SparseOp right = comp.right_h(pst);
        out.reconstruction = std::max(out.reconstruction, norm_of_difference(phi_st, right));
        out.commutation = std::max(out.commutation, norm_of_difference(comp.left_h(pst), right));
      }
    block_units.emplace_back(D, D, std::move(unit_trip));
  }
  for (std::size_t a = 0; a < block_units.size(); ++a)
    for (std::size_t b = a + 1; b < block_units.size(); ++b) {
      SparseOp prod = block_units[a] * block_units[b];
      if (!prod.empty()) out.homomorphism = std::max(out.homomorphism, operator_norm(prod));
    }
  for (std::size_t a = 0; a < diag_images.size(); ++a)
    for (std::size_t b = a + 1; b < diag_images.size(); ++b) {
      SparseOp prod = diag_images[a] * diag_images[b];
      if (!prod.empty()) out.orthogonality = std::max(out.orthogonality, operator_norm(prod));
    }
  return out;
}

CMatrix cp_apply(const CpMap& map, const CMatrix& x) { return map.apply(x); }

double cp_norm(const CpMap& map) {
  if (map.choi_min_eigenvalue() < -1e-9) throw InputError("cp_norm: Choi matrix is not positive semidefinite");
  return operator_norm(map.apply(CMatrix::Identity(map.domain_dim(), map.domain_dim())));
}

OrderZeroDecomposition order_zero_decompose(const CpMap& phi) {
  OrderZeroDecomposition out;
  out.defects = order_zero_defects(image_source(phi));
  out.residual = out.defects.residual();
  out.h = phi.apply(CMatrix::Identity(phi.domain_dim(), phi.domain_dim()));
  const SparseOp h = SparseOp::from_dense(out.h);
  const SupportCompression comp(h, kDefaultSpectralCutoff);
  out.pi = CpMap::from_images(phi.domain(), phi.codomain_dim(),
                              [&](Index j, Index s, Index t) { return comp.pi(phi.image(j, s, t)); });
  return out;
}

bool is_order_zero(const UnitImageSource& src, double tol) {
  OrderZeroDefects d = order_zero_defects(src);
  return d.residual() <= tol && d.orthogonality <= tol;
}

bool is_order_zero(const CpMap& phi, double tol) { return is_order_zero(image_source(phi), tol); }

double trace_pullback_defect(const CpMap& phi, const CMatrix& density) {
  if (density.rows() != phi.codomain_dim() || density.cols() != phi.codomain_dim())
    throw InputError("trace_pullback_defect: functional has wrong dimension");
  // tau phi(x y) - tau phi(y x) over matrix units x = e_ab, y = e_cd reduces
  // to off-diagonal values and differences of diagonal values.
  double defect = 0.0;
  const FdAlgebra& F = phi.domain();
  for (Index j = 0; j < F.num_blocks(); ++j) {
    const Index r = F.block_size(j);
    CMatrix v(r, r);
    for (Index a = 0; a < r; ++a)
      for (Index d = 0; d < r; ++d) {
        Complex acc = 0.0;
        phi.image(j, a, d).for_each([&](Index row, Index col, Complex val) { acc += density(col, row) * val; });
        v(a, d) = acc;
      }
    for (Index a = 0; a < r; ++a)
      for (Index d = 0; d < r; ++d) {
        if (a != d) defect = std::max(defect, std::abs(v(a, d)));
        else
          for (Index b = 0; b < r; ++b) defect = std::max(defect, std::abs(v(a, a) - v(b, b)));
      }
  }
  return defect;
}

WeakStabilityReport weak_stability_check(const CpMap& phi, const CMatrix& d, double delta) {
  const Index D = phi.codomain_dim();
  if (d.rows() != D || d.cols() != D) throw InputError("weak_stability_check: d has wrong dimension");
  PsdReport psd = psd_check(d, 1e-10);
  if (!psd.is_psd || operator_norm(d) > 1.0 + 1e-10)
    throw InputError("weak_stability_check: d is not a positive contraction");
  (void)delta;
  WeakStabilityReport rep;
  const CMatrix root = psd_sqrt(d);
  const FdAlgebra& F = phi.domain();
  for (Index j = 0; j < F.num_blocks(); ++j)
    for (Index s = 0; s < F.block_size(j); ++s)
      for (Index t = 0; t < F.block_size(j); ++t) {
        CMatrix y = phi.image(j, s, t).to_dense();
        rep.max_commutator = std::max(rep.max_commutator, operator_norm(d * y - y * d));
      }
  rep.defect_before = order_zero_decompose(phi).residual;
  CpMap candidate = CpMap::from_images(F, D, [&](Index j, Index s, Index t) {
    return SparseOp::from_dense(root * phi.image(j, s, t).to_dense() * root);
  });
  rep.defect_after = order_zero_decompose(candidate).residual;
  return rep;
}

// ---------------------------------------------------------------------------
// Triples
// ---------------------------------------------------------------------------

ValidationReport validate_triple(const ApproxTriple& t, const std::vector<CMatrix>& samples, double tol) {
  if (!t.psi.codomain_algebra() || !(*t.psi.codomain_algebra() == t.F) || !(t.phi.domain() == t.F))
    throw InputError("validate_triple: color partition inconsistent with F");
  ValidationReport rep;
  for (const auto& a : samples) {
    if (a.rows() != t.ambient_dim || a.cols() != t.ambient_dim)
      throw InputError("validate_triple: sample has wrong dimension");
    rep.approximation_error = std::max(rep.approximation_error, operator_norm(t.round_trip(a) - a));
  }
  rep.choi_min_eigenvalue = std::min(t.psi.choi_min_eigenvalue(), t.phi.choi_min_eigenvalue());
  rep.psi_norm = operator_norm(t.psi.apply(CMatrix::Identity(t.ambient_dim, t.ambient_dim)));
  bool pass = rep.psi_norm <= 1.0 + tol && rep.choi_min_eigenvalue >= -tol;
  for (int i = 0; i < t.colors(); ++i) {
    CpMap part = t.phi.restrict_to_color(i);
    double norm = operator_norm(part.apply(CMatrix::Identity(part.domain_dim(), part.domain_dim())));
    OrderZeroDefects d = order_zero_defects(image_source(part));
    rep.contraction_defect.push_back(std::max(0.0, norm - 1.0));
    rep.order_zero_residual.push_back(std::max(d.residual(), d.orthogonality));
    pass = pass && rep.contraction_defect.back() <= tol && rep.order_zero_residual.back() <= tol;
  }
  rep.pass = pass;
  return rep;
}

ApproxTriple normalize_composition(const ApproxTriple& t, const CMatrix& u) {
  const Index d = t.ambient_dim;
  if (u.rows() != d || u.cols() != d) throw InputError("normalize_composition: u has wrong dimension");
  const double scale = operator_norm(t.round_trip(u));
  if (scale < kDefaultSpectralCutoff) throw PreconditionError("normalize_composition: ||phi psi(u)|| is degenerate");
  CMatrix w;
  if (u.isDiagonal(0.0)) {
    w = CMatrix::Zero(d, d);
    for (Index i = 0; i < d; ++i) w(i, i) = std::sqrt(std::max(0.0, u(i, i).real()));
  } else {
    w = psd_sqrt(u);
  }
  // w e_st w = sum_{a,b} w_as w_tb e_ab
  std::vector<std::vector<std::pair<Index, Complex>>> col(static_cast<std::size_t>(d)), row(static_cast<std::size_t>(d));
  for (Index a = 0; a < d; ++a)
    for (Index s = 0; s < d; ++s)
      if (w(a, s) != Complex(0.0)) {
        col[static_cast<std::size_t>(s)].emplace_back(a, w(a, s));
        row[static_cast<std::size_t>(a)].emplace_back(s, w(a, s));
      }
  const Index D = t.psi.codomain_dim();
  CpMap psi = CpMap::from_images(
      t.psi.domain(), D,
      [&](Index, Index s, Index tt) {
        std::vector<Triplet> trip;
        for (const auto& [a, was] : col[static_cast<std::size_t>(s)])
          for (const auto& [b, wtb] : row[static_cast<std::size_t>(tt)])
            t.psi.image(0, a, b).for_each([&](Index x, Index y, Complex v) { trip.push_back({x, y, was * wtb * v}); });
        return SparseOp(D, D, std::move(trip));
      },
      t.F);
  return make_triple(t.F, std::move(psi), t.phi.scaled(1.0 / scale));
}

ApproxTriple direct_sum_triples(const ApproxTriple& t1, const ApproxTriple& t2) {
  const Index d1 = t1.ambient_dim, d2 = t2.ambient_dim, d = d1 + d2;
  const Index D1 = t1.F.matrix_dim(), D2 = t2.F.matrix_dim(), D = D1 + D2;
  std::vector<Index> sizes = t1.F.block_sizes();
  sizes.insert(sizes.end(), t2.F.block_sizes().begin(), t2.F.block_sizes().end());
  std::vector<int> colors = t1.F.colors();
  colors.insert(colors.end(), t2.F.colors().begin(), t2.F.colors().end());
  FdAlgebra F(sizes, colors, std::max(t1.colors(), t2.colors()));
  CpMap psi = CpMap::from_images(
      FdAlgebra::full_matrix(d), D,
      [&](Index, Index s, Index t) {
        if (s < d1 && t < d1) return embed(t1.psi.image(0, s, t), D, 0, 0);
        if (s >= d1 && t >= d1) return embed(t2.psi.image(0, s - d1, t - d1), D, D1, D1);
        return SparseOp(D, D);
      },
      F);
  const Index nb1 = t1.F.num_blocks();
  CpMap phi = CpMap::from_images(F, d, [&](Index j, Index s, Index t) {
    if (j < nb1) return embed(t1.phi.image(j, s, t), d, 0, 0);
    return embed(t2.phi.image(j - nb1, s, t), d, d1, d1);
  });
  return make_triple(std::move(F), std::move(psi), std::move(phi));
}

ApproxTriple tensor_triples(const ApproxTriple& t1, const ApproxTriple& t2, Index ambient_cap) {
  const Index d1 = t1.ambient_dim, d2 = t2.ambient_dim, d = d1 * d2;
  if (d > ambient_cap) throw InputError("tensor_triples: ambient dimension exceeds the configured cap");
  const FdAlgebra& F1 = t1.F;
  const FdAlgebra& F2 = t2.F;
  const int n2 = t2.colors();
  std::vector<Index> sizes;
  std::vector<int> colors;
  for (Index j = 0; j < F1.num_blocks(); ++j)
    for (Index k = 0; k < F2.num_blocks(); ++k) {
      sizes.push_back(F1.block_size(j) * F2.block_size(k));
      colors.push_back(F1.color(j) * n2 + F2.color(k));
    }
  FdAlgebra F(sizes, colors, t1.colors() * n2);
  const Index D = F.matrix_dim();

  // Representation-space index of (a1, a2) in the block-contiguous layout.
  std::vector<Index> block1(static_cast<std::size_t>(F1.matrix_dim())), local1(block1.size());
  for (Index j = 0; j < F1.num_blocks(); ++j)
    for (Index p = 0; p < F1.block_size(j); ++p) {
      block1[static_cast<std::size_t>(F1.offset(j) + p)] = j;
      local1[static_cast<std::size_t>(F1.offset(j) + p)] = p;
    }
  std::vector<Index> block2(static_cast<std::size_t>(F2.matrix_dim())), local2(block2.size());
  for (Index k = 0; k < F2.num_blocks(); ++k)
    for (Index p = 0; p < F2.block_size(k); ++p) {
      block2[static_cast<std::size_t>(F2.offset(k) + p)] = k;
      local2[static_cast<std::size_t>(F2.offset(k) + p)] = p;
    }
  auto place = [&](Index a1, Index a2) {
    Index j = block1[static_cast<std::size_t>(a1)], k = block2[static_cast<std::size_t>(a2)];
    Index blk = j * F2.num_blocks() + k;
    return F.offset(blk) + local1[static_cast<std::size_t>(a1)] * F2.block_size(k) + local2[static_cast<std::size_t>(a2)];
  };

  CpMap psi = CpMap::from_images(
      FdAlgebra::full_matrix(d), D,
      [&](Index, Index s, Index t) {
        const SparseOp& x = t1.psi.image(0, s / d2, t / d2);
        const SparseOp& y = t2.psi.image(0, s % d2, t % d2);
        std::vector<Triplet> trip;
        x.for_each([&](Index a1, Index b1, Complex v1) {
          y.for_each([&](Index a2, Index b2, Complex v2) { trip.push_back({place(a1, a2), place(b1, b2), v1 * v2}); });
        });
        return SparseOp(D, D, std::move(trip));
      },
      F);
  CpMap phi = CpMap::from_images(F, d, [&](Index blk, Index s, Index t) {
    const Index j = blk / F2.num_blocks(), k = blk % F2.num_blocks();
    const Index r2 = F2.block_size(k);
    return kron(t1.phi.image(j, s / r2, t / r2), t2.phi.image(k, s % r2, t % r2));
  });
  return make_triple(std::move(F), std::move(psi), std::move(phi));
}

ApproxTriple zero_triple(Index d, int colors) {
  FdAlgebra F({}, {}, colors);
  return make_triple(F, CpMap::zero(FdAlgebra::full_matrix(d), 0, F), CpMap::zero(F, d));
}

// ---------------------------------------------------------------------------
// Pruning
// ---------------------------------------------------------------------------

PruneResult prune_to_order_zero(const ApproxTriple& t, const std::vector<CMatrix>& testset, double eps) {
  const int n = t.colors() - 1;
  const double upper = 1.0 / std::pow(n + 2.0, 4.0);
  if (!(eps > 0.0 && eps < upper)) throw InputError("prune_to_order_zero: eps must lie in (0, (n+2)^-4)");
  const Index d = t.ambient_dim;
  const FdAlgebra& F = t.F;

  std::vector<CMatrix> psi_c, round;
  double input_error = 0.0;
  for (const auto& c : testset) {
    if (c.rows() != d || c.cols() != d) throw InputError("prune_to_order_zero: test element has wrong dimension");
    psi_c.push_back(t.psi.apply(c));
    round.push_back(t.phi.apply(psi_c.back()));
    input_error = std::max(input_error, operator_norm(round.back() - c));
  }
  if (!(input_error < eps)) throw PreconditionError("prune_to_order_zero: input triple is not within eps on the testset");

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t a = 0; a < testset.size(); ++a)
    for (std::size_t b = 0; b < testset.size(); ++b)
      if (operator_norm(testset[a] * testset[b]) < eps) pairs.emplace_back(a, b);

  const double inv8 = std::pow(eps, -1.0 / 8.0);
  std::vector<double> rhs;
  for (const auto& [a, b] : pairs) rhs.push_back(inv8 * std::pow(operator_norm(round[a] * round[b]), 0.25));

  std::vector<Index> bad, keep;
  for (Index j = 0; j < F.num_blocks(); ++j) {
    const Index off = F.offset(j), r = F.block_size(j);
    bool is_bad = false;
    for (std::size_t p = 0; p < pairs.size() && !is_bad; ++p) {
      const auto& [a, b] = pairs[p];
      CMatrix prod = psi_c[a].block(off, off, r, r) * psi_c[b].block(off, off, r, r);
      // 0 >= 0 is not a witness: the mass estimate divides by the right side
      const double lhs = operator_norm(prod);
      is_bad = lhs > 0.0 && lhs >= rhs[p];
    }
    (is_bad ? bad : keep).push_back(j);
  }

  PruneResult out;
  out.pruned = make_triple(F.restrict(keep), t.psi.compress_codomain(keep), t.phi.restrict_domain(keep));
  CpMap dropped = t.phi.restrict_domain(bad);
  out.dropped_mass = operator_norm(dropped.apply(CMatrix::Identity(dropped.domain_dim(), dropped.domain_dim())));

  PruneCertificate& cert = out.certificate;
  cert.bad_blocks = bad;
  cert.input_error = input_error;
  cert.dropped_mass = out.dropped_mass;
  cert.dropped_bound = (n + 1) * std::pow(eps, 1.0 / 8.0);
  cert.error_bound = std::pow(eps, 1.0 / 16.0);
  cert.product_bound = cert.error_bound;
  cert.near_orthogonal_pairs = pairs.size();
  std::vector<CMatrix> pruned_psi;
  for (const auto& c : testset) {
    pruned_psi.push_back(out.pruned.psi.apply(c));
    cert.post_error = std::max(cert.post_error, operator_norm(out.pruned.phi.apply(pruned_psi.back()) - c));
  }
  for (const auto& [a, b] : pairs)
    cert.max_surviving_product = std::max(cert.max_surviving_product, operator_norm(pruned_psi[a] * pruned_psi[b]));
  cert.holds = cert.dropped_mass <= cert.dropped_bound && cert.post_error < cert.error_bound &&
               (pairs.empty() || cert.max_surviving_product < cert.product_bound);
  return out;
}

// ---------------------------------------------------------------------------
// Hereditary cut-down
// ---------------------------------------------------------------------------

CutDownResult cut_down_psi(const ApproxTriple& t, const CMatrix& h0, const CMatrix& h1, double eta,
                           const std::vector<CMatrix>& samples) {
  const Index d = t.ambient_dim;
  if (h0.rows() != d || h1.rows() != d || h0.cols() != d || h1.cols() != d)
    throw InputError("cut_down_psi: h0, h1 have wrong dimension");
  if (!(eta > 0.0 && eta <= std::pow(2.0, -16.0))) throw PreconditionError("cut_down_psi: eta must lie in (0, 2^-16]");
  if (operator_norm(h0 * h1 - h1) > 1e-10) throw PreconditionError("cut_down_psi: h0 h1 = h1 violated");
  for (const CMatrix* h : {&h0, &h1}) {
    if (!psd_check(*h, 1e-10).is_psd || operator_norm(*h) > 1.0 + 1e-10)
      throw PreconditionError("cut_down_psi: h0, h1 must be positive contractions");
  }
  const FdAlgebra& F = t.F;
  const Index D = F.matrix_dim();
  const int n = t.colors() - 1;

  FdElement psi_h1 = FdElement::from_matrix(F, t.psi.apply(h1));
  FdElement p{F, {}};
  const auto step = step_function(std::sqrt(eta));
  for (const auto& blk : psi_h1.blocks) p.blocks.push_back(hermitian_funcalc(blk, step));
  const CMatrix pm = p.to_matrix();

  CutDownResult out{p, CpMap::from_images(
                           t.psi.domain(), D,
                           [&](Index j, Index s, Index tt) {
                             return SparseOp::from_dense(pm * t.psi.image(j, s, tt).to_dense() * pm);
                           },
                           F),
                    {}};
  CutDownReport& rep = out.report;
  const CMatrix one_minus_h0 = CMatrix::Identity(d, d) - h0;
  rep.color_bound = std::pow(eta, 0.25);
  for (int i = 0; i < t.colors(); ++i) {
    CMatrix pi = (FdElement::color_unit(F, i) * p).to_matrix();
    rep.color_lhs.push_back(operator_norm(t.phi.apply(pi) * one_minus_h0));
  }
  rep.sample_bound = (n + 1) * std::pow(eta, 0.25);
  const CMatrix one_minus_p = CMatrix::Identity(D, D) - pm;
  std::vector<const CMatrix*> approx_set{&h0, &h1};
  for (const auto& b : samples) {
    rep.sample_lhs.push_back(operator_norm(t.phi.apply(one_minus_p * t.psi.apply(b))));
    approx_set.push_back(&b);
  }
  for (const CMatrix* a : approx_set)
    rep.approximation_error = std::max(rep.approximation_error, operator_norm(t.round_trip(*a) - *a));
  rep.holds = std::all_of(rep.color_lhs.begin(), rep.color_lhs.end(), [&](double v) { return v <= rep.color_bound + 1e-12; }) &&
              std::all_of(rep.sample_lhs.begin(), rep.sample_lhs.end(), [&](double v) { return v <= rep.sample_bound + 1e-12; });
  return out;
}

// ---------------------------------------------------------------------------
// Product domination
// ---------------------------------------------------------------------------

DominationReport product_domination_check(const CMatrix& a, const CMatrix& a_prime, const CMatrix& b,
                                          const CMatrix& b_prime) {
  constexpr double tol = 1e-10;
  auto require_order = [&](const CMatrix& lo, const CMatrix& hi) {
    if (lo.rows() != hi.rows() || lo.cols() != hi.cols()) throw InputError("product_domination_check: dimension mismatch");
    if (!psd_check(lo, tol).is_psd || !psd_check(hi - lo, tol).is_psd || operator_norm(hi) > 1.0 + tol)
      throw InputError("product_domination_check: ordering violated");
  };
  require_order(a, b);
  require_order(a_prime, b_prime);
  DominationReport rep;
  const double n = operator_norm(a * a_prime);
  rep.lhs = n * n;
  rep.rhs = operator_norm(b * b_prime);
  rep.holds = rep.lhs <= rep.rhs + 1e-9;
  return rep;
}

}  // namespace ndlab
