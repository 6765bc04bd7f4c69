#pragma once

// Finite-dimensional C*-algebras, completely positive maps and the
// approximation-triple algebra built on them.

#include <functional>
#include <optional>
#include <vector>

#include "ndlab/numkit.hpp"

namespace ndlab {

/// F = M_{r_1} + ... + M_{r_s}, acting block-diagonally on C^{r_1+...+r_s},
/// with every block assigned to one of the ideals F^{(0)}, ..., F^{(n)}.
/// An ideal may be empty (e.g. after pruning); the color count is kept.
class FdAlgebra {
 public:
  FdAlgebra() = default;
  /// num_colors < 0 means "max color + 1".
  FdAlgebra(std::vector<Index> block_sizes, std::vector<int> color_of_block, int num_colors = -1);

  static FdAlgebra full_matrix(Index d);
  /// Commutative algebra C^count with the given block colors.
  static FdAlgebra diagonal(const std::vector<int>& colors, int num_colors = -1);

  Index num_blocks() const { return static_cast<Index>(block_sizes_.size()); }
  Index block_size(Index j) const { return block_sizes_[static_cast<std::size_t>(j)]; }
  int color(Index j) const { return color_of_block_[static_cast<std::size_t>(j)]; }
  int num_colors() const { return num_colors_; }
  /// Offset of block j inside the concrete representation space.
  Index offset(Index j) const { return offsets_[static_cast<std::size_t>(j)]; }
  /// Dimension of the representation space, sum of r_j.
  Index matrix_dim() const { return offsets_.back(); }
  /// Vector-space dimension, sum of r_j^2.
  Index total_dim() const;

  const std::vector<Index>& block_sizes() const { return block_sizes_; }
  const std::vector<int>& colors() const { return color_of_block_; }
  std::vector<Index> blocks_of_color(int i) const;

  /// Subalgebra made of the listed blocks, in the listed order.
  FdAlgebra restrict(const std::vector<Index>& blocks) const;

  bool operator==(const FdAlgebra& other) const {
    return block_sizes_ == other.block_sizes_ && color_of_block_ == other.color_of_block_ &&
           num_colors_ == other.num_colors_;
  }

 private:
  std::vector<Index> block_sizes_;
  std::vector<int> color_of_block_;
  int num_colors_ = 1;
  std::vector<Index> offsets_{0};
};

/// Element of an FdAlgebra as a tuple of square blocks.
struct FdElement {
  FdAlgebra algebra;
  std::vector<CMatrix> blocks;

  static FdElement zero(const FdAlgebra& alg);
  static FdElement unit(const FdAlgebra& alg);
  /// Unit of the ideal F^{(i)}.
  static FdElement color_unit(const FdAlgebra& alg, int color);
  /// Block-diagonal compression of a matrix on the representation space.
  static FdElement from_matrix(const FdAlgebra& alg, const CMatrix& m);

  CMatrix to_matrix() const;
  FdElement operator*(const FdElement& rhs) const;
  FdElement operator-(const FdElement& rhs) const;
};

/// Completely positive map out of an FdAlgebra into M_D. The Choi matrix
/// C_j = sum_{s,t} e_st (x) phi(e^{(j)}_st) of every domain block is stored
/// in block form: entry (s, t) of block j is the image of the matrix unit.
class CpMap {
 public:
  using ImageFn = std::function<SparseOp(Index block, Index s, Index t)>;

  CpMap() = default;
  CpMap(FdAlgebra domain, Index codomain_dim, std::vector<std::vector<SparseOp>> images,
        std::optional<FdAlgebra> codomain_algebra = std::nullopt);

  static CpMap from_images(const FdAlgebra& domain, Index codomain_dim, const ImageFn& image,
                           std::optional<FdAlgebra> codomain_algebra = std::nullopt);
  /// Tabulates a linear map given as a function on domain-space matrices.
  static CpMap from_function(const FdAlgebra& domain, Index codomain_dim,
                             const std::function<CMatrix(const CMatrix&)>& f,
                             std::optional<FdAlgebra> codomain_algebra = std::nullopt);
  static CpMap zero(const FdAlgebra& domain, Index codomain_dim,
                    std::optional<FdAlgebra> codomain_algebra = std::nullopt);

  const FdAlgebra& domain() const { return domain_; }
  Index domain_dim() const { return domain_.matrix_dim(); }
  Index codomain_dim() const { return codomain_dim_; }
  const std::optional<FdAlgebra>& codomain_algebra() const { return codomain_algebra_; }

  const SparseOp& image(Index block, Index s, Index t) const;
  /// Assembled Choi matrix of domain block j, size (r_j D) x (r_j D).
  SparseOp choi(Index block) const;
  double choi_min_eigenvalue() const;

  /// Applies the map to the block-diagonal part of x.
  CMatrix apply(const CMatrix& x) const;

  CpMap restrict_domain(const std::vector<Index>& blocks) const;
  CpMap restrict_to_color(int color) const;
  CpMap scaled(double s) const;
  /// Same map, codomain compressed to the given blocks of the codomain algebra.
  CpMap compress_codomain(const std::vector<Index>& blocks) const;

 private:
  FdAlgebra domain_;
  Index codomain_dim_ = 0;
  std::vector<std::vector<SparseOp>> images_;  // [block][s * r + t]
  std::optional<FdAlgebra> codomain_algebra_;
};

/// (F, psi, phi): psi maps M_ambient into F, phi maps F back.
struct ApproxTriple {
  FdAlgebra F;
  CpMap psi;
  CpMap phi;
  Index ambient_dim = 0;

  int colors() const { return F.num_colors(); }
  CMatrix round_trip(const CMatrix& a) const { return phi.apply(psi.apply(a)); }
};

ApproxTriple make_triple(FdAlgebra F, CpMap psi, CpMap phi);

// ---------------------------------------------------------------------------
// Order-zero machinery
// ---------------------------------------------------------------------------

/// Matrix-unit images of a linear map out of an FdAlgebra, computed on
/// demand. Lets the order-zero checks run on maps too large to tabulate.
struct UnitImageSource {
  FdAlgebra domain;
  Index codomain_dim = 0;
  CpMap::ImageFn image;
};

UnitImageSource image_source(const CpMap& map);

struct OrderZeroDefects {
  double homomorphism = 0.0;   // generator relations of the supporting map
  double reconstruction = 0.0; // phi(e_st) vs pi(e_st) h
  double commutation = 0.0;    // [h, pi(e_st)]
  double orthogonality = 0.0;  // phi(p) phi(q) for orthogonal diagonal units

  /// Decomposition residual: homomorphism + max(reconstruction, commutation).
  double residual() const;
};

/// Defects of the candidate decomposition h = phi(1),
/// pi = h^{-1/2} phi(.) h^{-1/2} on the support of h.
OrderZeroDefects order_zero_defects(const UnitImageSource& src, double cutoff = kDefaultSpectralCutoff);

struct OrderZeroDecomposition {
  CMatrix h;
  CpMap pi;
  double residual = 0.0;
  OrderZeroDefects defects;
};

CMatrix cp_apply(const CpMap& map, const CMatrix& x);
/// ||map(1)||; InputError when the Choi matrix is not PSD within 1e-9.
double cp_norm(const CpMap& map);

OrderZeroDecomposition order_zero_decompose(const CpMap& phi);
bool is_order_zero(const CpMap& phi, double tol);
bool is_order_zero(const UnitImageSource& src, double tol);

/// tau(y) = tr(density * y).
double trace_pullback_defect(const CpMap& phi, const CMatrix& density);

struct WeakStabilityReport {
  double defect_before = 0.0;
  double defect_after = 0.0;
  double max_commutator = 0.0;  // max_st ||[d, phi(e_st)]||
};

WeakStabilityReport weak_stability_check(const CpMap& phi, const CMatrix& d, double delta);

// ---------------------------------------------------------------------------
// Approximation triples
// ---------------------------------------------------------------------------

struct ValidationReport {
  double approximation_error = 0.0;
  double psi_norm = 0.0;
  std::vector<double> contraction_defect;  // per color
  std::vector<double> order_zero_residual; // per color
  double choi_min_eigenvalue = 0.0;
  bool pass = false;
};

ValidationReport validate_triple(const ApproxTriple& t, const std::vector<CMatrix>& samples, double tol);

/// psi' = psi(u^{1/2} . u^{1/2}), phi' = ||phi psi(u)||^{-1} phi.
ApproxTriple normalize_composition(const ApproxTriple& t, const CMatrix& u);

ApproxTriple direct_sum_triples(const ApproxTriple& t1, const ApproxTriple& t2);

constexpr Index kTensorAmbientCap = 256;

ApproxTriple tensor_triples(const ApproxTriple& t1, const ApproxTriple& t2, Index ambient_cap = kTensorAmbientCap);

/// Triple with empty F on an ambient space of dimension d.
ApproxTriple zero_triple(Index d, int colors = 1);

struct PruneCertificate {
  std::vector<Index> bad_blocks;
  double input_error = 0.0;
  double dropped_mass = 0.0;
  double dropped_bound = 0.0;   // (n+1) eps^{1/8}
  double post_error = 0.0;
  double error_bound = 0.0;     // eps^{1/16}
  double max_surviving_product = 0.0;
  double product_bound = 0.0;   // eps^{1/16}
  std::size_t near_orthogonal_pairs = 0;
  bool holds = false;
};

struct PruneResult {
  ApproxTriple pruned;
  double dropped_mass = 0.0;
  PruneCertificate certificate;
};

/// Drops every block j with ||psi_j(c) psi_j(c')|| >= eps^{-1/8}
/// ||phi psi(c) phi psi(c')||^{1/4} for some testset pair with ||c c'|| < eps.
PruneResult prune_to_order_zero(const ApproxTriple& t, const std::vector<CMatrix>& testset, double eps);

struct CutDownReport {
  std::vector<double> color_lhs;  // ||phi^{(i)}(p^{(i)})(1 - h0)||
  double color_bound = 0.0;       // eta^{1/4}
  std::vector<double> sample_lhs; // ||phi((1 - p) psi(b_j))||
  double sample_bound = 0.0;      // (n+1) eta^{1/4}
  double approximation_error = 0.0;
  bool holds = false;
};

struct CutDownResult {
  FdElement p;
  CpMap psi_hat;
  CutDownReport report;
};

CutDownResult cut_down_psi(const ApproxTriple& t, const CMatrix& h0, const CMatrix& h1, double eta,
                           const std::vector<CMatrix>& samples);

struct DominationReport {
  double lhs = 0.0;  // ||a a'||^2
  double rhs = 0.0;  // ||b b'||
  bool holds = false;
};

DominationReport product_domination_check(const CMatrix& a, const CMatrix& a_prime, const CMatrix& b,
                                          const CMatrix& b_prime);

}  // namespace ndlab
