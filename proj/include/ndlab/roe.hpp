#pragma once

// Bounded-geometry metric spaces, band matrices and the partition-of-unity
// approximations of uniform Roe algebras.

#include <memory>
#include <random>
#include <vector>

#include "ndlab/numkit.hpp"

namespace ndlab {

/// Finite space with an integer metric.
class CoarseSpace {
 public:
  static constexpr Index kMaxPoints = 4096;

  CoarseSpace() = default;
  /// Row-major n x n distance table; validated as a metric.
  CoarseSpace(Index n, std::vector<Index> table);

  /// Points 0..len-1 of Z.
  static CoarseSpace z_interval(Index len);
  /// {0..side-1}^d with the l1 metric, row-major, first coordinate most
  /// significant.
  static CoarseSpace grid(Index d, Index side);

  Index size() const { return n_; }
  Index dist(Index x, Index y) const { return dist_[static_cast<std::size_t>(x * n_ + y)]; }
  Index dist_to_set(Index x, const std::vector<Index>& set) const;
  Index set_distance(const std::vector<Index>& a, const std::vector<Index>& b) const;
  Index diameter(const std::vector<Index>& set) const;
  /// {x : d(x, set) <= r}, sorted.
  std::vector<Index> neighborhood(const std::vector<Index>& set, Index r) const;
  /// b_r = max_x |B_r(x)|.
  Index ball_growth(Index r) const;

 private:
  Index n_ = 0;
  std::vector<Index> dist_;
};

struct BandMatrix {
  std::shared_ptr<const CoarseSpace> space;
  CMatrix entries;

  BandMatrix(std::shared_ptr<const CoarseSpace> s, CMatrix m);

  static BandMatrix identity(std::shared_ptr<const CoarseSpace> s);
  /// e_{x+1, x} for consecutive indices.
  static BandMatrix shift(std::shared_ptr<const CoarseSpace> s);
  /// Entries uniform in the complex disc of radius M on pairs within width.
  static BandMatrix random(std::shared_ptr<const CoarseSpace> s, Index width, double M, std::mt19937_64& rng);
  static BandMatrix diagonal(std::shared_ptr<const CoarseSpace> s, const std::vector<double>& d);

  /// Largest distance between the indices of a nonzero entry.
  Index width() const;
  double entry_bound() const;
};

struct NormBound {
  double norm = 0.0;
  double bound = 0.0;  // b_{w(a)} M
  bool holds = false;
};

NormBound norm_bound_check(const BandMatrix& a);

using PointSets = std::vector<std::vector<Index>>;

/// n + 1 families of point sets.
struct DiscreteCover {
  std::vector<PointSets> families;
  Index discreteness = 0;  // min distance between distinct sets of one family
  Index diameter_bound = 0;

  static DiscreteCover from_families(const CoarseSpace& space, std::vector<PointSets> families);
  std::size_t num_families() const { return families.size(); }
  /// Throws InputError unless the families cover the space.
  void validate(const CoarseSpace& space) const;
};

/// Intervals [2Rm, 2R(m+1)) of 0..len-1, family m mod 2.
DiscreteCover cover_Z(const CoarseSpace& interval, Index R);
/// d + 1 families of shifted bricks of side 2Rd and period 2R(d+1) in the
/// box {0..side-1}^d.
DiscreteCover cover_Zd(const CoarseSpace& grid, Index R, Index d, Index side);

struct HFamily {
  Index r = 0;
  Index discreteness = 0;
  std::vector<std::vector<Rational>> h_raw;  // [family][point]
  std::vector<Rational> h_total;
  std::vector<std::vector<double>> h_norm;   // (h^(i)/h)^{1/2}

  std::size_t num_families() const { return h_raw.size(); }
};

/// h^(i)(x) = (1/r) sum_U #{1 <= l <= r : d(x, U) <= l - 1}. Requires
/// discreteness >= 2r.
HFamily h_family(const CoarseSpace& space, const DiscreteCover& cover, Index r);

/// max over families and pairs of |h^(i)(x) - h^(i)(y)| - d(x, y)/r, exact.
Rational lipschitz_excess(const CoarseSpace& space, const HFamily& hf);

struct CommutatorReport {
  std::vector<double> per_family;      // ||[h^(i), a]||
  std::vector<double> per_family_bound;  // w/r b ||a||
  double total = 0.0;                  // ||[h, a]||
  double paper_bound = 0.0;            // (n+1)/r w b ||a||
  Index width = 0;
  Index ball_growth = 0;
  double norm = 0.0;
  Index r = 0;
  Index discreteness = 0;
  bool holds = false;
};

CommutatorReport commutator_report(const BandMatrix& a, const HFamily& hf);

struct PsiBlocks {
  std::vector<PointSets> supports;             // [family][U] = B(U, r - 1)
  std::vector<std::vector<CMatrix>> blocks;    // compressions of h_i a h_i
  std::vector<double> residual;                // off-block part per family
  Index r = 0;
  Index discreteness = 0;

  double max_residual() const;
};

PsiBlocks psi_r(const BandMatrix& a, const HFamily& hf, const DiscreteCover& cover);

/// Block list placed block-diagonally on the index sets.
CMatrix embed_blocks(const PointSets& supports, const std::vector<CMatrix>& blocks, Index n);

/// Sum over families of the embedded blocks.
CMatrix phi_r(const PsiBlocks& blocks, Index n);

struct PhiPsiReport {
  double defect = 0.0;          // ||Phi Psi(a) - a||
  double commutator_sum = 0.0;  // sum_i ||[a, h_i]||
  double residual = 0.0;
  double unital_defect = 0.0;   // ||Phi Psi(1) - 1||
  double fitted_c = 0.0;        // defect * r
  Index r = 0;
  Index discreteness = 0;
  bool holds = false;
};

PhiPsiReport phi_psi_defect(const BandMatrix& a, const HFamily& hf, const DiscreteCover& cover);

}  // namespace ndlab
