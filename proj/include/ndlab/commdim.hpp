#pragma once

// Finite metric spaces, colored covers, partitions of unity and the
// cover-based approximations of C(X).

#include <optional>
#include <vector>

#include "ndlab/cstar.hpp"

namespace ndlab {

class FinSpace {
 public:
  FinSpace() = default;
  /// Validates symmetry, zero diagonal, nonnegativity and the triangle
  /// inequality (exact comparison).
  explicit FinSpace(RMatrix dist);

  static FinSpace path(Index n);
  static FinSpace cycle(Index n);
  /// rows x cols grid with the l1 metric; point (r, c) has index r * cols + c.
  static FinSpace grid(Index rows, Index cols);

  Index size() const { return dist_.rows(); }
  double dist(Index x, Index y) const { return dist_(x, y); }
  const RMatrix& matrix() const { return dist_; }
  double diameter(const std::vector<Index>& set) const;
  double dist_to_set(Index x, const std::vector<Index>& set) const;

 private:
  RMatrix dist_;
};

using PointSets = std::vector<std::vector<Index>>;

struct ColoredCover {
  PointSets sets;
  std::vector<int> color;
  int num_colors = 0;
  double diameter_bound = 0.0;
  /// Optional designated centers x_U; otherwise build_pou picks the point
  /// of least eccentricity inside U.
  std::vector<Index> anchors;

  /// Throws InputError unless the cover invariants hold on `space`.
  void validate(const FinSpace& space) const;
};

/// Colors sets in input order with the least color not used by an earlier
/// overlapping set.
ColoredCover greedy_color(const PointSets& sets, const FinSpace& space);

/// Cover of the path 0..N-1 by balls of radius m - 1 around anchors
/// 0, m, 2m, ... <= N - 1, with m - 1 = max(2, floor(mesh (N - 1) / 2)) so
/// that the set diameter in [0, 1] units is at most mesh when N allows it.
ColoredCover interval_cover(const FinSpace& path, double mesh);

/// Shifted-cube families in a box of the given side lengths: cubes of side
/// 2Rd repeating with period 2R(d+1), family i offset by 2Ri in every
/// coordinate, each cube enlarged by `enlarge` and clipped to the box.
/// Returns sets in family order together with the family of each set.
std::pair<PointSets, std::vector<int>> brick_sets(const std::vector<Index>& box, Index R, Index enlarge);

/// Brick cover of a rows x cols grid for the partition-of-unity
/// construction: the families of brick_sets enlarged by R, greedily colored.
ColoredCover grid_brick_cover(const FinSpace& grid, Index rows, Index cols, Index R);

struct PartitionOfUnity {
  std::vector<std::vector<double>> theta;  // [set][point]
  std::vector<Index> anchor;
};

/// theta_U = tent_U / sum_V tent_V with tent_U(x) = 1 - d(x, x_U)/rho_U on U
/// and 0 off U, rho_U = 1 + max_{y in U} d(y, x_U).
PartitionOfUnity build_pou(const ColoredCover& cover, const FinSpace& space);

/// max_U (max - min of f over supp theta_U).
double oscillation_bound(const std::vector<double>& f, const PartitionOfUnity& pou);

/// F = C^{#sets}; psi(a)_U = a(x_U, x_U); phi(e_U) = diag(theta_U).
ApproxTriple build_commutative_triple(const FinSpace& space, const ColoredCover& cover, const PartitionOfUnity& pou);

CMatrix diag_matrix(const std::vector<double>& f);

/// sup_x |(phi psi f)(x) - f(x)| for a function on the points.
double commutative_error(const ApproxTriple& t, const std::vector<double>& f);

/// Cut F to blocks with psi(h) >= cutoff, then
/// psi_hat(a) = psi(h)^{-1/2} psi(h^{1/2} a h^{1/2}) psi(h)^{-1/2},
/// phi_hat(x) = (1 - eps/2) phi(psi(h)^{1/2} x psi(h)^{1/2}).
/// h is a function on the points with values in [0, 1]; F must be
/// commutative.
ApproxTriple contractify(const ApproxTriple& t, const std::vector<double>& h, double eps,
                         double cutoff = kDefaultSpectralCutoff);

}  // namespace ndlab
