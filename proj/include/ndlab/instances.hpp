#pragma once

// Random and structured instances for the randomized suites.

#include <random>

#include "ndlab/cstar.hpp"

namespace ndlab {

CMatrix random_matrix(std::mt19937_64& rng, Index r, Index c);
CMatrix random_unitary(std::mt19937_64& rng, Index d);
/// Positive matrix with spectrum in [lo, hi].
CMatrix random_positive(std::mt19937_64& rng, Index d, double lo, double hi);
CMatrix unit(Index d, Index s, Index t);
std::vector<CMatrix> diagonal_units(Index d);

/// phi = h pi with pi(x) = U (sum_j x_j (x) 1_{m_j} + 0) U* and
/// h = U (sum_j 1 (x) c_j + 0) U*, so h commutes with the image of pi.
struct OrderZeroInstance {
  FdAlgebra F;
  Index D = 0;
  CMatrix h;
  CpMap pi;
  CpMap phi;
};

OrderZeroInstance random_order_zero(std::mt19937_64& rng, Index max_dim = 64);

/// Exact triple on M_d: F = C^d with the given colors, psi = diagonal
/// compression, phi = diagonal embedding.
ApproxTriple diagonal_triple(const std::vector<int>& colors, int num_colors);

/// Extra one-dimensional block of F: psi maps e_aa and e_bb to 1/2 there,
/// phi sends it to delta e_aa.
struct BadBlock {
  Index a = 0;
  Index b = 1;
  int color = 1;
  double delta = 0.0;
};

ApproxTriple triple_with_bad_blocks(const std::vector<int>& colors, int num_colors, const std::vector<BadBlock>& bad);
ApproxTriple triple_with_bad_block(const std::vector<int>& colors, int num_colors, double delta);

struct PruneInstance {
  ApproxTriple triple;
  std::vector<CMatrix> testset;
  std::vector<BadBlock> planted;
};

/// Diagonal triple on 3..6 points with 2..max_colors colors and 0..2 planted
/// bad blocks of mass below eps/10; the test set is the diagonal units.
PruneInstance random_prune_instance(std::mt19937_64& rng, double eps, int max_colors = 3);

/// Exact triple on M_d: F = random block partition of d with the given
/// number of colors (each used), psi(a) = E(U* a U), phi(x) = U x U*.
ApproxTriple random_block_triple(std::mt19937_64& rng, Index d, int num_colors);

/// 0 <= a <= b and 0 <= a' <= b' on C^d: b = a + c c*, both pairs scaled by
/// max(1, ||b||) so that everything is a contraction.
struct DominationInstance {
  CMatrix a, a_prime, b, b_prime;
};

DominationInstance random_domination_instance(std::mt19937_64& rng, Index d = 6);

}  // namespace ndlab
