#pragma once

// Truncated full Fock space over an n-letter alphabet, creation operators,
// Schur multipliers and the maps psi_k / phi_k / Lambda_k.

#include <optional>
#include <vector>

#include "ndlab/cstar.hpp"

namespace ndlab {

/// Word over the alphabet {1..n}; the empty word is the vacuum.
struct Word {
  std::vector<int> letters;

  Index length() const { return static_cast<Index>(letters.size()); }
  bool operator==(const Word&) const = default;
};

/// Words of length <= L, grouped by level. Inside a level the position is
/// the base-n value of the word, first letter most significant.
class TruncatedFock {
 public:
  static constexpr Index kMaxDim = Index{1} << 26;

  TruncatedFock(int n, Index depth);

  int alphabet() const { return n_; }
  Index depth() const { return depth_; }
  Index dim() const { return level_offset(depth_ + 1); }
  Index level_size(Index level) const { return pow_[static_cast<std::size_t>(level)]; }
  /// Index of the first word of the given level; level_offset(L + 1) = dim().
  Index level_offset(Index level) const { return offset_[static_cast<std::size_t>(level)]; }
  Index level_of(Index idx) const;

  Index index(const Word& w) const;
  Word word(Index idx) const;
  /// Position of w inside its level.
  Index position(const Word& w) const;

  bool operator==(const TruncatedFock& o) const { return n_ == o.n_ && depth_ == o.depth_; }

 private:
  int n_ = 2;
  Index depth_ = 0;
  std::vector<Index> pow_;     // n^l, l = 0..L+1
  std::vector<Index> offset_;  // l = 0..L+1
};

/// d_k = dim of levels 0..k-1 = (n^k - 1)/(n - 1).
BigInt fock_dk(int n, int k);

/// Operator on the truncated Fock space, stored sparse in the word basis.
struct LevelOperator {
  TruncatedFock fock;
  SparseOp matrix;

  /// max |level(x) - level(y)| over nonzero entries (0 for the zero operator).
  Index level_band() const;
};

/// Operator on the k consecutive levels [first, first + k), in local
/// coordinates: word index minus level_offset(first).
struct FockWindow {
  TruncatedFock fock;
  Index first = 0;
  Index k = 0;
  SparseOp matrix;

  Index dim() const { return fock.level_offset(first + k) - fock.level_offset(first); }
  /// The window operator placed back on the whole truncation.
  LevelOperator embed() const;
};

FockWindow make_window(const TruncatedFock& fock, Index first, Index k, SparseOp matrix);

/// T_i: w -> iw, zero on the top level.
LevelOperator creation(const TruncatedFock& fock, int i);
/// T_mu T_nu^*: entry (mu w, nu w) = 1 whenever both words fit.
LevelOperator word_op(const TruncatedFock& fock, const Word& mu, const Word& nu);
LevelOperator identity_op(const TruncatedFock& fock);

/// kappa_k(i, j) = min(i, j, k+1-i, k+1-j)/(l+1), 1-based, l = ceil(k/2).
RationalMatrix kappa_matrix(Index k);

/// Diagonal bands of A_k + B_k, where A_k = 0_k + kappa + kappa + ... and
/// B_k = 0_k + 0_l + kappa + kappa + ... along the level decomposition.
/// Indices are 1-based: index i is level i - 1.
class SchurProfile {
 public:
  explicit SchurProfile(Index k);

  Index k() const { return k_; }
  Index l() const { return l_; }
  const RationalMatrix& kappa() const { return kappa_; }
  /// Exact sigma_{i,j}, i, j >= 1.
  Rational sigma(Index i, Index j) const;
  /// Same entry by summing the placed kappa blocks, no tabulation.
  Rational direct(Index i, Index j) const;
  /// sigma at a pair of levels (0-based).
  Rational at_levels(Index a, Index b) const { return sigma(a + 1, b + 1); }
  /// First index of the stable zone, k + l + 1.
  Index stable_start() const { return k_ + l_ + 1; }

 private:
  Index k_;
  Index l_;
  RationalMatrix kappa_;
  RationalMatrix preamble_;  // rows 1..k+l, cols 1..2k+l
  RationalMatrix period_;    // [residue][p + k - 1], |p| < k
};

/// Compresses a to the window [first, first + profile.rows()) and multiplies
/// the level block (a, b) by profile(a - first, b - first).
FockWindow schur_mult(const RationalMatrix& profile, const LevelOperator& a, Index first);

enum class LambdaMode {
  Partial,        // every copy x (x) 1_{kl}, cut to the words that fit
  CompleteCopies  // only copies lying entirely inside the truncation
};

/// Lambda_k(x) = sum_l x (x) 1_{kl}; x (x) 1_m has entry (alpha w, beta w)
/// = x(alpha, beta) for every |w| = m.
LevelOperator lambda_k(const FockWindow& x, LambdaMode mode = LambdaMode::Partial);
/// Lambda_k of a single window matrix unit, without building the window.
SparseOp lambda_k_unit(const TruncatedFock& fock, Index first, Index k, Index s, Index t, LambdaMode mode);

struct FockPair {
  FockWindow p;  // levels [k, 2k)
  FockWindow q;  // levels [l + k, l + 2k)
};

/// Smallest depth with both windows inside the truncation.
Index psi_min_depth(Index k);

/// psi_k(a) = kappa_k(P_k a P_k) + kappa_k(Q_k a Q_k).
FockPair psi_k(const LevelOperator& a, Index k);
/// phi_k(x + y) = Lambda_k(x) + Lambda_k(y).
LevelOperator phi_k(const FockPair& pair, LambdaMode mode = LambdaMode::Partial);

/// A Lambda_k summand as an on-demand map out of the full matrix algebra of
/// a window, for the order-zero checks.
UnitImageSource lambda_source(const TruncatedFock& fock, Index first, Index k, LambdaMode mode);

/// Level-expanded Schur profile of a window: K(a, b) = kappa(level a - first,
/// level b - first) in window coordinates. psi_k is completely positive iff
/// this matrix is PSD.
CMatrix window_profile(const TruncatedFock& fock, Index first, Index k);

struct FockTripleReport {
  double psi_norm = 0.0;
  double phi_norm = 0.0;
  double psi_profile_min_eigenvalue = 0.0;
  OrderZeroDefects p_summand;
  OrderZeroDefects q_summand;
};

/// Norms and order-zero defects of (psi_k, phi_k) on the given truncation.
FockTripleReport fock_triple_report(const TruncatedFock& fock, Index k);

struct CalkinDefect {
  Rational exact_sup;
  Rational paper_bound;  // 2(2 + ||mu| - |nu||)/k
  /// phi_k psi_k(T_mu T_nu^*) == (A_k + B_k) * T_mu T_nu^* on the supplied
  /// truncation; empty when no truncation is given.
  std::optional<bool> composite_matches_schur;
  double composite_max_deviation = 0.0;

  bool holds() const { return exact_sup <= paper_bound; }
};

/// Requires k > 2 max(|mu|, |nu|).
CalkinDefect calkin_defect(const Word& mu, const Word& nu, Index k,
                           const std::optional<TruncatedFock>& oracle = std::nullopt);

/// (A_k + B_k) * T_mu T_nu^* on the truncation, from the profile.
LevelOperator schur_composite(const TruncatedFock& fock, const SchurProfile& profile, const Word& mu,
                              const Word& nu);

}  // namespace ndlab
