#include "ndlab/fock.hpp"

#include <algorithm>
#include <string>

namespace ndlab {

TruncatedFock::TruncatedFock(int n, Index depth) : n_(n), depth_(depth) {
  if (n < 2) throw InputError("TruncatedFock: alphabet size must be >= 2");
  if (depth < 0) throw InputError("TruncatedFock: negative depth");
  pow_.push_back(1);
  offset_.push_back(0);
  for (Index l = 0; l <= depth; ++l) {
    offset_.push_back(offset_.back() + pow_.back());
    if (offset_.back() > kMaxDim) throw InputError("TruncatedFock: basis too large");
    pow_.push_back(pow_.back() * n);
  }
}

Index TruncatedFock::level_of(Index idx) const {
  if (idx < 0 || idx >= dim()) throw InputError("TruncatedFock: index out of range");
  auto it = std::upper_bound(offset_.begin(), offset_.end(), idx);
  return static_cast<Index>(it - offset_.begin()) - 1;
}

Index TruncatedFock::position(const Word& w) const {
  Index pos = 0;
  for (int letter : w.letters) {
    if (letter < 1 || letter > n_) throw InputError("word letter outside the alphabet");
    pos = pos * n_ + (letter - 1);
  }
  return pos;
}

Index TruncatedFock::index(const Word& w) const {
  if (w.length() > depth_) throw InputError("word longer than the truncation depth");
  return level_offset(w.length()) + position(w);
}

Word TruncatedFock::word(Index idx) const {
  const Index level = level_of(idx);
  Index pos = idx - level_offset(level);
  Word w;
  w.letters.assign(static_cast<std::size_t>(level), 1);
  for (Index i = level - 1; i >= 0; --i) {
    w.letters[static_cast<std::size_t>(i)] = static_cast<int>(pos % n_) + 1;
    pos /= n_;
  }
  return w;
}

BigInt fock_dk(int n, int k) {
  if (n < 2 || k < 0) throw InputError("fock_dk: need n >= 2, k >= 0");
  BigInt sum = 0, p = 1;
  for (int i = 0; i < k; ++i) {
    sum += p;
    p *= n;
  }
  return sum;
}

Index LevelOperator::level_band() const {
  Index band = 0;
  matrix.for_each([&](Index r, Index c, Complex) {
    band = std::max(band, std::abs(fock.level_of(r) - fock.level_of(c)));
  });
  return band;
}

LevelOperator FockWindow::embed() const {
  const Index off = fock.level_offset(first);
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(matrix.nonzeros()));
  matrix.for_each([&](Index r, Index c, Complex v) { t.push_back({r + off, c + off, v}); });
  return {fock, SparseOp(fock.dim(), fock.dim(), std::move(t))};
}

FockWindow make_window(const TruncatedFock& fock, Index first, Index k, SparseOp matrix) {
  if (k < 1 || first < 0 || first + k - 1 > fock.depth()) throw InputError("window outside the truncation");
  FockWindow w{fock, first, k, {}};
  if (matrix.rows() != w.dim() || matrix.cols() != w.dim()) throw InputError("window matrix has the wrong size");
  w.matrix = std::move(matrix);
  return w;
}

namespace {

void check_word(const TruncatedFock& fock, const Word& w) {
  if (w.length() > fock.depth()) throw InputError("word longer than the truncation depth");
  fock.position(w);
}

}  // namespace

LevelOperator creation(const TruncatedFock& fock, int i) {
  if (i < 1 || i > fock.alphabet()) throw InputError("creation: letter outside the alphabet");
  std::vector<Triplet> t;
  for (Index level = 0; level < fock.depth(); ++level) {
    const Index size = fock.level_size(level);
    const Index target = fock.level_offset(level + 1) + (i - 1) * size;
    for (Index pos = 0; pos < size; ++pos) t.push_back({target + pos, fock.level_offset(level) + pos, 1.0});
  }
  return {fock, SparseOp(fock.dim(), fock.dim(), std::move(t))};
}

LevelOperator word_op(const TruncatedFock& fock, const Word& mu, const Word& nu) {
  check_word(fock, mu);
  check_word(fock, nu);
  const Index pm = fock.position(mu), pn = fock.position(nu);
  const Index top = fock.depth() - std::max(mu.length(), nu.length());
  std::vector<Triplet> t;
  for (Index m = 0; m <= top; ++m) {
    const Index size = fock.level_size(m);
    const Index row0 = fock.level_offset(mu.length() + m) + pm * size;
    const Index col0 = fock.level_offset(nu.length() + m) + pn * size;
    for (Index w = 0; w < size; ++w) t.push_back({row0 + w, col0 + w, 1.0});
  }
  return {fock, SparseOp(fock.dim(), fock.dim(), std::move(t))};
}

LevelOperator identity_op(const TruncatedFock& fock) { return {fock, SparseOp::identity(fock.dim())}; }

RationalMatrix kappa_matrix(Index k) {
  if (k < 1) throw InputError("kappa_matrix: k must be >= 1");
  const Index l = (k + 1) / 2;
  RationalMatrix m(k, k);
  for (Index i = 1; i <= k; ++i)
    for (Index j = 1; j <= k; ++j) m(i - 1, j - 1) = Rational(std::min({i, j, k + 1 - i, k + 1 - j}), l + 1);
  return m;
}

namespace {

// One of the block-diagonal summands starting at 1-based index `start`.
Rational band_entry(const RationalMatrix& kappa, Index k, Index start, Index i, Index j) {
  if (i < start || j < start) return Rational(0);
  if ((i - start) / k != (j - start) / k) return Rational(0);
  return kappa((i - start) % k, (j - start) % k);
}

}  // namespace

SchurProfile::SchurProfile(Index k) : k_(k), l_((k + 1) / 2), kappa_(kappa_matrix(k)) {
  if (k < 2) throw InputError("sigma_profile: k must be >= 2");
  auto direct = [&](Index i, Index j) {
    return band_entry(kappa_, k_, k_ + 1, i, j) + band_entry(kappa_, k_, k_ + l_ + 1, i, j);
  };
  preamble_ = RationalMatrix(k_ + l_, 2 * k_ + l_);
  for (Index i = 1; i <= k_ + l_; ++i)
    for (Index j = 1; j <= 2 * k_ + l_; ++j) preamble_(i - 1, j - 1) = direct(i, j);
  // Tabulated one period into the stable zone so that i + p stays stable too.
  period_ = RationalMatrix(k_, 2 * k_ - 1);
  for (Index c = 0; c < k_; ++c) {
    const Index i = stable_start() + k_ + c;
    for (Index p = -(k_ - 1); p <= k_ - 1; ++p) period_(c, p + k_ - 1) = direct(i, i + p);
  }
}

Rational SchurProfile::sigma(Index i, Index j) const {
  if (i < 1 || j < 1) throw InputError("sigma: indices are 1-based");
  const Index lo = std::min(i, j), hi = std::max(i, j);
  if (lo <= k_ + l_) return hi > 2 * k_ + l_ ? Rational(0) : preamble_(lo - 1, hi - 1);
  const Index p = j - i;
  if (std::abs(p) >= k_) return Rational(0);
  return period_((i - stable_start()) % k_, p + k_ - 1);
}

Rational SchurProfile::direct(Index i, Index j) const {
  if (i < 1 || j < 1) throw InputError("sigma: indices are 1-based");
  return band_entry(kappa_, k_, k_ + 1, i, j) + band_entry(kappa_, k_, k_ + l_ + 1, i, j);
}

FockWindow schur_mult(const RationalMatrix& profile, const LevelOperator& a, Index first) {
  const Index k = profile.rows();
  if (profile.cols() != k || k < 1) throw InputError("schur_mult: profile must be square");
  if (first < 0 || first + k - 1 > a.fock.depth()) throw InputError("schur_mult: window does not fit the truncation");
  const RMatrix prof = profile.to_real();
  const TruncatedFock& fock = a.fock;
  const Index lo = fock.level_offset(first), hi = fock.level_offset(first + k);
  std::vector<Triplet> t;
  a.matrix.for_each([&](Index r, Index c, Complex v) {
    if (r < lo || r >= hi || c < lo || c >= hi) return;
    const double s = prof(fock.level_of(r) - first, fock.level_of(c) - first);
    if (s != 0.0) t.push_back({r - lo, c - lo, v * s});
  });
  return FockWindow{fock, first, k, SparseOp(hi - lo, hi - lo, std::move(t))};
}

namespace {

// Number of copies x (x) 1_{kj}, j = 0..copies-1, allowed by the mode for
// a window entry between levels la and lb.
Index copy_count(const TruncatedFock& fock, Index first, Index k, Index la, Index lb, LambdaMode mode) {
  const Index top = mode == LambdaMode::CompleteCopies ? first + k - 1 : std::max(la, lb);
  if (top > fock.depth()) return 0;
  return (fock.depth() - top) / k + 1;
}

template <typename Emit>
void lambda_entry(const TruncatedFock& fock, Index first, Index k, Index ga, Index gb, Complex v, LambdaMode mode,
                  Emit&& emit) {
  const Index la = fock.level_of(ga), lb = fock.level_of(gb);
  const Index pa = ga - fock.level_offset(la), pb = gb - fock.level_offset(lb);
  const Index copies = copy_count(fock, first, k, la, lb, mode);
  for (Index j = 0; j < copies; ++j) {
    const Index m = k * j;
    const Index size = fock.level_size(m);
    const Index row0 = fock.level_offset(la + m) + pa * size;
    const Index col0 = fock.level_offset(lb + m) + pb * size;
    for (Index w = 0; w < size; ++w) emit(Triplet{row0 + w, col0 + w, v});
  }
}

}  // namespace

LevelOperator lambda_k(const FockWindow& x, LambdaMode mode) {
  const TruncatedFock& fock = x.fock;
  if (x.matrix.rows() != x.dim() || x.matrix.cols() != x.dim()) throw InputError("lambda_k: malformed window");
  const Index off = fock.level_offset(x.first);
  std::vector<Triplet> t;
  x.matrix.for_each([&](Index r, Index c, Complex v) {
    lambda_entry(fock, x.first, x.k, r + off, c + off, v, mode, [&](Triplet tr) { t.push_back(tr); });
  });
  return {fock, SparseOp(fock.dim(), fock.dim(), std::move(t))};
}

SparseOp lambda_k_unit(const TruncatedFock& fock, Index first, Index k, Index s, Index t, LambdaMode mode) {
  const Index off = fock.level_offset(first);
  const Index dim = fock.level_offset(first + k) - off;
  if (s < 0 || t < 0 || s >= dim || t >= dim) throw InputError("lambda_k_unit: unit outside the window");
  std::vector<Triplet> trip;
  lambda_entry(fock, first, k, s + off, t + off, 1.0, mode, [&](Triplet tr) { trip.push_back(tr); });
  return SparseOp(fock.dim(), fock.dim(), std::move(trip));
}

Index psi_min_depth(Index k) { return (k + 1) / 2 + 2 * k - 1; }

FockPair psi_k(const LevelOperator& a, Index k) {
  if (k < 1) throw InputError("psi_k: k must be >= 1");
  if (a.fock.depth() < psi_min_depth(k)) throw InputError("psi_k: truncation too shallow for the Q window");
  const RationalMatrix kappa = kappa_matrix(k);
  const Index l = (k + 1) / 2;
  return {schur_mult(kappa, a, k), schur_mult(kappa, a, l + k)};
}

LevelOperator phi_k(const FockPair& pair, LambdaMode mode) {
  if (!(pair.p.fock == pair.q.fock) || pair.p.k != pair.q.k) throw InputError("phi_k: window mismatch");
  const Index k = pair.p.k, l = (k + 1) / 2;
  if (pair.p.first != k || pair.q.first != l + k) throw InputError("phi_k: window mismatch");
  LevelOperator x = lambda_k(pair.p, mode);
  x.matrix = x.matrix + lambda_k(pair.q, mode).matrix;
  return x;
}

UnitImageSource lambda_source(const TruncatedFock& fock, Index first, Index k, LambdaMode mode) {
  const Index dim = fock.level_offset(first + k) - fock.level_offset(first);
  if (first + k - 1 > fock.depth()) throw InputError("lambda_source: window does not fit the truncation");
  return {FdAlgebra::full_matrix(dim), fock.dim(),
          [fock, first, k, mode](Index, Index s, Index t) { return lambda_k_unit(fock, first, k, s, t, mode); }};
}

CMatrix window_profile(const TruncatedFock& fock, Index first, Index k) {
  const RMatrix kappa = kappa_matrix(k).to_real();
  const Index off = fock.level_offset(first);
  const Index dim = fock.level_offset(first + k) - off;
  std::vector<Index> level(static_cast<std::size_t>(dim));
  for (Index a = 0; a < dim; ++a) level[static_cast<std::size_t>(a)] = fock.level_of(a + off) - first;
  CMatrix K(dim, dim);
  for (Index a = 0; a < dim; ++a)
    for (Index b = 0; b < dim; ++b) K(a, b) = kappa(level[static_cast<std::size_t>(a)], level[static_cast<std::size_t>(b)]);
  return K;
}

FockTripleReport fock_triple_report(const TruncatedFock& fock, Index k) {
  FockTripleReport out;
  const FockPair unit_image = psi_k(identity_op(fock), k);
  out.psi_norm = std::max(operator_norm(unit_image.p.matrix), operator_norm(unit_image.q.matrix));

  const Index l = (k + 1) / 2;
  auto window_unit = [&](Index first) {
    FockWindow w{fock, first, k, {}};
    w.matrix = SparseOp::identity(w.dim());
    return w;
  };
  const LevelOperator phi_one = phi_k({window_unit(k), window_unit(l + k)});
  out.phi_norm = operator_norm(phi_one.matrix);

  for (Index first : {k, l + k}) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(window_profile(fock, first, k), Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    out.psi_profile_min_eigenvalue = first == k ? lo : std::min(out.psi_profile_min_eigenvalue, lo);
  }
  out.p_summand = order_zero_defects(lambda_source(fock, k, k, LambdaMode::CompleteCopies));
  out.q_summand = order_zero_defects(lambda_source(fock, l + k, k, LambdaMode::CompleteCopies));
  return out;
}

LevelOperator schur_composite(const TruncatedFock& fock, const SchurProfile& profile, const Word& mu,
                              const Word& nu) {
  const LevelOperator t = word_op(fock, mu, nu);
  std::vector<Triplet> out;
  t.matrix.for_each([&](Index r, Index c, Complex v) {
    const double s = to_double(profile.at_levels(fock.level_of(r), fock.level_of(c)));
    if (s != 0.0) out.push_back({r, c, v * s});
  });
  return {fock, SparseOp(fock.dim(), fock.dim(), std::move(out))};
}

CalkinDefect calkin_defect(const Word& mu, const Word& nu, Index k, const std::optional<TruncatedFock>& oracle) {
  const Index longest = std::max(mu.length(), nu.length());
  if (k <= 2 * longest) {
    throw PreconditionError("calkin_defect: need k > 2 max(|mu|, |nu|), got k = " + std::to_string(k));
  }
  const SchurProfile profile(k);
  const Index p = nu.length() - mu.length();
  CalkinDefect out;
  out.paper_bound = Rational(2 * (2 + std::abs(p)), k);
  out.exact_sup = 0;
  // The tail is periodic, so one period of the stable zone is the whole sup.
  const Index start = profile.stable_start() + k;
  for (Index i = start; i < start + k; ++i) {
    Rational d = 1 - profile.sigma(i, i + p);
    if (d < 0) d = -d;
    out.exact_sup = std::max(out.exact_sup, d);
  }
  if (oracle) {
    const TruncatedFock& fock = *oracle;
    const LevelOperator t = word_op(fock, mu, nu);
    const LevelOperator lhs = phi_k(psi_k(t, k));
    const LevelOperator rhs = schur_composite(fock, profile, mu, nu);
    out.composite_max_deviation = (lhs.matrix - rhs.matrix).max_abs();
    out.composite_matches_schur = out.composite_max_deviation <= 1e-12;
  }
  return out;
}

}  // namespace ndlab
