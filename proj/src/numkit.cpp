#include "ndlab/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace ndlab {

namespace {

double largest_hermitian_eigenvalue(const CMatrix& herm) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(herm, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed to converge");
  return es.eigenvalues().maxCoeff();
}

}  // namespace

bool all_finite(const CMatrix& m) {
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
  return true;
}

double operator_norm(const CMatrix& m) {
  if (!all_finite(m)) throw InputError("operator_norm: non-finite entry");
  if (m.size() == 0) return 0.0;
  if (m.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  CMatrix gram = m.rows() <= m.cols() ? CMatrix(m * m.adjoint()) : CMatrix(m.adjoint() * m);
  return std::sqrt(std::max(0.0, largest_hermitian_eigenvalue(gram)));
}

double hermitian_defect(const CMatrix& m) {
  if (m.rows() != m.cols()) throw InputError("hermitian_defect: matrix not square");
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

PsdReport psd_check(const CMatrix& m, double tol) {
  if (m.rows() != m.cols()) throw InputError("psd_check: matrix not square");
  if (!all_finite(m)) throw InputError("psd_check: non-finite entry");
  if (hermitian_defect(m) > tol) throw InputError("psd_check: matrix not Hermitian within tolerance");
  if (m.size() == 0) return {true, 0.0};
  CMatrix herm = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(herm, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed to converge");
  double lo = es.eigenvalues().minCoeff();
  return {lo >= -tol, lo};
}

CMatrix hermitian_funcalc(const CMatrix& m, const std::function<double(double)>& f) {
  if (m.rows() != m.cols()) throw InputError("hermitian_funcalc: matrix not square");
  if (m.size() == 0) return m;
  CMatrix herm = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(herm);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed to converge");
  RVector fd = es.eigenvalues().unaryExpr([&](double t) { return f(t); });
  const CMatrix& u = es.eigenvectors();
  return u * fd.cast<Complex>().asDiagonal() * u.adjoint();
}

std::function<double(double)> step_function(double threshold) {
  return [threshold](double t) { return t >= threshold ? 1.0 : 0.0; };
}

CMatrix pseudo_inverse_sqrt(const CMatrix& m, double cutoff) {
  if (m.rows() != m.cols()) throw InputError("pseudo_inverse_sqrt: matrix not square");
  if (m.size() == 0) return m;
  CMatrix herm = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(herm);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed to converge");
  if (es.eigenvalues().minCoeff() < -cutoff)
    throw InputError("pseudo_inverse_sqrt: matrix has a negative eigenvalue");
  RVector fd = es.eigenvalues().unaryExpr([&](double t) { return t >= cutoff ? 1.0 / std::sqrt(t) : 0.0; });
  const CMatrix& u = es.eigenvectors();
  return u * fd.cast<Complex>().asDiagonal() * u.adjoint();
}

CMatrix psd_sqrt(const CMatrix& m) {
  return hermitian_funcalc(m, [](double t) { return t > 0.0 ? std::sqrt(t) : 0.0; });
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// ---------------------------------------------------------------------------
// SparseOp
// ---------------------------------------------------------------------------

SparseOp::SparseOp(Index rows, Index cols, std::vector<Triplet> triplets) : rows_(rows), cols_(cols) {
  build(std::move(triplets));
}

void SparseOp::build(std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (t.row < 0 || t.row >= rows_ || t.col < 0 || t.col >= cols_)
      throw InputError("SparseOp: triplet index out of range");
  }
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  row_ids_.clear();
  row_start_.assign(1, 0);
  col_.clear();
  val_.clear();
  col_.reserve(triplets.size());
  val_.reserve(triplets.size());
  std::size_t i = 0;
  while (i < triplets.size()) {
    Index r = triplets[i].row;
    Index c = triplets[i].col;
    Complex v = 0.0;
    while (i < triplets.size() && triplets[i].row == r && triplets[i].col == c) v += triplets[i++].value;
    if (v == Complex(0.0)) continue;
    if (row_ids_.empty() || row_ids_.back() != r) {
      if (!row_ids_.empty()) row_start_.push_back(static_cast<Index>(col_.size()));
      row_ids_.push_back(r);
    }
    col_.push_back(c);
    val_.push_back(v);
  }
  if (!row_ids_.empty()) row_start_.push_back(static_cast<Index>(col_.size()));
}

SparseOp SparseOp::identity(Index n) {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return SparseOp(n, n, std::move(t));
}

SparseOp SparseOp::diagonal(const std::vector<double>& d) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d[i] != 0.0) t.push_back({static_cast<Index>(i), static_cast<Index>(i), d[i]});
  auto n = static_cast<Index>(d.size());
  return SparseOp(n, n, std::move(t));
}

SparseOp SparseOp::from_dense(const CMatrix& m) {
  std::vector<Triplet> t;
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      if (m(i, j) != Complex(0.0)) t.push_back({i, j, m(i, j)});
  return SparseOp(m.rows(), m.cols(), std::move(t));
}

Index SparseOp::find_row(Index r) const {
  auto it = std::lower_bound(row_ids_.begin(), row_ids_.end(), r);
  if (it == row_ids_.end() || *it != r) return -1;
  return static_cast<Index>(it - row_ids_.begin());
}

Complex SparseOp::coeff(Index r, Index c) const {
  Index pos = find_row(r);
  if (pos < 0) return 0.0;
  auto first = col_.begin() + row_start_[static_cast<std::size_t>(pos)];
  auto last = col_.begin() + row_start_[static_cast<std::size_t>(pos) + 1];
  auto it = std::lower_bound(first, last, c);
  if (it == last || *it != c) return 0.0;
  return val_[static_cast<std::size_t>(it - col_.begin())];
}

CMatrix SparseOp::to_dense() const {
  CMatrix m = CMatrix::Zero(rows_, cols_);
  for_each([&](Index r, Index c, Complex v) { m(r, c) = v; });
  return m;
}

std::vector<Triplet> SparseOp::triplets() const {
  std::vector<Triplet> t;
  t.reserve(col_.size());
  for_each([&](Index r, Index c, Complex v) { t.push_back({r, c, v}); });
  return t;
}

SparseOp SparseOp::adjoint() const {
  std::vector<Triplet> t;
  t.reserve(col_.size());
  for_each([&](Index r, Index c, Complex v) { t.push_back({c, r, std::conj(v)}); });
  return SparseOp(cols_, rows_, std::move(t));
}

SparseOp SparseOp::operator*(const SparseOp& rhs) const {
  if (cols_ != rhs.rows_) throw InputError("SparseOp product: dimension mismatch");
  SparseOp out(rows_, rhs.cols_);
  std::vector<std::pair<Index, Complex>> acc;
  for (std::size_t r = 0; r < row_ids_.size(); ++r) {
    acc.clear();
    for (Index e = row_start_[r]; e < row_start_[r + 1]; ++e) {
      Index k = col_[static_cast<std::size_t>(e)];
      Index pos = rhs.find_row(k);
      if (pos < 0) continue;
      Complex a = val_[static_cast<std::size_t>(e)];
      auto p = static_cast<std::size_t>(pos);
      for (Index f = rhs.row_start_[p]; f < rhs.row_start_[p + 1]; ++f)
        acc.emplace_back(rhs.col_[static_cast<std::size_t>(f)], a * rhs.val_[static_cast<std::size_t>(f)]);
    }
    if (acc.empty()) continue;
    if (acc.size() > 1)
      std::sort(acc.begin(), acc.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    bool opened = false;
    std::size_t i = 0;
    while (i < acc.size()) {
      Index c = acc[i].first;
      Complex v = 0.0;
      while (i < acc.size() && acc[i].first == c) v += acc[i++].second;
      if (v == Complex(0.0)) continue;
      if (!opened) {
        out.row_ids_.push_back(row_ids_[r]);
        opened = true;
      }
      out.col_.push_back(c);
      out.val_.push_back(v);
    }
    if (opened) out.row_start_.push_back(static_cast<Index>(out.col_.size()));
  }
  return out;
}

SparseOp SparseOp::combine(const SparseOp& rhs, Complex sign) const {
  if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw InputError("SparseOp sum: dimension mismatch");
  SparseOp out(rows_, cols_);
  out.col_.reserve(col_.size() + rhs.col_.size());
  out.val_.reserve(col_.size() + rhs.col_.size());
  std::size_t a = 0, b = 0;
  auto push = [&](Index r, Index c, Complex v) {
    if (v == Complex(0.0)) return;
    if (out.row_ids_.empty() || out.row_ids_.back() != r) {
      if (!out.row_ids_.empty()) out.row_start_.push_back(static_cast<Index>(out.col_.size()));
      out.row_ids_.push_back(r);
    }
    out.col_.push_back(c);
    out.val_.push_back(v);
  };
  while (a < row_ids_.size() || b < rhs.row_ids_.size()) {
    Index ra = a < row_ids_.size() ? row_ids_[a] : std::numeric_limits<Index>::max();
    Index rb = b < rhs.row_ids_.size() ? rhs.row_ids_[b] : std::numeric_limits<Index>::max();
    Index r = std::min(ra, rb);
    Index e = ra == r ? row_start_[a] : 0, e_end = ra == r ? row_start_[a + 1] : 0;
    Index f = rb == r ? rhs.row_start_[b] : 0, f_end = rb == r ? rhs.row_start_[b + 1] : 0;
    while (e < e_end || f < f_end) {
      Index ce = e < e_end ? col_[static_cast<std::size_t>(e)] : std::numeric_limits<Index>::max();
      Index cf = f < f_end ? rhs.col_[static_cast<std::size_t>(f)] : std::numeric_limits<Index>::max();
      if (ce < cf) {
        push(r, ce, val_[static_cast<std::size_t>(e++)]);
      } else if (cf < ce) {
        push(r, cf, sign * rhs.val_[static_cast<std::size_t>(f++)]);
      } else {
        push(r, ce, val_[static_cast<std::size_t>(e++)] + sign * rhs.val_[static_cast<std::size_t>(f++)]);
      }
    }
    if (ra == r) ++a;
    if (rb == r) ++b;
  }
  if (!out.row_ids_.empty()) out.row_start_.push_back(static_cast<Index>(out.col_.size()));
  return out;
}

SparseOp SparseOp::operator+(const SparseOp& rhs) const { return combine(rhs, 1.0); }

SparseOp SparseOp::operator-(const SparseOp& rhs) const { return combine(rhs, -1.0); }

SparseOp SparseOp::scaled(Complex s) const {
  if (s == Complex(0.0)) return SparseOp(rows_, cols_);
  SparseOp out = *this;
  for (auto& v : out.val_) v *= s;
  return out;
}

SparseOp SparseOp::scale_rows(const std::vector<double>& d) const {
  if (static_cast<Index>(d.size()) != rows_) throw InputError("scale_rows: length mismatch");
  SparseOp out = *this;
  bool zeros = false;
  for (std::size_t r = 0; r < row_ids_.size(); ++r) {
    double f = d[static_cast<std::size_t>(row_ids_[r])];
    zeros = zeros || f == 0.0;
    for (Index e = row_start_[r]; e < row_start_[r + 1]; ++e) out.val_[static_cast<std::size_t>(e)] *= f;
  }
  if (zeros) out.build(out.triplets());
  return out;
}

SparseOp SparseOp::scale_cols(const std::vector<double>& d) const {
  if (static_cast<Index>(d.size()) != cols_) throw InputError("scale_cols: length mismatch");
  SparseOp out = *this;
  bool zeros = false;
  for (std::size_t e = 0; e < col_.size(); ++e) {
    double f = d[static_cast<std::size_t>(col_[e])];
    zeros = zeros || f == 0.0;
    out.val_[e] *= f;
  }
  if (zeros) out.build(out.triplets());
  return out;
}

bool SparseOp::is_diagonal() const {
  bool diag = true;
  for_each([&](Index r, Index c, Complex) { diag = diag && r == c; });
  return diag;
}

std::vector<Complex> SparseOp::diagonal_entries() const {
  std::vector<Complex> d(static_cast<std::size_t>(std::min(rows_, cols_)), 0.0);
  for_each([&](Index r, Index c, Complex v) {
    if (r == c) d[static_cast<std::size_t>(r)] = v;
  });
  return d;
}

double SparseOp::max_abs() const {
  double m = 0.0;
  for (const auto& v : val_) m = std::max(m, std::abs(v));
  return m;
}

namespace {

struct UnionFind {
  std::vector<Index> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), Index{0}); }
  Index find(Index x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
};

Index compressed_index(const std::vector<Index>& sorted, Index key) {
  return static_cast<Index>(std::lower_bound(sorted.begin(), sorted.end(), key) - sorted.begin());
}

// Groups the entries of m into connected components of the graph whose
// vertices are (row nodes, column nodes) when `bipartite`, or plain indices
// otherwise. Each component is handed to `fn` as a triplet list.
template <typename Fn>
void for_each_component(const SparseOp& m, bool bipartite, Fn&& fn) {
  auto trip = m.triplets();
  if (trip.empty()) return;
  std::vector<Index> rows, cols;
  for (const auto& t : trip) {
    rows.push_back(t.row);
    cols.push_back(t.col);
  }
  if (!bipartite) {
    rows.insert(rows.end(), cols.begin(), cols.end());
    cols.clear();
  }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  const auto nr = static_cast<Index>(rows.size());
  UnionFind uf(rows.size() + cols.size());
  auto row_node = [&](Index r) { return compressed_index(rows, r); };
  auto col_node = [&](Index c) { return bipartite ? nr + compressed_index(cols, c) : compressed_index(rows, c); };
  for (const auto& t : trip) uf.unite(row_node(t.row), col_node(t.col));
  std::vector<std::pair<Index, std::size_t>> order;
  order.reserve(trip.size());
  for (std::size_t e = 0; e < trip.size(); ++e) order.emplace_back(uf.find(row_node(trip[e].row)), e);
  std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Triplet> comp;
  std::size_t i = 0;
  while (i < order.size()) {
    Index root = order[i].first;
    comp.clear();
    while (i < order.size() && order[i].first == root) comp.push_back(trip[order[i++].second]);
    fn(comp);
  }
}

// Dense matrix of a component with rows/cols relabelled to 0..k-1.
CMatrix component_dense(const std::vector<Triplet>& comp, bool square) {
  std::vector<Index> rows, cols;
  for (const auto& t : comp) {
    rows.push_back(t.row);
    cols.push_back(t.col);
  }
  if (square) {
    rows.insert(rows.end(), cols.begin(), cols.end());
    cols = rows;
  }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  CMatrix d = CMatrix::Zero(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (const auto& t : comp) d(compressed_index(rows, t.row), compressed_index(cols, t.col)) += t.value;
  return d;
}

}  // namespace

double operator_norm(const SparseOp& m) {
  double best = 0.0;
  for_each_component(m, true, [&](const std::vector<Triplet>& comp) {
    if (comp.size() == 1) {
      if (!std::isfinite(std::abs(comp[0].value))) throw InputError("operator_norm: non-finite entry");
      best = std::max(best, std::abs(comp[0].value));
      return;
    }
    best = std::max(best, operator_norm(component_dense(comp, false)));
  });
  return best;
}

double hermitian_min_eigenvalue(const SparseOp& m) {
  if (m.rows() != m.cols()) throw InputError("hermitian_min_eigenvalue: operator not square");
  double lo = std::numeric_limits<double>::infinity();
  Index covered = 0;
  for_each_component(m, false, [&](const std::vector<Triplet>& comp) {
    CMatrix d = component_dense(comp, true);
    covered += d.rows();
    CMatrix herm = 0.5 * (d + d.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(herm, Eigen::EigenvaluesOnly);
    lo = std::min(lo, es.eigenvalues().minCoeff());
  });
  if (covered < m.rows()) lo = std::min(lo, 0.0);
  return std::isfinite(lo) ? lo : 0.0;
}

SparseOp kron(const SparseOp& a, const SparseOp& b) {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(a.nonzeros() * b.nonzeros()));
  a.for_each([&](Index ra, Index ca, Complex va) {
    b.for_each([&](Index rb, Index cb, Complex vb) {
      t.push_back({ra * b.rows() + rb, ca * b.cols() + cb, va * vb});
    });
  });
  return SparseOp(a.rows() * b.rows(), a.cols() * b.cols(), std::move(t));
}

// ---------------------------------------------------------------------------
// Rationals
// ---------------------------------------------------------------------------

RMatrix RationalMatrix::to_real() const {
  RMatrix m(rows_, cols_);
  for (Index i = 0; i < rows_; ++i)
    for (Index j = 0; j < cols_; ++j) m(i, j) = to_double((*this)(i, j));
  return m;
}

std::string to_string(const Rational& q) {
  std::ostringstream os;
  BigInt num = boost::multiprecision::numerator(q);
  BigInt den = boost::multiprecision::denominator(q);
  os << num;
  if (den != 1) os << '/' << den;
  return os.str();
}

double to_double(const Rational& q) { return q.convert_to<double>(); }

Rational parse_rational(const std::string& text) {
  auto slash = text.find('/');
  try {
    if (slash == std::string::npos) return Rational(BigInt(text));
    BigInt num(text.substr(0, slash));
    BigInt den(text.substr(slash + 1));
    if (den == 0) throw InputError("parse_rational: zero denominator");
    return Rational(num, den);
  } catch (const std::runtime_error&) {
    throw InputError("parse_rational: malformed rational '" + text + "'");
  }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(seed ^ mix(stream + 0x632be59bd9b4e019ULL));
}

}  // namespace ndlab
