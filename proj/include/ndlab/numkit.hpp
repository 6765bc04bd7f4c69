#pragma once

// Numeric kernel: dense complex matrices (Eigen), a compressed sparse
// operator type for large structured operators, Hermitian spectral
// calculus, and exact rationals.

#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

namespace ndlab {

using Index = std::int64_t;
using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

using BigInt = boost::multiprecision::cpp_int;
/// Arbitrary-precision rational, always stored in lowest terms.
using Rational = boost::multiprecision::cpp_rational;

/// Thrown when an argument violates an operation's stated input contract.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when an argument is well-formed but a mathematical precondition
/// of the construction fails (e.g. a tolerance guard).
class PreconditionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// ---------------------------------------------------------------------------
// Dense kernel
// ---------------------------------------------------------------------------

/// Largest singular value, via the eigenvalues of A*A (or AA*, whichever is
/// smaller). Returns exactly 0 for the zero matrix.
double operator_norm(const CMatrix& m);

struct PsdReport {
  bool is_psd = false;
  double min_eigenvalue = 0.0;
};

/// PSD test: is_psd iff the smallest eigenvalue is >= -tol. The input must
/// be Hermitian to within tol (max-entry deviation), else InputError.
PsdReport psd_check(const CMatrix& m, double tol);

double hermitian_defect(const CMatrix& m);

/// U f(D) U* for the eigendecomposition M = U D U*.
CMatrix hermitian_funcalc(const CMatrix& m, const std::function<double(double)>& f);

/// Half-open step: t >= threshold -> 1, else 0.
std::function<double(double)> step_function(double threshold);

constexpr double kDefaultSpectralCutoff = 1e-8;

/// Eigenvalues >= cutoff map to lambda^{-1/2}, the rest to 0.
CMatrix pseudo_inverse_sqrt(const CMatrix& m, double cutoff = kDefaultSpectralCutoff);

/// Principal square root of a PSD matrix (negative rounding noise clipped).
CMatrix psd_sqrt(const CMatrix& m);

bool all_finite(const CMatrix& m);

/// Kronecker product of dense matrices.
CMatrix kron(const CMatrix& a, const CMatrix& b);

// ---------------------------------------------------------------------------
// Sparse kernel
// ---------------------------------------------------------------------------

struct Triplet {
  Index row;
  Index col;
  Complex value;
};

/// Compressed sparse operator. Only nonzero rows are stored, so the cost of
/// every operation scales with the number of nonzeros rather than with the
/// ambient dimension. Entries are sorted by (row, col) and exact zeros are
/// dropped.
class SparseOp {
 public:
  SparseOp() = default;
  SparseOp(Index rows, Index cols) : rows_(rows), cols_(cols) {}
  SparseOp(Index rows, Index cols, std::vector<Triplet> triplets);

  static SparseOp identity(Index n);
  static SparseOp diagonal(const std::vector<double>& d);
  static SparseOp from_dense(const CMatrix& m);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index nonzeros() const { return static_cast<Index>(col_.size()); }
  bool empty() const { return col_.empty(); }

  /// Entry lookup, O(log nnz).
  Complex coeff(Index r, Index c) const;

  CMatrix to_dense() const;
  std::vector<Triplet> triplets() const;

  SparseOp adjoint() const;
  SparseOp operator*(const SparseOp& rhs) const;
  SparseOp operator+(const SparseOp& rhs) const;
  SparseOp operator-(const SparseOp& rhs) const;
  SparseOp scaled(Complex s) const;

  /// Left/right multiplication by a diagonal operator given as a vector.
  SparseOp scale_rows(const std::vector<double>& d) const;
  SparseOp scale_cols(const std::vector<double>& d) const;

  bool is_diagonal() const;
  /// Diagonal entries as a dense vector of length min(rows, cols).
  std::vector<Complex> diagonal_entries() const;
  double max_abs() const;

  /// Iterate every stored entry in (row, col) order.
  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (std::size_t r = 0; r < row_ids_.size(); ++r) {
      for (Index e = row_start_[r]; e < row_start_[r + 1]; ++e) {
        fn(row_ids_[r], col_[static_cast<std::size_t>(e)], val_[static_cast<std::size_t>(e)]);
      }
    }
  }

 private:
  void build(std::vector<Triplet> triplets);
  SparseOp combine(const SparseOp& rhs, Complex sign) const;
  // Position of row r in row_ids_, or -1.
  Index find_row(Index r) const;

  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Index> row_ids_;
  std::vector<Index> row_start_{0};
  std::vector<Index> col_;
  std::vector<Complex> val_;
};

/// Exact operator norm of a sparse operator. The bipartite graph of
/// nonzeros splits the operator into an orthogonal direct sum, so the norm
/// is the maximum over connected components of their dense norms.
double operator_norm(const SparseOp& m);

/// Smallest eigenvalue of a Hermitian sparse operator, by the same
/// component decomposition. Uncovered indices contribute eigenvalue 0.
double hermitian_min_eigenvalue(const SparseOp& m);

SparseOp kron(const SparseOp& a, const SparseOp& b);

// ---------------------------------------------------------------------------
// Exact rational matrices
// ---------------------------------------------------------------------------

class RationalMatrix {
 public:
  RationalMatrix() = default;
  RationalMatrix(Index rows, Index cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols)) {}

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Rational& operator()(Index r, Index c) { return data_[static_cast<std::size_t>(r * cols_ + c)]; }
  const Rational& operator()(Index r, Index c) const { return data_[static_cast<std::size_t>(r * cols_ + c)]; }

  RMatrix to_real() const;
  bool operator==(const RationalMatrix& other) const = default;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Rational> data_;
};

std::string to_string(const Rational& q);
double to_double(const Rational& q);
Rational parse_rational(const std::string& text);

// ---------------------------------------------------------------------------
// Deterministic randomness
// ---------------------------------------------------------------------------

/// Counter-based seed derivation: instance `stream` of a suite seeded with
/// `seed` always gets the same generator, independent of evaluation order.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace ndlab
