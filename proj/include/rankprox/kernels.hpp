#pragma once

// Small dense/sparse linear-algebra layer.
//
// Every dense matrix in the library is an Eigen::MatrixXd, i.e. column-major
// storage. Large operators are only ever touched through LinearMap products;
// dense factorizations are restricted to matrices whose dimensions scale with
// the working rank, and svd_small enforces that with a guard.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace rankprox {

using Index = Eigen::Index;
using DenseMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Raised when an internal structural invariant breaks (e.g. a dense SVD on a
/// matrix larger than the working rank permits). Signals a bug, not bad input.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Abstract real linear operator R^cols -> R^rows.
///
/// Products act on blocks of column vectors so callers can batch the s or
/// k right-hand sides they need.
class LinearMap {
 public:
  virtual ~LinearMap() = default;

  virtual Index rows() const = 0;
  virtual Index cols() const = 0;

  /// Returns Op * x, x is cols() x k.
  virtual DenseMatrix apply(const DenseMatrix& x) const = 0;
  /// Returns Op^T * y, y is rows() x k.
  virtual DenseMatrix apply_adjoint(const DenseMatrix& y) const = 0;

  /// Materializes the operator. Intended for tests and tiny problems only.
  DenseMatrix to_dense() const;
};

class DenseOperator final : public LinearMap {
 public:
  explicit DenseOperator(DenseMatrix a);

  Index rows() const override { return a_.rows(); }
  Index cols() const override { return a_.cols(); }
  DenseMatrix apply(const DenseMatrix& x) const override;
  DenseMatrix apply_adjoint(const DenseMatrix& y) const override;

  const DenseMatrix& matrix() const { return a_; }

 private:
  DenseMatrix a_;
};

struct Triplet {
  Index row = 0;
  Index col = 0;
  double value = 0.0;
};

/// Sparse matrix kept both as its defining triplets and in compressed-row form.
/// Construction rejects out-of-range indices, duplicate positions and
/// non-finite values.
class SparseMatrix final : public LinearMap {
 public:
  using Csr = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  SparseMatrix(Index rows, Index cols, std::vector<Triplet> triplets);

  Index rows() const override { return rows_; }
  Index cols() const override { return cols_; }
  DenseMatrix apply(const DenseMatrix& x) const override;
  DenseMatrix apply_adjoint(const DenseMatrix& y) const override;

  const std::vector<Triplet>& triplets() const { return triplets_; }
  const Csr& csr() const { return csr_; }
  Index nnz() const { return static_cast<Index>(triplets_.size()); }

 private:
  Index rows_;
  Index cols_;
  std::vector<Triplet> triplets_;
  Csr csr_;
};

/// The operator P_U^perp * Op * P_V^perp for orthonormal U (rows x s) and
/// V (cols x s). Holds a reference to `op`; the caller keeps it alive.
class ComplementOperator final : public LinearMap {
 public:
  ComplementOperator(const LinearMap& op, const DenseMatrix& u, const DenseMatrix& v);

  Index rows() const override { return op_.rows(); }
  Index cols() const override { return op_.cols(); }
  DenseMatrix apply(const DenseMatrix& x) const override;
  DenseMatrix apply_adjoint(const DenseMatrix& y) const override;

 private:
  const LinearMap& op_;
  const DenseMatrix& u_;
  const DenseMatrix& v_;
};

struct QrResult {
  DenseMatrix q;  // rows x cols, orthonormal columns
  DenseMatrix r;  // cols x cols, upper triangular
};

struct SvdResult {
  DenseMatrix u;
  Vector sigma;  // descending, non-negative
  DenseMatrix v;
};

/// Thin Householder QR of a tall matrix. Rank deficiency is allowed (R then
/// has zeros on its diagonal); Q always has orthonormal columns.
QrResult thin_qr(const DenseMatrix& a);

/// Full thin SVD of a matrix whose dimensions are bounded by
/// 4 * working_rank. A larger input throws InvariantError.
SvdResult svd_small(const DenseMatrix& a, Index working_rank);

struct TruncatedSvdOptions {
  /// Residual tolerance relative to the largest singular value.
  double tol = 1e-6;
  Index max_restarts = 300;
  /// Krylov subspace size; 0 picks max(2k, k + 7) capped at min(rows, cols).
  Index work = 0;
  std::uint64_t seed = 0x5eed5eedULL;
};

/// Raised when restarted Lanczos fails to converge. Carries the best triplets
/// found so far.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, SvdResult best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const SvdResult& best() const { return best_; }

 private:
  SvdResult best_;
};

/// Dominant k singular triplets of an operator using Golub-Kahan-Lanczos
/// bidiagonalization with full reorthogonalization and thick restarts.
/// Only products with `op` and its adjoint are used.
SvdResult truncated_svd(const LinearMap& op, Index k, const TruncatedSvdOptions& options = {});

/// Per-thread record of factorization sizes, used to check that solvers
/// never factor anything larger than the working rank allows.
struct SvdStats {
  Index max_dense_dim = 0;
  Index dense_calls = 0;
  Index max_truncated_rank = 0;
  Index truncated_calls = 0;
};

SvdStats svd_stats();
void reset_svd_stats();

}  // namespace rankprox
