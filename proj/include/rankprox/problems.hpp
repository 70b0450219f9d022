#pragma once

// The two concrete instances of the penalized problem
//
//   Psi(X, E) = ||X||_* + lambda * Upsilon(E) + (gamma/2) ||A(X) + E - D||^2
//
// matrix completion, where A samples the entries in Omega and D is the vector
// of observed values, and low-rank representation (LRR), where A(X) = D X.
// Measurements, data and error terms all use DenseMatrix: a column vector of
// length |Omega| for completion, an m x n matrix for LRR.

#include "rankprox/prox.hpp"

#include <memory>
#include <variant>
#include <vector>

namespace rankprox {

struct Sample {
  Index row = 0;
  Index col = 0;
  double value = 0.0;
};

/// Observed entries of an m x n matrix. Indices are 0-based, unique and in
/// range; at least one sample.
class Observations {
 public:
  Observations(Index rows, Index cols, std::vector<Sample> samples);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index size() const { return static_cast<Index>(samples_.size()); }
  const std::vector<Sample>& samples() const { return samples_; }
  Vector values() const;

 private:
  Index rows_;
  Index cols_;
  std::vector<Sample> samples_;
};

using Measurement = DenseMatrix;
/// Error term E; an empty (0 x 0) matrix means the problem has no E.
using ErrorTerm = DenseMatrix;

class ProblemSpec {
 public:
  /// robust must be None or EntrywiseL1.
  static ProblemSpec completion(Observations obs, ShrinkKind robust, double gamma, double lambda);
  /// robust must be None or ColumnwiseL21. X is n x n for an m x n D.
  static ProblemSpec lrr(DenseMatrix d, ShrinkKind robust, double gamma, double lambda);

  ProblemSpec with_parameters(double gamma, double lambda) const;
  ProblemSpec with_robust(ShrinkKind robust) const;

  bool is_completion() const;
  const Observations& observations() const;  // completion only
  const DenseMatrix& lrr_dictionary() const;  // LRR only

  ShrinkKind robust() const { return robust_; }
  bool has_error_term() const { return robust_ != ShrinkKind::None; }
  double gamma() const { return gamma_; }
  double lambda() const { return lambda_; }

  Index x_rows() const;
  Index x_cols() const;

  /// D in measurement form.
  const Measurement& data() const;
  ErrorTerm zero_error() const;

 private:
  struct Completion {
    Observations obs;
    Measurement d;
  };
  struct Lrr {
    DenseMatrix d;
  };
  using Data = std::variant<Completion, Lrr>;

  ProblemSpec(std::shared_ptr<const Data> data, ShrinkKind robust, double gamma, double lambda);

  std::shared_ptr<const Data> data_;
  ShrinkKind robust_;
  double gamma_;
  double lambda_;
};

struct Objective {
  double psi = 0.0;
  double trace_norm = 0.0;
  double reg_e = 0.0;    // lambda * Upsilon(E)
  double penalty = 0.0;  // (gamma/2) ||A(X) + E - D||^2
};

Measurement apply_A(const ProblemSpec& spec, const FixedRankMatrix& x);

/// A^*(y): a sparse matrix supported on Omega for completion, D^T y for LRR.
std::unique_ptr<LinearMap> apply_A_adjoint(const ProblemSpec& spec, const Measurement& y);

/// A(X) + E - D.
Measurement residual(const ProblemSpec& spec, const FixedRankMatrix& x, const ErrorTerm& e);

Objective objective(const ProblemSpec& spec, const FixedRankMatrix& x, const ErrorTerm& e);
/// Same, with lambda replaced (homotopy levels).
Objective objective(const ProblemSpec& spec, const FixedRankMatrix& x, const ErrorTerm& e,
                    double lambda);

/// G = gamma * A^*(A(X) + E - D).
std::unique_ptr<LinearMap> euclid_grad(const ProblemSpec& spec, const FixedRankMatrix& x,
                                       const ErrorTerm& e);

}  // namespace rankprox
