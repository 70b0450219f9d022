#pragma once

#include "rankprox/variety.hpp"

namespace rankprox {

/// Regularizer applied to the error term E.
enum class ShrinkKind {
  None,           // no error term
  EntrywiseL1,    // ||E||_1, matrix recovery with outliers
  ColumnwiseL21,  // ||E||_{2,1}, low-rank representation
};

const char* to_string(ShrinkKind kind);

/// Minimizer over rank <= r of the local model
///   ||Y||_* + <grad, Y - X> + (L/2) ||Y - X||^2,
/// i.e. retract X - grad / L and soft-threshold its singular values by 1/L.
/// Values that reach exactly zero are dropped, lowering the rank.
FixedRankMatrix prox_step(const FixedRankMatrix& x, const ConeVector& grad, double lipschitz,
                          Index r);

/// Closed-form minimizer of lambda * Upsilon(E) + (gamma/2) ||E - B||_F^2.
/// For EntrywiseL1 B may be a vector (one column).
DenseMatrix shrink(const DenseMatrix& b, double lambda, double gamma, ShrinkKind kind);

/// Upsilon(E) for the given kind (0 for None).
double regularizer(const DenseMatrix& e, ShrinkKind kind);

}  // namespace rankprox
