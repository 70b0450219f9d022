#pragma once

// Geometry of the set of m x n matrices of rank at most r, entirely in
// factored form: points are U diag(sigma) V^T, tangent vectors are
// (M, U_p, V_p) triples, and cone vectors add a rank-increasing block Xi that
// lives in span(U)^perp x span(V)^perp.

#include "rankprox/kernels.hpp"

#include <memory>

namespace rankprox {

/// A point X = U diag(sigma) V^T of rank s (s = 0 is the zero matrix).
///
/// Immutable. Copies share the factor storage, so two copies compare equal
/// under same_point(); tangent vectors use this to check their base point.
class FixedRankMatrix {
 public:
  /// Validates sizes, finiteness, orthonormality of U and V (1e-8) and that
  /// sigma is strictly positive and non-increasing.
  FixedRankMatrix(DenseMatrix u, Vector sigma, DenseMatrix v);

  /// The 0 x 0 zero matrix.
  FixedRankMatrix();

  static FixedRankMatrix zero(Index rows, Index cols);

  /// Skips the O((m + n) s^2) orthonormality check; for factors produced by
  /// orthogonal factorizations inside the library.
  static FixedRankMatrix from_trusted(DenseMatrix u, Vector sigma, DenseMatrix v);

  Index rows() const { return factors_->u.rows(); }
  Index cols() const { return factors_->v.rows(); }
  Index rank() const { return factors_->sigma.size(); }

  const DenseMatrix& u() const { return factors_->u; }
  const Vector& sigma() const { return factors_->sigma; }
  const DenseMatrix& v() const { return factors_->v; }

  double trace_norm() const { return factors_->sigma.sum(); }
  double frobenius_norm() const { return factors_->sigma.norm(); }

  /// Entry (i, j) computed from the factors in O(s).
  double entry(Index i, Index j) const;

  DenseMatrix to_dense() const;

  bool same_point(const FixedRankMatrix& other) const { return factors_ == other.factors_; }

 private:
  struct Factors {
    DenseMatrix u;
    Vector sigma;
    DenseMatrix v;
  };
  std::shared_ptr<const Factors> factors_;
};

/// Element U M V^T + U_p V^T + U V_p^T of the tangent space at `base`,
/// with U_p^T U = 0 and V_p^T V = 0.
struct TangentVector {
  FixedRankMatrix base;
  DenseMatrix m;   // s x s
  DenseMatrix up;  // rows x s
  DenseMatrix vp;  // cols x s

  static TangentVector zero(const FixedRankMatrix& base);
};

/// Tangent-cone element: a tangent vector plus Xi = U_xi diag(sigma_xi) V_xi^T
/// with U_xi^T U = 0 and V_xi^T V = 0.
struct ConeVector {
  TangentVector tangent;
  DenseMatrix xi_u;  // rows x q
  Vector xi_sigma;   // q values, >= 0
  DenseMatrix xi_v;  // cols x q

  const FixedRankMatrix& base() const { return tangent.base; }
  Index xi_rank() const { return xi_sigma.size(); }
  double xi_norm() const { return xi_sigma.norm(); }

  ConeVector scaled(double a) const;

  static ConeVector from_tangent(TangentVector t);
};

/// P_{T_X M_s}(Z) via the products Z V and Z^T U only. At a rank-zero base the
/// projection is the zero vector.
TangentVector project_to_tangent(const FixedRankMatrix& x, const LinearMap& z);

/// Projection of G onto the tangent cone of the rank-<=r variety at X:
/// tangent projection plus the best rank-(r - s) approximation of the
/// remainder P_U^perp G P_V^perp, found with truncated_svd.
ConeVector cone_direction(const FixedRankMatrix& x, const LinearMap& g, Index r,
                          const TruncatedSvdOptions& svd_options = {});

/// Best rank-<=r approximation of X + xi, through a QR of the stacked factors
/// and an SVD of a core of size at most 2s + q. Singular values below
/// 1e-12 * sigma_1 are dropped.
FixedRankMatrix retract(const FixedRankMatrix& x, const ConeVector& xi, Index r);

/// Euclidean inner product of two vectors sharing a base point.
double inner(const TangentVector& a, const TangentVector& b);
double inner(const ConeVector& a, const ConeVector& b);

DenseMatrix to_dense(const TangentVector& t);
DenseMatrix to_dense(const ConeVector& c);

}  // namespace rankprox
