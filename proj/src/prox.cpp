#include "rankprox/prox.hpp"

#include <cmath>

namespace rankprox {

const char* to_string(ShrinkKind kind) {
  switch (kind) {
    case ShrinkKind::None:
      return "none";
    case ShrinkKind::EntrywiseL1:
      return "l1";
    case ShrinkKind::ColumnwiseL21:
      return "l21";
  }
  return "unknown";
}

FixedRankMatrix prox_step(const FixedRankMatrix& x, const ConeVector& grad, double lipschitz,
                          Index r) {
  if (!(lipschitz > 0.0) || !std::isfinite(lipschitz))
    throw std::invalid_argument("prox_step: L must be positive");
  const FixedRankMatrix plus = retract(x, grad.scaled(-1.0 / lipschitz), r);

  const double threshold = 1.0 / lipschitz;
  const Vector& sigma = plus.sigma();
  Index keep = 0;
  while (keep < sigma.size() && sigma[keep] - threshold > 0.0) ++keep;
  Vector shrunk = (sigma.head(keep).array() - threshold).matrix();
  return FixedRankMatrix::from_trusted(plus.u().leftCols(keep), std::move(shrunk),
                                       plus.v().leftCols(keep));
}

DenseMatrix shrink(const DenseMatrix& b, double lambda, double gamma, ShrinkKind kind) {
  if (!(gamma > 0.0)) throw std::invalid_argument("shrink: gamma must be positive");
  if (lambda < 0.0) throw std::invalid_argument("shrink: lambda must be non-negative");
  const double tau = lambda / gamma;
  switch (kind) {
    case ShrinkKind::None:
      return b;
    case ShrinkKind::EntrywiseL1:
      return b.unaryExpr([tau](double v) {
        const double mag = std::abs(v) - tau;
        return mag > 0.0 ? std::copysign(mag, v) : 0.0;
      });
    case ShrinkKind::ColumnwiseL21: {
      DenseMatrix out = DenseMatrix::Zero(b.rows(), b.cols());
      for (Index j = 0; j < b.cols(); ++j) {
        const double nrm = b.col(j).norm();
        if (nrm > tau) out.col(j) = ((nrm - tau) / nrm) * b.col(j);
      }
      return out;
    }
  }
  return b;
}

double regularizer(const DenseMatrix& e, ShrinkKind kind) {
  switch (kind) {
    case ShrinkKind::None:
      return 0.0;
    case ShrinkKind::EntrywiseL1:
      return e.cwiseAbs().sum();
    case ShrinkKind::ColumnwiseL21:
      return e.colwise().norm().sum();
  }
  return 0.0;
}

}  // namespace rankprox
