#include "rankprox/variety.hpp"

#include <algorithm>
#include <cmath>

namespace rankprox {

namespace {

void check_sizes(const DenseMatrix& u, const Vector& sigma, const DenseMatrix& v) {
  if (u.cols() != sigma.size() || v.cols() != sigma.size())
    throw std::invalid_argument("FixedRankMatrix: factor sizes disagree");
  if (sigma.size() > std::min(u.rows(), v.rows()))
    throw std::invalid_argument("FixedRankMatrix: rank exceeds min(rows, cols)");
}

void check_same_base(const FixedRankMatrix& a, const FixedRankMatrix& b, const char* where) {
  if (!a.same_point(b)) throw std::invalid_argument(std::string(where) + ": base point mismatch");
}

// Drops trailing singular values that are not above `floor`.
Index kept_rank(const Vector& sigma, double floor, Index cap) {
  Index keep = std::min<Index>(cap, sigma.size());
  while (keep > 0 && !(sigma[keep - 1] > floor)) --keep;
  return keep;
}

}  // namespace

FixedRankMatrix::FixedRankMatrix(DenseMatrix u, Vector sigma, DenseMatrix v) {
  check_sizes(u, sigma, v);
  if (!u.allFinite() || !v.allFinite() || !sigma.allFinite())
    throw std::invalid_argument("FixedRankMatrix: non-finite factor entries");
  for (Index i = 0; i < sigma.size(); ++i) {
    if (!(sigma[i] > 0.0)) throw std::invalid_argument("FixedRankMatrix: sigma must be positive");
    if (i > 0 && sigma[i] > sigma[i - 1])
      throw std::invalid_argument("FixedRankMatrix: sigma must be non-increasing");
  }
  const Index s = sigma.size();
  const DenseMatrix eye = DenseMatrix::Identity(s, s);
  if (s > 0 && ((u.transpose() * u - eye).cwiseAbs().maxCoeff() > 1e-8 ||
                (v.transpose() * v - eye).cwiseAbs().maxCoeff() > 1e-8))
    throw std::invalid_argument("FixedRankMatrix: factors are not orthonormal");
  factors_ = std::make_shared<const Factors>(Factors{std::move(u), std::move(sigma), std::move(v)});
}

FixedRankMatrix::FixedRankMatrix()
    : factors_(std::make_shared<const Factors>(Factors{DenseMatrix(0, 0), Vector(0), DenseMatrix(0, 0)})) {}

FixedRankMatrix FixedRankMatrix::from_trusted(DenseMatrix u, Vector sigma, DenseMatrix v) {
  check_sizes(u, sigma, v);
  FixedRankMatrix x;
  x.factors_ = std::make_shared<const Factors>(Factors{std::move(u), std::move(sigma), std::move(v)});
  return x;
}

FixedRankMatrix FixedRankMatrix::zero(Index rows, Index cols) {
  if (rows < 0 || cols < 0) throw std::invalid_argument("FixedRankMatrix: negative dimension");
  return from_trusted(DenseMatrix(rows, 0), Vector(0), DenseMatrix(cols, 0));
}

double FixedRankMatrix::entry(Index i, Index j) const {
  const auto& f = *factors_;
  double acc = 0.0;
  for (Index k = 0; k < f.sigma.size(); ++k) acc += f.u(i, k) * f.sigma[k] * f.v(j, k);
  return acc;
}

DenseMatrix FixedRankMatrix::to_dense() const {
  const auto& f = *factors_;
  return f.u * f.sigma.asDiagonal() * f.v.transpose();
}

TangentVector TangentVector::zero(const FixedRankMatrix& base) {
  const Index s = base.rank();
  return {base, DenseMatrix::Zero(s, s), DenseMatrix::Zero(base.rows(), s),
          DenseMatrix::Zero(base.cols(), s)};
}

ConeVector ConeVector::scaled(double a) const {
  ConeVector out{{tangent.base, a * tangent.m, a * tangent.up, a * tangent.vp},
                 a < 0 ? DenseMatrix(-xi_u) : xi_u,
                 std::abs(a) * xi_sigma,
                 xi_v};
  return out;
}

ConeVector ConeVector::from_tangent(TangentVector t) {
  const Index m = t.base.rows();
  const Index n = t.base.cols();
  return {std::move(t), DenseMatrix(m, 0), Vector(0), DenseMatrix(n, 0)};
}

TangentVector project_to_tangent(const FixedRankMatrix& x, const LinearMap& z) {
  if (z.rows() != x.rows() || z.cols() != x.cols())
    throw std::invalid_argument("project_to_tangent: dimension mismatch");
  if (x.rank() == 0) return TangentVector::zero(x);
  const DenseMatrix zv = z.apply(x.v());
  const DenseMatrix ztu = z.apply_adjoint(x.u());
  TangentVector t{x, x.u().transpose() * zv, {}, {}};
  t.up = zv - x.u() * t.m;
  t.vp = ztu - x.v() * t.m.transpose();
  return t;
}

ConeVector cone_direction(const FixedRankMatrix& x, const LinearMap& g, Index r,
                          const TruncatedSvdOptions& svd_options) {
  const Index s = x.rank();
  if (s > r) throw std::invalid_argument("cone_direction: rank of X exceeds the budget");
  ConeVector out = ConeVector::from_tangent(project_to_tangent(x, g));
  const Index q = std::min(r - s, std::min(x.rows(), x.cols()) - s);
  if (q <= 0) return out;

  const ComplementOperator remainder(g, x.u(), x.v());
  SvdResult xi = truncated_svd(remainder, q, svd_options);

  const double tangent_scale =
      std::sqrt(out.tangent.m.squaredNorm() + out.tangent.up.squaredNorm() +
                out.tangent.vp.squaredNorm());
  const double scale = std::max(xi.sigma.size() ? xi.sigma[0] : 0.0, tangent_scale);
  const Index keep = kept_rank(xi.sigma, 1e-13 * scale, q);
  out.xi_u = xi.u.leftCols(keep);
  out.xi_v = xi.v.leftCols(keep);
  out.xi_sigma = xi.sigma.head(keep);
  if (s > 0 && keep > 0) {
    out.xi_u -= x.u() * (x.u().transpose() * out.xi_u);
    out.xi_v -= x.v() * (x.v().transpose() * out.xi_v);
  }
  return out;
}

FixedRankMatrix retract(const FixedRankMatrix& x, const ConeVector& xi, Index r) {
  check_same_base(x, xi.base(), "retract");
  if (r < 0) throw std::invalid_argument("retract: negative rank budget");
  const Index m = x.rows();
  const Index n = x.cols();
  const Index s = x.rank();
  const Index q = xi.xi_rank();
  const TangentVector& t = xi.tangent;

  const bool zero_step = (q == 0 || xi.xi_sigma.isZero(0.0)) && t.m.isZero(0.0) &&
                         t.up.isZero(0.0) && t.vp.isZero(0.0);
  if (zero_step && s <= r) return x;

  // X + xi = L R^T with
  //   L = [U (diag(sigma) + M), U_p, U, U_xi diag(sigma_xi)],  R = [V, V, V_p, V_xi].
  const Index width = 3 * s + q;
  DenseMatrix left(m, width);
  DenseMatrix right(n, width);
  DenseMatrix core = t.m;
  core.diagonal() += x.sigma();
  left << x.u() * core, t.up, x.u(), xi.xi_u * xi.xi_sigma.asDiagonal();
  right << x.v(), x.v(), t.vp, xi.xi_v;

  // Orthonormal bases containing the column and row spaces of X + xi.
  const Index stacked = 2 * s + q;
  DenseMatrix basis_u;
  DenseMatrix basis_v;
  if (stacked <= m) {
    DenseMatrix cols(m, stacked);
    cols << x.u(), t.up, xi.xi_u;
    basis_u = thin_qr(cols).q;
  } else {
    basis_u = DenseMatrix::Identity(m, m);
  }
  if (stacked <= n) {
    DenseMatrix cols(n, stacked);
    cols << x.v(), t.vp, xi.xi_v;
    basis_v = thin_qr(cols).q;
  } else {
    basis_v = DenseMatrix::Identity(n, n);
  }

  const DenseMatrix small = (basis_u.transpose() * left) * (basis_v.transpose() * right).transpose();
  const SvdResult svd = svd_small(small, std::max(r, s + q));
  const double top = svd.sigma.size() ? svd.sigma[0] : 0.0;
  const Index keep = kept_rank(svd.sigma, std::max(1e-12 * top, 0.0), r);
  return FixedRankMatrix::from_trusted(basis_u * svd.u.leftCols(keep), svd.sigma.head(keep),
                                       basis_v * svd.v.leftCols(keep));
}

double inner(const TangentVector& a, const TangentVector& b) {
  check_same_base(a.base, b.base, "inner");
  return a.m.cwiseProduct(b.m).sum() + a.up.cwiseProduct(b.up).sum() +
         a.vp.cwiseProduct(b.vp).sum();
}

double inner(const ConeVector& a, const ConeVector& b) {
  double acc = inner(a.tangent, b.tangent);
  if (a.xi_rank() > 0 && b.xi_rank() > 0) {
    const DenseMatrix cu = a.xi_u.transpose() * b.xi_u;
    const DenseMatrix cv = a.xi_v.transpose() * b.xi_v;
    acc += (a.xi_sigma.asDiagonal() * cu.cwiseProduct(cv) * b.xi_sigma.asDiagonal()).sum();
  }
  return acc;
}

DenseMatrix to_dense(const TangentVector& t) {
  const auto& x = t.base;
  DenseMatrix out = DenseMatrix::Zero(x.rows(), x.cols());
  if (x.rank() == 0) return out;
  out.noalias() += x.u() * t.m * x.v().transpose();
  out.noalias() += t.up * x.v().transpose();
  out.noalias() += x.u() * t.vp.transpose();
  return out;
}

DenseMatrix to_dense(const ConeVector& c) {
  DenseMatrix out = to_dense(c.tangent);
  if (c.xi_rank() > 0) out.noalias() += c.xi_u * c.xi_sigma.asDiagonal() * c.xi_v.transpose();
  return out;
}

}  // namespace rankprox
