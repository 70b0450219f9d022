#include "rankprox/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace rankprox {

namespace {

thread_local SvdStats g_stats;

void fill_normal(Eigen::Ref<Vector> x, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  for (Index i = 0; i < x.size(); ++i) x[i] = dist(rng);
}

// Two passes of classical Gram-Schmidt against the first `ncols` columns.
void orthogonalize(const DenseMatrix& basis, Index ncols, Eigen::Ref<Vector> x) {
  if (ncols == 0) return;
  for (int pass = 0; pass < 2; ++pass) {
    const Vector coeff = basis.leftCols(ncols).transpose() * x;
    x.noalias() -= basis.leftCols(ncols) * coeff;
  }
}

// Replaces x by a random unit vector orthogonal to the first ncols columns.
void random_orthogonal(const DenseMatrix& basis, Index ncols, Eigen::Ref<Vector> x,
                       std::mt19937_64& rng) {
  for (int attempt = 0; attempt < 8; ++attempt) {
    fill_normal(x, rng);
    orthogonalize(basis, ncols, x);
    const double nrm = x.norm();
    if (nrm > 1e-8) {
      x /= nrm;
      return;
    }
  }
  x.setZero();
}

struct LanczosState {
  DenseMatrix p;  // right Lanczos vectors, cols x work
  DenseMatrix q;  // left Lanczos vectors, rows x work
  DenseMatrix b;  // projected matrix, work x work
  Vector f;       // residual of the last right step
  double scale = 0.0;
};

// Extends the factorization  Op P = Q B,  Op^T Q = P B^T + f e^T  from column
// `start` to the full work size. Column `start` of P must already be a unit
// vector orthogonal to the previous ones, and B(0:start, start) must hold the
// coupling entries produced by a restart.
void lanczos_extend(const LinearMap& op, LanczosState& st, Index start, std::mt19937_64& rng) {
  const Index work = st.p.cols();
  auto breakdown = [&st](double value) { return value <= 1e-13 * st.scale; };

  Vector w = op.apply(st.p.col(start));
  if (start > 0) w.noalias() -= st.q.leftCols(start) * st.b.col(start).head(start);
  orthogonalize(st.q, start, w);
  double alpha = w.norm();
  st.scale = std::max(st.scale, alpha);
  if (breakdown(alpha)) {
    random_orthogonal(st.q, start, w, rng);
    alpha = 0.0;
  } else {
    w /= alpha;
  }
  st.q.col(start) = w;
  st.b(start, start) = alpha;

  for (Index j = start; j < work; ++j) {
    Vector r = op.apply_adjoint(st.q.col(j));
    r.noalias() -= st.b(j, j) * st.p.col(j);
    orthogonalize(st.p, j + 1, r);
    double beta = r.norm();
    st.scale = std::max(st.scale, beta);
    if (j + 1 == work) {
      st.f = r;
      break;
    }
    if (breakdown(beta)) {
      random_orthogonal(st.p, j + 1, r, rng);
      beta = 0.0;
    } else {
      r /= beta;
    }
    st.p.col(j + 1) = r;
    st.b(j, j + 1) = beta;

    Vector u = op.apply(st.p.col(j + 1));
    u.noalias() -= beta * st.q.col(j);
    orthogonalize(st.q, j + 1, u);
    alpha = u.norm();
    st.scale = std::max(st.scale, alpha);
    if (breakdown(alpha)) {
      random_orthogonal(st.q, j + 1, u, rng);
      alpha = 0.0;
    } else {
      u /= alpha;
    }
    st.q.col(j + 1) = u;
    st.b(j + 1, j + 1) = alpha;
  }
}

}  // namespace

DenseMatrix LinearMap::to_dense() const {
  return apply(DenseMatrix::Identity(cols(), cols()));
}

DenseOperator::DenseOperator(DenseMatrix a) : a_(std::move(a)) {
  if (!a_.allFinite()) throw std::invalid_argument("DenseOperator: non-finite entries");
}

DenseMatrix DenseOperator::apply(const DenseMatrix& x) const {
  if (x.rows() != a_.cols()) throw std::invalid_argument("DenseOperator::apply: dimension mismatch");
  return a_ * x;
}

DenseMatrix DenseOperator::apply_adjoint(const DenseMatrix& y) const {
  if (y.rows() != a_.rows())
    throw std::invalid_argument("DenseOperator::apply_adjoint: dimension mismatch");
  return a_.transpose() * y;
}

SparseMatrix::SparseMatrix(Index rows, Index cols, std::vector<Triplet> triplets)
    : rows_(rows), cols_(cols), triplets_(std::move(triplets)), csr_(rows, cols) {
  if (rows < 0 || cols < 0) throw std::invalid_argument("SparseMatrix: negative dimension");
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(triplets_.size());
  for (const auto& t : triplets_) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
      throw std::invalid_argument("SparseMatrix: index out of range");
    if (!std::isfinite(t.value)) throw std::invalid_argument("SparseMatrix: non-finite value");
    entries.emplace_back(t.row, t.col, t.value);
  }
  bool duplicate = false;
  csr_.setFromTriplets(entries.begin(), entries.end(), [&duplicate](double a, double b) {
    duplicate = true;
    return a + b;
  });
  if (duplicate) throw std::invalid_argument("SparseMatrix: duplicate (row, col) position");
  csr_.makeCompressed();
}

DenseMatrix SparseMatrix::apply(const DenseMatrix& x) const {
  if (x.rows() != cols_) throw std::invalid_argument("SparseMatrix::apply: dimension mismatch");
  return csr_ * x;
}

DenseMatrix SparseMatrix::apply_adjoint(const DenseMatrix& y) const {
  if (y.rows() != rows_)
    throw std::invalid_argument("SparseMatrix::apply_adjoint: dimension mismatch");
  return csr_.transpose() * y;
}

ComplementOperator::ComplementOperator(const LinearMap& op, const DenseMatrix& u,
                                       const DenseMatrix& v)
    : op_(op), u_(u), v_(v) {
  if (u.rows() != op.rows() || v.rows() != op.cols())
    throw std::invalid_argument("ComplementOperator: dimension mismatch");
}

DenseMatrix ComplementOperator::apply(const DenseMatrix& x) const {
  DenseMatrix xp = x;
  if (v_.cols() > 0) xp.noalias() -= v_ * (v_.transpose() * x);
  DenseMatrix y = op_.apply(xp);
  if (u_.cols() > 0) y.noalias() -= u_ * (u_.transpose() * y);
  return y;
}

DenseMatrix ComplementOperator::apply_adjoint(const DenseMatrix& y) const {
  DenseMatrix yp = y;
  if (u_.cols() > 0) yp.noalias() -= u_ * (u_.transpose() * y);
  DenseMatrix x = op_.apply_adjoint(yp);
  if (v_.cols() > 0) x.noalias() -= v_ * (v_.transpose() * x);
  return x;
}

QrResult thin_qr(const DenseMatrix& a) {
  if (a.rows() < a.cols()) throw std::invalid_argument("thin_qr: requires rows >= cols");
  const Index n = a.cols();
  Eigen::HouseholderQR<DenseMatrix> qr(a);
  QrResult out;
  out.q = qr.householderQ() * DenseMatrix::Identity(a.rows(), n);
  out.r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  return out;
}

SvdResult svd_small(const DenseMatrix& a, Index working_rank) {
  const Index bound = 4 * std::max<Index>(working_rank, 1);
  const Index dim = std::max(a.rows(), a.cols());
  if (dim > bound)
    throw InvariantError("svd_small: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         " exceeds the bound 4*rank = " + std::to_string(bound));
  g_stats.max_dense_dim = std::max(g_stats.max_dense_dim, dim);
  ++g_stats.dense_calls;

  SvdResult out;
  if (a.size() == 0) {
    const Index k = std::min(a.rows(), a.cols());
    out.u = DenseMatrix::Identity(a.rows(), k);
    out.v = DenseMatrix::Identity(a.cols(), k);
    out.sigma = Vector::Zero(k);
    return out;
  }
  Eigen::BDCSVD<DenseMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  out.u = svd.matrixU();
  out.sigma = svd.singularValues();
  out.v = svd.matrixV();
  return out;
}

SvdResult truncated_svd(const LinearMap& op, Index k, const TruncatedSvdOptions& options) {
  const Index m = op.rows();
  const Index n = op.cols();
  const Index mn = std::min(m, n);
  if (k < 0 || k > mn) throw std::invalid_argument("truncated_svd: rank out of range");
  g_stats.max_truncated_rank = std::max(g_stats.max_truncated_rank, k);
  ++g_stats.truncated_calls;
  if (k == 0) return {DenseMatrix(m, 0), Vector(0), DenseMatrix(n, 0)};

  Index work = options.work > 0 ? options.work : std::max<Index>(2 * k, k + 7);
  work = std::clamp<Index>(work, k, mn);

  std::mt19937_64 rng(options.seed);
  LanczosState st;
  st.p = DenseMatrix::Zero(n, work);
  st.q = DenseMatrix::Zero(m, work);
  st.b = DenseMatrix::Zero(work, work);
  st.f = Vector::Zero(n);
  {
    Vector p0(n);
    random_orthogonal(st.p, 0, p0, rng);
    st.p.col(0) = p0;
  }

  SvdResult best;
  Index start = 0;
  for (Index restart = 0; restart <= options.max_restarts; ++restart) {
    lanczos_extend(op, st, start, rng);

    Eigen::JacobiSVD<DenseMatrix> bsvd(st.b, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const DenseMatrix& ub = bsvd.matrixU();
    const DenseMatrix& vb = bsvd.matrixV();
    const Vector& s = bsvd.singularValues();
    const double fnorm = st.f.norm();

    best.u = st.q * ub.leftCols(k);
    best.v = st.p * vb.leftCols(k);
    best.sigma = s.head(k);

    bool converged = true;
    const double threshold = options.tol * std::max(s[0], 0.0);
    for (Index i = 0; i < k; ++i) {
      if (fnorm * std::abs(ub(work - 1, i)) > threshold) {
        converged = false;
        break;
      }
    }
    if (converged || work == mn) {
      // With work == min(m, n) the Krylov basis spans the whole domain, so the
      // factorization is exact up to rounding.
      return best;
    }

    // Thick restart: keep the k Ritz pairs, continue from the residual.
    const DenseMatrix p_keep = st.p * vb.leftCols(k);
    const DenseMatrix q_keep = st.q * ub.leftCols(k);
    st.b.setZero();
    st.p.leftCols(k) = p_keep;
    st.q.leftCols(k) = q_keep;
    for (Index i = 0; i < k; ++i) {
      st.b(i, i) = s[i];
      st.b(i, k) = fnorm * ub(work - 1, i);
    }
    Vector next = st.f;
    orthogonalize(st.p, k, next);
    const double nrm = next.norm();
    if (nrm <= 1e-13 * std::max(st.scale, 1e-300)) {
      random_orthogonal(st.p, k, next, rng);
      for (Index i = 0; i < k; ++i) st.b(i, k) = 0.0;
    } else {
      next /= nrm;
    }
    st.p.col(k) = next;
    start = k;
  }
  throw ConvergenceError("truncated_svd: no convergence after " +
                             std::to_string(options.max_restarts) + " restarts",
                         std::move(best));
}

SvdStats svd_stats() { return g_stats; }

void reset_svd_stats() { g_stats = SvdStats{}; }

}  // namespace rankprox
