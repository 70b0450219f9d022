#include "rankprox/cluster.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace rankprox {

namespace {

struct KMeansRun {
  std::vector<int> labels;
  double inertia = std::numeric_limits<double>::infinity();
};

// Rows of `pts` are the points.
KMeansRun kmeans_once(const DenseMatrix& pts, int k, std::mt19937_64& rng, int max_iterations) {
  const Index n = pts.rows();
  DenseMatrix centers(k, pts.cols());

  // k-means++ seeding.
  std::uniform_int_distribution<Index> first(0, n - 1);
  centers.row(0) = pts.row(first(rng));
  Vector dist2 = (pts.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    Index pick = first(rng);
    if (dist2.sum() > 0.0) {
      std::discrete_distribution<Index> weighted(dist2.data(), dist2.data() + n);
      pick = weighted(rng);
    }
    centers.row(c) = pts.row(pick);
    dist2 = dist2.cwiseMin((pts.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }

  KMeansRun run;
  run.labels.assign(static_cast<std::size_t>(n), -1);
  for (int it = 0; it < max_iterations; ++it) {
    bool changed = false;
    double inertia = 0.0;
    for (Index i = 0; i < n; ++i) {
      Index best = 0;
      const double d = (centers.rowwise() - pts.row(i)).rowwise().squaredNorm().minCoeff(&best);
      inertia += d;
      if (run.labels[static_cast<std::size_t>(i)] != static_cast<int>(best)) {
        run.labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
        changed = true;
      }
    }
    run.inertia = inertia;
    if (!changed) break;
    DenseMatrix sums = DenseMatrix::Zero(k, pts.cols());
    std::vector<Index> counts(static_cast<std::size_t>(k), 0);
    for (Index i = 0; i < n; ++i) {
      const int c = run.labels[static_cast<std::size_t>(i)];
      sums.row(c) += pts.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < k; ++c)
      if (counts[static_cast<std::size_t>(c)] > 0)
        centers.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
  }
  return run;
}

// Minimum-cost perfect assignment on a square cost matrix (Hungarian method,
// potentials formulation). Returns the column assigned to each row.
std::vector<int> hungarian(const DenseMatrix& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<bool> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace

double clustering_accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size() || predicted.empty())
    throw std::invalid_argument("clustering_accuracy: label vectors must be non-empty and equally long");
  int classes = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] < 0 || truth[i] < 0) throw std::invalid_argument("clustering_accuracy: negative label");
    classes = std::max({classes, predicted[i] + 1, truth[i] + 1});
  }
  DenseMatrix counts = DenseMatrix::Zero(classes, classes);
  for (std::size_t i = 0; i < predicted.size(); ++i) counts(predicted[i], truth[i]) += 1.0;
  const auto match = hungarian(-counts);
  double hit = 0.0;
  for (int c = 0; c < classes; ++c) hit += counts(c, match[static_cast<std::size_t>(c)]);
  return hit / static_cast<double>(predicted.size());
}

ClusterResult lrr_affinity_cluster(const DenseMatrix& x, int k, const ClusterOptions& options,
                                   const std::optional<std::vector<int>>& truth) {
  const Index n = x.rows();
  if (x.cols() != n) throw std::invalid_argument("lrr_affinity_cluster: X must be square");
  if (k < 1 || k > n) throw std::invalid_argument("lrr_affinity_cluster: need 1 <= k <= n");
  if (truth && static_cast<Index>(truth->size()) != n)
    throw std::invalid_argument("lrr_affinity_cluster: truth has the wrong length");

  const DenseMatrix w = 0.5 * (x.cwiseAbs() + x.transpose().cwiseAbs());
  Vector scale = w.rowwise().sum();
  const double floor = 1e-12 * std::max(scale.maxCoeff(), 1e-300);
  for (Index i = 0; i < n; ++i) scale[i] = 1.0 / std::sqrt(std::max(scale[i], floor));
  const DenseMatrix normalized = scale.asDiagonal() * w * scale.asDiagonal();

  Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(normalized);
  if (eig.info() != Eigen::Success) throw std::runtime_error("lrr_affinity_cluster: eigensolver failed");
  DenseMatrix embed = eig.eigenvectors().rightCols(k);  // eigenvalues ascend
  for (Index i = 0; i < n; ++i) {
    const double len = embed.row(i).norm();
    if (len > 0.0) embed.row(i) /= len;
  }

  std::mt19937_64 rng(options.seed);
  KMeansRun best;
  for (int rep = 0; rep < std::max(options.restarts, 1); ++rep) {
    KMeansRun run = kmeans_once(embed, k, rng, options.max_iterations);
    if (run.inertia < best.inertia) best = std::move(run);
  }

  ClusterResult out;
  out.labels = std::move(best.labels);
  out.inertia = best.inertia;
  if (truth) out.accuracy = clustering_accuracy(out.labels, *truth);
  return out;
}

ClusterResult lrr_affinity_cluster(const FixedRankMatrix& x, int k, const ClusterOptions& options,
                                   const std::optional<std::vector<int>>& truth) {
  return lrr_affinity_cluster(x.to_dense(), k, options, truth);
}

}  // namespace rankprox
