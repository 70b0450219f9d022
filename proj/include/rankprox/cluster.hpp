#pragma once

// Spectral clustering of an LRR coefficient matrix.

#include "rankprox/variety.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace rankprox {

struct ClusterResult {
  std::vector<int> labels;          // in [0, k)
  std::optional<double> accuracy;   // best-permutation accuracy if truth was given
  double inertia = 0.0;             // k-means objective of the chosen restart
};

struct ClusterOptions {
  std::uint64_t seed = 1;
  int restarts = 20;
  int max_iterations = 300;
};

/// Affinity W = (|X| + |X^T|) / 2, embedding by the top-k eigenvectors of
/// D^{-1/2} W D^{-1/2} (rows normalized), then k-means with seeded k-means++
/// restarts. Throws std::invalid_argument unless X is square and 1 <= k <= n.
ClusterResult lrr_affinity_cluster(const DenseMatrix& x, int k, const ClusterOptions& options = {},
                                   const std::optional<std::vector<int>>& truth = std::nullopt);
ClusterResult lrr_affinity_cluster(const FixedRankMatrix& x, int k, const ClusterOptions& options = {},
                                   const std::optional<std::vector<int>>& truth = std::nullopt);

/// Fraction of points whose predicted label maps to the true label under the
/// best one-to-one relabeling (Hungarian algorithm).
double clustering_accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);

}  // namespace rankprox
