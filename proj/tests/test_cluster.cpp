#include "oracles.hpp"
#include "rankprox/cluster.hpp"

#include <doctest.h>

using namespace rankprox;

TEST_SUITE("cluster") {
  TEST_CASE("accuracy is invariant to relabeling") {
    CHECK(clustering_accuracy({0, 0, 1, 1, 2}, {2, 2, 0, 0, 1}) == doctest::Approx(1.0));
    CHECK(clustering_accuracy({0, 1, 1, 1}, {0, 0, 1, 1}) == doctest::Approx(0.75));
    CHECK_THROWS(clustering_accuracy({0, 1}, {0}));
  }

  TEST_CASE("block-diagonal coefficients are separated exactly") {
    std::mt19937_64 rng(50);
    std::uniform_real_distribution<double> u(0.5, 1.0);
    const Index n = 30;
    std::vector<int> truth(n);
    DenseMatrix x = DenseMatrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
      truth[static_cast<std::size_t>(i)] = static_cast<int>(i % 3);
      for (Index j = 0; j < n; ++j)
        if (i % 3 == j % 3) x(i, j) = u(rng);
    }
    const ClusterResult r = lrr_affinity_cluster(x, 3, {}, truth);
    REQUIRE(r.accuracy.has_value());
    CHECK(*r.accuracy == doctest::Approx(1.0));
    CHECK(r.labels.size() == static_cast<std::size_t>(n));
  }

  TEST_CASE("factored input gives the same labels") {
    std::mt19937_64 rng(51);
    const FixedRankMatrix x = oracle::random_point(16, 16, 2, rng);
    const ClusterResult a = lrr_affinity_cluster(x, 2);
    const ClusterResult b = lrr_affinity_cluster(x.to_dense(), 2);
    CHECK(clustering_accuracy(a.labels, b.labels) == doctest::Approx(1.0));
  }

  TEST_CASE("argument checks") {
    CHECK_THROWS_AS(lrr_affinity_cluster(DenseMatrix::Zero(3, 4), 2), std::invalid_argument);
    CHECK_THROWS_AS(lrr_affinity_cluster(DenseMatrix::Identity(3, 3), 4), std::invalid_argument);
  }
}
