#include "oracles.hpp"

#include <doctest.h>

using namespace rankprox;

namespace {

double l1_model(const DenseMatrix& e, const DenseMatrix& b, double lambda, double gamma) {
  return lambda * e.cwiseAbs().sum() + 0.5 * gamma * (e - b).squaredNorm();
}

double l21_model(const DenseMatrix& e, const DenseMatrix& b, double lambda, double gamma) {
  return lambda * e.colwise().norm().sum() + 0.5 * gamma * (e - b).squaredNorm();
}

}  // namespace

TEST_SUITE("prox") {
  TEST_CASE("prox step equals thresholded dense truncation") {
    std::mt19937_64 rng(20);
    for (int rep = 0; rep < 8; ++rep) {
      const Index s = 1 + rep % 3;
      const Index r = s + 1;
      const FixedRankMatrix x = oracle::random_point(8, 10, s, rng);
      const DenseMatrix g = oracle::gaussian(8, 10, rng);
      const ConeVector c = cone_direction(x, DenseOperator(g), r);
      const double L = 2.0 + rep;
      const FixedRankMatrix y = prox_step(x, c, L, r);
      const DenseMatrix ref = oracle::svt(oracle::truncate(x.to_dense() - to_dense(c) / L, r), 1.0 / L);
      CHECK((y.to_dense() - ref).norm() < 1e-10);
    }
  }

  TEST_CASE("prox step can lower the rank") {
    std::mt19937_64 rng(21);
    const FixedRankMatrix x(oracle::orthonormal(6, 2, rng), (Vector(2) << 3.0, 0.1).finished(),
                            oracle::orthonormal(5, 2, rng));
    const ConeVector zero = ConeVector::from_tangent(TangentVector::zero(x));
    CHECK(prox_step(x, zero, 1.0, 2).rank() == 1);
  }

  TEST_CASE("entrywise shrink is the closed-form minimizer") {
    std::mt19937_64 rng(22);
    const DenseMatrix b = oracle::gaussian(15, 1, rng);
    const double lambda = 0.7, gamma = 2.0;
    const DenseMatrix e = shrink(b, lambda, gamma, ShrinkKind::EntrywiseL1);
    for (Index i = 0; i < b.size(); ++i)
      CHECK(e(i) == doctest::Approx(std::copysign(std::max(std::abs(b(i)) - lambda / gamma, 0.0), b(i))));
    const double best = l1_model(e, b, lambda, gamma);
    for (int rep = 0; rep < 50; ++rep)
      CHECK(l1_model(e + 1e-3 * oracle::gaussian(15, 1, rng), b, lambda, gamma) >= best);
  }

  TEST_CASE("column shrink zeroes short columns and scales the rest") {
    std::mt19937_64 rng(23);
    DenseMatrix b = oracle::gaussian(6, 5, rng);
    b.col(2) *= 0.01;
    const double lambda = 1.0, gamma = 1.0;
    const DenseMatrix e = shrink(b, lambda, gamma, ShrinkKind::ColumnwiseL21);
    CHECK(e.col(2).norm() == 0.0);
    const double best = l21_model(e, b, lambda, gamma);
    for (int rep = 0; rep < 50; ++rep)
      CHECK(l21_model(e + 1e-3 * oracle::gaussian(6, 5, rng), b, lambda, gamma) >= best);
  }

  TEST_CASE("regularizer values and argument checks") {
    DenseMatrix e(2, 2);
    e << 3, -1, 4, 0;
    CHECK(regularizer(e, ShrinkKind::None) == 0.0);
    CHECK(regularizer(e, ShrinkKind::EntrywiseL1) == doctest::Approx(8.0));
    CHECK(regularizer(e, ShrinkKind::ColumnwiseL21) == doctest::Approx(6.0));
    CHECK_THROWS_AS(shrink(e, 1.0, 0.0, ShrinkKind::EntrywiseL1), std::invalid_argument);
    CHECK_THROWS_AS(shrink(e, -1.0, 1.0, ShrinkKind::EntrywiseL1), std::invalid_argument);
    CHECK(std::string(to_string(ShrinkKind::ColumnwiseL21)).size() > 0);
  }
}
