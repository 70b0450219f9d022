#include "oracles.hpp"

#include <doctest.h>

using namespace rankprox;

TEST_SUITE("variety") {
  TEST_CASE("point construction validates factors") {
    std::mt19937_64 rng(10);
    const DenseMatrix u = oracle::orthonormal(6, 2, rng);
    const DenseMatrix v = oracle::orthonormal(5, 2, rng);
    CHECK_NOTHROW(FixedRankMatrix(u, Vector::Constant(2, 1.0), v));
    CHECK_THROWS_AS(FixedRankMatrix(u, Vector::LinSpaced(2, 1.0, 2.0), v), std::invalid_argument);
    CHECK_THROWS_AS(FixedRankMatrix(u, Vector::Constant(2, -1.0), v), std::invalid_argument);
    CHECK_THROWS_AS(FixedRankMatrix(2.0 * u, Vector::Constant(2, 1.0), v), std::invalid_argument);
    const FixedRankMatrix z = FixedRankMatrix::zero(6, 5);
    CHECK(z.rank() == 0);
    CHECK(z.to_dense().norm() == 0.0);
  }

  TEST_CASE("entries, norms and copies") {
    std::mt19937_64 rng(11);
    const FixedRankMatrix x = oracle::random_point(7, 9, 3, rng);
    const DenseMatrix d = x.to_dense();
    CHECK(x.entry(4, 2) == doctest::Approx(d(4, 2)));
    CHECK(x.trace_norm() == doctest::Approx(oracle::singular_values(d).sum()));
    CHECK(x.frobenius_norm() == doctest::Approx(d.norm()));
    const FixedRankMatrix y = x;
    CHECK(y.same_point(x));
  }

  TEST_CASE("tangent projection matches the dense formula and is idempotent") {
    std::mt19937_64 rng(12);
    for (int rep = 0; rep < 10; ++rep) {
      const FixedRankMatrix x = oracle::random_point(8, 11, 1 + rep % 4, rng);
      const DenseMatrix z = oracle::gaussian(8, 11, rng);
      const TangentVector t = project_to_tangent(x, DenseOperator(z));
      const DenseMatrix ref = oracle::tangent_projection(x.u(), x.v(), z);
      CHECK((to_dense(t) - ref).norm() < 1e-12);
      CHECK((x.u().transpose() * t.up).norm() < 1e-12);
      CHECK((x.v().transpose() * t.vp).norm() < 1e-12);
      const TangentVector tt = project_to_tangent(x, DenseOperator(to_dense(t)));
      CHECK((to_dense(tt) - to_dense(t)).norm() < 1e-12);
      CHECK(inner(t, t) == doctest::Approx(ref.squaredNorm()));
    }
  }

  TEST_CASE("projection at the zero point vanishes") {
    std::mt19937_64 rng(13);
    const TangentVector t = project_to_tangent(FixedRankMatrix::zero(4, 3), DenseOperator(oracle::gaussian(4, 3, rng)));
    CHECK(to_dense(t).norm() == 0.0);
  }

  TEST_CASE("cone direction adds the best rank-(r-s) normal block") {
    std::mt19937_64 rng(14);
    const FixedRankMatrix x = oracle::random_point(10, 8, 2, rng);
    const DenseMatrix g = oracle::gaussian(10, 8, rng);
    TruncatedSvdOptions opts;
    opts.tol = 1e-12;
    const ConeVector c = cone_direction(x, DenseOperator(g), 4, opts);
    CHECK(c.xi_rank() == 2);
    const DenseMatrix pu = DenseMatrix::Identity(10, 10) - x.u() * x.u().transpose();
    const DenseMatrix pv = DenseMatrix::Identity(8, 8) - x.v() * x.v().transpose();
    const DenseMatrix ref = oracle::tangent_projection(x.u(), x.v(), g) + oracle::truncate(pu * g * pv, 2);
    CHECK((to_dense(c) - ref).norm() < 1e-9);
    CHECK((x.u().transpose() * c.xi_u).norm() < 1e-10);
    CHECK(inner(c, c) == doctest::Approx(ref.squaredNorm()).epsilon(1e-10));
  }

  TEST_CASE("cone direction at full budget is the tangent projection") {
    std::mt19937_64 rng(15);
    const FixedRankMatrix x = oracle::random_point(6, 6, 3, rng);
    const DenseMatrix g = oracle::gaussian(6, 6, rng);
    const ConeVector c = cone_direction(x, DenseOperator(g), 3);
    CHECK(c.xi_rank() == 0);
    CHECK((to_dense(c) - oracle::tangent_projection(x.u(), x.v(), g)).norm() < 1e-12);
  }

  TEST_CASE("retraction is the best rank-r approximation") {
    std::mt19937_64 rng(16);
    for (int rep = 0; rep < 10; ++rep) {
      const Index s = 1 + rep % 3;
      const Index r = s + rep % 2;
      const FixedRankMatrix x = oracle::random_point(9, 7, s, rng);
      const ConeVector c = cone_direction(x, DenseOperator(oracle::gaussian(9, 7, rng)), r).scaled(0.3);
      const FixedRankMatrix y = retract(x, c, r);
      const DenseMatrix ref = oracle::truncate(x.to_dense() + to_dense(c), r);
      CHECK(y.rank() <= r);
      CHECK((y.to_dense() - ref).norm() < 1e-10 * std::max(1.0, ref.norm()));
    }
  }

  TEST_CASE("retraction drops vanishing singular values") {
    std::mt19937_64 rng(17);
    const FixedRankMatrix x = oracle::random_point(5, 5, 2, rng);
    // Step exactly onto -X: the result is the zero matrix.
    TangentVector t = TangentVector::zero(x);
    t.m = -DenseMatrix(x.sigma().asDiagonal());
    const FixedRankMatrix y = retract(x, ConeVector::from_tangent(t), 2);
    CHECK(y.rank() == 0);
  }
}
