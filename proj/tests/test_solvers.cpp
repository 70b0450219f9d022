#include "oracles.hpp"
#include "rankprox/solvers.hpp"
#include "rankprox/trace_io.hpp"

#include <doctest.h>

#include <sstream>

using namespace rankprox;

namespace {

ProblemSpec small_completion(std::mt19937_64& rng, Index m, Index n, Index s, double keep, double noise,
                             ShrinkKind robust, double gamma, double lambda) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g;
  const DenseMatrix truth = oracle::random_point(m, n, s, rng, 1.0, 10.0).to_dense();
  std::vector<Sample> samples;
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j)
      if (keep >= 1.0 || u(rng) < keep || (i == 0 && j == 0)) samples.push_back({i, j, truth(i, j) + noise * g(rng)});
  return ProblemSpec::completion(Observations(m, n, std::move(samples)), robust, gamma, lambda);
}

SolverConfig tight() {
  SolverConfig c;
  c.beta = 1e-8;
  c.eps_inner = 1e-15;
  c.eps_outer = 1e-15;
  c.max_inner = 20000;
  c.svd.tol = 1e-10;
  return c;
}

}  // namespace

TEST_SUITE("solvers") {
  TEST_CASE("config validation") {
    SolverConfig c;
    CHECK_NOTHROW(c.validate());
    c.beta = 1.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = SolverConfig{};
    c.chi = 0.6;  // must stay below rho
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = SolverConfig{};
    c.kappa = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  }

  TEST_CASE("armijo returns a sufficient decrease") {
    std::mt19937_64 rng(40);
    const ProblemSpec spec = small_completion(rng, 8, 7, 2, 0.7, 0.0, ShrinkKind::None, 2.0, 0.0);
    const FixedRankMatrix x = oracle::random_point(8, 7, 2, rng);
    const ConeVector grad = cone_direction(x, *euclid_grad(spec, x, ErrorTerm()), 3);
    const PsiEvaluator psi = [&](const FixedRankMatrix& y) { return objective(spec, y, ErrorTerm()).psi; };
    const double psi_x = psi(x);
    SolverConfig c;
    const ArmijoResult a = armijo(psi, x, psi_x, grad, 0.01, 3, c);
    CHECK(a.psi_next <= psi_x - c.beta * inner(grad, grad) / a.L + 1e-12);
    CHECK(a.psi_next == doctest::Approx(psi(a.x_next)));
    CHECK(a.L == doctest::Approx(0.01 * std::pow(c.L_grow, static_cast<double>(a.backtracks))));
    const ConeVector zero = ConeVector::from_tangent(TangentVector::zero(x));
    CHECK_THROWS_AS(armijo(psi, x, psi_x, zero, 1.0, 3, c), std::invalid_argument);
  }

  TEST_CASE("PRG at full rank matches the dense oracle") {
    std::mt19937_64 rng(41);
    for (int rep = 0; rep < 4; ++rep) {
      const ProblemSpec spec = small_completion(rng, 6, 5, 2, 0.7, 0.05, ShrinkKind::None, 1.5 + rep, 0.0);
      // Without step growth L stays at gamma, the Lipschitz constant. Letting L
      // drop to gamma / 2 gives steps of 2 / Lipschitz, which zigzag.
      SolverConfig c = tight();
      c.L_shrink = 1.0;
      const Solution sol = prg_solve(spec, 5, c);
      const oracle::IstaResult ref = oracle::ista(oracle::dense_problem(spec), 1e-10);
      CHECK(sol.psi == doctest::Approx(ref.psi).epsilon(1e-6));
      CHECK(validate_trace(sol.trace, c.beta).ok);
    }
  }

  TEST_CASE("RPRG decreases monotonically and ends with the optimal E") {
    std::mt19937_64 rng(42);
    const ProblemSpec spec = small_completion(rng, 10, 9, 2, 0.8, 0.01, ShrinkKind::EntrywiseL1, 3.0, 1.0);
    SolverConfig c;
    c.max_inner = 2000;
    c.eps_inner = 1e-10;
    const Solution sol = rprg_solve(spec, 3, c);
    const TraceCheck check = validate_trace(sol.trace, c.beta);
    CHECK(check.ok);
    CHECK(check.inner_checked > 0);
    CHECK(sol.lambda == doctest::Approx(spec.lambda()));
    const DenseMatrix e_ref = shrink(spec.data() - apply_A(spec, sol.x), sol.lambda, spec.gamma(), spec.robust());
    CHECK((sol.e - e_ref).norm() < 1e-12);
  }

  TEST_CASE("subspace pursuit stops rank-deficient at a certified optimum") {
    std::mt19937_64 rng(43);
    const ProblemSpec spec = small_completion(rng, 12, 10, 2, 1.0, 0.0, ShrinkKind::None, 3.0, 0.0);
    SolverConfig c = tight();
    c.kappa = 1;
    const Solution sol = sp_solve(spec, c);
    CHECK(sol.status == SolveStatus::RankDeficientGlobal);
    CHECK(sol.x.rank() < sol.final_budget);
    const OptimalityReport rep = optimality_check(spec, sol.x, sol.e, 1e-4);
    CHECK(rep.is_global_certificate);
    const oracle::IstaResult ref = oracle::ista(oracle::dense_problem(spec), 1e-10);
    CHECK(sol.psi == doctest::Approx(ref.psi).epsilon(1e-8));
    CHECK(sol.svd.max_truncated_rank == 1);
    CHECK(sol.svd.truncated_calls <= sol.outer_iterations + 1);
  }

  TEST_CASE("optimality check rejects a perturbed point") {
    std::mt19937_64 rng(44);
    const ProblemSpec spec = small_completion(rng, 8, 8, 1, 1.0, 0.0, ShrinkKind::None, 2.0, 0.0);
    const FixedRankMatrix x = oracle::random_point(8, 8, 1, rng);
    CHECK_FALSE(optimality_check(spec, x, ErrorTerm(), 1e-4).is_global_certificate);
  }

  TEST_CASE("SP on LRR with column outliers keeps its descent invariants") {
    std::mt19937_64 rng(45);
    const DenseMatrix basis = oracle::orthonormal(12, 3, rng);
    DenseMatrix d = basis * oracle::gaussian(3, 20, rng);
    d.col(4) += oracle::gaussian(12, 1, rng);
    const ProblemSpec spec = ProblemSpec::lrr(d, ShrinkKind::ColumnwiseL21, 1.0, 0.5);
    SolverConfig c;
    c.kappa = 2;
    const Solution sol = sp_solve(spec, c);
    CHECK(validate_trace(sol.trace, c.beta).ok);
    CHECK(sol.x.rank() <= sol.final_budget);
    CHECK(sol.e.rows() == 12);
  }

  TEST_CASE("heuristics follow their definitions") {
    std::mt19937_64 rng(46);
    const ProblemSpec spec = small_completion(rng, 15, 12, 3, 0.6, 0.0, ShrinkKind::EntrywiseL1, 1.0, 0.0);
    const HeuristicParameters hp = heuristics(spec, 0.005, 0.1, 0.65, 4);
    const Vector sv = oracle::singular_values(apply_A_adjoint(spec, spec.data())->to_dense());
    CHECK(hp.sigma[0] == doctest::Approx(sv[0]).epsilon(1e-5));
    CHECK(hp.gamma == doctest::Approx(1.0 / (0.005 * sv[0])).epsilon(1e-5));
    CHECK(hp.lambda == doctest::Approx(0.1 * hp.gamma * spec.data().cwiseAbs().mean()));
    CHECK(hp.kappa == kappa_from_spectrum(sv.head(4), 0.65));
    CHECK_THROWS_AS(heuristics(spec, 0.0, 0.1, 0.65, 4), std::invalid_argument);
  }

  TEST_CASE("kappa from the spectrum") {
    CHECK(kappa_from_spectrum((Vector(4) << 10, 7, 6.4, 1).finished(), 0.65) == 2);
    CHECK(kappa_from_spectrum((Vector(3) << 10, 1, 1).finished(), 0.65) == 1);
    CHECK(kappa_from_spectrum(Vector::Zero(2), 0.65) == 1);
  }

  TEST_CASE("trace round trip and violation detection") {
    std::mt19937_64 rng(47);
    const ProblemSpec spec = small_completion(rng, 9, 9, 2, 0.8, 0.01, ShrinkKind::None, 2.0, 0.0);
    SolverConfig c;
    c.kappa = 1;
    const Solution sol = sp_solve(spec, c, [](const FixedRankMatrix& x) { return x.frobenius_norm(); });
    std::stringstream buf;
    write_trace(buf, sol.trace);
    const SolverTrace back = read_trace(buf);
    REQUIRE(back.records.size() == sol.trace.records.size());
    for (std::size_t i = 0; i < back.records.size(); ++i) {
      CHECK(back.records[i].kind == sol.trace.records[i].kind);
      CHECK(back.records[i].psi == sol.trace.records[i].psi);
      CHECK(back.records[i].test_rmse == sol.trace.records[i].test_rmse);
    }
    CHECK(validate_trace(back, c.beta).ok);

    SolverTrace bad = back;
    REQUIRE(bad.records.size() >= 3);
    bad.records[2].psi = bad.records[1].psi * 2.0 + 1.0;
    const TraceCheck check = validate_trace(bad, c.beta);
    CHECK_FALSE(check.ok);
    CHECK(!check.violations.empty());
  }

  TEST_CASE("zero data stops immediately") {
    const ProblemSpec spec = ProblemSpec::completion(Observations(3, 3, {{0, 0, 0.0}}), ShrinkKind::None, 1.0, 0.0);
    const Solution sol = sp_solve(spec, SolverConfig{});
    CHECK(sol.x.rank() == 0);
    CHECK(sol.psi == 0.0);
  }
}
