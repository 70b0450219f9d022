#include "rankprox/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace rankprox {

namespace {

using Clock = std::chrono::steady_clock;

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

 private:
  Clock::time_point start_ = Clock::now();
};

enum class GradientMode {
  Cone,     // add the rank-increasing block whenever rank(X) < r
  Tangent,  // tangent space of the current rank only
};

struct InnerContext {
  const ProblemSpec& spec;
  const SolverConfig& config;
  const Monitor& monitor;
  const Stopwatch& clock;
  SolverTrace& trace;
};

struct InnerResult {
  FixedRankMatrix x;
  ErrorTerm e;
  double psi = 0.0;
  double lambda = 0.0;
  double L = 0.0;
  Index iterations = 0;
  SolveStatus status = SolveStatus::MaxIterations;
};

double zero_gradient_tolerance(const ProblemSpec& spec) {
  return 1e-12 * spec.gamma() * spec.data().norm();
}

double initial_lambda(const ProblemSpec& spec, const SolverConfig& config) {
  if (config.lambda0 > 0.0) return config.lambda0;
  return spec.gamma() * spec.data().cwiseAbs().maxCoeff();
}

double initial_L(const ProblemSpec& spec, const SolverConfig& config) {
  return config.L_init > 0.0 ? config.L_init : spec.gamma();
}

ErrorTerm update_error(const ProblemSpec& spec, const FixedRankMatrix& x, double lambda) {
  return shrink(spec.data() - apply_A(spec, x), lambda, spec.gamma(), spec.robust());
}

ConeVector riemannian_gradient(const ProblemSpec& spec, const FixedRankMatrix& x,
                               const ErrorTerm& e, Index r, GradientMode mode,
                               const SolverConfig& config) {
  const auto g = euclid_grad(spec, x, e);
  if (mode == GradientMode::Cone && x.rank() < r) return cone_direction(x, *g, r, config.svd);
  return ConeVector::from_tangent(project_to_tangent(x, *g));
}

TraceRecord make_record(RecordKind kind, Index outer, Index inner, const InnerContext& ctx,
                        const FixedRankMatrix& x, double psi, double L, double lambda,
                        double grad_norm, double xi_norm) {
  TraceRecord rec;
  rec.kind = kind;
  rec.outer = outer;
  rec.inner = inner;
  rec.wall_time = ctx.clock.seconds();
  rec.psi = psi;
  rec.trace_norm = x.trace_norm();
  rec.rank = x.rank();
  rec.L = L;
  rec.lambda = lambda;
  rec.grad_norm = grad_norm;
  rec.xi_norm = xi_norm;
  if (ctx.monitor) rec.test_rmse = ctx.monitor(x);
  return rec;
}

// PRG (E empty) or RPRG iterations on the rank-<=r variety, from (x, e).
InnerResult run_inner(const InnerContext& ctx, FixedRankMatrix x, ErrorTerm e, Index r,
                      double lambda0, double lambda_target, double L_start, GradientMode mode,
                      Index outer) {
  const ProblemSpec& spec = ctx.spec;
  const SolverConfig& cfg = ctx.config;
  const bool robust = spec.has_error_term() && e.size() > 0;
  const double zero_tol = zero_gradient_tolerance(spec);

  auto lambda_at = [&](Index k) {
    if (!robust) return 0.0;
    return std::max(lambda0 * std::pow(cfg.rho, static_cast<double>(k - 1)), lambda_target);
  };

  InnerResult out;
  out.L = L_start;
  double psi_prev = objective(spec, x, e, lambda_at(1)).psi;
  for (Index k = 1; k <= cfg.max_inner; ++k) {
    const double lambda_k = lambda_at(k);
    out.lambda = lambda_k;
    const bool at_target = !robust || lambda_k <= lambda_target;
    const double psi_cur = objective(spec, x, e, lambda_k).psi;

    const ConeVector grad = riemannian_gradient(spec, x, e, r, mode, cfg);
    const double grad_norm = std::sqrt(std::max(inner(grad, grad), 0.0));

    bool stationary = grad_norm <= zero_tol;
    if (!stationary) {
      const PsiEvaluator psi_at = [&](const FixedRankMatrix& y) {
        return objective(spec, y, e, lambda_k).psi;
      };
      try {
        ArmijoResult step = armijo(psi_at, x, psi_cur, grad, out.L / cfg.L_shrink, r, cfg);
        out.L = step.L;
        x = std::move(step.x_next);
      } catch (const LineSearchError&) {
        // No trial L gives sufficient decrease along -grad: X is stationary to
        // the resolution of the line search.
        stationary = true;
      }
    }
    if (stationary && at_target) {
      out.status = SolveStatus::ConvergedInner;
      break;
    }

    if (robust) e = update_error(spec, x, lambda_k);
    const double psi_new = objective(spec, x, e, lambda_k).psi;
    if (robust && psi_new > psi_cur + 1e-12 * std::max(1.0, std::abs(psi_cur)))
      throw InvariantError("rprg: objective increased across an (X, E) update");

    out.iterations = k;
    ctx.trace.records.push_back(make_record(RecordKind::Inner, outer, k, ctx, x, psi_new, out.L,
                                            lambda_k, grad_norm, grad.xi_norm()));

    if (psi_new <= 0.0) {
      out.status = SolveStatus::ConvergedInner;
      break;
    }
    if (at_target && psi_prev - psi_new <= cfg.eps_inner * psi_prev) {
      out.status = SolveStatus::ConvergedInner;
      break;
    }
    psi_prev = psi_new;
  }

  if (!robust) out.lambda = 0.0;
  out.psi = objective(spec, x, e, out.lambda).psi;
  out.x = std::move(x);
  out.e = std::move(e);
  return out;
}

Index default_outer_limit(const ProblemSpec& spec, Index kappa) {
  const Index mn = std::min(spec.x_rows(), spec.x_cols());
  return (mn + kappa - 1) / kappa;
}

}  // namespace

void SolverConfig::validate() const {
  auto fail = [](const char* what) { throw std::invalid_argument(std::string("SolverConfig: ") + what); };
  if (!(beta > 0.0 && beta < 1.0)) fail("beta must lie in (0, 1)");
  if (!(eps_inner >= 0.0)) fail("eps_inner must be non-negative");
  if (!(eps_outer >= 0.0)) fail("eps_outer must be non-negative");
  if (!(rho > 0.0 && rho < 1.0)) fail("rho must lie in (0, 1)");
  if (!(chi > 0.0 && chi < rho)) fail("chi must lie in (0, rho)");
  if (kappa < 1) fail("kappa must be at least 1");
  if (max_inner < 1) fail("max_inner must be at least 1");
  if (max_outer < 0) fail("max_outer must be non-negative");
  if (!(L_grow > 1.0)) fail("L_grow must exceed 1");
  if (!(L_shrink >= 1.0)) fail("L_shrink must be at least 1");
  if (max_backtracks < 1) fail("max_backtracks must be at least 1");
  if (!(nu > 0.0)) fail("nu must be positive");
  if (!(delta > 0.0)) fail("delta must be positive");
  if (!(eta > 0.0 && eta <= 1.0)) fail("eta must lie in (0, 1]");
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::ConvergedInner:
      return "converged_inner";
    case SolveStatus::ConvergedOuter:
      return "converged_outer";
    case SolveStatus::RankDeficientGlobal:
      return "rank_deficient_global";
    case SolveStatus::MaxIterations:
      return "max_iterations";
  }
  return "unknown";
}

const char* to_string(RecordKind kind) {
  switch (kind) {
    case RecordKind::Init:
      return "init";
    case RecordKind::Inner:
      return "inner";
    case RecordKind::Outer:
      return "outer";
  }
  return "unknown";
}

ArmijoResult armijo(const PsiEvaluator& psi_at, const FixedRankMatrix& x, double psi_x,
                    const ConeVector& grad, double L_start, Index r, const SolverConfig& config) {
  const double grad_sq = inner(grad, grad);
  if (!(grad_sq > 0.0)) throw std::invalid_argument("armijo: zero gradient");
  if (!(L_start > 0.0)) throw std::invalid_argument("armijo: L_start must be positive");

  double L = L_start;
  double best_ratio = -std::numeric_limits<double>::infinity();
  for (Index j = 0; j <= config.max_backtracks; ++j, L *= config.L_grow) {
    FixedRankMatrix candidate = prox_step(x, grad, L, r);
    const double psi_new = psi_at(candidate);
    const double required = config.beta * grad_sq / L;
    if (psi_new <= psi_x - required) return {L, std::move(candidate), psi_new, j};
    if (std::isfinite(psi_new)) best_ratio = std::max(best_ratio, (psi_x - psi_new) / required);
  }
  throw LineSearchError("armijo: no sufficient decrease after " +
                            std::to_string(config.max_backtracks) + " backtracking steps",
                        L / config.L_grow, best_ratio);
}

Solution prg_solve(const ProblemSpec& spec, Index r, const SolverConfig& config,
                   const std::optional<FixedRankMatrix>& x0, const Monitor& monitor) {
  config.validate();
  if (r < 1) throw std::invalid_argument("prg_solve: rank budget must be at least 1");
  FixedRankMatrix x = x0 ? *x0 : FixedRankMatrix::zero(spec.x_rows(), spec.x_cols());
  if (x.rows() != spec.x_rows() || x.cols() != spec.x_cols())
    throw std::invalid_argument("prg_solve: initial point has the wrong shape");

  reset_svd_stats();
  const Stopwatch clock;
  Solution sol;
  const ProblemSpec smooth = spec.with_robust(ShrinkKind::None);
  InnerContext ctx{smooth, config, monitor, clock, sol.trace};
  sol.trace.records.push_back(make_record(RecordKind::Init, 0, 0, ctx, x,
                                          objective(smooth, x, ErrorTerm()).psi, 0.0, 0.0, 0.0, 0.0));

  InnerResult res = run_inner(ctx, std::move(x), ErrorTerm(), r, 0.0, 0.0,
                              initial_L(smooth, config) * config.L_shrink, GradientMode::Cone, 0);
  sol.x = std::move(res.x);
  sol.psi = res.psi;
  sol.status = res.status;
  sol.inner_iterations = res.iterations;
  sol.outer_iterations = 1;
  sol.final_budget = r;
  sol.svd = svd_stats();
  return sol;
}

Solution rprg_solve(const ProblemSpec& spec, Index r, const SolverConfig& config,
                    const RprgStart& start, const Monitor& monitor) {
  config.validate();
  if (r < 1) throw std::invalid_argument("rprg_solve: rank budget must be at least 1");
  if (!spec.has_error_term()) throw std::invalid_argument("rprg_solve: problem has no error term");
  if (!(spec.lambda() > 0.0)) throw std::invalid_argument("rprg_solve: lambda must be positive");

  FixedRankMatrix x = start.x0 ? *start.x0 : FixedRankMatrix::zero(spec.x_rows(), spec.x_cols());
  ErrorTerm e = start.e0 ? *start.e0 : spec.zero_error();
  if (x.rows() != spec.x_rows() || x.cols() != spec.x_cols())
    throw std::invalid_argument("rprg_solve: initial X has the wrong shape");
  if (e.rows() != spec.data().rows() || e.cols() != spec.data().cols())
    throw std::invalid_argument("rprg_solve: initial E has the wrong shape");

  reset_svd_stats();
  const Stopwatch clock;
  Solution sol;
  InnerContext ctx{spec, config, monitor, clock, sol.trace};
  const double lambda0 = std::max(initial_lambda(spec, config), spec.lambda());
  sol.trace.records.push_back(make_record(RecordKind::Init, 0, 0, ctx, x,
                                          objective(spec, x, e, lambda0).psi, 0.0, lambda0, 0.0, 0.0));

  InnerResult res = run_inner(ctx, std::move(x), std::move(e), r, lambda0, spec.lambda(),
                              initial_L(spec, config) * config.L_shrink, GradientMode::Cone, 0);
  sol.x = std::move(res.x);
  sol.e = std::move(res.e);
  sol.psi = res.psi;
  sol.lambda = res.lambda;
  sol.status = res.status;
  sol.inner_iterations = res.iterations;
  sol.outer_iterations = 1;
  sol.final_budget = r;
  sol.svd = svd_stats();
  return sol;
}

Solution sp_solve(const ProblemSpec& spec, const SolverConfig& config, const Monitor& monitor) {
  config.validate();
  reset_svd_stats();
  const Stopwatch clock;
  Solution sol;
  InnerContext ctx{spec, config, monitor, clock, sol.trace};

  const bool robust = spec.has_error_term();
  const Index kappa = config.kappa;
  const Index mn = std::min(spec.x_rows(), spec.x_cols());
  const Index max_outer = config.max_outer > 0 ? config.max_outer : default_outer_limit(spec, kappa);
  const double lambda_start = robust ? std::max(initial_lambda(spec, config), spec.lambda()) : 0.0;
  const double lambda_final = robust ? spec.lambda() : 0.0;

  FixedRankMatrix x = FixedRankMatrix::zero(spec.x_rows(), spec.x_cols());
  ErrorTerm e = spec.zero_error();
  double lambda_prev = lambda_start;
  double psi_prev = objective(spec, x, e, lambda_prev).psi;
  sol.trace.records.push_back(
      make_record(RecordKind::Init, 0, 0, ctx, x, psi_prev, 0.0, lambda_prev, 0.0, 0.0));
  sol.status = SolveStatus::MaxIterations;

  if (psi_prev <= 0.0) {
    sol.status = SolveStatus::ConvergedOuter;
  } else {
    // Set when X^{t-1} has rank below its budget at the target lambda. The
    // stop is confirmed by the rank-increasing block computed at the start of
    // the next iteration: the inner solve only certifies stationarity on the
    // fixed-rank manifold, and X is a global minimizer exactly when, in
    // addition, sigma_1(P_U^perp G P_V^perp) <= 1.
    bool deficient = false;
    for (Index t = 1; t <= max_outer; ++t) {
      const Index budget = std::min(t * kappa, mn);
      const double lambda_init_t = lambda_prev;
      const double lambda_t =
          robust ? std::max(lambda_start * std::pow(config.chi, static_cast<double>(t)), lambda_final)
                 : 0.0;

      // Warm start: one proximal step along P_T(G) + Xi_kappa, then one E update.
      const Index grow_to = std::min(x.rank() + kappa, budget);
      const auto g = euclid_grad(spec, x, e);
      const ConeVector grad = cone_direction(x, *g, grow_to, config.svd);
      const double grad_norm = std::sqrt(std::max(inner(grad, grad), 0.0));
      if (deficient && (grad.xi_rank() == 0 || grad.xi_sigma[0] <= 1.0)) {
        sol.status = SolveStatus::RankDeficientGlobal;
        break;
      }
      sol.outer_iterations = t;
      sol.final_budget = budget;
      if (grad_norm <= zero_gradient_tolerance(spec)) {
        sol.status = x.rank() < budget ? SolveStatus::RankDeficientGlobal : SolveStatus::ConvergedOuter;
        break;
      }
      const PsiEvaluator psi_at = [&](const FixedRankMatrix& y) {
        return objective(spec, y, e, lambda_init_t).psi;
      };
      ArmijoResult step;
      try {
        // The cone direction changes completely between outer iterations, so the
        // search restarts from the initial L instead of the last inner one.
        step = armijo(psi_at, x, objective(spec, x, e, lambda_init_t).psi, grad, initial_L(spec, config),
                      budget, config);
      } catch (const LineSearchError&) {
        // No step along the cone gradient decreases Psi sufficiently; keep X^{t-1}.
        // If X^{t-1} is also below the budget and the rank-increasing block
        // cannot pass the threshold, it is a rank-deficient stationary point.
        const bool no_growth = grad.xi_rank() == 0 || grad.xi_sigma[0] <= 1.0;
        const bool at_target = !robust || lambda_init_t <= lambda_final;
        sol.status = at_target && no_growth && x.rank() < budget ? SolveStatus::RankDeficientGlobal
                                                                 : SolveStatus::ConvergedOuter;
        break;
      }
      const double L_t = step.L;
      FixedRankMatrix x0 = std::move(step.x_next);
      ErrorTerm e0 = robust ? update_error(spec, x0, lambda_init_t) : ErrorTerm();

      InnerResult res = run_inner(ctx, std::move(x0), std::move(e0), budget, lambda_init_t, lambda_t,
                                  L_t * config.L_shrink, GradientMode::Tangent, t);
      sol.inner_iterations += res.iterations;
      x = std::move(res.x);
      e = std::move(res.e);
      const double psi_t = objective(spec, x, e, lambda_t).psi;
      sol.trace.records.push_back(make_record(RecordKind::Outer, t, res.iterations, ctx, x, psi_t,
                                              L_t, lambda_t, grad_norm, grad.xi_norm()));

      const bool at_target = !robust || lambda_t <= lambda_final;
      const double decrease = psi_prev - psi_t;
      const double before = psi_prev;
      psi_prev = psi_t;
      lambda_prev = lambda_t;
      deficient = at_target && x.rank() < budget;
      if (psi_t <= 0.0) {
        sol.status = SolveStatus::ConvergedOuter;
        break;
      }
      if (deficient) continue;
      if (at_target && decrease <= config.eps_outer * static_cast<double>(kappa) * before) {
        sol.status = SolveStatus::ConvergedOuter;
        break;
      }
      if (budget == mn && at_target && res.status == SolveStatus::ConvergedInner) {
        // The budget already covers every matrix of this shape.
        sol.status = SolveStatus::ConvergedOuter;
        break;
      }
    }
    if (deficient && sol.status == SolveStatus::MaxIterations) {
      const auto g = euclid_grad(spec, x, e);
      const ConeVector grad = cone_direction(x, *g, std::min(x.rank() + kappa, mn), config.svd);
      if (grad.xi_rank() == 0 || grad.xi_sigma[0] <= 1.0) sol.status = SolveStatus::RankDeficientGlobal;
    }
  }

  sol.x = std::move(x);
  sol.e = std::move(e);
  sol.lambda = robust ? lambda_prev : spec.lambda();
  sol.psi = objective(spec, sol.x, sol.e, robust ? sol.lambda : spec.lambda()).psi;
  sol.svd = svd_stats();
  return sol;
}

Index kappa_from_spectrum(const Vector& sigma, double eta) {
  if (sigma.size() == 0 || !(sigma[0] > 0.0)) return 1;
  Index count = 0;
  for (Index i = 0; i < sigma.size(); ++i)
    if (sigma[i] >= eta * sigma[0]) ++count;
  return std::max<Index>(count, 1);
}

HeuristicParameters heuristics(const ProblemSpec& spec, double nu, double delta, double eta,
                               Index kappa_max, const TruncatedSvdOptions& svd_options) {
  if (!(nu > 0.0) || !(delta > 0.0) || !(eta > 0.0 && eta <= 1.0))
    throw std::invalid_argument("heuristics: nu, delta must be positive and eta in (0, 1]");
  const Measurement& d = spec.data();
  if (d.cwiseAbs().maxCoeff() == 0.0) throw std::invalid_argument("heuristics: all-zero data");
  const auto adj = apply_A_adjoint(spec, d);
  const Index depth = std::clamp<Index>(kappa_max, 1, std::min(adj->rows(), adj->cols()));
  const SvdResult probe = truncated_svd(*adj, depth, svd_options);

  HeuristicParameters out;
  out.sigma = probe.sigma;
  if (!(out.sigma[0] > 0.0)) throw std::invalid_argument("heuristics: A^*(D) vanishes");
  out.gamma = 1.0 / (nu * out.sigma[0]);
  out.data_mean = d.cwiseAbs().mean();
  out.lambda = delta * out.gamma * out.data_mean;
  out.kappa = kappa_from_spectrum(out.sigma, eta);
  return out;
}

OptimalityReport optimality_check(const ProblemSpec& spec, const FixedRankMatrix& x,
                                  const ErrorTerm& e, double tol,
                                  const TruncatedSvdOptions& svd_options) {
  const auto g = euclid_grad(spec, x, e);
  OptimalityReport rep;
  const Index s = x.rank();
  if (s > 0) {
    const DenseMatrix gv = g->apply(x.v());
    const DenseMatrix gtu = g->apply_adjoint(x.u());
    rep.tangent_residual = (x.u().transpose() * gv + DenseMatrix::Identity(s, s)).norm();
    rep.left_residual = (gv + x.u()).norm();
    rep.right_residual = (gtu + x.v()).norm();
  }
  rep.inner_residual = std::max({rep.tangent_residual, rep.left_residual, rep.right_residual});
  if (s < std::min(x.rows(), x.cols())) {
    const ComplementOperator normal(*g, x.u(), x.v());
    const SvdResult top = truncated_svd(normal, 1, svd_options);
    rep.spectral_excess = std::max(0.0, top.sigma[0] - 1.0);
  }
  rep.is_global_certificate = rep.inner_residual <= tol && rep.spectral_excess <= tol;
  return rep;
}

}  // namespace rankprox
