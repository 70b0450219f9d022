#pragma once

// Proximal Riemannian gradient (PRG), its robust alternating variant (RPRG)
// and the rank-incremental subspace pursuit (SP) driver, together with the
// Armijo line search, parameter heuristics and a global optimality check.

#include "rankprox/problems.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rankprox {

struct SolverConfig {
  double beta = 1e-4;        // Armijo constant, in (0, 1)
  double eps_inner = 0.01;   // relative-decrease stop of PRG / RPRG
  double eps_outer = 1e-3;   // relative-decrease-per-kappa stop of SP
  double rho = 0.5;          // RPRG homotopy factor, in (0, 1)
  double chi = 0.25;         // SP homotopy factor, in (0, rho)
  double lambda0 = 0.0;      // initial homotopy level; <= 0 means gamma * max|D|
  Index kappa = 1;           // SP rank increment
  Index max_inner = 500;
  Index max_outer = 0;       // 0 means ceil(min(m, n) / kappa)
  double L_init = 0.0;       // first line-search trial; <= 0 means gamma
  double L_grow = 2.0;       // factor applied on rejection
  double L_shrink = 2.0;     // the next search starts at the last accepted L / L_shrink
  Index max_backtracks = 60;
  double nu = 0.005;         // gamma = 1 / (nu * sigma_1)
  double delta = 0.1;        // lambda = delta * gamma * mean|D|
  double eta = 0.65;         // kappa = #{i : sigma_i >= eta * sigma_1}
  TruncatedSvdOptions svd;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

enum class SolveStatus { ConvergedInner, ConvergedOuter, RankDeficientGlobal, MaxIterations };
const char* to_string(SolveStatus status);

enum class RecordKind { Init, Inner, Outer };
const char* to_string(RecordKind kind);

/// One line of the solver trace. Inner records follow every PRG/RPRG step;
/// an Outer record closes each SP iteration and carries the norm of the
/// rank-increasing block Xi and the L accepted by the warm-start step.
struct TraceRecord {
  RecordKind kind = RecordKind::Inner;
  Index outer = 0;
  Index inner = 0;
  double wall_time = 0.0;
  double psi = 0.0;
  double trace_norm = 0.0;
  Index rank = 0;
  double L = 0.0;
  double lambda = 0.0;
  double grad_norm = 0.0;
  double xi_norm = 0.0;
  std::optional<double> test_rmse;
};

struct SolverTrace {
  std::vector<TraceRecord> records;
};

struct Solution {
  FixedRankMatrix x;
  ErrorTerm e;
  SolveStatus status = SolveStatus::MaxIterations;
  SolverTrace trace;
  SvdStats svd;
  double psi = 0.0;
  double lambda = 0.0;  // regularization level of the final objective
  Index outer_iterations = 0;
  Index inner_iterations = 0;
  Index final_budget = 0;
};

/// Optional per-iterate metric (e.g. test RMSE) recorded in the trace.
using Monitor = std::function<double(const FixedRankMatrix&)>;

using PsiEvaluator = std::function<double(const FixedRankMatrix&)>;

class LineSearchError : public std::runtime_error {
 public:
  LineSearchError(const std::string& what, double last_L, double best_ratio)
      : std::runtime_error(what), last_L_(last_L), best_ratio_(best_ratio) {}
  double last_L() const { return last_L_; }
  /// Largest observed (actual decrease) / (required decrease).
  double best_ratio() const { return best_ratio_; }

 private:
  double last_L_;
  double best_ratio_;
};

struct ArmijoResult {
  double L = 0.0;
  FixedRankMatrix x_next;
  double psi_next = 0.0;
  Index backtracks = 0;
};

/// Backtracking over L = L_start * L_grow^j until
///   Psi(T_L(X)) <= Psi(X) - beta * ||grad||^2 / L,
/// the sufficient-decrease rule along zeta = -grad. Throws
/// std::invalid_argument for a zero gradient and LineSearchError once
/// max_backtracks trials fail.
ArmijoResult armijo(const PsiEvaluator& psi_at, const FixedRankMatrix& x, double psi_x,
                    const ConeVector& grad, double L_start, Index r, const SolverConfig& config);

/// PRG on the rank-<=r variety for the smooth-penalty problem (E fixed at 0).
Solution prg_solve(const ProblemSpec& spec, Index r, const SolverConfig& config,
                   const std::optional<FixedRankMatrix>& x0 = std::nullopt,
                   const Monitor& monitor = {});

struct RprgStart {
  std::optional<FixedRankMatrix> x0;
  std::optional<ErrorTerm> e0;
};

/// Robust PRG: alternates a PRG step on X with the closed-form E update,
/// under the homotopy lambda_k = max(lambda0 * rho^(k-1), lambda).
Solution rprg_solve(const ProblemSpec& spec, Index r, const SolverConfig& config,
                    const RprgStart& start = {}, const Monitor& monitor = {});

/// Subspace pursuit: grows the rank budget by kappa per outer iteration and
/// solves each budget with PRG (no error term) or RPRG.
Solution sp_solve(const ProblemSpec& spec, const SolverConfig& config, const Monitor& monitor = {});

struct HeuristicParameters {
  double gamma = 0.0;
  double lambda = 0.0;
  Index kappa = 1;
  double data_mean = 0.0;  // mean |D| over observed entries
  Vector sigma;            // leading singular values of A^*(D)
};

/// kappa = #{i : sigma_i >= eta * sigma_1}, at least 1.
Index kappa_from_spectrum(const Vector& sigma, double eta);

/// gamma = 1 / (nu sigma_1(A^*(D))), lambda = delta gamma mean|D| and kappa
/// from the spectrum of A^*(D) probed to depth kappa_max. Ignores the gamma
/// and lambda already stored in `spec`.
HeuristicParameters heuristics(const ProblemSpec& spec, double nu, double delta, double eta,
                               Index kappa_max, const TruncatedSvdOptions& svd_options = {});

struct OptimalityReport {
  double tangent_residual = 0.0;  // ||U^T G V + I||_F
  double left_residual = 0.0;     // ||G V + U||_F
  double right_residual = 0.0;    // ||U^T G + V^T||_F
  double inner_residual = 0.0;    // max of the three
  double spectral_excess = 0.0;   // max(0, sigma_1(P_U^perp G P_V^perp) - 1)
  bool is_global_certificate = false;
};

/// Checks -G in the subdifferential of ||X||_* for G = gamma A^*(A(X) + E - D),
/// which certifies X as a global minimizer of Psi(., E).
OptimalityReport optimality_check(const ProblemSpec& spec, const FixedRankMatrix& x,
                                  const ErrorTerm& e, double tol,
                                  const TruncatedSvdOptions& svd_options = {});

}  // namespace rankprox
