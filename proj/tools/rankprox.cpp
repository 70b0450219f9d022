// Command line front end: synthetic benchmarks, completion from triplet files,
// LRR clustering, evaluation of saved factors and trace validation.

#include "rankprox/cluster.hpp"
#include "rankprox/data.hpp"
#include "rankprox/solvers.hpp"
#include "rankprox/trace_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

namespace fs = std::filesystem;
using namespace rankprox;
using json = nlohmann::json;

namespace {

enum class Solver { Prg, Rprg, SpPrg, SpRprg };

const std::map<std::string, Solver> kSolvers = {
    {"prg", Solver::Prg}, {"rprg", Solver::Rprg}, {"sp-prg", Solver::SpPrg}, {"sp-rprg", Solver::SpRprg}};

bool is_robust(Solver s) { return s == Solver::Rprg || s == Solver::SpRprg; }
bool is_sp(Solver s) { return s == Solver::SpPrg || s == Solver::SpRprg; }

std::string solver_name(Solver s) {
  for (const auto& [name, value] : kSolvers)
    if (value == s) return name;
  return "?";
}

// Flags shared by every subcommand. Zero for gamma / lambda / kappa / rank
// means "derive from the data".
struct Options {
  Solver solver = Solver::SpPrg;
  Index kappa = 0;
  Index rank = 0;
  double gamma = 0.0;
  double lambda = 0.0;
  double nu = 0.005;
  double delta = 0.1;
  double eta = 0.65;
  Index kappa_max = 10;
  SolverConfig config;
  std::uint64_t seed = 1;
  std::string dims;
  std::string train;
  std::string test;
  std::string output_dir = "rankprox_out";
};

struct Setup {
  ProblemSpec spec;
  Index kappa;
  Index rank;
  std::optional<HeuristicParameters> hp;
};

// Fills gamma, lambda, kappa and the PRG rank from the heuristics where the
// user left them unset.
Setup configure(const ProblemSpec& base, const Options& o) {
  const ShrinkKind robust = is_robust(o.solver)
                                ? (base.is_completion() ? ShrinkKind::EntrywiseL1 : ShrinkKind::ColumnwiseL21)
                                : ShrinkKind::None;
  ProblemSpec spec = base.with_robust(robust);
  std::optional<HeuristicParameters> hp;
  if (o.gamma <= 0.0 || (robust != ShrinkKind::None && o.lambda <= 0.0) || o.kappa <= 0 ||
      (!is_sp(o.solver) && o.rank <= 0))
    hp = heuristics(spec, o.nu, o.delta, o.eta, o.kappa_max, o.config.svd);
  const double gamma = o.gamma > 0.0 ? o.gamma : hp->gamma;
  // The heuristic lambda scales with gamma, so recompute it for a user gamma.
  const double lambda = robust == ShrinkKind::None ? 0.0
                        : o.lambda > 0.0           ? o.lambda
                                                   : o.delta * gamma * hp->data_mean;
  const Index kappa = o.kappa > 0 ? o.kappa : hp->kappa;
  const Index rank = o.rank > 0 ? o.rank : kappa;
  return {spec.with_parameters(gamma, lambda), kappa, rank, hp};
}

Solution solve(const Setup& s, const Options& o, const Monitor& monitor) {
  SolverConfig cfg = o.config;
  cfg.kappa = s.kappa;
  switch (o.solver) {
    case Solver::Prg:
      return prg_solve(s.spec, s.rank, cfg, std::nullopt, monitor);
    case Solver::Rprg:
      return rprg_solve(s.spec, s.rank, cfg, {}, monitor);
    case Solver::SpPrg:
    case Solver::SpRprg:
      return sp_solve(s.spec, cfg, monitor);
  }
  throw std::logic_error("unknown solver");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json svd_json(const SvdStats& s) {
  return {{"max_truncated_rank", s.max_truncated_rank},
          {"truncated_calls", s.truncated_calls},
          {"max_dense_dim", s.max_dense_dim},
          {"dense_calls", s.dense_calls}};
}

// Writes trace, factors and report; returns the report for further fields.
json finish(const fs::path& out, const Setup& s, const Options& o, const Solution& sol, double wall,
            const std::optional<Observations>& test) {
  fs::create_directories(out);
  const fs::path trace_path = out / "trace.jsonl";
  const fs::path factor_dir = out / "factors";
  write_trace(trace_path.string(), sol.trace);
  write_factors(factor_dir.string(), sol.x);

  json r;
  r["solver"] = solver_name(o.solver);
  r["status"] = to_string(sol.status);
  r["psi"] = sol.psi;
  r["rank"] = sol.x.rank();
  r["wall_time"] = wall;
  r["test_rmse"] = test ? json(rmse(sol.x, *test)) : json(nullptr);
  r["gamma"] = s.spec.gamma();
  r["lambda"] = s.spec.lambda();
  r["kappa"] = s.kappa;
  if (!is_sp(o.solver)) r["rank_budget"] = s.rank;
  r["outer_iterations"] = sol.outer_iterations;
  r["inner_iterations"] = sol.inner_iterations;
  r["svd"] = svd_json(sol.svd);
  r["trace"] = trace_path.string();
  r["factors"] = factor_dir.string();
  r["seed"] = o.seed;
  return r;
}

void write_report(const fs::path& out, const json& report) {
  std::ofstream f(out / "report.json");
  if (!f) throw std::runtime_error("cannot write " + (out / "report.json").string());
  f << report.dump(2) << "\n";
  std::cout << report.dump(2) << "\n";
}

std::optional<Dims> dims_of(const Options& o) {
  if (o.dims.empty()) return std::nullopt;
  return parse_dims(o.dims);
}

Observations load_any(const std::string& path, const std::optional<Dims>& dims) {
  return load_triplets(path, guess_format(path), dims);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rankprox: trace-norm regularized low-rank solvers on the rank-r variety"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key = value file with default flag values")->envname("RANKPROX_CONFIG");

  Options o;
  std::string solver_text = "sp-prg";
  app.add_option("--solver", solver_text, "prg | rprg | sp-prg | sp-rprg")
      ->check(CLI::IsMember({"prg", "rprg", "sp-prg", "sp-rprg"}))
      ->capture_default_str();
  app.add_option("--rank-increment", o.kappa, "SP rank increment kappa (0: from the spectrum)");
  app.add_option("--rank", o.rank, "rank budget for prg / rprg (0: kappa)");
  app.add_option("--gamma", o.gamma, "penalty gamma (0: 1 / (nu sigma_1))");
  app.add_option("--lambda", o.lambda, "error-term weight (0: delta gamma mean|D|)");
  app.add_option("--nu", o.nu)->capture_default_str();
  app.add_option("--delta", o.delta)->capture_default_str();
  app.add_option("--eta", o.eta)->capture_default_str();
  app.add_option("--rho", o.config.rho)->capture_default_str();
  app.add_option("--chi", o.config.chi)->capture_default_str();
  app.add_option("--beta", o.config.beta)->capture_default_str();
  app.add_option("--tol-inner", o.config.eps_inner)->capture_default_str();
  app.add_option("--tol-outer", o.config.eps_outer)->capture_default_str();
  app.add_option("--max-inner", o.config.max_inner)->capture_default_str();
  app.add_option("--max-outer", o.config.max_outer, "0: ceil(min(m, n) / kappa)")->capture_default_str();
  app.add_option("--seed", o.seed)->capture_default_str();
  app.add_option("--dims", o.dims, "matrix shape MxN");
  app.add_option("--train", o.train, "training triplets (.mtx or csv)");
  app.add_option("--test", o.test, "test triplets (.mtx or csv)");
  app.add_option("--output-dir", o.output_dir)->capture_default_str();

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic completion problem, solve and report");
  synth->fallthrough();
  SyntheticParams sp;
  synth->add_option("--m", sp.m)->capture_default_str();
  synth->add_option("--n", sp.n, "0: square")->capture_default_str();
  synth->add_option("--r", sp.r)->capture_default_str();
  synth->add_option("--omega", sp.omega)->capture_default_str();
  synth->add_option("--noise", sp.noise_scale, "Gaussian noise, ||n|| = noise ||d||")->capture_default_str();
  synth->add_option("--outlier-fraction", sp.outlier_fraction)->capture_default_str();
  synth->add_option("--outlier-range", sp.outlier_range)->capture_default_str();
  synth->add_option("--test-fraction", sp.test_fraction)->capture_default_str();

  // complete
  auto* complete = app.add_subcommand("complete", "load triplets, split if needed, solve and report");
  complete->fallthrough();
  double split_fraction = 0.8;
  complete->add_option("--split", split_fraction, "train share when no --test is given")->capture_default_str();

  // lrr
  auto* lrr = app.add_subcommand("lrr", "low-rank representation of a dense matrix and spectral clustering");
  lrr->fallthrough();
  std::string lrr_input, lrr_labels;
  int clusters = 2;
  SubspaceParams subp;
  lrr->add_option("--input", lrr_input, "dense CSV, one data point per column (default: synthetic subspaces)");
  lrr->add_option("--labels", lrr_labels, "ground-truth labels, one per line, for accuracy");
  lrr->add_option("--clusters", clusters)->capture_default_str();
  lrr->add_option("--ambient", subp.ambient)->capture_default_str();
  lrr->add_option("--subspace-dim", subp.dim)->capture_default_str();
  lrr->add_option("--per-subspace", subp.per_subspace)->capture_default_str();
  lrr->add_option("--corrupt-fraction", subp.corrupt_fraction)->capture_default_str();

  // eval
  auto* eval = app.add_subcommand("eval", "RMSE of saved factors on a test set");
  eval->fallthrough();
  std::string factor_dir;
  eval->add_option("--factors", factor_dir, "directory with U.csv, sigma.csv, V.csv")->required();

  // validate-trace
  auto* vt = app.add_subcommand("validate-trace", "check the descent invariants recorded in a trace");
  std::string trace_path;
  double vt_beta = SolverConfig{}.beta;
  vt->add_option("trace", trace_path, "trace.jsonl")->required();
  vt->add_option("--beta", vt_beta, "Armijo constant the run used")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    o.solver = kSolvers.at(solver_text);
    o.config.validate();
    const fs::path out = o.output_dir;

    if (*synth) {
      sp.seed = o.seed;
      const SyntheticData data = gen_synthetic(sp);
      fs::create_directories(out);
      write_triplets((out / "train.csv").string(), data.dataset.train, TripletFormat::Csv);
      write_triplets((out / "test.csv").string(), *data.dataset.test, TripletFormat::Csv);
      write_factors((out / "truth").string(), data.truth);
      const Setup s = configure(ProblemSpec::completion(data.dataset.train, ShrinkKind::None, 1.0, 0.0), o);
      const Observations& test = *data.dataset.test;
      const auto t0 = std::chrono::steady_clock::now();
      const Solution sol = solve(s, o, [&](const FixedRankMatrix& x) { return rmse(x, test); });
      json r = finish(out, s, o, sol, seconds_since(t0), test);
      r["noise_level"] = data.noise_level;
      r["train_samples"] = data.dataset.train.size();
      r["outliers"] = data.outliers.size();
      write_report(out, r);
      return 0;
    }

    if (*complete) {
      if (o.train.empty()) throw std::invalid_argument("complete: --train is required");
      const auto dims = dims_of(o);
      Observations train = load_any(o.train, dims);
      std::optional<Observations> test;
      if (!o.test.empty()) {
        test = load_any(o.test, Dims{train.rows(), train.cols()});
      } else {
        Dataset ds = split(train, split_fraction, o.seed);
        train = ds.train;
        test = ds.test;
      }
      const Setup s = configure(ProblemSpec::completion(train, ShrinkKind::None, 1.0, 0.0), o);
      const auto t0 = std::chrono::steady_clock::now();
      const Solution sol = solve(s, o, [&](const FixedRankMatrix& x) { return rmse(x, *test); });
      json r = finish(out, s, o, sol, seconds_since(t0), test);
      r["train_samples"] = train.size();
      r["test_samples"] = test->size();
      write_report(out, r);
      return 0;
    }

    if (*lrr) {
      DenseMatrix d;
      std::optional<std::vector<int>> truth;
      if (!lrr_input.empty()) {
        d = read_dense_csv(lrr_input);
      } else {
        subp.seed = o.seed;
        subp.subspaces = clusters;
        SubspaceData data = gen_subspaces(subp);
        d = std::move(data.d);
        truth = std::move(data.labels);
      }
      if (!lrr_labels.empty()) {
        std::ifstream f(lrr_labels);
        if (!f) throw std::runtime_error("cannot open " + lrr_labels);
        std::vector<int> labels;
        for (int v; f >> v;) labels.push_back(v);
        truth = std::move(labels);
      }
      const Setup s = configure(ProblemSpec::lrr(d, ShrinkKind::None, 1.0, 0.0), o);
      const auto t0 = std::chrono::steady_clock::now();
      const Solution sol = solve(s, o, {});
      ClusterOptions copts;
      copts.seed = o.seed;
      const ClusterResult c = lrr_affinity_cluster(sol.x, clusters, copts, truth);
      const double wall = seconds_since(t0);
      json r = finish(out, s, o, sol, wall, std::nullopt);
      {
        std::ofstream f(out / "labels.csv");
        for (int l : c.labels) f << l << "\n";
      }
      r["clusters"] = clusters;
      r["accuracy"] = c.accuracy ? json(*c.accuracy) : json(nullptr);
      r["labels"] = (out / "labels.csv").string();
      write_report(out, r);
      return 0;
    }

    if (*eval) {
      if (o.test.empty()) throw std::invalid_argument("eval: --test is required");
      const FixedRankMatrix x = read_factors(factor_dir);
      const Observations test = load_any(o.test, Dims{x.rows(), x.cols()});
      json r;
      r["test_rmse"] = rmse(x, test);
      r["rank"] = x.rank();
      r["test_samples"] = test.size();
      std::cout << r.dump(2) << "\n";
      return 0;
    }

    if (*vt) {
      const TraceCheck check = validate_trace(read_trace(trace_path), vt_beta);
      json r;
      r["ok"] = check.ok;
      r["inner_checked"] = check.inner_checked;
      r["outer_checked"] = check.outer_checked;
      r["violations"] = check.violations;
      std::cout << r.dump(2) << "\n";
      return check.ok ? 0 : 3;
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
